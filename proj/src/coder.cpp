#include "dialogic/coder.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <thread>

#include "dialogic/error.hpp"
#include "embedded_data.hpp"

namespace dialogic::coder {
namespace {

using Clock = std::chrono::steady_clock;

// Lower-cased words separated by single spaces, padded with a space on each
// side so that phrase lookup on word boundaries is a substring search.
std::string normalize(std::string_view text) {
  std::string out = " ";
  bool space = true;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || ch == '\'' || c >= 0x80) {
      out.push_back(static_cast<char>(std::tolower(c)));
      space = false;
    } else if (!space) {
      out.push_back(' ');
      space = true;
    }
  }
  if (!space) out.push_back(' ');
  return out;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(std::string(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

ContextTurn context_of(const Turn& t) { return ContextTurn{t.speaker.role, t.text, t.code}; }

CodingContext make_context(const std::vector<Turn>& turns, std::size_t i, std::size_t window) {
  CodingContext ctx;
  std::size_t from = i > window ? i - window : 0;
  for (std::size_t k = from; k < i; ++k) ctx.window.push_back(context_of(turns[k]));
  ctx.target = turns[i];
  return ctx;
}

struct Attempt {
  std::optional<CodedResult> result;
  std::string error;
  bool transport_failure = false;
  std::size_t retries = 0;
  std::chrono::nanoseconds latency{0};
};

Attempt code_with_retries(Backend& backend, const CodingContext& ctx, const BackendConfig& config) {
  Attempt a;
  auto start = Clock::now();
  for (std::size_t attempt = 0; attempt <= config.max_retries; ++attempt) {
    try {
      a.result = backend.code(ctx);
      a.error.clear();
      a.transport_failure = false;
      break;
    } catch (const Error& e) {
      a.error = e.what();
      a.transport_failure = e.kind() == ErrorKind::BackendUnavailable;
      if (attempt < config.max_retries) {
        ++a.retries;
        if (config.retry_backoff.count() > 0) std::this_thread::sleep_for(config.retry_backoff * (attempt + 1));
      }
    }
  }
  a.latency = Clock::now() - start;
  return a;
}

}  // namespace

void check_config(const BackendConfig& config) {
  if (config.max_in_flight == 0) throw Error(ErrorKind::InvalidArgument, "max_in_flight must be positive");
  if (config.kind == BackendKind::RemoteLLM) {
    if (config.endpoint.empty()) throw Error(ErrorKind::InvalidArgument, "the LLM backend needs an endpoint");
    if (config.model.empty()) throw Error(ErrorKind::InvalidArgument, "the LLM backend needs a model name");
  }
}

std::string_view default_scheme_document() { return embedded::kCodingScheme; }
std::string_view default_cue_table() { return embedded::kKeywordCues; }

std::string build_prompt(std::string_view scheme_doc, const CodingContext& ctx) {
  std::string out;
  out += "You code turns of classroom dialogue with the scheme below.\n\n";
  out += scheme_doc;
  if (!scheme_doc.empty() && scheme_doc.back() != '\n') out += '\n';
  out += "\nPreceding turns, oldest first:\n";
  if (ctx.window.empty()) out += "(none)\n";
  for (std::size_t i = 0; i < ctx.window.size(); ++i) {
    const ContextTurn& t = ctx.window[i];
    out += std::to_string(i + 1) + ". [" + std::string(to_string(t.role)) + "] [" +
           (t.code ? std::string(to_string(*t.code)) : std::string("uncoded")) + "] " + t.text + "\n";
  }
  out += "\nTurn to code:\n[" + std::string(to_string(ctx.target.speaker.role)) + "] " + ctx.target.text + "\n\n";
  out += "Reply with exactly one code label from: ";
  for (std::size_t i = 0; i < kAllCodes.size(); ++i) {
    if (i) out += ", ";
    out += to_string(kAllCodes[i]);
  }
  out += ".\n";
  return out;
}

std::optional<Code> try_parse_reply(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !std::isalnum(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && std::isalnum(static_cast<unsigned char>(text[i]))) ++i;
    std::string_view token = text.substr(start, i - start);
    if (token.empty()) continue;
    auto code = try_parse_code(token);
    if (!code) continue;
    if (token.size() == 1 && !std::isupper(static_cast<unsigned char>(token[0]))) continue;
    return code;
  }
  return std::nullopt;
}

Code parse_reply(std::string_view text) {
  if (auto c = try_parse_reply(text)) return *c;
  Error e(ErrorKind::NoCodeFound, "no code label found in reply: " + std::string(text.substr(0, 200)));
  e.with_label(std::string(text));
  throw e;
}

CueTable CueTable::parse(std::string_view text) {
  CueTable table;
  std::size_t line_no = 0;
  bool saw_default = false;
  for (const std::string& raw : split(text, '\n')) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() == 2 && trim(cols[0]) == "version") {
      table.version_ = trim(cols[1]);
      continue;
    }
    if (cols.size() != 3) throw Error::syntax(line_no, "cue rows need three tab-separated columns");
    if (saw_default) throw Error::syntax(line_no, "rows after the default row are unreachable");
    Row row;
    auto code = try_parse_code(trim(cols[0]));
    if (!code) throw Error::unknown_code(trim(cols[0]), line_no);
    row.code = *code;
    std::string ctx = trim(cols[1]);
    if (ctx == "empty") {
      row.context = Context::Empty;
    } else if (ctx == "any") {
      row.context = Context::Any;
    } else if (ctx == "question") {
      row.context = Context::Question;
    } else if (ctx == "after_invitation") {
      row.context = Context::AfterInvitation;
    } else if (ctx == "default") {
      row.context = Context::Default;
      saw_default = true;
    } else {
      throw Error::syntax(line_no, "unknown context '" + ctx + "'");
    }
    std::string cues = trim(cols[2]);
    if (cues != "-") {
      for (const std::string& alt : split(cues, ',')) {
        std::vector<std::string> all;
        for (const std::string& part : split(alt, '+')) {
          std::string phrase = normalize(trim(part));
          if (phrase.size() <= 2) throw Error::syntax(line_no, "empty cue phrase");
          all.push_back(std::move(phrase));
        }
        row.cues.push_back(std::move(all));
      }
    }
    table.rows_.push_back(std::move(row));
  }
  if (!saw_default) throw Error(ErrorKind::Syntax, "cue table needs a final default row");
  return table;
}

Code CueTable::apply(const CodingContext& ctx) const {
  const std::string& raw = ctx.target.text;
  const std::string text = normalize(raw);
  const bool empty = trim(raw).empty();
  const bool question = raw.find('?') != std::string::npos;
  const bool after_invitation = !ctx.window.empty() && ctx.window.back().code && is_invitation(*ctx.window.back().code);

  for (const Row& row : rows_) {
    bool context_ok = false;
    switch (row.context) {
      case Context::Empty: context_ok = empty; break;
      case Context::Any: context_ok = !empty; break;
      case Context::Question: context_ok = question; break;
      case Context::AfterInvitation: context_ok = after_invitation && !empty; break;
      case Context::Default: return row.code;
    }
    if (!context_ok) continue;
    if (row.cues.empty()) return row.code;
    for (const auto& conjunction : row.cues) {
      bool all = std::all_of(conjunction.begin(), conjunction.end(),
                             [&](const std::string& phrase) { return text.find(phrase) != std::string::npos; });
      if (all) return row.code;
    }
  }
  return Code::O;
}

CodedResult GoldBackend::code(const CodingContext& ctx) {
  if (!ctx.target.code) throw Error::uncoded({ctx.target.index});
  return CodedResult{*ctx.target.code, 1.0, std::nullopt, {}};
}

CodedResult KeywordStubBackend::code(const CodingContext& ctx) {
  auto start = Clock::now();
  CodedResult r;
  r.code = table_.apply(ctx);
  r.latency = Clock::now() - start;
  return r;
}

std::unique_ptr<Backend> make_backend(const BackendConfig& config) {
  check_config(config);
  switch (config.kind) {
    case BackendKind::Gold: return std::make_unique<GoldBackend>();
    case BackendKind::KeywordStub:
      return std::make_unique<KeywordStubBackend>(
          CueTable::parse(config.cue_table.empty() ? default_cue_table() : std::string_view(config.cue_table)));
    case BackendKind::RemoteLLM: return std::make_unique<RemoteLlmBackend>(config);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown backend");
}

CodingOutcome code_transcript(const Transcript& transcript, Backend& backend, const BackendConfig& config,
                              CodeOptions options) {
  check_config(config);
  CodingOutcome out;
  out.transcript = transcript;
  auto& turns = out.transcript.turns;

  if (dynamic_cast<GoldBackend*>(&backend) != nullptr) {
    std::vector<std::size_t> missing;
    for (const Turn& t : turns) {
      if (!t.code) missing.push_back(t.index);
    }
    if (!missing.empty()) throw Error::uncoded(std::move(missing));
  }

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    if (options.recode || !turns[i].code) todo.push_back(i);
  }

  const auto wall_start = Clock::now();
  std::vector<Attempt> attempts(todo.size());

  if (!backend.concurrent()) {
    for (std::size_t k = 0; k < todo.size(); ++k) {
      std::size_t i = todo[k];
      attempts[k] = code_with_retries(backend, make_context(turns, i, options.window), config);
      turns[i].code = attempts[k].result ? std::optional<Code>(attempts[k].result->code) : std::nullopt;
    }
  } else {
    // Prompts only see codes that were present before the run, so replies do
    // not depend on scheduling.
    std::vector<Turn> frozen = turns;
    for (std::size_t i : todo) frozen[i].code.reset();
    std::vector<CodingContext> contexts;
    contexts.reserve(todo.size());
    for (std::size_t i : todo) {
      contexts.push_back(make_context(frozen, i, options.window));
      contexts.back().target.code = turns[i].code;
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t k = next.fetch_add(1); k < todo.size(); k = next.fetch_add(1)) {
        attempts[k] = code_with_retries(backend, contexts[k], config);
      }
    };
    const std::size_t threads = std::min(config.max_in_flight, todo.size());
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    for (std::size_t k = 0; k < todo.size(); ++k) {
      turns[todo[k]].code = attempts[k].result ? std::optional<Code>(attempts[k].result->code) : std::nullopt;
    }
  }

  out.timing.wall_time = Clock::now() - wall_start;
  out.timing.items = todo.size();
  std::size_t successes = 0;
  bool all_transport = true;
  for (std::size_t k = 0; k < todo.size(); ++k) {
    const Attempt& a = attempts[k];
    out.timing.per_item.push_back(a.latency);
    out.timing.retries += a.retries;
    if (a.result) {
      ++successes;
    } else {
      out.failed.push_back(turns[todo[k]].index);
      out.failures[turns[todo[k]].index] = a.error;
      all_transport = all_transport && a.transport_failure;
    }
  }
  if (!todo.empty() && successes == 0 && all_transport) {
    Error e(ErrorKind::BackendUnavailable, "backend unavailable: " + attempts.front().error);
    e.with_indices(out.failed);
    throw e;
  }
  return out;
}

CodingOutcome code_transcript(const Transcript& transcript, const BackendConfig& config, CodeOptions options) {
  auto backend = make_backend(config);
  return code_transcript(transcript, *backend, config, options);
}

}  // namespace dialogic::coder
