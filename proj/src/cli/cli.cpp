#include "dialogic/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "dialogic/coder.hpp"
#include "dialogic/engine.hpp"
#include "dialogic/ingest.hpp"
#include "dialogic/metrics.hpp"
#include "dialogic/rulebase.hpp"

namespace dialogic::cli {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

constexpr std::string_view kToolVersion = "dialogic 1.0.0";
constexpr const char* kApiKeyEnv = "DIALOGIC_API_KEY";

// Options shared by the subcommands; unused fields keep their defaults.
struct RunConfig {
  std::string command;
  std::vector<std::string> inputs;
  std::string out_dir = "out";
  std::string rules_path;  // empty -> built-in
  std::string backend = "stub";
  std::string endpoint;
  std::string model;
  std::size_t window = 5;
  std::size_t max_in_flight = 4;
  std::size_t max_retries = 2;
  long long timeout_ms = 30000;
  long long retry_backoff_ms = 200;
  std::string scheme_path;
  std::string cues_path;
  std::string policy = "topics";
  std::string mode = "multi";
  std::uint64_t seed = 0;
  bool recode = false;
  bool all_matches = false;
  std::vector<std::string> gold;
  std::vector<std::string> pred;
  std::string timing_path;
  std::optional<double> baseline_minutes;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Stages outputs in memory and writes them only when the command succeeds.
class OutputDir {
 public:
  explicit OutputDir(std::string dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, std::string content) {
    if (name.find('/') != std::string::npos || name.find('\\') != std::string::npos || name == ".." || name == ".") {
      throw Error(ErrorKind::InvalidArgument, "output name '" + name + "' would escape the output directory");
    }
    files_[name] = std::move(content);
  }

  void commit() const {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create output directory '" + dir_ + "': " + ec.message());
    for (const auto& [name, content] : files_) {
      fs::path target = fs::path(dir_) / name;
      fs::path tmp = fs::path(dir_) / ("." + name + ".tmp");
      {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw Error(ErrorKind::Io, "cannot write '" + tmp.string() + "'");
        os << content;
        if (!os.flush()) throw Error(ErrorKind::Io, "write failed for '" + tmp.string() + "'");
      }
      fs::rename(tmp, target, ec);
      if (ec) throw Error(ErrorKind::Io, "cannot rename into '" + target.string() + "': " + ec.message());
    }
  }

 private:
  std::string dir_;
  std::map<std::string, std::string> files_;
};

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

RuleBase load_rules(const RunConfig& cfg) {
  if (cfg.rules_path.empty()) return builtin_rules();
  return parse_rulebase(read_file(cfg.rules_path));
}

engine::SegmentPolicy policy_of(const RunConfig& cfg) {
  return cfg.policy == "single" ? engine::SegmentPolicy::SingleEpisode : engine::SegmentPolicy::ExplicitTopics;
}

engine::LabelMode mode_of(const RunConfig& cfg) {
  return cfg.mode == "single" ? engine::LabelMode::SingleLabel : engine::LabelMode::MultiLabel;
}

// Missing topics are left to segmentation, which reports them after uncoded turns.
Transcript load_transcript(const std::string& path, std::ostream& err) {
  Transcript t = ingest::parse_transcript(read_file(path), ingest::format_for_path(path), stem_of(path));
  auto report = ingest::validate(t, {false});
  for (const auto& w : report.warnings) {
    err << path << ": warning" << (w.turn ? " turn " + std::to_string(*w.turn) : std::string()) << ": " << w.message
        << "\n";
  }
  if (!report.ok()) throw Error(ErrorKind::Syntax, path + ":\n" + ingest::format_report(report));
  return t;
}

ordered_json config_json(const RunConfig& cfg, const std::optional<RuleBase>& rb) {
  ordered_json j;
  j["tool"] = kToolVersion;
  j["command"] = cfg.command;
  j["inputs"] = cfg.inputs;
  j["out"] = cfg.out_dir;
  j["seed"] = cfg.seed;
  if (cfg.command == "code") {
    ordered_json b;
    b["kind"] = cfg.backend;
    b["endpoint"] = cfg.endpoint;
    b["model"] = cfg.model;
    b["max_retries"] = cfg.max_retries;
    b["timeout_ms"] = cfg.timeout_ms;
    b["retry_backoff_ms"] = cfg.retry_backoff_ms;
    b["max_in_flight"] = cfg.max_in_flight;
    b["scheme"] = cfg.scheme_path.empty() ? "builtin" : cfg.scheme_path;
    b["cues"] = cfg.cues_path.empty() ? "builtin" : cfg.cues_path;
    b["api_key_env"] = kApiKeyEnv;
    j["backend"] = std::move(b);
    j["window"] = cfg.window;
    j["recode"] = cfg.recode;
  }
  if (rb) {
    j["rules"] = cfg.rules_path.empty() ? "builtin" : cfg.rules_path;
    j["rulebase_version"] = rb->version();
    j["policy"] = cfg.policy;
    j["mode"] = cfg.mode;
    j["all_matches"] = cfg.all_matches;
  }
  if (cfg.command == "evaluate") {
    j["gold"] = cfg.gold;
    j["pred"] = cfg.pred;
  }
  if (!cfg.timing_path.empty()) j["timing"] = cfg.timing_path;
  if (cfg.baseline_minutes) j["baseline_minutes"] = *cfg.baseline_minutes;
  return j;
}

ordered_json evidence_json(const Evidence& evidence) {
  ordered_json j = ordered_json::object();
  for (const auto& [leaf, indices] : evidence) j[leaf] = indices;
  return j;
}

ordered_json profile_json(const engine::SequenceProfile& profile) {
  ordered_json counts = ordered_json::object();
  for (const auto& [id, n] : profile.counts) counts[id] = n;
  ordered_json totals = ordered_json::object();
  for (Category c : kAllCategories) totals[std::string(to_string(c))] = profile.totals.at(c);
  return ordered_json{{"counts", counts}, {"totals", totals}};
}

// Episode ids are topic ids; a resumed topic gets "#2", "#3", ... appended.
std::vector<std::string> episode_ids(const std::vector<Episode>& episodes) {
  std::map<std::string, std::size_t> seen;
  std::vector<std::string> ids;
  for (const Episode& ep : episodes) {
    std::size_t n = ++seen[ep.topic];
    ids.push_back(n == 1 ? ep.topic : ep.topic + "#" + std::to_string(n));
  }
  return ids;
}

ordered_json classify_document(const Transcript& t, const RuleBase& rb, const RunConfig& cfg, bool with_assignments) {
  auto episodes = engine::segment(t, policy_of(cfg));
  auto ids = episode_ids(episodes);
  engine::MatchOptions opts{cfg.all_matches};

  ordered_json doc;
  doc["transcript"] = t.id;
  doc["mode"] = cfg.mode;
  doc["policy"] = cfg.policy;
  doc["rulebase_version"] = rb.version();
  ordered_json eps = ordered_json::array();
  ordered_json matches = ordered_json::array();
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    const Episode& ep = episodes[e];
    ordered_json ej;
    ej["id"] = ids[e];
    ej["topic"] = ep.topic;
    ej["first_turn"] = ep.turns.front().index;
    ej["last_turn"] = ep.turns.back().index;
    ej["n_turns"] = ep.turns.size();
    if (with_assignments) {
      ordered_json as = ordered_json::array();
      for (const CategoryAssignment& a : engine::classify(ep, rb, mode_of(cfg))) {
        as.push_back({{"category", to_string(a.category)}, {"rule_id", a.rule_id}, {"evidence", evidence_json(a.evidence)}});
      }
      ej["assignments"] = std::move(as);
    }
    eps.push_back(std::move(ej));
    for (const SequencePattern& p : rb.sequences()) {
      for (const auto& m : engine::match_pattern(ep, p, opts)) {
        matches.push_back({{"pattern", m.pattern_id}, {"episode", ids[e]}, {"turns", m.turn_indices}});
      }
    }
  }
  doc["episodes"] = std::move(eps);
  doc["sequence_profile"] = profile_json(engine::sequence_profile(episodes, rb, opts));
  doc["sequence_matches"] = std::move(matches);
  return doc;
}

int cmd_code(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  coder::BackendConfig bc;
  if (cfg.backend == "gold") bc.kind = coder::BackendKind::Gold;
  else if (cfg.backend == "stub") bc.kind = coder::BackendKind::KeywordStub;
  else bc.kind = coder::BackendKind::RemoteLLM;
  bc.endpoint = cfg.endpoint;
  bc.model = cfg.model;
  bc.max_retries = cfg.max_retries;
  bc.timeout = std::chrono::milliseconds(cfg.timeout_ms);
  bc.retry_backoff = std::chrono::milliseconds(cfg.retry_backoff_ms);
  bc.max_in_flight = cfg.max_in_flight;
  if (const char* key = std::getenv(kApiKeyEnv)) bc.api_key = key;
  if (!cfg.scheme_path.empty()) bc.scheme_document = read_file(cfg.scheme_path);
  if (!cfg.cues_path.empty()) bc.cue_table = read_file(cfg.cues_path);
  auto backend = coder::make_backend(bc);

  OutputDir output(cfg.out_dir);
  ordered_json timing;
  ordered_json files = ordered_json::array();
  std::chrono::nanoseconds wall{0};
  std::size_t items = 0;
  std::size_t retries = 0;
  std::vector<double> per_item_ms;
  bool partial = false;

  for (const std::string& path : cfg.inputs) {
    Transcript t = load_transcript(path, err);
    auto outcome = coder::code_transcript(t, *backend, bc, {cfg.window, cfg.recode});
    auto format = ingest::format_for_path(path);
    output.add(stem_of(path) + ".coded" + (format == ingest::Format::Table ? ".csv" : ".jsonl"),
               ingest::write_transcript(outcome.transcript, format));

    ordered_json f;
    f["input"] = path;
    f["turns"] = t.turns.size();
    f["items"] = outcome.timing.items;
    f["wall_seconds"] = std::chrono::duration<double>(outcome.timing.wall_time).count();
    f["retries"] = outcome.timing.retries;
    f["failed"] = outcome.failed;
    ordered_json lat = ordered_json::array();
    for (auto d : outcome.timing.per_item) {
      double ms = std::chrono::duration<double, std::milli>(d).count();
      lat.push_back(ms);
      per_item_ms.push_back(ms);
    }
    f["per_item_ms"] = std::move(lat);
    files.push_back(std::move(f));
    wall += outcome.timing.wall_time;
    items += outcome.timing.items;
    retries += outcome.timing.retries;
    if (!outcome.failed.empty()) {
      partial = true;
      err << path << ": " << outcome.failed.size() << " turn(s) left uncoded:";
      for (std::size_t i : outcome.failed) err << " " << i;
      err << "\n";
      for (const auto& [i, msg] : outcome.failures) err << "  turn " << i << ": " << msg << "\n";
    }
  }
  timing["wall_seconds"] = std::chrono::duration<double>(wall).count();
  timing["items"] = items;
  timing["retries"] = retries;
  timing["per_item_ms"] = per_item_ms;
  timing["files"] = std::move(files);
  output.add("timing.json", timing.dump(2) + "\n");
  output.add("config.json", config_json(cfg, std::nullopt).dump(2) + "\n");
  output.commit();
  out << fmt::format("coded {} turn(s) across {} file(s) into {}\n", items, cfg.inputs.size(), cfg.out_dir);
  return partial ? kPartialCoding : kOk;
}

int cmd_classify(const RunConfig& cfg, bool with_assignments, std::ostream& out, std::ostream& err) {
  RuleBase rb = load_rules(cfg);
  OutputDir output(cfg.out_dir);
  std::size_t episodes = 0;
  for (const std::string& path : cfg.inputs) {
    Transcript t = load_transcript(path, err);
    ordered_json doc = classify_document(t, rb, cfg, with_assignments);
    episodes += doc["episodes"].size();
    output.add(stem_of(path) + (with_assignments ? ".classified.json" : ".sequences.json"), doc.dump(2) + "\n");
  }
  output.add("config.json", config_json(cfg, rb).dump(2) + "\n");
  output.commit();
  out << fmt::format("{} {} episode(s) from {} file(s) into {}\n", with_assignments ? "classified" : "profiled",
                     episodes, cfg.inputs.size(), cfg.out_dir);
  return kOk;
}

struct ClassifiedFile {
  std::string transcript;
  std::string mode;
  std::vector<metrics::EpisodeLabels> episodes;
};

ClassifiedFile load_classified(const std::string& path) {
  ClassifiedFile f;
  try {
    json doc = json::parse(read_file(path));
    f.transcript = doc.at("transcript").get<std::string>();
    f.mode = doc.at("mode").get<std::string>();
    for (const auto& ep : doc.at("episodes")) {
      metrics::EpisodeLabels labels;
      labels.episode = f.transcript + "/" + ep.at("id").get<std::string>();
      for (const auto& a : ep.at("assignments")) {
        std::string name = a.at("category").get<std::string>();
        auto c = try_parse_category(name);
        if (!c) throw Error(ErrorKind::UnknownCategory, path + ": unknown category '" + name + "'");
        labels.categories.push_back(*c);
      }
      f.episodes.push_back(std::move(labels));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Syntax, path + ": not a classify output: " + e.what());
  }
  return f;
}

std::optional<metrics::TimingSummary> load_timing(const RunConfig& cfg) {
  if (cfg.timing_path.empty()) return std::nullopt;
  metrics::TimingStats stats;
  try {
    json doc = json::parse(read_file(cfg.timing_path));
    stats.wall_time = std::chrono::duration_cast<std::chrono::nanoseconds>(
        std::chrono::duration<double>(doc.at("wall_seconds").get<double>()));
    stats.items = doc.at("items").get<std::size_t>();
    stats.retries = doc.value("retries", std::size_t{0});
    for (double ms : doc.value("per_item_ms", std::vector<double>{})) {
      stats.per_item.push_back(std::chrono::duration_cast<std::chrono::nanoseconds>(
          std::chrono::duration<double, std::milli>(ms)));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Syntax, cfg.timing_path + ": not a timing file: " + e.what());
  }
  std::optional<std::chrono::duration<double>> baseline;
  if (cfg.baseline_minutes) baseline = std::chrono::duration<double>(*cfg.baseline_minutes * 60.0);
  return metrics::timing_summary(stats, baseline);
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
  std::vector<metrics::EpisodeLabels> gold;
  std::vector<metrics::EpisodeLabels> pred;
  std::set<std::string> modes;
  for (const auto& p : cfg.gold) {
    auto f = load_classified(p);
    modes.insert(f.mode);
    gold.insert(gold.end(), f.episodes.begin(), f.episodes.end());
  }
  for (const auto& p : cfg.pred) {
    auto f = load_classified(p);
    modes.insert(f.mode);
    pred.insert(pred.end(), f.episodes.begin(), f.episodes.end());
  }
  if (modes.size() > 1) throw Error(ErrorKind::InvalidArgument, "gold and predicted files use different label modes");
  const bool single = !modes.empty() && *modes.begin() == "single";

  auto report = metrics::agreement(gold, pred, single);
  auto timing = load_timing(cfg);
  std::string text = metrics::format_agreement_text(report);
  if (timing) text += "\n" + metrics::format_timing_text(*timing);

  OutputDir output(cfg.out_dir);
  output.add("report.txt", text);
  output.add("report.json", metrics::format_agreement_json(report, timing));
  output.add("config.json", config_json(cfg, std::nullopt).dump(2) + "\n");
  output.commit();
  out << text;
  return kOk;
}

int cmd_report(const RunConfig& cfg, std::ostream& out) {
  std::map<Category, std::size_t> episodes_per_category;
  std::map<std::string, std::size_t> pattern_counts;
  std::map<std::string, std::size_t> category_sequence_totals;
  std::size_t episodes = 0;
  std::size_t unlabelled = 0;
  for (const auto& path : cfg.inputs) {
    json doc;
    try {
      doc = json::parse(read_file(path));
      for (const auto& ep : doc.at("episodes")) {
        ++episodes;
        std::set<Category> cats;
        for (const auto& a : ep.at("assignments")) {
          auto c = try_parse_category(a.at("category").get<std::string>());
          if (!c) throw Error(ErrorKind::UnknownCategory, path + ": unknown category");
          cats.insert(*c);
        }
        if (cats.empty()) ++unlabelled;
        for (Category c : cats) ++episodes_per_category[c];
      }
      for (const auto& [id, n] : doc.at("sequence_profile").at("counts").items()) pattern_counts[id] += n.get<std::size_t>();
      for (const auto& [c, n] : doc.at("sequence_profile").at("totals").items()) {
        category_sequence_totals[c] += n.get<std::size_t>();
      }
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Syntax, path + ": not a classify output: " + e.what());
    }
  }

  std::string text = fmt::format("Summary of {} episode(s) in {} file(s)\n\n", episodes, cfg.inputs.size());
  text += fmt::format("{:<42}{:>10}{:>12}\n", "Dialogue category", "Episodes", "Sequences");
  ordered_json j;
  j["files"] = cfg.inputs;
  j["episodes"] = episodes;
  j["unlabelled"] = unlabelled;
  ordered_json cats = ordered_json::array();
  for (Category c : kAllCategories) {
    std::size_t n = episodes_per_category[c];
    std::size_t s = category_sequence_totals[std::string(to_string(c))];
    text += fmt::format("{:<42}{:>10}{:>12}\n", display_name(c), n, s);
    cats.push_back({{"category", to_string(c)}, {"name", display_name(c)}, {"episodes", n}, {"sequences", s}});
  }
  text += fmt::format("{:<42}{:>10}\n\nSequence counts\n", "(no category)", unlabelled);
  ordered_json counts = ordered_json::object();
  for (const auto& [id, n] : pattern_counts) {
    text += fmt::format("  {:<36}{:>6}\n", id, n);
    counts[id] = n;
  }
  j["per_category"] = std::move(cats);
  j["sequence_counts"] = std::move(counts);
  if (auto timing = load_timing(cfg)) {
    text += "\n" + metrics::format_timing_text(*timing);
    ordered_json t;
    t["wall_minutes"] = timing->wall_minutes;
    t["items"] = timing->items;
    t["items_per_minute"] = timing->items_per_minute;
    if (timing->reduction) {
      t["baseline_minutes"] = *timing->baseline_minutes;
      t["reduction"] = *timing->reduction;
    }
    j["timing"] = std::move(t);
  }

  OutputDir output(cfg.out_dir);
  output.add("summary.txt", text);
  output.add("summary.json", j.dump(2) + "\n");
  output.add("config.json", config_json(cfg, std::nullopt).dump(2) + "\n");
  output.commit();
  out << text;
  return kOk;
}

int cmd_rules_print(const RunConfig& cfg, std::ostream& out) {
  out << print_rulebase(load_rules(cfg));
  return kOk;
}

int cmd_rules_check(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  RuleBase rb = load_rules(cfg);
  std::set<Category> covered;
  for (const Rule& r : rb.rules()) covered.insert(r.category);
  for (Category c : kAllCategories) {
    if (!covered.contains(c)) err << "warning: no rule assigns " << to_string(c) << "\n";
  }
  out << fmt::format("ok: version \"{}\", {} rule(s), {} sequence(s)\n", rb.version(), rb.rules().size(),
                     rb.sequences().size());
  return kOk;
}

}  // namespace

ExitCode exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UncodedTurn: return kUncodedTurns;
    case ErrorKind::BackendUnavailable: return kBackendUnavailable;
    case ErrorKind::PartialCoding: return kPartialCoding;
    case ErrorKind::EpisodeUniverseMismatch: return kUniverseMismatch;
    case ErrorKind::UnknownCode:
    case ErrorKind::Syntax:
    case ErrorKind::DuplicateIndex:
    case ErrorKind::EmptyTranscript:
    case ErrorKind::DuplicateId:
    case ErrorKind::UnknownCategory:
    case ErrorKind::MissingTopicIds:
    case ErrorKind::InvalidArgument:
    case ErrorKind::Io:
    case ErrorKind::LengthMismatch:
    case ErrorKind::UnknownLabel:
    case ErrorKind::NoCodeFound:
    case ErrorKind::EmptyMatrix:
    case ErrorKind::DegenerateExpectedAgreement: return kInvalidInput;
  }
  return kFailure;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Classroom dialogue coding, rule-based classification and agreement metrics", "dialogic"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  auto add_rules = [&](CLI::App* sub) { sub->add_option("--rules", cfg.rules_path, "Rule DSL file (default: built-in)"); };
  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", cfg.out_dir, "Output directory")->capture_default_str(); };
  auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", cfg.seed, "Seed recorded in the run config"); };
  auto add_segmentation = [&](CLI::App* sub) {
    sub->add_option("--policy", cfg.policy, "Episode segmentation")
        ->check(CLI::IsMember({"topics", "single"}))
        ->capture_default_str();
    sub->add_flag("--all-matches", cfg.all_matches, "Report overlapping sequence matches");
  };

  auto* code = app.add_subcommand("code", "Assign a code to every turn");
  code->add_option("--in", cfg.inputs, "Transcript files (.jsonl or .csv)")->required()->check(CLI::ExistingFile);
  add_out(code);
  code->add_option("--backend", cfg.backend, "gold | stub | llm")
      ->check(CLI::IsMember({"gold", "stub", "llm"}))
      ->capture_default_str();
  code->add_option("--endpoint", cfg.endpoint, "Chat-completion URL for --backend llm");
  code->add_option("--model", cfg.model, "Model name for --backend llm");
  code->add_option("--window", cfg.window, "Preceding turns shown as context")->capture_default_str();
  code->add_option("--max-in-flight", cfg.max_in_flight, "Concurrent LLM requests")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  code->add_option("--max-retries", cfg.max_retries, "Retries per turn")->capture_default_str();
  code->add_option("--timeout-ms", cfg.timeout_ms, "Request timeout")->check(CLI::PositiveNumber)->capture_default_str();
  code->add_option("--retry-backoff-ms", cfg.retry_backoff_ms, "Linear backoff between retries")->capture_default_str();
  code->add_option("--scheme", cfg.scheme_path, "Coding scheme document (default: built-in)")->check(CLI::ExistingFile);
  code->add_option("--cues", cfg.cues_path, "Keyword cue table (default: built-in)")->check(CLI::ExistingFile);
  code->add_flag("--recode", cfg.recode, "Recode turns that already carry a code");
  add_seed(code);

  auto* classify = app.add_subcommand("classify", "Classify episodes and profile sequences");
  classify->add_option("--in", cfg.inputs, "Coded transcript files")->required()->check(CLI::ExistingFile);
  add_out(classify);
  add_rules(classify);
  add_segmentation(classify);
  classify->add_option("--mode", cfg.mode, "multi | single")
      ->check(CLI::IsMember({"multi", "single"}))
      ->capture_default_str();
  add_seed(classify);

  auto* sequences = app.add_subcommand("sequences", "Count canonical sequences only");
  sequences->add_option("--in", cfg.inputs, "Coded transcript files")->required()->check(CLI::ExistingFile);
  add_out(sequences);
  add_rules(sequences);
  add_segmentation(sequences);
  add_seed(sequences);

  auto* evaluate = app.add_subcommand("evaluate", "Agreement between two sets of classify outputs");
  evaluate->add_option("--gold", cfg.gold, "Reference classify outputs")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--pred", cfg.pred, "Predicted classify outputs")->required()->check(CLI::ExistingFile);
  add_out(evaluate);
  evaluate->add_option("--timing", cfg.timing_path, "timing.json from a code run")->check(CLI::ExistingFile);
  evaluate->add_option("--baseline-minutes", cfg.baseline_minutes, "Manual coding time to compare against");
  add_seed(evaluate);

  auto* report = app.add_subcommand("report", "Summarise classify outputs");
  report->add_option("--in", cfg.inputs, "Classify outputs")->required()->check(CLI::ExistingFile);
  add_out(report);
  report->add_option("--timing", cfg.timing_path, "timing.json from a code run")->check(CLI::ExistingFile);
  report->add_option("--baseline-minutes", cfg.baseline_minutes, "Manual coding time to compare against");
  add_seed(report);

  auto* rules = app.add_subcommand("rules", "Inspect rule bases");
  rules->require_subcommand(1);
  auto* rules_print = rules->add_subcommand("print", "Print a rule base in canonical form");
  add_rules(rules_print);
  auto* rules_check = rules->add_subcommand("check", "Parse and check a rule base");
  add_rules(rules_check);

  std::vector<const char*> argv{"dialogic"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code_ = app.exit(e, out, err);
    return code_ == 0 ? kOk : kInvalidInput;
  }

  try {
    if (code->parsed()) {
      cfg.command = "code";
      return cmd_code(cfg, out, err);
    }
    if (classify->parsed()) {
      cfg.command = "classify";
      return cmd_classify(cfg, true, out, err);
    }
    if (sequences->parsed()) {
      cfg.command = "sequences";
      return cmd_classify(cfg, false, out, err);
    }
    if (evaluate->parsed()) {
      cfg.command = "evaluate";
      return cmd_evaluate(cfg, out);
    }
    if (report->parsed()) {
      cfg.command = "report";
      return cmd_report(cfg, out);
    }
    if (rules_print->parsed()) return cmd_rules_print(cfg, out);
    if (rules_check->parsed()) return cmd_rules_check(cfg, out, err);
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace dialogic::cli
