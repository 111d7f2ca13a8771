#include "dialogic/ingest.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "dialogic/error.hpp"

namespace dialogic::ingest {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// One input record before it becomes a Turn.
struct RawRecord {
  std::size_t line = 0;
  std::optional<std::size_t> index;
  std::optional<std::string> role;
  std::optional<std::string> speaker;
  std::string text;
  std::optional<std::string> code;
  std::optional<std::string> topic;
};

bool is_field(std::string_view name) {
  return std::find(std::begin(kFieldNames), std::end(kFieldNames), name) != std::end(kFieldNames);
}

Code parse_code_field(std::string_view label, std::size_t line) {
  if (auto c = try_parse_code(label)) return *c;
  // "RE,EL" or "RE/EL" style values are multi-code turns, which the scheme forbids.
  std::size_t parts = 0;
  std::size_t known = 0;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    ++parts;
    if (try_parse_code(token)) ++known;
    token.clear();
  };
  for (char ch : label) {
    if (ch == ',' || ch == '/' || ch == '|' || ch == ';' || ch == ' ' || ch == '+') {
      flush();
    } else {
      token.push_back(ch);
    }
  }
  flush();
  if (parts > 1 && known == parts) {
    throw Error::syntax(line, "turn carries multiple codes '" + std::string(label) +
                                  "'; exactly one code per turn is allowed");
  }
  throw Error::unknown_code(label, line);
}

Turn build_turn(const RawRecord& rec, std::size_t ordinal) {
  Turn turn;
  turn.index = ordinal;
  if (!rec.role) throw Error::syntax(rec.line, "missing field 'role'");
  auto role = try_parse_role(*rec.role);
  if (!role) throw Error::syntax(rec.line, "role must be 'teacher' or 'student', got '" + *rec.role + "'");
  turn.speaker.role = *role;
  if (!rec.speaker || rec.speaker->empty()) throw Error::syntax(rec.line, "missing or empty field 'speaker'");
  turn.speaker.id = *rec.speaker;
  turn.text = rec.text;
  if (rec.code) turn.code = parse_code_field(*rec.code, rec.line);
  if (turn.text.empty() && !(turn.code && is_silence(*turn.code))) {
    throw Error::syntax(rec.line, "empty text is only allowed on SU/SA turns");
  }
  if (rec.topic) {
    if (rec.topic->empty()) throw Error::syntax(rec.line, "topic must be non-empty when present");
    turn.topic = *rec.topic;
  }
  return turn;
}

Transcript assemble(const std::vector<RawRecord>& records, std::string id) {
  if (records.empty()) throw Error(ErrorKind::EmptyTranscript, "transcript contains no turns");
  Transcript t;
  t.id = std::move(id);
  t.turns.reserve(records.size());
  std::unordered_set<std::size_t> seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const RawRecord& rec = records[i];
    if (rec.index) {
      if (!seen.insert(*rec.index).second) {
        Error e(ErrorKind::DuplicateIndex,
                "line " + std::to_string(rec.line) + ": duplicate turn index " + std::to_string(*rec.index));
        e.with_line(rec.line);
        throw e;
      }
      if (*rec.index != i) {
        throw Error::syntax(rec.line, "turn index " + std::to_string(*rec.index) + " out of sequence (expected " +
                                          std::to_string(i) + ")");
      }
    } else {
      seen.insert(i);
    }
    t.turns.push_back(build_turn(rec, i));
  }
  return t;
}

std::optional<std::string> optional_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw Error::syntax(line, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::vector<RawRecord> read_records(std::string_view bytes) {
  std::vector<RawRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    std::size_t end = bytes.find('\n', pos);
    if (end == std::string_view::npos) end = bytes.size();
    std::string_view line = bytes.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error::syntax(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw Error::syntax(line_no, "each record must be a JSON object");
    for (const auto& [key, _] : obj.items()) {
      if (!is_field(key)) throw Error::syntax(line_no, "unknown field '" + key + "'");
    }

    RawRecord rec;
    rec.line = line_no;
    if (auto it = obj.find("index"); it != obj.end() && !it->is_null()) {
      if (it->is_number_unsigned()) {
        rec.index = it->get<std::size_t>();
      } else if (it->is_number_integer() && it->get<long long>() >= 0) {
        rec.index = static_cast<std::size_t>(it->get<long long>());
      } else {
        throw Error::syntax(line_no, "field 'index' must be a non-negative integer");
      }
    }
    rec.role = optional_string(obj, "role", line_no);
    rec.speaker = optional_string(obj, "speaker", line_no);
    rec.text = optional_string(obj, "text", line_no).value_or("");
    rec.code = optional_string(obj, "code", line_no);
    rec.topic = optional_string(obj, "topic", line_no);
    out.push_back(std::move(rec));
  }
  return out;
}

// RFC 4180 style reader. Returns rows with the line each row started on.
std::vector<std::pair<std::size_t, std::vector<std::string>>> read_csv(std::string_view bytes) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  bool closed = false;
  std::size_t line = 1;
  std::size_t row_line = 1;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
    closed = false;
  };
  auto end_row = [&] {
    end_field();
    bool blank = row.size() == 1 && row[0].empty();
    if (!blank) rows.emplace_back(row_line, std::move(row));
    row.clear();
  };

  for (std::size_t i = 0; i < bytes.size(); ++i) {
    char ch = bytes[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < bytes.size() && bytes[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
          closed = true;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (field_started || !field.empty()) throw Error::syntax(line, "stray quote inside field");
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < bytes.size() && bytes[i + 1] == '\n') break;
        if (closed) throw Error::syntax(line, "unexpected character after closing quote");
        field.push_back(ch);
        break;
      case '\n':
        end_row();
        ++line;
        row_line = line;
        break;
      default:
        if (closed) throw Error::syntax(line, "unexpected character after closing quote");
        field.push_back(ch);
    }
  }
  if (in_quotes) throw Error::syntax(line, "unterminated quoted field");
  if (!field.empty() || field_started || !row.empty()) end_row();
  return rows;
}

std::vector<RawRecord> read_table(std::string_view bytes) {
  auto rows = read_csv(bytes);
  if (rows.empty()) throw Error(ErrorKind::EmptyTranscript, "table has no header row");
  const auto& [header_line, header] = rows.front();
  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!is_field(header[i])) throw Error::syntax(header_line, "unknown column '" + header[i] + "'");
    if (!column.emplace(header[i], i).second) throw Error::syntax(header_line, "duplicate column '" + header[i] + "'");
  }
  for (const char* required : {"role", "speaker", "text"}) {
    if (!column.contains(required)) throw Error::syntax(header_line, std::string("missing column '") + required + "'");
  }

  std::vector<RawRecord> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& [line, cells] = rows[r];
    if (cells.size() != header.size()) {
      throw Error::syntax(line, "expected " + std::to_string(header.size()) + " cells, got " +
                                    std::to_string(cells.size()));
    }
    auto cell = [&](const char* name) -> std::optional<std::string> {
      auto it = column.find(name);
      if (it == column.end() || cells[it->second].empty()) return std::nullopt;
      return cells[it->second];
    };
    RawRecord rec;
    rec.line = line;
    if (auto idx = cell("index")) {
      if (idx->find_first_not_of("0123456789") != std::string::npos) {
        throw Error::syntax(line, "index must be a non-negative integer");
      }
      try {
        rec.index = static_cast<std::size_t>(std::stoull(*idx));
      } catch (const std::exception&) {
        throw Error::syntax(line, "index out of range");
      }
    }
    rec.role = cell("role");
    rec.speaker = cell("speaker");
    rec.text = cell("text").value_or("");
    rec.code = cell("code");
    rec.topic = cell("topic");
    out.push_back(std::move(rec));
  }
  return out;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

}  // namespace

Format format_for_path(std::string_view path) {
  auto dot = path.rfind('.');
  if (dot != std::string_view::npos) {
    std::string ext(path.substr(dot + 1));
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == "csv") return Format::Table;
  }
  return Format::Records;
}

bool is_valid_utf8(std::string_view bytes) {
  std::size_t i = 0;
  while (i < bytes.size()) {
    auto c = static_cast<unsigned char>(bytes[i]);
    std::size_t extra = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= bytes.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      auto cc = static_cast<unsigned char>(bytes[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Reject overlong encodings, surrogates and out-of-range code points.
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) || (extra == 3 && cp < 0x10000) ||
        (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) {
      return false;
    }
    i += extra + 1;
  }
  return true;
}

Transcript parse_transcript(std::string_view bytes, Format format, std::string id) {
  if (!is_valid_utf8(bytes)) throw Error(ErrorKind::Syntax, "input is not valid UTF-8");
  auto records = format == Format::Records ? read_records(bytes) : read_table(bytes);
  return assemble(records, std::move(id));
}

std::string write_transcript(const Transcript& transcript, Format format) {
  std::string out;
  if (format == Format::Records) {
    for (const Turn& turn : transcript.turns) {
      ordered_json obj;
      obj["index"] = turn.index;
      obj["role"] = to_string(turn.speaker.role);
      obj["speaker"] = turn.speaker.id;
      obj["text"] = turn.text;
      if (turn.code) obj["code"] = to_string(*turn.code);
      if (turn.topic) obj["topic"] = *turn.topic;
      out += obj.dump();
      out.push_back('\n');
    }
    return out;
  }

  out = "index,role,speaker,text,code,topic\n";
  for (const Turn& turn : transcript.turns) {
    out += std::to_string(turn.index);
    out += ',';
    out += to_string(turn.speaker.role);
    out += ',';
    out += csv_escape(turn.speaker.id);
    out += ',';
    out += csv_escape(turn.text);
    out += ',';
    if (turn.code) out += to_string(*turn.code);
    out += ',';
    if (turn.topic) out += csv_escape(*turn.topic);
    out.push_back('\n');
  }
  return out;
}

ValidationReport validate(const Transcript& transcript, ValidateOptions options) {
  ValidationReport report;
  if (transcript.turns.empty()) {
    report.errors.push_back({std::nullopt, "transcript contains no turns"});
    return report;
  }
  std::set<std::string> closed_topics;
  const std::string* current = nullptr;
  for (std::size_t i = 0; i < transcript.turns.size(); ++i) {
    const Turn& turn = transcript.turns[i];
    if (turn.index != i) {
      report.errors.push_back({i, "turn index " + std::to_string(turn.index) + " out of sequence (expected " +
                                      std::to_string(i) + ")"});
    }
    if (turn.speaker.id.empty()) report.errors.push_back({turn.index, "empty speaker id"});
    bool silent = turn.code && is_silence(*turn.code);
    if (turn.text.empty() && !silent) {
      report.errors.push_back({turn.index, "empty text on a non-silence turn"});
    }
    if (silent && !turn.text.empty()) {
      report.warnings.push_back(
          {turn.index, std::string(to_string(*turn.code)) + " turn carries text; silence codes normally have none"});
    }
    if (!turn.topic) {
      if (options.require_topics) report.errors.push_back({turn.index, "missing topic id"});
      current = nullptr;
      continue;
    }
    if (current == nullptr || *current != *turn.topic) {
      if (current != nullptr) closed_topics.insert(*current);
      if (closed_topics.contains(*turn.topic)) {
        report.warnings.push_back({turn.index, "topic " + *turn.topic + " resumed; treated as new episode"});
      }
      current = &*turn.topic;
    }
  }
  return report;
}

std::string format_report(const ValidationReport& report) {
  std::string out;
  auto emit = [&out](const char* level, const Issue& issue) {
    out += level;
    out += issue.turn ? " turn " + std::to_string(*issue.turn) : std::string(" file");
    out += ": " + issue.message + "\n";
  };
  for (const Issue& e : report.errors) emit("error", e);
  for (const Issue& w : report.warnings) emit("warning", w);
  return out;
}

}  // namespace dialogic::ingest
