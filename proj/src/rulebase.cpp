#include "dialogic/rulebase.hpp"

#include <algorithm>
#include <set>

#include "dialogic/error.hpp"

namespace dialogic {
namespace {

bool valid_id_char(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '.' ||
         c == '/' || c == '-';
}

bool valid_id(std::string_view id) {
  if (id.empty() || id.front() == '-') return false;
  for (std::size_t i = 0; i < id.size(); ++i) {
    if (!valid_id_char(id[i])) return false;
  }
  // "->" is the sequence arrow and cannot appear inside an id.
  return id.find("->") == std::string_view::npos && id.back() != '-';
}

std::string join_codes(const CodeSet& set, std::string_view sep) {
  std::string out;
  for (Code c : set.codes()) {
    if (!out.empty()) out += sep;
    out += to_string(c);
  }
  return out;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

Condition all_of(std::vector<Condition> children) { return All{std::move(children)}; }

SequencePattern seq(std::string id, Category category, std::vector<CodeSet> positions) {
  return SequencePattern{std::move(id), category, std::move(positions), 0};
}

RuleBase make_builtin() {
  using enum Code;
  std::vector<Rule> rules;
  rules.push_back(Rule{
      "R1", Category::CriticalInquiry,
      all_of({MinTurns{4}, RequiresGroups{{CodeSet{REI, ELI}, CodeSet{RE, EL}}}, ContainsAnyOf{CodeSet{Q}}}), 1,
      "four or more turns on one topic with a structured question, an argument and a query"});
  rules.push_back(Rule{"R2a", Category::CollaborativeConstruction,
                       all_of({InvolvesTeacher{true}, DistinctStudents{2}, ContainsAnyOf{CodeSet{SC, RC}},
                               ContainsAnyOf{CodeSet{A}}}),
                       2, "teacher-student talk with two or more students, a co-ordination and an agreement"});
  rules.push_back(Rule{"R2b", Category::CollaborativeConstruction,
                       all_of({InvolvesTeacher{false}, DistinctStudents{3}, ContainsAnyOf{CodeSet{SC, RC}},
                               ContainsAnyOf{CodeSet{A}}}),
                       2, "student-only talk with three or more students, a co-ordination and an agreement"});
  rules.push_back(Rule{"R3", Category::InstructionalSupportive,
                       Any{{ConsecutivePair{OI, O}, UnansweredInvitation{OI}}}, 3,
                       "an other-invitation answered by an other turn, or left unanswered at a topic switch"});
  rules.push_back(Rule{"R4", Category::ReflectiveMetacognitive, ContainsAnyOf{CodeSet{RB, RW}}, 4,
                       "a reference back or a reference to a wider context"});

  const CodeSet sc_rc{SC, RC};
  const CodeSet rb_rw{RB, RW};
  std::vector<SequencePattern> sequences = {
      seq("critical/REI-RE-Q", Category::CriticalInquiry, {{REI}, {RE}, {Q}}),
      seq("critical/Q-RE-REI", Category::CriticalInquiry, {{Q}, {RE}, {REI}}),
      seq("critical/CI-Q-RE", Category::CriticalInquiry, {{CI}, {Q}, {RE}}),
      seq("critical/ELI-Q-RE", Category::CriticalInquiry, {{ELI}, {Q}, {RE}}),
      seq("collaborative/ELI-EL-SC_RC", Category::CollaborativeConstruction, {{ELI}, {EL}, sc_rc}),
      seq("collaborative/SC_RC-EL-A", Category::CollaborativeConstruction, {sc_rc, {EL}, {A}}),
      seq("collaborative/ELI-A-SC_RC", Category::CollaborativeConstruction, {{ELI}, {A}, sc_rc}),
      seq("collaborative/A-EL-SC_RC", Category::CollaborativeConstruction, {{A}, {EL}, sc_rc}),
      seq("instructional/OI-ELI-EL", Category::InstructionalSupportive, {{OI}, {ELI}, {EL}}),
      seq("instructional/REI-RE-OI", Category::InstructionalSupportive, {{REI}, {RE}, {OI}}),
      seq("instructional/ELI-EL-OI", Category::InstructionalSupportive, {{ELI}, {EL}, {OI}}),
      seq("reflective/REI-RE-RB_RW", Category::ReflectiveMetacognitive, {{REI}, {RE}, rb_rw}),
      seq("reflective/RB-EL-RW", Category::ReflectiveMetacognitive, {{RB}, {EL}, {RW}}),
      seq("reflective/CI-RB_RW-SC", Category::ReflectiveMetacognitive, {{CI}, rb_rw, {SC}}),
      seq("reflective/RB_RW-ELI-EL", Category::ReflectiveMetacognitive, {rb_rw, {ELI}, {EL}}),
  };
  return RuleBase(std::string(kBuiltinVersion), std::move(rules), std::move(sequences));
}

std::string quote(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::string check_condition(const Condition& condition) {
  return std::visit(
      Overloaded{
          [](const MinTurns& c) -> std::string { return c.n == 0 ? "min_turns requires n >= 1" : ""; },
          [](const ContainsAnyOf& c) -> std::string { return c.codes.empty() ? "contains requires a code" : ""; },
          [](const RequiresGroups& c) -> std::string {
            if (c.groups.empty()) return "groups requires at least one group";
            for (const CodeSet& g : c.groups) {
              if (g.empty()) return "groups entries must be non-empty";
            }
            return "";
          },
          [](const ConsecutivePair&) -> std::string { return ""; },
          [](const UnansweredInvitation& c) -> std::string {
            return is_invitation(c.code) ? "" : "unanswered requires an invitation code (ELI, REI, CI, OI)";
          },
          [](const DistinctStudents& c) -> std::string { return c.min == 0 ? "students requires n >= 1" : ""; },
          [](const InvolvesTeacher&) -> std::string { return ""; },
          [](const All& c) -> std::string {
            if (c.children.empty()) return "all() requires at least one condition";
            for (const Condition& child : c.children) {
              if (auto msg = check_condition(child); !msg.empty()) return msg;
            }
            return "";
          },
          [](const Any& c) -> std::string {
            if (c.children.empty()) return "any() requires at least one condition";
            for (const Condition& child : c.children) {
              if (auto msg = check_condition(child); !msg.empty()) return msg;
            }
            return "";
          },
      },
      condition.node);
}

std::string check_pattern(const SequencePattern& pattern) {
  if (pattern.positions.size() < 2) return "sequence " + pattern.id + " needs at least two positions";
  for (const CodeSet& p : pattern.positions) {
    if (p.empty()) return "sequence " + pattern.id + " has an empty position";
  }
  return "";
}

RuleBase::RuleBase(std::string version, std::vector<Rule> rules, std::vector<SequencePattern> sequences)
    : version_(std::move(version)), rules_(std::move(rules)), sequences_(std::move(sequences)) {
  std::set<std::string> ids;
  auto claim = [&ids](const std::string& id, const char* what) {
    if (!valid_id(id)) throw Error(ErrorKind::InvalidArgument, std::string("invalid ") + what + " id '" + id + "'");
    if (!ids.insert(id).second) {
      Error e(ErrorKind::DuplicateId, "duplicate id '" + id + "'");
      e.with_label(id);
      throw e;
    }
  };
  for (const Rule& r : rules_) {
    claim(r.id, "rule");
    if (auto msg = check_condition(r.condition); !msg.empty()) {
      throw Error(ErrorKind::InvalidArgument, "rule " + r.id + ": " + msg);
    }
  }
  for (const SequencePattern& p : sequences_) {
    claim(p.id, "sequence");
    if (auto msg = check_pattern(p); !msg.empty()) throw Error(ErrorKind::InvalidArgument, msg);
  }
  std::sort(rules_.begin(), rules_.end(), [](const Rule& a, const Rule& b) { return a.id < b.id; });
  std::sort(sequences_.begin(), sequences_.end(),
            [](const SequencePattern& a, const SequencePattern& b) { return a.id < b.id; });
}

const Rule* RuleBase::find_rule(std::string_view id) const {
  auto it = std::find_if(rules_.begin(), rules_.end(), [id](const Rule& r) { return r.id == id; });
  return it == rules_.end() ? nullptr : &*it;
}

const SequencePattern* RuleBase::find_sequence(std::string_view id) const {
  auto it = std::find_if(sequences_.begin(), sequences_.end(), [id](const SequencePattern& p) { return p.id == id; });
  return it == sequences_.end() ? nullptr : &*it;
}

const RuleBase& builtin_rules() {
  static const RuleBase rb = make_builtin();
  return rb;
}

std::string print_condition(const Condition& condition) {
  auto children = [](std::string_view name, const std::vector<Condition>& cs) {
    std::string out(name);
    out += '(';
    for (std::size_t i = 0; i < cs.size(); ++i) {
      if (i) out += ", ";
      out += print_condition(cs[i]);
    }
    out += ')';
    return out;
  };
  return std::visit(
      Overloaded{
          [](const MinTurns& c) { return "min_turns(" + std::to_string(c.n) + ")"; },
          [](const ContainsAnyOf& c) { return "contains(any: " + join_codes(c.codes, ",") + ")"; },
          [](const RequiresGroups& c) {
            std::string out = "groups(";
            for (std::size_t i = 0; i < c.groups.size(); ++i) {
              if (i) out += ',';
              out += "[" + join_codes(c.groups[i], ",") + "]";
            }
            return out + ")";
          },
          [](const ConsecutivePair& c) {
            return "consecutive(" + std::string(to_string(c.first)) + "," + std::string(to_string(c.second)) + ")";
          },
          [](const UnansweredInvitation& c) { return "unanswered(" + std::string(to_string(c.code)) + ")"; },
          [](const DistinctStudents& c) { return "students(>=" + std::to_string(c.min) + ")"; },
          [](const InvolvesTeacher& c) { return std::string(c.present ? "teacher(true)" : "teacher(false)"); },
          [&](const All& c) { return children("all", c.children); },
          [&](const Any& c) { return children("any", c.children); },
      },
      condition.node);
}

std::string print_pattern_body(const SequencePattern& pattern) {
  std::string out;
  for (std::size_t i = 0; i < pattern.positions.size(); ++i) {
    if (i) out += " -> ";
    out += join_codes(pattern.positions[i], "|");
  }
  out += " gap=" + std::to_string(pattern.max_gap);
  return out;
}

std::string print_rulebase(const RuleBase& rb) {
  std::string out = "# dialogue rule base\n";
  out += "version " + quote(rb.version()) + "\n";
  if (!rb.rules().empty()) out += "\n";
  for (const Rule& r : rb.rules()) {
    out += "rule " + r.id + " : " + std::string(to_string(r.category)) + " priority=" + std::to_string(r.priority);
    if (!r.description.empty()) out += " desc=" + quote(r.description);
    out += " {\n  " + print_condition(r.condition) + "\n}\n";
  }
  if (!rb.sequences().empty()) out += "\n";
  for (const SequencePattern& p : rb.sequences()) {
    out += "seq " + p.id + " : " + std::string(to_string(p.category)) + " { " + print_pattern_body(p) + " }\n";
  }
  return out;
}

}  // namespace dialogic
