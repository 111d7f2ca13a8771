#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "dialogic/model.hpp"

namespace dialogic {

struct Condition;

// Episode has at least `n` turns.
struct MinTurns {
  std::size_t n = 1;
  bool operator==(const MinTurns&) const = default;
};

// Some turn carries a code from the set.
struct ContainsAnyOf {
  CodeSet codes;
  bool operator==(const ContainsAnyOf&) const = default;
};

// Every group is hit by at least one turn.
struct RequiresGroups {
  std::vector<CodeSet> groups;
  bool operator==(const RequiresGroups&) const = default;
};

// Two adjacent turns coded (first, second).
struct ConsecutivePair {
  Code first = Code::OI;
  Code second = Code::O;
  bool operator==(const ConsecutivePair&) const = default;
};

// The episode's final turn carries this invitation code, i.e. the topic
// switched before anyone responded.
struct UnansweredInvitation {
  Code code = Code::OI;
  bool operator==(const UnansweredInvitation&) const = default;
};

// At least `min` distinct student speakers.
struct DistinctStudents {
  std::size_t min = 1;
  bool operator==(const DistinctStudents&) const = default;
};

// Episode does (true) or does not (false) contain a teacher turn.
struct InvolvesTeacher {
  bool present = true;
  bool operator==(const InvolvesTeacher&) const = default;
};

struct All {
  std::vector<Condition> children;
  bool operator==(const All&) const;
};

struct Any {
  std::vector<Condition> children;
  bool operator==(const Any&) const;
};

struct Condition {
  using Node = std::variant<MinTurns, ContainsAnyOf, RequiresGroups, ConsecutivePair, UnansweredInvitation,
                            DistinctStudents, InvolvesTeacher, All, Any>;
  Node node;

  Condition() = default;
  template <typename T>
    requires(!std::is_same_v<std::remove_cvref_t<T>, Condition>)
  Condition(T value) : node(std::move(value)) {}  // NOLINT(google-explicit-constructor)

  bool is_leaf() const { return !std::holds_alternative<All>(node) && !std::holds_alternative<Any>(node); }
  bool operator==(const Condition&) const = default;
};

inline bool All::operator==(const All& other) const { return children == other.children; }
inline bool Any::operator==(const Any& other) const { return children == other.children; }

struct Rule {
  std::string id;
  Category category = Category::CriticalInquiry;
  Condition condition;
  int priority = 0;  // lower fires first in single-label mode
  std::string description;

  bool operator==(const Rule&) const = default;
};

struct SequencePattern {
  std::string id;
  Category category = Category::CriticalInquiry;
  std::vector<CodeSet> positions;
  std::size_t max_gap = 0;  // non-matching turns allowed between consecutive positions

  bool operator==(const SequencePattern&) const = default;
};

// Rules and patterns are kept sorted by id; equality is therefore structural.
class RuleBase {
 public:
  RuleBase() = default;
  // Throws Error{DuplicateId} or Error{InvalidArgument} on malformed content.
  RuleBase(std::string version, std::vector<Rule> rules, std::vector<SequencePattern> sequences);

  const std::string& version() const { return version_; }
  const std::vector<Rule>& rules() const { return rules_; }
  const std::vector<SequencePattern>& sequences() const { return sequences_; }

  const Rule* find_rule(std::string_view id) const;
  const SequencePattern* find_sequence(std::string_view id) const;

  bool operator==(const RuleBase&) const = default;

 private:
  std::string version_;
  std::vector<Rule> rules_;
  std::vector<SequencePattern> sequences_;
};

// Structural checks shared by the constructor and the DSL parser.
// Returns an empty string when the condition is well-formed.
std::string check_condition(const Condition& condition);
std::string check_pattern(const SequencePattern& pattern);

// The expert rule base: five classification rules and fifteen canonical sequences.
const RuleBase& builtin_rules();
inline constexpr std::string_view kBuiltinVersion = "classroom-dialogue-rules/1.0";

// Canonical text for a single condition; also used as the evidence key of leaves.
std::string print_condition(const Condition& condition);
std::string print_pattern_body(const SequencePattern& pattern);

std::string print_rulebase(const RuleBase& rb);

// Throws Error with kind Syntax, UnknownCode, DuplicateId or UnknownCategory.
RuleBase parse_rulebase(std::string_view text);

}  // namespace dialogic
