#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dialogic {

// Dialogue moves of the classroom coding scheme.
enum class Code : std::uint8_t {
  ELI,  // elaboration invitation
  EL,   // elaboration
  REI,  // reasoning invitation
  RE,   // reasoning
  CI,   // co-ordination invitation
  SC,   // simple co-ordination
  RC,   // reasoned co-ordination
  A,    // agreement
  Q,    // querying
  RB,   // reference back
  RW,   // reference to wider context
  SU,   // structural silence
  SA,   // strategic silence
  OI,   // other invitation
  O,    // other
};

inline constexpr std::size_t kCodeCount = 15;

inline constexpr std::array<Code, kCodeCount> kAllCodes = {
    Code::ELI, Code::EL, Code::REI, Code::RE, Code::CI, Code::SC, Code::RC, Code::A,
    Code::Q,   Code::RB, Code::RW,  Code::SU, Code::SA, Code::OI, Code::O,
};

std::string_view to_string(Code code);
std::string_view describe(Code code);

// Case-insensitive. Throws Error{UnknownCode} for anything outside the scheme.
Code parse_code(std::string_view label);
std::optional<Code> try_parse_code(std::string_view label);

// ELI, REI, CI, OI.
constexpr bool is_invitation(Code code) {
  return code == Code::ELI || code == Code::REI || code == Code::CI || code == Code::OI;
}

constexpr bool is_silence(Code code) { return code == Code::SU || code == Code::SA; }

// Small set of codes backed by a bitmask. Iteration follows scheme order.
class CodeSet {
 public:
  constexpr CodeSet() = default;
  constexpr CodeSet(std::initializer_list<Code> codes) {
    for (Code c : codes) insert(c);
  }

  constexpr void insert(Code c) { bits_ |= bit(c); }
  constexpr bool contains(Code c) const { return (bits_ & bit(c)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint16_t bits() const { return bits_; }
  std::size_t size() const;
  std::vector<Code> codes() const;

  constexpr bool operator==(const CodeSet&) const = default;

 private:
  static constexpr std::uint16_t bit(Code c) {
    return static_cast<std::uint16_t>(1u << static_cast<unsigned>(c));
  }
  std::uint16_t bits_ = 0;
};

enum class SpeakerRole : std::uint8_t { Teacher, Student };

std::string_view to_string(SpeakerRole role);  // "teacher" | "student"
std::optional<SpeakerRole> try_parse_role(std::string_view text);

struct Speaker {
  SpeakerRole role = SpeakerRole::Teacher;
  std::string id;

  auto operator<=>(const Speaker&) const = default;
};

struct Turn {
  std::size_t index = 0;
  Speaker speaker;
  std::string text;
  std::optional<Code> code;
  std::optional<std::string> topic;

  bool operator==(const Turn&) const = default;
};

// A maximal run of turns on one topic.
struct Episode {
  std::string topic;
  std::vector<Turn> turns;

  bool operator==(const Episode&) const = default;
};

struct Transcript {
  std::string id;
  std::optional<std::string> subject;
  std::vector<Turn> turns;

  bool operator==(const Transcript&) const = default;
};

enum class Category : std::uint8_t {
  CriticalInquiry,
  CollaborativeConstruction,
  InstructionalSupportive,
  ReflectiveMetacognitive,
};

inline constexpr std::array<Category, 4> kAllCategories = {
    Category::CriticalInquiry,
    Category::CollaborativeConstruction,
    Category::InstructionalSupportive,
    Category::ReflectiveMetacognitive,
};

// Identifier form used in the rule DSL and machine-readable outputs.
std::string_view to_string(Category category);
// Human-readable name used in reports.
std::string_view display_name(Category category);
std::optional<Category> try_parse_category(std::string_view text);

// Condition-leaf name -> turn indices that witnessed it.
using Evidence = std::map<std::string, std::vector<std::size_t>>;

struct CategoryAssignment {
  std::string episode_topic;
  Category category = Category::CriticalInquiry;
  std::string rule_id;
  Evidence evidence;

  bool operator==(const CategoryAssignment&) const = default;
};

}  // namespace dialogic
