#include "dialogic/model.hpp"

#include <algorithm>
#include <bit>
#include <cctype>

#include "dialogic/error.hpp"

namespace dialogic {
namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::toupper(static_cast<unsigned char>(x)) ==
                  std::toupper(static_cast<unsigned char>(y));
         });
}

}  // namespace

std::string_view to_string(Code code) {
  switch (code) {
    case Code::ELI: return "ELI";
    case Code::EL: return "EL";
    case Code::REI: return "REI";
    case Code::RE: return "RE";
    case Code::CI: return "CI";
    case Code::SC: return "SC";
    case Code::RC: return "RC";
    case Code::A: return "A";
    case Code::Q: return "Q";
    case Code::RB: return "RB";
    case Code::RW: return "RW";
    case Code::SU: return "SU";
    case Code::SA: return "SA";
    case Code::OI: return "OI";
    case Code::O: return "O";
  }
  return "?";
}

std::string_view describe(Code code) {
  switch (code) {
    case Code::ELI: return "Elaboration Invitation";
    case Code::EL: return "Elaboration";
    case Code::REI: return "Reasoning Invitation";
    case Code::RE: return "Reasoning";
    case Code::CI: return "Co-ordination Invitation";
    case Code::SC: return "Simple Co-ordination";
    case Code::RC: return "Reasoned Co-ordination";
    case Code::A: return "Agreement";
    case Code::Q: return "Querying";
    case Code::RB: return "Reference Back";
    case Code::RW: return "Reference to Wider Context";
    case Code::SU: return "Structural Silence";
    case Code::SA: return "Strategic Silence";
    case Code::OI: return "Other Invitation";
    case Code::O: return "Other";
  }
  return "?";
}

std::optional<Code> try_parse_code(std::string_view label) {
  for (Code c : kAllCodes) {
    if (iequals(label, to_string(c))) return c;
  }
  return std::nullopt;
}

Code parse_code(std::string_view label) {
  if (auto c = try_parse_code(label)) return *c;
  throw Error::unknown_code(label);
}

std::size_t CodeSet::size() const { return static_cast<std::size_t>(std::popcount(bits_)); }

std::vector<Code> CodeSet::codes() const {
  std::vector<Code> out;
  for (Code c : kAllCodes) {
    if (contains(c)) out.push_back(c);
  }
  return out;
}

std::string_view to_string(SpeakerRole role) {
  return role == SpeakerRole::Teacher ? "teacher" : "student";
}

std::optional<SpeakerRole> try_parse_role(std::string_view text) {
  if (iequals(text, "teacher")) return SpeakerRole::Teacher;
  if (iequals(text, "student")) return SpeakerRole::Student;
  return std::nullopt;
}

std::string_view to_string(Category category) {
  switch (category) {
    case Category::CriticalInquiry: return "CriticalInquiry";
    case Category::CollaborativeConstruction: return "CollaborativeConstruction";
    case Category::InstructionalSupportive: return "InstructionalSupportive";
    case Category::ReflectiveMetacognitive: return "ReflectiveMetacognitive";
  }
  return "?";
}

std::string_view display_name(Category category) {
  switch (category) {
    case Category::CriticalInquiry: return "Critical Inquiry";
    case Category::CollaborativeConstruction: return "Collaborative Construction of Knowledge";
    case Category::InstructionalSupportive: return "Instructional and Supportive Dialogue";
    case Category::ReflectiveMetacognitive: return "Reflective and Metacognitive Dialogue";
  }
  return "?";
}

std::optional<Category> try_parse_category(std::string_view text) {
  for (Category c : kAllCategories) {
    if (text == to_string(c)) return c;
  }
  return std::nullopt;
}

}  // namespace dialogic
