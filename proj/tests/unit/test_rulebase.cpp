#include <doctest.h>

#include <map>
#include <random>

#include "dialogic/error.hpp"
#include "dialogic/rulebase.hpp"
#include "test_support.hpp"

using namespace dialogic;

namespace {

ErrorKind parse_error(std::string_view text, std::optional<std::size_t>* line = nullptr) {
  try {
    parse_rulebase(text);
  } catch (const Error& e) {
    if (line) *line = e.line();
    return e.kind();
  }
  FAIL("parsed without error: " << text);
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("builtin rule base shape") {
  const RuleBase& rb = builtin_rules();
  CHECK(rb.version() == kBuiltinVersion);
  CHECK(rb.rules().size() == 5);
  CHECK(rb.sequences().size() == 15);

  std::map<Category, int> rules_per_cat;
  for (const Rule& r : rb.rules()) ++rules_per_cat[r.category];
  CHECK(rules_per_cat.size() == 4);
  CHECK(rules_per_cat[Category::CollaborativeConstruction] == 2);

  std::map<Category, int> per_cat;
  for (const SequencePattern& p : rb.sequences()) {
    ++per_cat[p.category];
    CHECK(p.max_gap == 0);
    CHECK(p.positions.size() == 3);
  }
  CHECK(per_cat[Category::CriticalInquiry] == 4);
  CHECK(per_cat[Category::CollaborativeConstruction] == 4);
  CHECK(per_cat[Category::InstructionalSupportive] == 3);
  CHECK(per_cat[Category::ReflectiveMetacognitive] == 4);
}

TEST_CASE("builtin rules match their clauses") {
  const RuleBase& rb = builtin_rules();
  Condition r1 = All{{MinTurns{4}, RequiresGroups{{CodeSet{Code::REI, Code::ELI}, CodeSet{Code::RE, Code::EL}}},
                      ContainsAnyOf{{Code::Q}}}};
  CHECK(rb.find_rule("R1")->condition == r1);
  CHECK(rb.find_rule("R1")->priority == 1);
  Condition r2a = All{{InvolvesTeacher{true}, DistinctStudents{2}, ContainsAnyOf{{Code::SC, Code::RC}},
                       ContainsAnyOf{{Code::A}}}};
  Condition r2b = All{{InvolvesTeacher{false}, DistinctStudents{3}, ContainsAnyOf{{Code::SC, Code::RC}},
                       ContainsAnyOf{{Code::A}}}};
  CHECK(rb.find_rule("R2a")->condition == r2a);
  CHECK(rb.find_rule("R2b")->condition == r2b);
  CHECK(rb.find_rule("R2a")->priority == rb.find_rule("R2b")->priority);
  Condition r3 = Any{{ConsecutivePair{Code::OI, Code::O}, UnansweredInvitation{Code::OI}}};
  CHECK(rb.find_rule("R3")->condition == r3);
  CHECK(rb.find_rule("R4")->condition == Condition(ContainsAnyOf{{Code::RB, Code::RW}}));
  CHECK(rb.find_rule("R3")->priority < rb.find_rule("R4")->priority);

  const SequencePattern* p = rb.find_sequence("collaborative/SC_RC-EL-A");
  REQUIRE(p);
  CHECK(p->positions == std::vector<CodeSet>{{Code::SC, Code::RC}, {Code::EL}, {Code::A}});
  CHECK(rb.find_sequence("nope") == nullptr);
}

TEST_CASE("builtin rule base prints to the golden text") {
  CHECK(print_rulebase(builtin_rules()) == testing::slurp(testing::fixture_path("golden/builtin.drb")));
}

TEST_CASE("DSL text for R1 yields the builtin R1") {
  auto rb = parse_rulebase(R"(
    # critical inquiry only
    version "x"
    rule R1 : CriticalInquiry priority=1 {
      all( min_turns(4),
           groups([REI, ELI], [RE, EL]),
           contains(any: q) )
    }
  )");
  REQUIRE(rb.rules().size() == 1);
  CHECK(rb.rules()[0].condition == builtin_rules().find_rule("R1")->condition);
  CHECK(rb.version() == "x");
}

TEST_CASE("printing") {
  RuleBase rb("v", {}, {SequencePattern{"p", Category::CriticalInquiry, {{Code::REI}, {Code::RE}, {Code::Q}}, 0}});
  CHECK(print_rulebase(rb).find("REI -> RE -> Q") != std::string::npos);
  CHECK(print_condition(Condition(DistinctStudents{2})) == "students(>=2)");
  CHECK(print_condition(Condition(InvolvesTeacher{false})) == "teacher(false)");
  CHECK(print_condition(Condition(UnansweredInvitation{Code::OI})) == "unanswered(OI)");

  std::string text = print_rulebase(builtin_rules());
  std::size_t blocks = 0;
  for (std::size_t pos = 0; (pos = text.find("\nrule ", pos)) != std::string::npos; ++pos) ++blocks;
  CHECK(blocks == 5);
  CHECK(print_rulebase(parse_rulebase(text)) == text);
}

TEST_CASE("patterns with gaps and alternation parse") {
  auto rb = parse_rulebase("seq x : InstructionalSupportive { ELI -> EL|RE -> SC|RC gap=2 }");
  REQUIRE(rb.sequences().size() == 1);
  CHECK(rb.sequences()[0].max_gap == 2);
  CHECK(rb.sequences()[0].positions[1] == CodeSet{Code::EL, Code::RE});
  auto rb2 = parse_rulebase("seq y : CriticalInquiry { ELI -> EL -> RE }");
  CHECK(rb2.sequences()[0].max_gap == 0);
}

TEST_CASE("DSL errors") {
  std::optional<std::size_t> line;
  CHECK(parse_error("rule a : CriticalInquiry { min_turns(1) }\nrule a : CriticalInquiry { min_turns(2) }", &line) ==
        ErrorKind::DuplicateId);
  CHECK(line == 2u);
  CHECK(parse_error("rule a : CriticalInquiry { min_turns(1) }\nseq a : CriticalInquiry { A -> EL }") ==
        ErrorKind::DuplicateId);
  CHECK(parse_error("rule a : Chatter { min_turns(1) }") == ErrorKind::UnknownCategory);
  CHECK(parse_error("rule a : CriticalInquiry {\n contains(any: XYZ) }", &line) == ErrorKind::UnknownCode);
  CHECK(line == 2u);
  CHECK(parse_error("rule a : CriticalInquiry { min_turns(0) }") == ErrorKind::Syntax);
  CHECK(parse_error("rule a : CriticalInquiry { all() }") == ErrorKind::Syntax);
  CHECK(parse_error("rule a : CriticalInquiry { unanswered(RE) }") == ErrorKind::Syntax);
  CHECK(parse_error("rule a : CriticalInquiry { min_turns(2) ") == ErrorKind::Syntax);
  CHECK(parse_error("seq s : CriticalInquiry { A }") == ErrorKind::Syntax);
  CHECK(parse_error("seq s : CriticalInquiry { A -> EL gap=-1 }") == ErrorKind::Syntax);
  CHECK(parse_error("rule a : CriticalInquiry { frobnicate(1) }") == ErrorKind::Syntax);
  CHECK(parse_error("version 3") == ErrorKind::Syntax);
  CHECK(parse_error("seq s : CriticalInquiry { A -> B }") == ErrorKind::UnknownCode);
}

TEST_CASE("RuleBase constructor validates") {
  Rule r{"a", Category::CriticalInquiry, MinTurns{1}, 0, ""};
  CHECK_THROWS_AS(RuleBase("v", {r, r}, {}), Error);
  Rule bad{"bad id", Category::CriticalInquiry, MinTurns{1}, 0, ""};
  CHECK_THROWS_AS(RuleBase("v", {bad}, {}), Error);
  Rule empty{"e", Category::CriticalInquiry, ContainsAnyOf{}, 0, ""};
  CHECK_THROWS_AS(RuleBase("v", {empty}, {}), Error);
  CHECK_FALSE(check_condition(Condition(MinTurns{3})).size());
}

TEST_CASE("structurally equal rule bases print identically") {
  std::mt19937_64 rng(7);
  RuleBase a = testing::random_rulebase(rng);
  std::vector<Rule> rules(a.rules().rbegin(), a.rules().rend());
  std::vector<SequencePattern> seqs(a.sequences().rbegin(), a.sequences().rend());
  RuleBase b(a.version(), rules, seqs);
  CHECK(a == b);
  CHECK(print_rulebase(a) == print_rulebase(b));
}

TEST_CASE("random rule bases round-trip through the DSL") {
  std::mt19937_64 rng(20240611);
  for (int i = 0; i < 100; ++i) {
    RuleBase rb = testing::random_rulebase(rng);
    std::string text = print_rulebase(rb);
    RuleBase back = parse_rulebase(text);
    CHECK_MESSAGE(back == rb, text);
  }
}
