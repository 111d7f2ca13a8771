#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "dialogic/cli.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace dialogic;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("dialogic-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

void write(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

nlohmann::json read_json(const std::string& path) { return nlohmann::json::parse(testing::slurp(path)); }

std::set<std::string> categories_in(const nlohmann::json& doc) {
  std::set<std::string> out;
  for (const auto& ep : doc["episodes"])
    for (const auto& a : ep["assignments"]) out.insert(a["category"].get<std::string>());
  return out;
}

const char* kCategoryOf[][2] = {
    {"critical_inquiry", "CriticalInquiry"},
    {"collaborative_construction", "CollaborativeConstruction"},
    {"instructional_supportive", "InstructionalSupportive"},
    {"reflective_metacognitive", "ReflectiveMetacognitive"},
};

}  // namespace

TEST_CASE("classify the vignette bundle") {
  TempDir dir;
  std::vector<std::string> args{"classify", "--out", dir / "out", "--in"};
  for (auto& row : kCategoryOf) args.push_back(testing::fixture_path(std::string("vignettes/") + row[0] + ".jsonl"));
  auto r = run(args);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  for (auto& row : kCategoryOf) {
    auto doc = read_json(dir / (std::string("out/") + row[0] + ".classified.json"));
    CHECK(categories_in(doc).contains(row[1]));
    CHECK(doc["rulebase_version"] == "classroom-dialogue-rules/1.0");
    CHECK(doc["sequence_profile"]["counts"].size() == 15);
  }
  auto cfg = read_json(dir / "out/config.json");
  CHECK(cfg["policy"] == "topics");
  CHECK(cfg["mode"] == "multi");
  CHECK(cfg["rules"] == "builtin");
}

TEST_CASE("single-turn transcript gives no assignments") {
  TempDir dir;
  write(dir / "one.jsonl", R"({"role":"teacher","speaker":"T","text":"Open your books.","code":"O","topic":"a"})");
  auto r = run({"classify", "--in", dir / "one.jsonl", "--out", dir / "out"});
  CHECK(r.code == 0);
  auto doc = read_json(dir / "out/one.classified.json");
  CHECK(doc["episodes"][0]["assignments"].empty());
}

TEST_CASE("label modes on the dual-category fixture") {
  TempDir dir;
  std::string in = testing::fixture_path("cli/dual.jsonl");
  REQUIRE(run({"classify", "--in", in, "--out", dir / "m", "--mode", "multi"}).code == 0);
  REQUIRE(run({"classify", "--in", in, "--out", dir / "s", "--mode", "single"}).code == 0);
  auto multi = read_json(dir / "m/dual.classified.json");
  auto single = read_json(dir / "s/dual.classified.json");
  CHECK(multi["episodes"][0]["assignments"].size() == 2);
  CHECK(single["episodes"][0]["assignments"].size() == 1);
  CHECK(single["episodes"][0]["assignments"][0]["rule_id"] == "R1");
  auto ev = multi["episodes"][0]["assignments"][1]["evidence"];
  CHECK(ev["contains(any: RB,RW)"] == nlohmann::json::array({4}));
}

TEST_CASE("classify errors map to exit codes") {
  TempDir dir;
  write(dir / "raw.jsonl", R"({"role":"teacher","speaker":"T","text":"hi","topic":"a"})"
                           "\n"
                           R"({"role":"student","speaker":"S1","text":"yo","code":"A","topic":"a"})");
  auto r = run({"classify", "--in", dir / "raw.jsonl", "--out", dir / "o1"});
  CHECK(r.code == cli::kUncodedTurns);
  CHECK(r.err.find("0") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "o1"));

  write(dir / "notopic.jsonl", R"({"role":"teacher","speaker":"T","text":"hi","code":"O"})");
  CHECK(run({"classify", "--in", dir / "notopic.jsonl", "--out", dir / "o2"}).code == cli::kInvalidInput);
  CHECK(run({"classify", "--in", dir / "notopic.jsonl", "--out", dir / "o3", "--policy", "single"}).code == 0);

  write(dir / "bad.jsonl", R"({"role":"teacher","speaker":"T","text":"hi","code":"XYZ"})");
  CHECK(run({"classify", "--in", dir / "bad.jsonl", "--out", dir / "o4"}).code == cli::kInvalidInput);
  CHECK(run({"classify", "--in", dir / "missing.jsonl"}).code == cli::kInvalidInput);
  CHECK(run({"classify", "--in", testing::fixture_path("cli/dual.jsonl"), "--mode", "both"}).code ==
        cli::kInvalidInput);
  CHECK(run({}).code == cli::kInvalidInput);
  CHECK(run({"--help"}).code == cli::kOk);
}

TEST_CASE("code with the stub backend then classify") {
  TempDir dir;
  auto t = testing::synthetic_transcript(80, 12, false);
  write(dir / "lesson.jsonl", ingest::write_transcript(t, ingest::Format::Records));
  auto r = run({"code", "--in", dir / "lesson.jsonl", "--backend", "stub", "--out", dir / "c1"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(fs::exists(dir / "c1/lesson.coded.jsonl"));
  auto timing = read_json(dir / "c1/timing.json");
  CHECK(timing["items"] == 80);
  CHECK(timing["per_item_ms"].size() == 80);
  auto cfg = read_json(dir / "c1/config.json");
  CHECK(cfg["backend"]["kind"] == "stub");
  CHECK(cfg["window"] == 5);

  REQUIRE(run({"code", "--in", dir / "lesson.jsonl", "--backend", "stub", "--out", dir / "c2"}).code == 0);
  CHECK(testing::slurp(dir / "c1/lesson.coded.jsonl") == testing::slurp(dir / "c2/lesson.coded.jsonl"));

  REQUIRE(run({"classify", "--in", dir / "c1/lesson.coded.jsonl", "--out", dir / "k"}).code == 0);
  REQUIRE(run({"sequences", "--in", dir / "c1/lesson.coded.jsonl", "--out", dir / "q"}).code == 0);
  auto seq = read_json(dir / "q/lesson.coded.sequences.json");
  CHECK_FALSE(seq["episodes"][0].contains("assignments"));
  CHECK(seq["sequence_profile"] == read_json(dir / "k/lesson.coded.classified.json")["sequence_profile"]);

  // csv input keeps its format
  write(dir / "lesson.csv", ingest::write_transcript(t, ingest::Format::Table));
  REQUIRE(run({"code", "--in", dir / "lesson.csv", "--out", dir / "c3"}).code == 0);
  auto a = ingest::parse_transcript(testing::slurp(dir / "c3/lesson.coded.csv"), ingest::Format::Table);
  auto b = ingest::parse_transcript(testing::slurp(dir / "c1/lesson.coded.jsonl"), ingest::Format::Records);
  CHECK(a == b);
}

TEST_CASE("recode with gold keeps codes byte-identical") {
  TempDir dir;
  std::string in = testing::fixture_path("vignettes/critical_inquiry.jsonl");
  REQUIRE(run({"code", "--in", in, "--backend", "gold", "--recode", "--out", dir / "g"}).code == 0);
  auto a = ingest::parse_transcript(testing::slurp(in), ingest::Format::Records);
  auto b = ingest::parse_transcript(testing::slurp(dir / "g/critical_inquiry.coded.jsonl"), ingest::Format::Records);
  CHECK(testing::codes_of(a) == testing::codes_of(b));
  CHECK(a == b);
}

TEST_CASE("llm backend exit codes and secrecy") {
  TempDir dir;
  write(dir / "l.jsonl", ingest::write_transcript(testing::synthetic_transcript(6, 1, false), ingest::Format::Records));
  ::setenv("DIALOGIC_API_KEY", "top-secret-key", 1);
  {
    testing::StubChatServer server({.fixed = "RE"});
    auto r = run({"code", "--in", dir / "l.jsonl", "--backend", "llm", "--endpoint", server.endpoint(), "--model", "m",
                  "--out", dir / "ok"});
    CHECK(r.code == 0);
    CHECK(server.last_authorization() == "Bearer top-secret-key");
    for (auto& f : fs::directory_iterator(dir / "ok"))
      CHECK(testing::slurp(f.path().string()).find("top-secret-key") == std::string::npos);
  }
  {
    testing::StubChatServer server({.fixed = "no label here"});
    auto r = run({"code", "--in", dir / "l.jsonl", "--backend", "llm", "--endpoint", server.endpoint(), "--model", "m",
                  "--max-retries", "0", "--out", dir / "partial"});
    CHECK(r.code == cli::kPartialCoding);
    CHECK(fs::exists(dir / "partial/l.coded.jsonl"));
  }
  std::string endpoint;
  {
    testing::StubChatServer gone;
    endpoint = gone.endpoint();
  }
  auto r = run({"code", "--in", dir / "l.jsonl", "--backend", "llm", "--endpoint", endpoint, "--model", "m",
                "--max-retries", "0", "--out", dir / "down"});
  CHECK(r.code == cli::kBackendUnavailable);
  CHECK_FALSE(fs::exists(dir / "down"));
  ::unsetenv("DIALOGIC_API_KEY");
}

TEST_CASE("evaluate the precision example") {
  TempDir dir;
  auto doc = [](std::vector<std::vector<std::string>> cats) {
    nlohmann::ordered_json d;
    d["transcript"] = "lesson";
    d["mode"] = "single";
    d["episodes"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < cats.size(); ++i) {
      nlohmann::ordered_json as = nlohmann::ordered_json::array();
      for (auto& c : cats[i]) as.push_back({{"category", c}, {"rule_id", "r"}, {"evidence", nlohmann::json::object()}});
      d["episodes"].push_back({{"id", "e" + std::to_string(i + 1)}, {"assignments", as}});
    }
    return d.dump(2);
  };
  write(dir / "pred.json", doc({{"CriticalInquiry"}, {"CriticalInquiry"}, {"CollaborativeConstruction"}}));
  write(dir / "gold.json", doc({{"CriticalInquiry"}, {"CollaborativeConstruction"}, {"CollaborativeConstruction"}}));
  auto r = run({"evaluate", "--gold", dir / "gold.json", "--pred", dir / "pred.json", "--out", dir / "ev"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  auto rep = read_json(dir / "ev/report.json");
  for (const auto& row : rep["per_category"]) {
    if (row["category"] == "CriticalInquiry") CHECK(row["precision"] == 0.5);
    if (row["category"] == "CollaborativeConstruction") CHECK(row["precision"] == 1.0);
  }
  std::string text = testing::slurp(dir / "ev/report.txt");
  CHECK(text.find("Critical Inquiry") < text.find("Collaborative Construction of Knowledge"));
  CHECK(text.find("Instructional and Supportive Dialogue") < text.find("Reflective and Metacognitive Dialogue"));

  auto same = run({"evaluate", "--gold", dir / "gold.json", "--pred", dir / "gold.json", "--out", dir / "ev2"});
  REQUIRE(same.code == 0);
  for (const auto& row : read_json(dir / "ev2/report.json")["per_category"]) {
    if (!row["precision"].is_null()) CHECK(row["precision"] == 1.0);
    CHECK(row["kappa"] == 1.0);
  }

  write(dir / "short.json", doc({{"CriticalInquiry"}}));
  CHECK(run({"evaluate", "--gold", dir / "gold.json", "--pred", dir / "short.json", "--out", dir / "ev3"}).code ==
        cli::kUniverseMismatch);
}

TEST_CASE("report and timing") {
  TempDir dir;
  REQUIRE(run({"classify", "--in", testing::fixture_path("cli/dual.jsonl"), "--out", dir / "k"}).code == 0);
  write(dir / "timing.json", R"({"wall_seconds": 600, "items": 100, "retries": 0})");
  auto r = run({"report", "--in", dir / "k/dual.classified.json", "--timing", dir / "timing.json",
                "--baseline-minutes", "240", "--out", dir / "rep"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("95.8%") != std::string::npos);
  auto j = read_json(dir / "rep/summary.json");
  CHECK(j["episodes"] == 1);
  CHECK(j["timing"]["reduction"].get<double>() == doctest::Approx(1 - 10.0 / 240));
}

TEST_CASE("rules print and check") {
  TempDir dir;
  auto p = run({"rules", "print"});
  CHECK(p.code == 0);
  CHECK(p.out == testing::slurp(testing::fixture_path("golden/builtin.drb")));
  write(dir / "r.drb", p.out);
  CHECK(run({"rules", "check", "--rules", dir / "r.drb"}).code == 0);
  write(dir / "bad.drb", "rule a : CriticalInquiry { contains(any: ZZ) }");
  auto bad = run({"rules", "check", "--rules", dir / "bad.drb"});
  CHECK(bad.code == cli::kInvalidInput);
  CHECK(bad.err.find("ZZ") != std::string::npos);

  write(dir / "custom.drb", "version \"mine\"\nrule only : ReflectiveMetacognitive { contains(any: O) }\n");
  REQUIRE(run({"classify", "--in", testing::fixture_path("vignettes/critical_inquiry.jsonl"), "--rules",
               dir / "custom.drb", "--out", dir / "c"})
              .code == 0);
  auto doc = read_json(dir / "c/critical_inquiry.classified.json");
  CHECK(doc["rulebase_version"] == "mine");
  CHECK(categories_in(doc).empty());
}
