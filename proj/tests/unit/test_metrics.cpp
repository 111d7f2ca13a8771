#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include <json.hpp>

#include "dialogic/error.hpp"
#include "dialogic/metrics.hpp"
#include "test_support.hpp"

using namespace dialogic;
using namespace dialogic::metrics;

namespace {

ConfusionMatrix matrix(std::vector<std::vector<std::size_t>> counts) {
  ConfusionMatrix m;
  for (std::size_t i = 0; i < counts.size(); ++i) m.labels.push_back("L" + std::to_string(i));
  m.counts = std::move(counts);
  return m;
}

CategoryAssignment assign(std::string ep, Category c) { return {std::move(ep), c, "r", {}}; }

}  // namespace

TEST_CASE("confusion matrix construction") {
  auto m = confusion_matrix({"A", "B"}, {"A", "B"}, {"A", "B"});
  CHECK(m.counts == std::vector<std::vector<std::size_t>>{{1, 0}, {0, 1}});
  m = confusion_matrix({"A", "A"}, {"B", "B"}, {"A", "B"});
  CHECK(m.counts[0][1] == 2);
  CHECK(m.total() == 2);

  std::vector<std::string> labels{"a", "b", "c", "d"};
  std::vector<std::string> same;
  for (int i = 0; i < 50; ++i) same.push_back(labels[i % 4]);
  CHECK(confusion_matrix(same, same, labels).trace() == 50);

  CHECK_THROWS_AS(confusion_matrix({"A"}, {"A", "B"}, {"A", "B"}), Error);
  try {
    confusion_matrix({"A"}, {"Z"}, {"A", "B"});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownLabel);
  }
}

TEST_CASE("kappa hand case and edge cases") {
  CHECK(cohen_kappa(matrix({{20, 5}, {10, 15}})) == 0.4);
  CHECK(cohen_kappa(matrix({{3, 0, 0}, {0, 7, 0}, {0, 0, 1}})) == 1.0);
  CHECK(cohen_kappa(matrix({{9, 0}, {0, 0}})) == 1.0);
  try {
    cohen_kappa(matrix({{0, 0}, {0, 0}}));
    FAIL("empty matrix accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyMatrix);
  }
  CHECK(strong_agreement(0.76));
  CHECK_FALSE(strong_agreement(0.75));
}

TEST_CASE("kappa matches a pairwise computation on random vectors") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = std::uniform_int_distribution<std::size_t>(1, 50)(rng);
    int k = std::uniform_int_distribution<int>(2, 4)(rng);
    std::vector<std::string> labels;
    for (int i = 0; i < k; ++i) labels.push_back(std::string(1, static_cast<char>('a' + i)));
    std::vector<std::string> a, b;
    for (std::size_t i = 0; i < n; ++i) {
      a.push_back(labels[std::uniform_int_distribution<int>(0, k - 1)(rng)]);
      b.push_back(labels[std::uniform_int_distribution<int>(0, k - 1)(rng)]);
    }
    auto m = confusion_matrix(a, b, labels);
    double expected = testing::brute_kappa(a, b);
    if (!std::isfinite(expected)) {
      // one label on both sides: perfect agreement by construction
      CHECK(a == b);
      CHECK(cohen_kappa(m) == 1.0);
      continue;
    }
    CHECK(std::abs(cohen_kappa(m) - expected) < 1e-12);
    // symmetry and relabelling
    CHECK(std::abs(cohen_kappa(confusion_matrix(b, a, labels)) - expected) < 1e-12);
    std::vector<std::string> shuffled = labels;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(std::abs(cohen_kappa(confusion_matrix(a, b, shuffled)) - expected) < 1e-12);
  }
}

TEST_CASE("independent coders give kappa near zero") {
  std::mt19937_64 rng(2024);
  std::vector<std::string> labels{"a", "b", "c", "d"};
  std::discrete_distribution<int> skew{5, 3, 1, 1};
  std::vector<std::string> a, b;
  for (int i = 0; i < 20000; ++i) {
    a.push_back(labels[skew(rng)]);
    b.push_back(labels[skew(rng)]);
  }
  CHECK(std::abs(cohen_kappa(confusion_matrix(a, b, labels))) < 0.05);
}

TEST_CASE("kappa is one only for diagonal matrices") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::vector<std::size_t>> c(3, std::vector<std::size_t>(3));
    bool diagonal = true;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        c[i][j] = std::uniform_int_distribution<std::size_t>(0, i == j ? 9 : (trial % 2 ? 0 : 2))(rng);
        if (i != j && c[i][j]) diagonal = false;
      }
    auto m = matrix(c);
    if (m.total() == 0) continue;
    double k;
    try {
      k = cohen_kappa(m);
    } catch (const Error&) {
      continue;
    }
    CHECK((k == 1.0) == diagonal);
  }
}

TEST_CASE("per-category precision") {
  auto p = precision_per_category(
      {assign("e1", Category::CriticalInquiry), assign("e2", Category::CriticalInquiry),
       assign("e3", Category::CollaborativeConstruction)},
      {assign("e1", Category::CriticalInquiry), assign("e2", Category::CollaborativeConstruction),
       assign("e3", Category::CollaborativeConstruction)});
  CHECK(p.at(Category::CriticalInquiry) == 0.5);
  CHECK(p.at(Category::CollaborativeConstruction) == 1.0);
  CHECK_FALSE(p.contains(Category::InstructionalSupportive));

  std::vector<CategoryAssignment> same{assign("a", Category::ReflectiveMetacognitive), assign("b", Category::CriticalInquiry)};
  for (const auto& [c, v] : precision_per_category(same, same)) CHECK(v == 1.0);
}

TEST_CASE("agreement report") {
  std::vector<EpisodeLabels> gold{{"e1", {Category::CriticalInquiry}},
                                  {"e2", {Category::CollaborativeConstruction}},
                                  {"e3", {Category::CollaborativeConstruction}}};
  std::vector<EpisodeLabels> pred{{"e1", {Category::CriticalInquiry}},
                                  {"e2", {Category::CriticalInquiry}},
                                  {"e3", {Category::CollaborativeConstruction}}};
  auto r = agreement(gold, pred, true);
  CHECK(r.n_items == 3);
  CHECK(r.per_category.at(Category::CriticalInquiry).precision == 0.5);
  CHECK(r.per_category.at(Category::CollaborativeConstruction).precision == 1.0);
  CHECK(r.per_category.at(Category::CollaborativeConstruction).recall == 0.5);
  CHECK_FALSE(r.per_category.at(Category::InstructionalSupportive).precision.has_value());
  std::size_t support = 0;
  for (const auto& [c, s] : r.per_category) support += s.support;
  CHECK(support + r.unlabelled == r.n_items);
  // gold/pred over labels {CI, CC}: [[1,0],[1,1]] -> p_o=2/3, p_e=(1*2+2*1)/9
  double po = 2.0 / 3, pe = 4.0 / 9;
  CHECK(*r.overall_kappa == doctest::Approx((po - pe) / (1 - pe)).epsilon(1e-12));

  auto perfect = agreement(gold, gold, false);
  for (const auto& [c, s] : perfect.per_category) {
    if (s.precision) CHECK(*s.precision == 1.0);
    CHECK(s.kappa == 1.0);
  }
  CHECK(perfect.overall_kappa == 1.0);

  std::string text = format_agreement_text(r);
  std::size_t last = 0;
  for (Category c : kAllCategories) {
    auto pos = text.find(std::string(display_name(c)));
    REQUIRE(pos != std::string::npos);
    CHECK(pos > last);
    last = pos;
  }
  CHECK(text.find("Cohen's kappa") != std::string::npos);

  auto j = nlohmann::json::parse(format_agreement_json(r));
  CHECK(j["n_items"] == 3);
  CHECK(j["per_category"].size() == 4);
  CHECK(j["strong_agreement_threshold"] == 0.75);
  CHECK_FALSE(j.contains("timing"));
}

TEST_CASE("agreement rejects different episode universes") {
  std::vector<EpisodeLabels> gold{{"e1", {}}, {"e2", {}}};
  for (auto pred : {std::vector<EpisodeLabels>{{"e1", {}}}, std::vector<EpisodeLabels>{{"e1", {}}, {"e3", {}}},
                    std::vector<EpisodeLabels>{{"e1", {}}, {"e1", {}}, {"e2", {}}}}) {
    try {
      agreement(gold, pred, false);
      FAIL("mismatch accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::EpisodeUniverseMismatch);
    }
  }
}

TEST_CASE("timing summary") {
  TimingStats s;
  s.wall_time = std::chrono::minutes(10);
  s.items = 100;
  s.per_item.assign(100, std::chrono::seconds(6));
  auto t = timing_summary(s, std::chrono::minutes(240));
  CHECK(t.wall_minutes == doctest::Approx(10.0));
  CHECK(t.items_per_minute == doctest::Approx(10.0));
  CHECK(*t.reduction == doctest::Approx(1.0 - 10.0 / 240.0).epsilon(1e-12));
  CHECK(format_timing_text(t).find("95.8%") != std::string::npos);

  auto none = timing_summary(s);
  CHECK_FALSE(none.reduction.has_value());
  auto j = nlohmann::json::parse(format_agreement_json(AgreementReport{}, none));
  CHECK_FALSE(j["timing"].contains("reduction"));
  CHECK_FALSE(j["timing"].contains("baseline_minutes"));
}
