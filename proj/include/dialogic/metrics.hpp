#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dialogic/model.hpp"

namespace dialogic::metrics {

// Rows are coder A (gold), columns coder B (predicted).
struct ConfusionMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<std::size_t>> counts;

  std::size_t total() const;
  std::size_t trace() const;
  std::size_t row_sum(std::size_t i) const;
  std::size_t col_sum(std::size_t j) const;
};

// Throws Error{LengthMismatch} or Error{UnknownLabel}.
ConfusionMatrix confusion_matrix(const std::vector<std::string>& gold, const std::vector<std::string>& predicted,
                                 const std::vector<std::string>& labels);

// kappa = (p_o - p_e) / (1 - p_e). Returns 1 when p_e == p_o == 1.
// Throws Error{EmptyMatrix} or Error{DegenerateExpectedAgreement}.
double cohen_kappa(const ConfusionMatrix& matrix);

inline constexpr double kStrongAgreement = 0.75;
inline bool strong_agreement(double kappa) { return kappa > kStrongAgreement; }

// One episode's labels as produced by a coder (tool or human). In
// single-label mode `categories` holds at most one entry.
struct EpisodeLabels {
  std::string episode;
  std::vector<Category> categories;
};

// Per category: |episodes given c by both| / |episodes given c by predicted|.
// Categories the prediction never uses are absent from the map.
std::map<Category, double> precision_per_category(const std::vector<CategoryAssignment>& predicted,
                                                  const std::vector<CategoryAssignment>& gold);

struct CategoryScores {
  std::optional<double> precision;
  std::optional<double> recall;  // reported in addition to precision
  std::optional<double> f1;
  std::optional<double> kappa;   // one-vs-rest over the episode universe
  std::size_t support = 0;       // episodes the gold side assigns this category
  std::size_t predicted = 0;     // episodes the predicted side assigns this category
};

struct AgreementReport {
  bool single_label = false;
  std::map<Category, CategoryScores> per_category;
  std::optional<double> overall_kappa;
  std::size_t n_items = 0;      // episodes in the shared universe
  std::size_t unlabelled = 0;   // gold episodes with no category
};

// Both sides must cover the same episode ids, else Error{EpisodeUniverseMismatch}.
AgreementReport agreement(const std::vector<EpisodeLabels>& gold, const std::vector<EpisodeLabels>& predicted,
                          bool single_label);

struct TimingStats {
  std::chrono::nanoseconds wall_time{0};
  std::size_t items = 0;
  std::vector<std::chrono::nanoseconds> per_item;
  std::size_t retries = 0;
};

struct TimingSummary {
  double wall_minutes = 0.0;
  std::size_t items = 0;
  double items_per_minute = 0.0;  // 0 when wall time is zero
  double mean_item_ms = 0.0;
  std::optional<double> baseline_minutes;
  std::optional<double> reduction;  // 1 - wall / baseline
};

TimingSummary timing_summary(const TimingStats& stats, std::optional<std::chrono::duration<double>> baseline = {});

std::string format_agreement_text(const AgreementReport& report);
std::string format_agreement_json(const AgreementReport& report, const std::optional<TimingSummary>& timing = {});
std::string format_timing_text(const TimingSummary& summary);

}  // namespace dialogic::metrics
