#include "dialogic/metrics.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include <fmt/format.h>
#include <json.hpp>

#include "dialogic/error.hpp"

namespace dialogic::metrics {
namespace {

using ordered_json = nlohmann::ordered_json;

CategoryScores scores_for(const AgreementReport& report, Category c) {
  auto it = report.per_category.find(c);
  return it == report.per_category.end() ? CategoryScores{} : it->second;
}

// 2x2 one-vs-rest table for category c over the shared episode universe.
ConfusionMatrix binarized(const std::vector<std::set<Category>>& gold, const std::vector<std::set<Category>>& pred,
                          Category c) {
  ConfusionMatrix m{{"yes", "no"}, {{0, 0}, {0, 0}}};
  for (std::size_t i = 0; i < gold.size(); ++i) {
    std::size_t r = gold[i].contains(c) ? 0 : 1;
    std::size_t k = pred[i].contains(c) ? 0 : 1;
    ++m.counts[r][k];
  }
  return m;
}

std::optional<double> safe_kappa(const ConfusionMatrix& m) {
  if (m.total() == 0) return std::nullopt;
  try {
    return cohen_kappa(m);
  } catch (const Error&) {
    return std::nullopt;
  }
}

ordered_json optional_number(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

std::string percent(const std::optional<double>& v) { return v ? fmt::format("{:.1f}%", *v * 100.0) : "n/a"; }

std::string decimal(const std::optional<double>& v) { return v ? fmt::format("{:.3f}", *v) : "n/a"; }

}  // namespace

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (const auto& row : counts) {
    for (std::size_t v : row) t += v;
  }
  return t;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t t = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
  return t;
}

std::size_t ConfusionMatrix::row_sum(std::size_t i) const {
  std::size_t t = 0;
  for (std::size_t v : counts[i]) t += v;
  return t;
}

std::size_t ConfusionMatrix::col_sum(std::size_t j) const {
  std::size_t t = 0;
  for (const auto& row : counts) t += row[j];
  return t;
}

ConfusionMatrix confusion_matrix(const std::vector<std::string>& gold, const std::vector<std::string>& predicted,
                                 const std::vector<std::string>& labels) {
  if (gold.size() != predicted.size()) {
    throw Error(ErrorKind::LengthMismatch,
                fmt::format("gold has {} items, predicted has {}", gold.size(), predicted.size()));
  }
  std::unordered_map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < labels.size(); ++i) slot.emplace(labels[i], i);
  auto lookup = [&slot](const std::string& label) {
    auto it = slot.find(label);
    if (it == slot.end()) {
      Error e(ErrorKind::UnknownLabel, "label '" + label + "' is not in the label list");
      e.with_label(label);
      throw e;
    }
    return it->second;
  };
  ConfusionMatrix m{labels, std::vector<std::vector<std::size_t>>(labels.size(), std::vector<std::size_t>(labels.size(), 0))};
  for (std::size_t k = 0; k < gold.size(); ++k) ++m.counts[lookup(gold[k])][lookup(predicted[k])];
  return m;
}

double cohen_kappa(const ConfusionMatrix& matrix) {
  const std::size_t total = matrix.total();
  if (total == 0) throw Error(ErrorKind::EmptyMatrix, "confusion matrix has no items");
  // Same quantity as (p_o - p_e) / (1 - p_e) scaled by n^2, so the inputs of
  // the single division stay exact integers.
  const double n = static_cast<double>(total);
  const double agree = static_cast<double>(matrix.trace());
  double chance = 0.0;
  for (std::size_t i = 0; i < matrix.counts.size(); ++i) {
    chance += static_cast<double>(matrix.row_sum(i)) * static_cast<double>(matrix.col_sum(i));
  }
  const double denom = n * n - chance;
  if (denom == 0.0) {
    if (agree == n) return 1.0;
    throw Error(ErrorKind::DegenerateExpectedAgreement, "expected agreement is 1 but observed agreement is not");
  }
  return (n * agree - chance) / denom;
}

std::map<Category, double> precision_per_category(const std::vector<CategoryAssignment>& predicted,
                                                  const std::vector<CategoryAssignment>& gold) {
  std::set<std::pair<std::string, Category>> gold_pairs;
  for (const auto& a : gold) gold_pairs.emplace(a.episode_topic, a.category);
  std::set<std::pair<std::string, Category>> pred_pairs;
  for (const auto& a : predicted) pred_pairs.emplace(a.episode_topic, a.category);

  std::map<Category, std::size_t> hits;
  std::map<Category, std::size_t> assigned;
  for (const auto& pair : pred_pairs) {
    ++assigned[pair.second];
    if (gold_pairs.contains(pair)) ++hits[pair.second];
  }
  std::map<Category, double> out;
  for (const auto& [c, denom] : assigned) out[c] = static_cast<double>(hits[c]) / static_cast<double>(denom);
  return out;
}

AgreementReport agreement(const std::vector<EpisodeLabels>& gold, const std::vector<EpisodeLabels>& predicted,
                          bool single_label) {
  std::map<std::string, std::set<Category>> gold_by_id;
  for (const auto& e : gold) {
    if (!gold_by_id.emplace(e.episode, std::set<Category>(e.categories.begin(), e.categories.end())).second) {
      throw Error(ErrorKind::EpisodeUniverseMismatch, "gold lists episode '" + e.episode + "' twice");
    }
  }
  std::map<std::string, std::set<Category>> pred_by_id;
  for (const auto& e : predicted) {
    if (!pred_by_id.emplace(e.episode, std::set<Category>(e.categories.begin(), e.categories.end())).second) {
      throw Error(ErrorKind::EpisodeUniverseMismatch, "prediction lists episode '" + e.episode + "' twice");
    }
  }
  for (const auto& [id, _] : gold_by_id) {
    if (!pred_by_id.contains(id)) {
      throw Error(ErrorKind::EpisodeUniverseMismatch, "episode '" + id + "' is missing from the prediction");
    }
  }
  for (const auto& [id, _] : pred_by_id) {
    if (!gold_by_id.contains(id)) {
      throw Error(ErrorKind::EpisodeUniverseMismatch, "episode '" + id + "' is missing from the gold labels");
    }
  }

  std::vector<std::set<Category>> g;
  std::vector<std::set<Category>> p;
  for (const auto& [id, cats] : gold_by_id) {
    g.push_back(cats);
    p.push_back(pred_by_id.at(id));
  }

  AgreementReport report;
  report.single_label = single_label;
  report.n_items = g.size();
  report.unlabelled = static_cast<std::size_t>(std::count_if(g.begin(), g.end(), [](const auto& s) { return s.empty(); }));

  for (Category c : kAllCategories) {
    CategoryScores s;
    std::size_t both = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      bool in_g = g[i].contains(c);
      bool in_p = p[i].contains(c);
      s.support += in_g;
      s.predicted += in_p;
      both += in_g && in_p;
    }
    if (s.predicted > 0) s.precision = static_cast<double>(both) / static_cast<double>(s.predicted);
    if (s.support > 0) s.recall = static_cast<double>(both) / static_cast<double>(s.support);
    if (s.precision && s.recall) {
      double sum = *s.precision + *s.recall;
      s.f1 = sum > 0.0 ? 2.0 * *s.precision * *s.recall / sum : 0.0;
    }
    s.kappa = safe_kappa(binarized(g, p, c));
    report.per_category[c] = s;
  }

  if (report.n_items > 0) {
    if (single_label) {
      // Multi-class kappa with "none" as a fifth label.
      std::vector<std::string> labels;
      for (Category c : kAllCategories) labels.emplace_back(to_string(c));
      labels.emplace_back("none");
      auto name = [](const std::set<Category>& s) { return s.empty() ? std::string("none") : std::string(to_string(*s.begin())); };
      std::vector<std::string> gl;
      std::vector<std::string> pl;
      for (std::size_t i = 0; i < g.size(); ++i) {
        gl.push_back(name(g[i]));
        pl.push_back(name(p[i]));
      }
      report.overall_kappa = safe_kappa(confusion_matrix(gl, pl, labels));
    } else {
      // Pooled binary decisions over the episode x category grid.
      ConfusionMatrix pooled{{"yes", "no"}, {{0, 0}, {0, 0}}};
      for (Category c : kAllCategories) {
        ConfusionMatrix m = binarized(g, p, c);
        for (std::size_t r = 0; r < 2; ++r) {
          for (std::size_t k = 0; k < 2; ++k) pooled.counts[r][k] += m.counts[r][k];
        }
      }
      report.overall_kappa = safe_kappa(pooled);
    }
  }
  return report;
}

TimingSummary timing_summary(const TimingStats& stats, std::optional<std::chrono::duration<double>> baseline) {
  TimingSummary s;
  const double wall_seconds = std::chrono::duration<double>(stats.wall_time).count();
  s.wall_minutes = wall_seconds / 60.0;
  s.items = stats.items;
  if (wall_seconds > 0.0) s.items_per_minute = static_cast<double>(stats.items) / s.wall_minutes;
  if (!stats.per_item.empty()) {
    double total_ms = 0.0;
    for (auto d : stats.per_item) total_ms += std::chrono::duration<double, std::milli>(d).count();
    s.mean_item_ms = total_ms / static_cast<double>(stats.per_item.size());
  }
  if (baseline && baseline->count() > 0.0) {
    s.baseline_minutes = baseline->count() / 60.0;
    s.reduction = 1.0 - wall_seconds / baseline->count();
  }
  return s;
}

std::string format_timing_text(const TimingSummary& summary) {
  std::string out;
  out += fmt::format("Wall time:   {:.2f} min\n", summary.wall_minutes);
  out += fmt::format("Turns coded: {}\n", summary.items);
  out += fmt::format("Throughput:  {:.1f} turns/min\n", summary.items_per_minute);
  out += fmt::format("Mean/turn:   {:.2f} ms\n", summary.mean_item_ms);
  if (summary.reduction) {
    out += fmt::format("Reduction:   {:.1f}% against a {:.1f} min manual baseline\n", *summary.reduction * 100.0,
                       *summary.baseline_minutes);
  }
  return out;
}

std::string format_agreement_text(const AgreementReport& report) {
  std::string out = fmt::format("Agreement report ({}-label, {} episodes)\n\n", report.single_label ? "single" : "multi",
                                report.n_items);
  out += fmt::format("{:<42}{:>11}{:>9}{:>9}{:>15}{:>8}{:>9}\n", "Dialogue category", "Precision", "Recall", "F1",
                     "Cohen's kappa", "Strong", "Support");
  for (Category c : kAllCategories) {
    const CategoryScores s = scores_for(report, c);
    std::string strong = s.kappa ? (strong_agreement(*s.kappa) ? "yes" : "no") : "n/a";
    out += fmt::format("{:<42}{:>11}{:>9}{:>9}{:>15}{:>8}{:>9}\n", display_name(c), percent(s.precision),
                       percent(s.recall), decimal(s.f1), decimal(s.kappa), strong, s.support);
  }
  out += "\n";
  if (report.overall_kappa) {
    out += fmt::format("Overall kappa: {:.3f} ({})\n", *report.overall_kappa,
                       strong_agreement(*report.overall_kappa) ? "strong agreement" : "below strong agreement");
  } else {
    out += "Overall kappa: n/a\n";
  }
  out += fmt::format("Strong agreement means kappa > {:.2f}. Recall and F1 are supplementary to precision.\n",
                     kStrongAgreement);
  return out;
}

std::string format_agreement_json(const AgreementReport& report, const std::optional<TimingSummary>& timing) {
  ordered_json j;
  j["mode"] = report.single_label ? "single" : "multi";
  j["n_items"] = report.n_items;
  j["unlabelled"] = report.unlabelled;
  j["overall_kappa"] = optional_number(report.overall_kappa);
  j["overall_strong_agreement"] =
      report.overall_kappa ? ordered_json(strong_agreement(*report.overall_kappa)) : ordered_json(nullptr);
  j["strong_agreement_threshold"] = kStrongAgreement;
  ordered_json cats = ordered_json::array();
  for (Category c : kAllCategories) {
    const CategoryScores s = scores_for(report, c);
    ordered_json row;
    row["category"] = to_string(c);
    row["name"] = display_name(c);
    row["precision"] = optional_number(s.precision);
    row["kappa"] = optional_number(s.kappa);
    row["strong_agreement"] = s.kappa ? ordered_json(strong_agreement(*s.kappa)) : ordered_json(nullptr);
    row["support"] = s.support;
    row["predicted"] = s.predicted;
    row["recall"] = optional_number(s.recall);
    row["f1"] = optional_number(s.f1);
    cats.push_back(std::move(row));
  }
  j["per_category"] = std::move(cats);
  if (timing) {
    ordered_json t;
    t["wall_minutes"] = timing->wall_minutes;
    t["items"] = timing->items;
    t["items_per_minute"] = timing->items_per_minute;
    t["mean_item_ms"] = timing->mean_item_ms;
    if (timing->reduction) {
      t["baseline_minutes"] = *timing->baseline_minutes;
      t["reduction"] = *timing->reduction;
    }
    j["timing"] = std::move(t);
  }
  return j.dump(2) + "\n";
}

}  // namespace dialogic::metrics
