#include "dialogic/engine.hpp"

#include <algorithm>
#include <string_view>

#include "dialogic/error.hpp"

namespace dialogic::engine {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

void require_coded(const Episode& episode) {
  std::vector<std::size_t> missing;
  for (const Turn& t : episode.turns) {
    if (!t.code) missing.push_back(t.index);
  }
  if (!missing.empty()) throw Error::uncoded(std::move(missing));
}

std::size_t distinct_students(const Episode& episode) {
  std::vector<std::string_view> seen;
  for (const Turn& t : episode.turns) {
    if (t.speaker.role != SpeakerRole::Student) continue;
    if (std::find(seen.begin(), seen.end(), t.speaker.id) == seen.end()) seen.push_back(t.speaker.id);
  }
  return seen.size();
}

bool holds_unchecked(const Condition& condition, const Episode& ep) {
  const auto& turns = ep.turns;
  return std::visit(
      Overloaded{
          [&](const MinTurns& c) { return turns.size() >= c.n; },
          [&](const ContainsAnyOf& c) {
            return std::any_of(turns.begin(), turns.end(), [&](const Turn& t) { return c.codes.contains(*t.code); });
          },
          [&](const RequiresGroups& c) {
            return std::all_of(c.groups.begin(), c.groups.end(), [&](const CodeSet& g) {
              return std::any_of(turns.begin(), turns.end(), [&](const Turn& t) { return g.contains(*t.code); });
            });
          },
          [&](const ConsecutivePair& c) {
            for (std::size_t i = 0; i + 1 < turns.size(); ++i) {
              if (*turns[i].code == c.first && *turns[i + 1].code == c.second) return true;
            }
            return false;
          },
          [&](const UnansweredInvitation& c) { return !turns.empty() && *turns.back().code == c.code; },
          [&](const DistinctStudents& c) { return distinct_students(ep) >= c.min; },
          [&](const InvolvesTeacher& c) {
            bool any_teacher = std::any_of(turns.begin(), turns.end(),
                                           [](const Turn& t) { return t.speaker.role == SpeakerRole::Teacher; });
            return any_teacher == c.present;
          },
          [&](const All& c) {
            return std::all_of(c.children.begin(), c.children.end(),
                               [&](const Condition& child) { return holds_unchecked(child, ep); });
          },
          [&](const Any& c) {
            return std::any_of(c.children.begin(), c.children.end(),
                               [&](const Condition& child) { return holds_unchecked(child, ep); });
          },
      },
      condition.node);
}

void merge(Evidence& into, const std::string& key, std::vector<std::size_t> indices) {
  auto& slot = into[key];
  slot.insert(slot.end(), indices.begin(), indices.end());
  std::sort(slot.begin(), slot.end());
  slot.erase(std::unique(slot.begin(), slot.end()), slot.end());
}

void merge(Evidence& into, const Evidence& from) {
  for (const auto& [key, indices] : from) merge(into, key, indices);
}

// Witness turns for a leaf. Returns whether the leaf holds.
bool leaf_witnesses(const Condition& leaf, const Episode& ep, std::vector<std::size_t>& out) {
  const auto& turns = ep.turns;
  auto collect = [&](auto&& pred) {
    for (const Turn& t : turns) {
      if (pred(t)) out.push_back(t.index);
    }
  };
  return std::visit(
      Overloaded{
          [&](const MinTurns& c) {
            if (turns.size() < c.n) return false;
            collect([](const Turn&) { return true; });
            return true;
          },
          [&](const ContainsAnyOf& c) {
            collect([&](const Turn& t) { return c.codes.contains(*t.code); });
            return !out.empty();
          },
          [&](const RequiresGroups& c) {
            bool all_hit = true;
            for (const CodeSet& g : c.groups) {
              std::size_t before = out.size();
              collect([&](const Turn& t) { return g.contains(*t.code); });
              all_hit = all_hit && out.size() > before;
            }
            return all_hit;
          },
          [&](const ConsecutivePair& c) {
            for (std::size_t i = 0; i + 1 < turns.size(); ++i) {
              if (*turns[i].code == c.first && *turns[i + 1].code == c.second) {
                out.push_back(turns[i].index);
                out.push_back(turns[i + 1].index);
              }
            }
            return !out.empty();
          },
          [&](const UnansweredInvitation& c) {
            if (turns.empty() || *turns.back().code != c.code) return false;
            out.push_back(turns.back().index);
            return true;
          },
          [&](const DistinctStudents& c) {
            if (distinct_students(ep) < c.min) return false;
            collect([](const Turn& t) { return t.speaker.role == SpeakerRole::Student; });
            return true;
          },
          [&](const InvolvesTeacher& c) {
            collect([](const Turn& t) { return t.speaker.role == SpeakerRole::Teacher; });
            // teacher(false) holds vacuously with empty evidence.
            return out.empty() != c.present;
          },
          [&](const All&) { return false; },
          [&](const Any&) { return false; },
      },
      leaf.node);
}

bool evaluate(const Condition& condition, const Episode& ep, Evidence& evidence) {
  if (condition.is_leaf()) {
    std::vector<std::size_t> witnesses;
    bool ok = leaf_witnesses(condition, ep, witnesses);
    // teacher(false) has no witnesses but is still recorded as satisfied.
    if (ok) merge(evidence, print_condition(condition), std::move(witnesses));
    return ok;
  }
  const bool conjunctive = std::holds_alternative<All>(condition.node);
  const auto& children = conjunctive ? std::get<All>(condition.node).children : std::get<Any>(condition.node).children;
  bool result = conjunctive;
  Evidence satisfied;
  for (const Condition& child : children) {
    Evidence local;
    bool ok = evaluate(child, ep, local);
    if (ok) merge(satisfied, local);
    result = conjunctive ? (result && ok) : (result || ok);
  }
  merge(evidence, satisfied);
  return result;
}

}  // namespace

std::vector<Episode> segment(const Transcript& transcript, SegmentPolicy policy) {
  std::vector<Episode> out;
  if (transcript.turns.empty()) return out;
  if (policy == SegmentPolicy::SingleEpisode) {
    out.push_back(Episode{std::string(kSingleEpisodeTopic), transcript.turns});
    return out;
  }
  std::vector<std::size_t> missing;
  for (const Turn& t : transcript.turns) {
    if (!t.topic) missing.push_back(t.index);
  }
  if (!missing.empty()) {
    Error e(ErrorKind::MissingTopicIds, std::to_string(missing.size()) +
                                            " turn(s) lack a topic id (first at index " +
                                            std::to_string(missing.front()) + "); use the single-episode policy");
    e.with_indices(std::move(missing));
    throw e;
  }
  for (const Turn& t : transcript.turns) {
    if (out.empty() || out.back().topic != *t.topic) out.push_back(Episode{*t.topic, {}});
    out.back().turns.push_back(t);
  }
  return out;
}

bool holds(const Condition& condition, const Episode& episode) {
  require_coded(episode);
  return holds_unchecked(condition, episode);
}

MatchResult eval_condition(const Condition& condition, const Episode& episode) {
  require_coded(episode);
  MatchResult result;
  result.satisfied = evaluate(condition, episode, result.evidence);
  return result;
}

std::vector<CategoryAssignment> classify(const Episode& episode, const RuleBase& rb, LabelMode mode) {
  require_coded(episode);
  std::vector<const Rule*> fired;
  for (const Rule& rule : rb.rules()) {
    if (holds_unchecked(rule.condition, episode)) fired.push_back(&rule);
  }
  // rb.rules() is already id-ordered, so a stable sort breaks priority ties by id.
  std::stable_sort(fired.begin(), fired.end(), [](const Rule* a, const Rule* b) { return a->priority < b->priority; });
  if (mode == LabelMode::SingleLabel && fired.size() > 1) fired.resize(1);

  std::vector<CategoryAssignment> out;
  out.reserve(fired.size());
  for (const Rule* rule : fired) {
    CategoryAssignment a;
    a.episode_topic = episode.topic;
    a.category = rule->category;
    a.rule_id = rule->id;
    evaluate(rule->condition, episode, a.evidence);
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<PatternMatch> match_pattern(const Episode& episode, const SequencePattern& pattern, MatchOptions options) {
  require_coded(episode);
  std::vector<PatternMatch> out;
  const auto& turns = episode.turns;
  const std::size_t n = turns.size();
  const std::size_t m = pattern.positions.size();
  if (m == 0 || n < m) return out;

  std::vector<std::size_t> bound(m);
  // Earliest-first depth-first binding of positions k.. after turn `prev`.
  auto bind = [&](auto&& self, std::size_t k, std::size_t prev) -> bool {
    if (k == m) return true;
    const std::size_t last = std::min(n - 1, prev + pattern.max_gap + 1);
    for (std::size_t j = prev + 1; j <= last; ++j) {
      if (!pattern.positions[k].contains(*turns[j].code)) continue;
      bound[k] = j;
      if (self(self, k + 1, j)) return true;
    }
    return false;
  };

  for (std::size_t s = 0; s < n; ++s) {
    if (!pattern.positions[0].contains(*turns[s].code)) continue;
    bound[0] = s;
    if (!bind(bind, 1, s)) continue;
    PatternMatch match{pattern.id, {}};
    match.turn_indices.reserve(m);
    for (std::size_t pos : bound) match.turn_indices.push_back(turns[pos].index);
    out.push_back(std::move(match));
    if (!options.all_matches) s = bound.back();
  }
  return out;
}

SequenceProfile sequence_profile(const std::vector<Episode>& episodes, const RuleBase& rb, MatchOptions options) {
  SequenceProfile profile;
  for (Category c : kAllCategories) profile.totals[c] = 0;
  for (const SequencePattern& p : rb.sequences()) profile.counts[p.id] = 0;
  for (const Episode& ep : episodes) {
    for (const SequencePattern& p : rb.sequences()) {
      std::size_t found = match_pattern(ep, p, options).size();
      profile.counts[p.id] += found;
      profile.totals[p.category] += found;
    }
  }
  return profile;
}

SequenceProfile sequence_profile(const Transcript& transcript, const RuleBase& rb, SegmentPolicy policy,
                                 MatchOptions options) {
  return sequence_profile(segment(transcript, policy), rb, options);
}

}  // namespace dialogic::engine
