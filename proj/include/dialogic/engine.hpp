#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "dialogic/model.hpp"
#include "dialogic/rulebase.hpp"

namespace dialogic::engine {

enum class SegmentPolicy {
  ExplicitTopics,  // maximal runs of equal topic id
  SingleEpisode,   // the whole transcript as one episode, topic "all"
};

enum class LabelMode {
  MultiLabel,   // every fired rule
  SingleLabel,  // the fired rule with the lowest priority
};

inline constexpr std::string_view kSingleEpisodeTopic = "all";

// Throws Error{MissingTopicIds} under ExplicitTopics when a turn has no topic.
std::vector<Episode> segment(const Transcript& transcript, SegmentPolicy policy);

struct MatchResult {
  bool satisfied = false;
  Evidence evidence;  // satisfied leaves only; key is the leaf's canonical text
};

// Throws Error{UncodedTurn} if any turn in the episode is uncoded.
MatchResult eval_condition(const Condition& condition, const Episode& episode);

// Truth value only, no evidence. Same preconditions as eval_condition.
bool holds(const Condition& condition, const Episode& episode);

std::vector<CategoryAssignment> classify(const Episode& episode, const RuleBase& rb,
                                         LabelMode mode = LabelMode::MultiLabel);

struct PatternMatch {
  std::string pattern_id;
  std::vector<std::size_t> turn_indices;  // transcript indices, one per position

  bool operator==(const PatternMatch&) const = default;
};

struct MatchOptions {
  // Report the earliest binding from every start position instead of the
  // non-overlapping leftmost-greedy scan.
  bool all_matches = false;
};

// Leftmost-greedy non-overlapping scan. At each start position the
// lexicographically smallest binding within the gap limit is taken; scanning
// resumes after the last bound turn.
std::vector<PatternMatch> match_pattern(const Episode& episode, const SequencePattern& pattern,
                                        MatchOptions options = {});

struct SequenceProfile {
  std::map<std::string, std::size_t> counts;  // every pattern id, zero included
  std::map<Category, std::size_t> totals;     // every category, zero included

  bool operator==(const SequenceProfile&) const = default;
};

SequenceProfile sequence_profile(const Transcript& transcript, const RuleBase& rb, SegmentPolicy policy,
                                 MatchOptions options = {});
SequenceProfile sequence_profile(const std::vector<Episode>& episodes, const RuleBase& rb,
                                 MatchOptions options = {});

}  // namespace dialogic::engine
