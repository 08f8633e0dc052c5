#pragma once

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "profiler/aggregation.hpp"
#include "profiler/annotation.hpp"
#include "profiler/taxonomy.hpp"

namespace profiler {

struct RewardError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoRollouts : RewardError {
  using RewardError::RewardError;
};
struct MissingReference : RewardError {
  using RewardError::RewardError;
};

/// Per-record confidence levels fixed by an offline pass; used as reward
/// weights for the whole training run.
struct ReferenceConfidence {
  std::string record_id;
  std::map<std::string, int> levels;  // dimension id -> 1..5
  bool frozen = false;
  std::string fingerprint;
};

struct QuasiGroundTruth {
  std::string record_id;
  std::map<std::string, std::string> tags;
};

struct DimensionReward {
  bool well_formed = false;
  std::optional<bool> matched;  // absent when malformed
  double weight = 0;            // w(ref level); 0 when malformed
  double reward = -1;           // in [-1, 1]
};

struct RewardBreakdown {
  std::string record_id;
  int rollout_index = 0;
  std::map<std::string, DimensionReward> dimensions;
  double total = 0;  // in [-K, K]
};

enum class RewardMode { frozen, self_confidence };

RewardMode reward_mode_from_string(std::string_view s);
const char* to_string(RewardMode m);

/// Linear confidence-to-weight map: 1..5 onto 0.2..1.0 exactly.
double confidence_weight(int level);

/// Confidence-weighted vote over the well-formed rollouts per dimension,
/// aggregation tie-break included. Dimensions with zero well-formed rollouts
/// vote NA.
QuasiGroundTruth quasi_gt(std::span<const ParsedAnnotation> rollouts, const Taxonomy& taxonomy);

/// Per dimension: malformed scores a flat -1; otherwise
/// w(ref) * (+1 on match with the quasi-ground-truth, -1 on mismatch).
/// A dimension missing from the reference defaults to level 3 with a warning.
RewardBreakdown reward_rollout(const ParsedAnnotation& rollout, const QuasiGroundTruth& qgt,
                               const ReferenceConfidence& ref, const Taxonomy& taxonomy);

/// Parses every rollout text, computes the quasi-ground-truth once, then
/// rewards each rollout against it. self mode substitutes each rollout's own
/// parsed confidence for the reference level.
std::vector<RewardBreakdown> reward_batch(const std::string& record_id,
                                          const std::vector<std::string>& rollout_texts,
                                          const ReferenceConfidence& ref, RewardMode mode,
                                          const Taxonomy& taxonomy);

}  // namespace profiler
