#include "profiler/reward.hpp"

#include <iostream>

namespace profiler {

RewardMode reward_mode_from_string(std::string_view s) {
  if (s == "frozen") return RewardMode::frozen;
  if (s == "self") return RewardMode::self_confidence;
  throw RewardError("unknown reward mode: " + std::string(s));
}

const char* to_string(RewardMode m) {
  return m == RewardMode::frozen ? "frozen" : "self";
}

double confidence_weight(int level) {
  if (!is_valid_level(level)) throw RewardError("confidence level out of range");
  return level / 5.0;
}

QuasiGroundTruth quasi_gt(std::span<const ParsedAnnotation> rollouts, const Taxonomy& taxonomy) {
  if (rollouts.empty()) throw NoRollouts("quasi-ground-truth over zero rollouts");
  QuasiGroundTruth out;
  out.record_id = rollouts.front().record_id;
  for (const auto& dim : taxonomy.dimensions()) {
    VoteTally tally;
    tally.dimension_id = dim.id;
    for (const auto& r : rollouts) {
      const auto* raw = r.dimension(dim.id);
      if (!raw || !raw->well_formed) continue;  // malformed text carries no vote
      tally.scores[raw->raw_tag] += static_cast<double>(*verbal_to_level(raw->raw_score));
      ++tally.m_samples;
    }
    if (tally.scores.empty()) {
      out.tags[dim.id] = dim.na_tag;
    } else {
      out.tags[dim.id] = vote(tally, dim).voted_tag;
    }
  }
  return out;
}

RewardBreakdown reward_rollout(const ParsedAnnotation& rollout, const QuasiGroundTruth& qgt,
                               const ReferenceConfidence& ref, const Taxonomy& taxonomy) {
  RewardBreakdown out;
  out.record_id = rollout.record_id;
  out.rollout_index = rollout.sample_index;
  for (const auto& dim : taxonomy.dimensions()) {
    DimensionReward dr;
    const auto* raw = rollout.dimension(dim.id);
    if (raw && raw->well_formed) {
      int ref_level = 3;
      if (auto it = ref.levels.find(dim.id); it != ref.levels.end()) {
        ref_level = it->second;
      } else {
        std::cerr << "warning: no reference confidence for " << rollout.record_id << "/"
                  << dim.id << ", defaulting to level 3\n";
      }
      dr.well_formed = true;
      dr.matched = raw->raw_tag == qgt.tags.at(dim.id);
      dr.weight = confidence_weight(ref_level);
      dr.reward = dr.weight * (*dr.matched ? 1.0 : -1.0);
    } else {
      dr.well_formed = false;
      dr.reward = -1.0;  // flat format penalty, not confidence-weighted
    }
    out.total += dr.reward;
    out.dimensions.emplace(dim.id, dr);
  }
  return out;
}

std::vector<RewardBreakdown> reward_batch(const std::string& record_id,
                                          const std::vector<std::string>& rollout_texts,
                                          const ReferenceConfidence& ref, RewardMode mode,
                                          const Taxonomy& taxonomy) {
  if (rollout_texts.empty()) throw NoRollouts("reward batch with zero rollouts");
  if (mode == RewardMode::frozen && !ref.frozen)
    throw MissingReference("frozen mode requires a frozen reference for record " + record_id);

  std::vector<ParsedAnnotation> parsed;
  parsed.reserve(rollout_texts.size());
  for (std::size_t i = 0; i < rollout_texts.size(); ++i)
    parsed.push_back(parse_annotation(rollout_texts[i], taxonomy, record_id,
                                      static_cast<int>(i)));

  QuasiGroundTruth qgt = quasi_gt(parsed, taxonomy);

  std::vector<RewardBreakdown> out;
  out.reserve(parsed.size());
  for (const auto& rollout : parsed) {
    if (mode == RewardMode::self_confidence) {
      ReferenceConfidence self_ref;
      self_ref.record_id = record_id;
      for (const auto& raw : rollout.dimensions) {
        if (raw.well_formed) self_ref.levels[raw.dimension_id] = *verbal_to_level(raw.raw_score);
      }
      out.push_back(reward_rollout(rollout, qgt, self_ref, taxonomy));
    } else {
      out.push_back(reward_rollout(rollout, qgt, ref, taxonomy));
    }
  }
  return out;
}

}  // namespace profiler
