#include "profiler/aggregation.hpp"

#include <algorithm>
#include <cmath>

#include "profiler/util.hpp"

namespace profiler {

const char* to_string(VoteStrategy s) {
  switch (s) {
    case VoteStrategy::confidence_weighted:
      return "confidence_weighted";
    case VoteStrategy::majority:
      return "majority";
    case VoteStrategy::single_sample:
      return "single_sample";
  }
  return "?";
}

VoteStrategy strategy_from_string(std::string_view s) {
  if (s == "confidence_weighted") return VoteStrategy::confidence_weighted;
  if (s == "majority") return VoteStrategy::majority;
  if (s == "single_sample") return VoteStrategy::single_sample;
  throw AggregationError("unknown voting strategy: " + std::string(s));
}

VoteTally tally(std::span<const AnnotationSet> samples, const std::string& dimension_id,
                VoteStrategy strategy) {
  if (samples.empty()) throw EmptySampleList("tally over zero samples");
  for (const auto& s : samples) {
    if (s.record_id != samples.front().record_id)
      throw MixedRecordIds("samples mix record ids " + samples.front().record_id + " and " +
                           s.record_id);
  }
  VoteTally t;
  t.dimension_id = dimension_id;
  auto add = [&](const AnnotationSet& s) {
    const auto& ann = s.annotations.at(dimension_id);
    double w = strategy == VoteStrategy::majority ? 1.0 : static_cast<double>(ann.confidence);
    t.scores[ann.tag] += w;
  };
  if (strategy == VoteStrategy::single_sample) {
    add(samples.front());
    t.m_samples = 1;
  } else {
    for (const auto& s : samples) add(s);
    t.m_samples = static_cast<int>(samples.size());
  }
  return t;
}

VoteResult vote(const VoteTally& tally, const TaxonomyDimension& dim) {
  if (tally.scores.empty()) throw EmptySampleList("vote over empty tally");
  // Tie preference: NA first, then canonical tag order.
  auto preference = [&](const std::string& tag) -> std::size_t {
    if (dim.is_na(tag)) return 0;
    return 1 + dim.tag_index(tag).value_or(dim.tags.size());
  };
  const std::string* best = nullptr;
  double best_score = 0;
  for (const auto& [tag, score] : tally.scores) {
    if (!best || score > best_score ||
        (score == best_score && preference(tag) < preference(*best))) {
      best = &tag;
      best_score = score;
    }
  }
  VoteResult r;
  r.dimension_id = tally.dimension_id;
  r.voted_tag = *best;
  r.winning_score = best_score;
  return r;
}

std::string CalibrationTable::fingerprint() const {
  std::string repr = dimension_id;
  for (double b : boundaries) repr += "|" + std::to_string(b);
  repr += "|" + std::to_string(sample_count);
  return hex64(fnv1a(repr));
}

CalibrationTable fit_calibration(std::vector<double> scores, const std::string& dimension_id) {
  if (scores.size() < 5)
    throw TooFewSamples("calibration needs at least 5 scores, got " +
                        std::to_string(scores.size()));
  std::stable_sort(scores.begin(), scores.end());
  const std::size_t n = scores.size();
  // Bin sizes floor(n/5) or ceil(n/5); the first n%5 bins take the extra.
  std::size_t base = n / 5, rem = n % 5;
  CalibrationTable table;
  table.dimension_id = dimension_id;
  table.sample_count = static_cast<int>(n);
  std::size_t cum = 0;
  for (std::size_t b = 0; b < 4; ++b) {
    cum += base + (b < rem ? 1 : 0);
    table.boundaries[b] = scores[cum - 1];
  }
  return table;
}

int apply_calibration(const CalibrationTable& table, double raw) {
  if (table.boundaries[0] == table.boundaries[3] && raw == table.boundaries[0]) return 3;
  int below = 0;
  for (double b : table.boundaries) {
    if (b < raw) ++below;
  }
  return 1 + below;
}

RecordAggregate aggregate_record(std::span<const AnnotationSet> samples, const Taxonomy& taxonomy,
                                 VoteStrategy strategy,
                                 const std::map<std::string, CalibrationTable>* tables) {
  RecordAggregate out;
  for (const auto& dim : taxonomy.dimensions()) {
    VoteTally t = tally(samples, dim.id, strategy);
    VoteResult v = vote(t, dim);
    v.strategy = strategy;

    CalibratedConfidence conf;
    conf.dimension_id = dim.id;
    conf.raw_score = v.winning_score;
    const CalibrationTable* table = nullptr;
    if (tables) {
      auto it = tables->find(dim.id);
      if (it != tables->end()) table = &it->second;
    }
    if (table) {
      conf.level = apply_calibration(*table, v.winning_score);
      conf.table_ref = table->fingerprint();
    } else {
      int level = static_cast<int>(std::floor(v.winning_score / t.m_samples + 0.5));
      conf.level = std::clamp(level, kMinLevel, kMaxLevel);
    }

    // Evidence from the highest-confidence voter for the winning tag;
    // earliest sample index breaks ties.
    const DimensionAnnotation* chosen = nullptr;
    std::size_t limit = strategy == VoteStrategy::single_sample ? 1 : samples.size();
    for (std::size_t i = 0; i < limit; ++i) {
      const auto& ann = samples[i].annotations.at(dim.id);
      if (ann.tag != v.voted_tag) continue;
      if (!chosen || ann.confidence > chosen->confidence) chosen = &ann;
    }
    out.emplace(dim.id, DimensionAggregate{std::move(v), std::move(conf),
                                           chosen ? chosen->evidence : std::string()});
  }
  return out;
}

}  // namespace profiler
