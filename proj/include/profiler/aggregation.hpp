#pragma once

#include <array>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "profiler/annotation.hpp"
#include "profiler/taxonomy.hpp"

namespace profiler {

struct AggregationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptySampleList : AggregationError {
  using AggregationError::AggregationError;
};
struct MixedRecordIds : AggregationError {
  using AggregationError::AggregationError;
};
struct TooFewSamples : AggregationError {
  using AggregationError::AggregationError;
};

enum class VoteStrategy { confidence_weighted, majority, single_sample };

const char* to_string(VoteStrategy s);
VoteStrategy strategy_from_string(std::string_view s);

struct VoteTally {
  std::string dimension_id;
  std::map<std::string, double> scores;  // tag -> summed weight or count
  int m_samples = 0;
};

struct VoteResult {
  std::string dimension_id;
  std::string voted_tag;
  double winning_score = 0;
  VoteStrategy strategy = VoteStrategy::confidence_weighted;
};

/// Four ascending cut points partitioning raw vote scores into five
/// equal-mass bins, fit per dimension.
struct CalibrationTable {
  std::string dimension_id;
  std::array<double, 4> boundaries{};
  int sample_count = 0;

  std::string fingerprint() const;
};

struct CalibratedConfidence {
  std::string dimension_id;
  int level = 3;
  double raw_score = 0;
  std::string table_ref;  // fingerprint of the table used, empty if none
};

VoteTally tally(std::span<const AnnotationSet> samples, const std::string& dimension_id,
                VoteStrategy strategy);

/// Argmax over the tally. Ties: NA wins; otherwise the tag earliest in the
/// dimension's canonical tag order.
VoteResult vote(const VoteTally& tally, const TaxonomyDimension& dim);

CalibrationTable fit_calibration(std::vector<double> scores, const std::string& dimension_id);

/// level = 1 + #{boundaries strictly below raw}; scores equal to a boundary
/// fall in the lower bin. A fully collapsed table maps equal scores to 3.
int apply_calibration(const CalibrationTable& table, double raw);

struct DimensionAggregate {
  VoteResult vote;
  CalibratedConfidence confidence;
  std::string evidence;
};

using RecordAggregate = std::map<std::string, DimensionAggregate>;

/// Per-dimension vote + calibration + evidence selection. Without a table the
/// level is round(winning_score / M) clamped to 1..5. Evidence comes from the
/// highest-confidence sample that voted for the winner (earliest on ties).
RecordAggregate aggregate_record(std::span<const AnnotationSet> samples, const Taxonomy& taxonomy,
                                 VoteStrategy strategy,
                                 const std::map<std::string, CalibrationTable>* tables = nullptr);

}  // namespace profiler
