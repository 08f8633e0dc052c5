#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "profiler/aggregation.hpp"
#include "profiler/orchestrator.hpp"
#include "profiler/records.hpp"

namespace profiler {

struct CurationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MissingAggregation : CurationError {
  using CurationError::CurationError;
};
struct EmptyInput : CurationError {
  using CurationError::CurationError;
};

struct SftSample {
  std::string record_id;
  std::string prompt;
  std::string target;  // re-parses into a complete AnnotationSet
};

struct DifficultyProfile {
  std::string record_id;
  int level = 3;  // 1 hardest .. 5 easiest
};

enum class ShapeKind { original, uniform, vee, wedge, m_shape };

struct ShapeSpec {
  ShapeKind name = ShapeKind::original;
  std::array<double, 5> target_mass{};  // sums to 1; unused for original

  static ShapeSpec named(ShapeKind kind);
  static ShapeSpec parse(std::string_view name);
};

const char* to_string(ShapeKind k);

/// One training pair per record: rendered prompt plus the voted annotation
/// with calibrated levels and selected evidence.
std::vector<SftSample> build_sft(const Corpus& corpus,
                                 const std::map<std::string, RecordAggregate>& aggregated,
                                 const Taxonomy& taxonomy, const PromptTemplate& tmpl);

/// Rounded mean of per-dimension calibrated levels, clamped to 1..5.
int record_difficulty_level(const RecordAggregate& aggregate);

struct FilterReport {
  std::array<int, 5> before{};
  std::array<int, 5> after{};
  double lambda = 1.0;
  std::vector<std::string> kept;  // sorted record ids
};

/// Water-filling subsample toward the target histogram: keep
/// floor(lambda * mass_b * N) per bin with the largest lambda that fits every
/// bin, seeded uniform selection within a bin, no replacement.
FilterReport filter_to_shape(const std::vector<DifficultyProfile>& profiles,
                             const ShapeSpec& spec, std::uint64_t seed);

}  // namespace profiler
