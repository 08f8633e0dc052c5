#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "profiler/taxonomy.hpp"

namespace profiler {

inline constexpr int kMinLevel = 1;
inline constexpr int kMaxLevel = 5;

inline bool is_valid_level(int level) { return level >= kMinLevel && level <= kMaxLevel; }

/// Maps the verbal confidence scale (and integer string forms) to 1..5.
/// Returns nullopt for anything outside the closed scale.
std::optional<int> verbal_to_level(std::string_view word);
const char* level_to_verbal(int level);

struct DimensionAnnotation {
  std::string dimension_id;
  std::string tag;
  int confidence = kMinLevel;  // 1..5
  std::string evidence;

  bool operator==(const DimensionAnnotation&) const = default;
};

/// One parallel sample for one record: exactly one annotation per dimension.
struct AnnotationSet {
  std::string record_id;
  int sample_index = 0;
  std::map<std::string, DimensionAnnotation> annotations;

  bool operator==(const AnnotationSet&) const = default;
};

/// What the parser extracted for one dimension before validation. Malformed
/// output is data here, not an error: the reward engine scores it.
struct RawDimensionOutput {
  std::string dimension_id;
  std::string raw_tag;
  std::string raw_score;
  std::string raw_evidence;
  bool well_formed = false;
};

struct ParsedAnnotation {
  std::string record_id;
  int sample_index = 0;
  // One entry per taxonomy dimension, canonical order.
  std::vector<RawDimensionOutput> dimensions;
  // Present iff every dimension is well-formed.
  std::optional<AnnotationSet> set;

  bool complete() const { return set.has_value(); }
  const RawDimensionOutput* dimension(std::string_view id) const;
};

/// Canonical wire format: one
/// <box><dim>..</dim><tag>..</tag><score>..</score><evidence>..</evidence></box>
/// block per dimension, taxonomy order, one per line.
std::string render_annotation(const AnnotationSet& set, const Taxonomy& taxonomy);

/// Total over arbitrary input. Whitespace-tolerant between elements,
/// order-tolerant across blocks; first block per dimension wins.
ParsedAnnotation parse_annotation(std::string_view text, const Taxonomy& taxonomy,
                                  std::string record_id = "", int sample_index = 0);

}  // namespace profiler
