#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace profiler {

inline constexpr const char* kNaTag = "Unknown(NA)";

struct TaxonomyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DuplicateTag : TaxonomyError {
  using TaxonomyError::TaxonomyError;
};
struct MissingNaTag : TaxonomyError {
  using TaxonomyError::TaxonomyError;
};
struct EmptyTaxonomy : TaxonomyError {
  using TaxonomyError::TaxonomyError;
};
struct UnknownDimension : TaxonomyError {
  using TaxonomyError::TaxonomyError;
};

/// One closed-set attribute. Tag order is part of the contract: it is the
/// tie-break order for voting and the rendering order for output blocks.
struct TaxonomyDimension {
  std::string id;
  std::string display_name;
  std::vector<std::string> tags;
  std::string na_tag = kNaTag;

  // Membership after trimming surrounding whitespace; exact and case-sensitive.
  bool contains(std::string_view candidate) const;
  std::optional<std::size_t> tag_index(std::string_view candidate) const;
  bool is_na(std::string_view tag) const;
};

class Taxonomy {
 public:
  Taxonomy() = default;
  explicit Taxonomy(std::vector<TaxonomyDimension> dims);

  /// The built-in six-dimension profiling system.
  static Taxonomy default_taxonomy();
  static Taxonomy from_json(const nlohmann::json& doc);
  static Taxonomy load_file(const std::filesystem::path& path);

  nlohmann::ordered_json to_json() const;

  const std::vector<TaxonomyDimension>& dimensions() const { return dims_; }
  std::size_t size() const { return dims_.size(); }

  const TaxonomyDimension* find(std::string_view id) const;
  const TaxonomyDimension& at(std::string_view id) const;

  /// Content hash over the canonical serialization; downstream artifacts
  /// record it so stages can detect taxonomy drift.
  std::string fingerprint() const;

  bool operator==(const Taxonomy& other) const;

 private:
  std::vector<TaxonomyDimension> dims_;
  void validate() const;
};

}  // namespace profiler
