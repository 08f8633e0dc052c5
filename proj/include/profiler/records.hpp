#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "profiler/taxonomy.hpp"

namespace profiler {

struct RecordError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : RecordError {
  std::size_t line = 0;
  ParseError(std::size_t line_, const std::string& what)
      : RecordError("line " + std::to_string(line_) + ": " + what), line(line_) {}
};
struct DuplicateRecordId : RecordError {
  using RecordError::RecordError;
};
struct InvalidGoldTag : RecordError {
  using RecordError::RecordError;
};
struct IoError : RecordError {
  using RecordError::RecordError;
};

/// Per-dimension tag assignment. Dimensions absent from the map are NA.
struct Profile {
  std::map<std::string, std::string> assignments;

  const std::string& tag_or_na(const std::string& dimension_id) const;
  bool operator==(const Profile&) const = default;
};

struct UserRecord {
  std::string record_id;
  std::vector<std::string> behavioral_cues;
  std::map<std::string, std::string> demographic_cues;
  std::optional<Profile> gold;
  // Oracle-visible flag set by the synthetic generator: whether the cues for
  // a dimension actually carry signal. Consumed by tests and the mock backend.
  std::map<std::string, bool> evidence_present;

  bool operator==(const UserRecord&) const = default;
};

struct Corpus {
  std::vector<UserRecord> records;
  std::string taxonomy_fingerprint;

  const UserRecord* find(const std::string& record_id) const;
  bool operator==(const Corpus&) const = default;
};

nlohmann::ordered_json record_to_json(const UserRecord& r);
UserRecord record_from_json(const nlohmann::json& j, const Taxonomy& taxonomy);

Corpus read_corpus(const std::filesystem::path& path, const Taxonomy& taxonomy);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// Deterministic desk-scale stand-in for production data. Each record draws a
/// gold profile per dimension; with probability `noise` a dimension's cues are
/// made uninformative or contradictory and its evidence_present flag cleared.
Corpus generate_synthetic_corpus(const Taxonomy& taxonomy, std::size_t n, double noise,
                                 std::uint64_t seed);

}  // namespace profiler
