#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "profiler/annotation.hpp"
#include "profiler/records.hpp"
#include "profiler/taxonomy.hpp"

namespace profiler {

struct BackendUnavailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SamplingConfig {
  int m_samples = 10;
  double temperature = 1.0;
  double top_p = 0.95;
  int max_parallel = 4;
  int retry_limit = 2;
  std::uint64_t seed = 0;  // mock only
};

struct BackendSpec {
  enum class Kind { http_chat, mock };
  Kind kind = Kind::mock;
  std::string endpoint;
  std::string auth_env_var;  // name only; the credential stays in the environment
  std::string model_name;
  int timeout_sec = 60;
  // Mock knobs.
  double mock_fidelity = 0.9;
  double mock_malformed_rate = 0.0;
};

struct PromptTemplate {
  std::string task_description;
  std::string analysis_principles;
  std::string confidence_criteria;
  std::string exemplar;  // synthetic one-shot example

  static PromptTemplate standard();
};

/// Deterministic; contains every taxonomy tag verbatim plus the full output
/// grammar, so the closed set is always in front of the model.
std::string render_prompt(const PromptTemplate& tmpl, const UserRecord& record,
                          const Taxonomy& taxonomy);

/// Seeded stand-in for a model backend. With probability `fidelity` per
/// dimension it emits the record's gold tag, confidence drawn high when the
/// evidence_present flag is set and low otherwise; else a random wrong tag or
/// NA. `malformed_rate` corrupts whole dimension blocks.
std::string mock_infer(const UserRecord& record, const Taxonomy& taxonomy, std::uint64_t seed,
                       double fidelity, double malformed_rate, int sample_index);

/// Append-only JSONL sink for raw model outputs; thread safe, one line per
/// write. Raw text is persisted before parsing.
class RawSampleSink {
 public:
  explicit RawSampleSink(std::filesystem::path path);
  void append(const std::string& record_id, int sample_index, const std::string& raw_text);

 private:
  std::filesystem::path path_;
  std::mutex mutex_;
};

struct SampleOutcome {
  int sample_index = 0;
  std::string raw_text;
  ParsedAnnotation parsed;
};

/// Issues M sampling requests with bounded concurrency and per-request
/// retries. Requests that still fail after retries yield an all-malformed
/// placeholder; throws BackendUnavailable only when nothing succeeds.
std::vector<SampleOutcome> sample_record(const BackendSpec& backend, const SamplingConfig& config,
                                         const UserRecord& record, const Taxonomy& taxonomy,
                                         const std::string& prompt,
                                         RawSampleSink* sink = nullptr);

}  // namespace profiler
