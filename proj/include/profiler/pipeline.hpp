#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "profiler/aggregation.hpp"
#include "profiler/curation.hpp"
#include "profiler/metrics.hpp"
#include "profiler/orchestrator.hpp"
#include "profiler/records.hpp"
#include "profiler/reward.hpp"
#include "profiler/taxonomy.hpp"

namespace profiler {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StageInputMissing : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Distinct exit codes per failure class.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kStageInputMissing = 3,
  kBackendUnavailable = 4,
  kIngestError = 5,
};

struct PipelineConfig {
  std::filesystem::path workdir = ".";
  std::filesystem::path taxonomy_path;  // empty -> built-in default

  BackendSpec backend;
  SamplingConfig sampling;
  VoteStrategy strategy = VoteStrategy::confidence_weighted;
  ShapeSpec shape = ShapeSpec::named(ShapeKind::m_shape);
  RewardMode reward_mode = RewardMode::frozen;
  int tau = 1;
  std::uint64_t seed = 7;

  // gen stage
  std::size_t gen_n = 100;
  double gen_noise = 0.3;

  static PipelineConfig load(const std::filesystem::path& path);
  nlohmann::ordered_json to_json() const;
  std::string fingerprint() const;
  Taxonomy taxonomy() const;

  // Artifact paths, all under workdir.
  std::filesystem::path corpus_path() const { return workdir / "corpus.jsonl"; }
  std::filesystem::path raw_samples_path() const { return workdir / "raw_samples.jsonl"; }
  std::filesystem::path annotations_path() const { return workdir / "annotations.jsonl"; }
  std::filesystem::path tables_path() const { return workdir / "calibration_tables.json"; }
  std::filesystem::path votes_path() const { return workdir / "votes.jsonl"; }
  std::filesystem::path sft_path() const { return workdir / "sft.jsonl"; }
  std::filesystem::path kept_ids_path() const { return workdir / "filtered_ids.txt"; }
  std::filesystem::path filter_report_path() const { return workdir / "filter_report.json"; }
  std::filesystem::path filtered_corpus_path() const { return workdir / "filtered_corpus.jsonl"; }
  std::filesystem::path reference_path() const { return workdir / "reference.jsonl"; }
  std::filesystem::path reward_requests_path() const { return workdir / "reward_requests.jsonl"; }
  std::filesystem::path rewards_path() const { return workdir / "rewards.jsonl"; }
  std::filesystem::path report_json_path() const { return workdir / "report.json"; }
  std::filesystem::path report_txt_path() const { return workdir / "report.txt"; }
  std::filesystem::path sweep_csv_path() const { return workdir / "sweep.csv"; }
  std::filesystem::path sweep_svg_path() const { return workdir / "sweep.svg"; }
};

// Persisted per-sample parse results, grouped by record in input order.
using AnnotationStore = std::map<std::string, std::vector<ParsedAnnotation>>;

void write_annotations(const AnnotationStore& store, const Taxonomy& taxonomy,
                       const std::filesystem::path& path);
AnnotationStore read_annotations(const std::filesystem::path& path, const Taxonomy& taxonomy);

void write_tables(const std::map<std::string, CalibrationTable>& tables,
                  const Taxonomy& taxonomy, const std::filesystem::path& path);
std::map<std::string, CalibrationTable> read_tables(const std::filesystem::path& path);

void write_votes(const std::map<std::string, RecordAggregate>& votes,
                 const std::filesystem::path& path);
std::map<std::string, RecordAggregate> read_votes(const std::filesystem::path& path);

void write_reference(const std::map<std::string, ReferenceConfidence>& refs,
                     const std::filesystem::path& path);
std::map<std::string, ReferenceConfidence> read_reference(const std::filesystem::path& path);

std::map<std::string, RecordPrediction> votes_to_predictions(
    const std::map<std::string, RecordAggregate>& votes);

// Stage implementations. Each reads/writes only files, returns an ExitCode,
// and is idempotent for fixed inputs and seed.
int stage_gen(const PipelineConfig& cfg);
int stage_synthesize(const PipelineConfig& cfg);
int stage_calibrate(const PipelineConfig& cfg);
int stage_vote(const PipelineConfig& cfg);
int stage_build_sft(const PipelineConfig& cfg);
int stage_filter(const PipelineConfig& cfg);
int stage_reference(const PipelineConfig& cfg);
int stage_reward(const PipelineConfig& cfg);
int stage_evaluate(const PipelineConfig& cfg);
int stage_sweep(const PipelineConfig& cfg);
int stage_plot(const PipelineConfig& cfg);

int run_stage(const std::string& name, const PipelineConfig& cfg);

}  // namespace profiler
