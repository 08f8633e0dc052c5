#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "profiler/records.hpp"
#include "profiler/taxonomy.hpp"

namespace profiler {

struct MetricsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnknownRecordId : MetricsError {
  using MetricsError::MetricsError;
};

struct TaggedPrediction {
  std::string tag;
  int level = 3;  // calibrated confidence 1..5
};

// dimension id -> prediction
using RecordPrediction = std::map<std::string, TaggedPrediction>;

/// precision = selective accuracy over attempted (non-NA) predictions;
/// recall = coverage over gold-known records.
struct DimensionMetrics {
  std::string dimension_id;
  int attempted = 0;
  int correct = 0;
  int gold_known = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

struct EvalReport {
  std::vector<DimensionMetrics> per_dimension;  // canonical taxonomy order
  double macro_precision = 0;
  double macro_recall = 0;
  double macro_f1 = 0;
  int tau = 1;
  int prediction_count = 0;
};

double f1_score(double precision, double recall);

/// Keeps tags at level >= tau, reverts the rest to NA. tau = 1 is the
/// identity on valid predictions.
std::map<std::string, std::string> apply_threshold(const RecordPrediction& prediction, int tau,
                                                   const Taxonomy& taxonomy);

/// Records with gold NA or missing gold for a dimension never affect that
/// dimension's counts.
EvalReport evaluate(const std::map<std::string, RecordPrediction>& predictions,
                    const Corpus& corpus, const Taxonomy& taxonomy, int tau);

/// One report per tau in 1..5; recall is non-increasing in tau by construction.
std::vector<EvalReport> sweep(const std::map<std::string, RecordPrediction>& predictions,
                              const Corpus& corpus, const Taxonomy& taxonomy);

std::string report_table(const EvalReport& report);
nlohmann::ordered_json report_to_json(const EvalReport& report);
std::string sweep_csv(const std::vector<EvalReport>& reports);
std::string sweep_svg(const std::vector<EvalReport>& reports);

}  // namespace profiler
