#include "profiler/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

namespace profiler {

double f1_score(double precision, double recall) {
  if (precision + recall <= 0) return 0;
  return 2 * precision * recall / (precision + recall);
}

std::map<std::string, std::string> apply_threshold(const RecordPrediction& prediction, int tau,
                                                   const Taxonomy& taxonomy) {
  std::map<std::string, std::string> out;
  for (const auto& [dim_id, pred] : prediction) {
    const auto& dim = taxonomy.at(dim_id);
    out[dim_id] = pred.level >= tau ? pred.tag : dim.na_tag;
  }
  return out;
}

EvalReport evaluate(const std::map<std::string, RecordPrediction>& predictions,
                    const Corpus& corpus, const Taxonomy& taxonomy, int tau) {
  std::unordered_map<std::string, const UserRecord*> by_id;
  for (const auto& r : corpus.records) by_id.emplace(r.record_id, &r);
  for (const auto& [id, pred] : predictions) {
    if (!by_id.count(id)) throw UnknownRecordId("prediction for unknown record " + id);
  }

  EvalReport report;
  report.tau = tau;
  report.prediction_count = static_cast<int>(predictions.size());
  for (const auto& dim : taxonomy.dimensions()) {
    DimensionMetrics m;
    m.dimension_id = dim.id;
    for (const auto& record : corpus.records) {
      if (!record.gold) continue;
      auto git = record.gold->assignments.find(dim.id);
      if (git == record.gold->assignments.end() || dim.is_na(git->second)) continue;
      ++m.gold_known;

      auto pit = predictions.find(record.record_id);
      if (pit == predictions.end()) continue;
      auto dit = pit->second.find(dim.id);
      if (dit == pit->second.end()) continue;
      const auto& pred = dit->second;
      std::string tag = pred.level >= tau ? pred.tag : dim.na_tag;
      if (dim.is_na(tag)) continue;
      ++m.attempted;
      if (tag == git->second) ++m.correct;
    }
    m.precision = m.attempted ? static_cast<double>(m.correct) / m.attempted : 0.0;
    m.recall = m.gold_known ? static_cast<double>(m.attempted) / m.gold_known : 0.0;
    m.f1 = f1_score(m.precision, m.recall);
    report.per_dimension.push_back(std::move(m));
  }

  const double k = static_cast<double>(report.per_dimension.size());
  for (const auto& m : report.per_dimension) {
    report.macro_precision += m.precision / k;
    report.macro_recall += m.recall / k;
    report.macro_f1 += m.f1 / k;
  }
  return report;
}

std::vector<EvalReport> sweep(const std::map<std::string, RecordPrediction>& predictions,
                              const Corpus& corpus, const Taxonomy& taxonomy) {
  std::vector<EvalReport> reports;
  for (int tau = 1; tau <= 5; ++tau)
    reports.push_back(evaluate(predictions, corpus, taxonomy, tau));
  return reports;
}

namespace {

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

std::string report_table(const EvalReport& report) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-18s %9s %9s %9s %9s %9s %9s\n", "dimension", "gold",
                "attempt", "correct", "precision", "recall", "f1");
  out += line;
  for (const auto& m : report.per_dimension) {
    std::snprintf(line, sizeof(line), "%-18s %9d %9d %9d %9.4f %9.4f %9.4f\n",
                  m.dimension_id.c_str(), m.gold_known, m.attempted, m.correct, m.precision,
                  m.recall, m.f1);
    out += line;
  }
  std::snprintf(line, sizeof(line), "%-18s %9s %9s %9s %9.4f %9.4f %9.4f\n", "macro", "-", "-",
                "-", report.macro_precision, report.macro_recall, report.macro_f1);
  out += line;
  std::snprintf(line, sizeof(line), "tau=%d predictions=%d\n", report.tau,
                report.prediction_count);
  out += line;
  return out;
}

nlohmann::ordered_json report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["tau"] = report.tau;
  j["prediction_count"] = report.prediction_count;
  j["dimensions"] = nlohmann::ordered_json::array();
  for (const auto& m : report.per_dimension) {
    nlohmann::ordered_json jm;
    jm["dimension_id"] = m.dimension_id;
    jm["gold_known"] = m.gold_known;
    jm["attempted"] = m.attempted;
    jm["correct"] = m.correct;
    jm["precision"] = fixed3(m.precision);
    jm["recall"] = fixed3(m.recall);
    jm["f1"] = fixed3(m.f1);
    j["dimensions"].push_back(std::move(jm));
  }
  j["macro"] = {{"precision", fixed3(report.macro_precision)},
                {"recall", fixed3(report.macro_recall)},
                {"f1", fixed3(report.macro_f1)}};
  return j;
}

std::string sweep_csv(const std::vector<EvalReport>& reports) {
  std::string out = "tau,dimension,gold_known,attempted,correct,precision,recall,f1\n";
  for (const auto& r : reports) {
    for (const auto& m : r.per_dimension) {
      out += std::to_string(r.tau) + "," + m.dimension_id + "," + std::to_string(m.gold_known) +
             "," + std::to_string(m.attempted) + "," + std::to_string(m.correct) + "," +
             fixed3(m.precision) + "," + fixed3(m.recall) + "," + fixed3(m.f1) + "\n";
    }
    out += std::to_string(r.tau) + ",macro,,,," + fixed3(r.macro_precision) + "," +
           fixed3(r.macro_recall) + "," + fixed3(r.macro_f1) + "\n";
  }
  return out;
}

std::string sweep_svg(const std::vector<EvalReport>& reports) {
  // Macro precision and recall vs tau as two polylines.
  const int w = 480, h = 320, margin = 48;
  auto x_of = [&](int tau) { return margin + (tau - 1) * (w - 2 * margin) / 4.0; };
  auto y_of = [&](double v) { return h - margin - v * (h - 2 * margin); };
  auto polyline = [&](const char* color, auto value_of) {
    std::string pts;
    for (const auto& r : reports) {
      pts += std::to_string(x_of(r.tau)) + "," + std::to_string(y_of(value_of(r))) + " ";
    }
    return "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
  };
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) +
                    "\" height=\"" + std::to_string(h) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int tau = 1; tau <= 5; ++tau) {
    svg += "<text x=\"" + std::to_string(x_of(tau)) + "\" y=\"" + std::to_string(h - margin + 20) +
           "\" text-anchor=\"middle\" font-size=\"12\">" + std::to_string(tau) + "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    double v = i / 4.0;
    svg += "<text x=\"" + std::to_string(margin - 8) + "\" y=\"" + std::to_string(y_of(v) + 4) +
           "\" text-anchor=\"end\" font-size=\"12\">" + fixed3(v) + "</text>\n";
  }
  svg += polyline("#1f77b4", [](const EvalReport& r) { return r.macro_precision; });
  svg += polyline("#d62728", [](const EvalReport& r) { return r.macro_recall; });
  svg += "<text x=\"" + std::to_string(w - margin) + "\" y=\"20\" text-anchor=\"end\" "
         "font-size=\"12\" fill=\"#1f77b4\">precision</text>\n";
  svg += "<text x=\"" + std::to_string(w - margin) + "\" y=\"36\" text-anchor=\"end\" "
         "font-size=\"12\" fill=\"#d62728\">recall</text>\n";
  svg += "<text x=\"" + std::to_string(w / 2) + "\" y=\"" + std::to_string(h - 8) +
         "\" text-anchor=\"middle\" font-size=\"12\">confidence threshold</text>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace profiler
