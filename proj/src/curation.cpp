#include "profiler/curation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "profiler/util.hpp"

namespace profiler {

const char* to_string(ShapeKind k) {
  switch (k) {
    case ShapeKind::original:
      return "original";
    case ShapeKind::uniform:
      return "uniform";
    case ShapeKind::vee:
      return "vee";
    case ShapeKind::wedge:
      return "wedge";
    case ShapeKind::m_shape:
      return "m_shape";
  }
  return "?";
}

ShapeSpec ShapeSpec::named(ShapeKind kind) {
  ShapeSpec s;
  s.name = kind;
  switch (kind) {
    case ShapeKind::original:
      s.target_mass = {0, 0, 0, 0, 0};
      break;
    case ShapeKind::uniform:
      s.target_mass = {0.2, 0.2, 0.2, 0.2, 0.2};
      break;
    case ShapeKind::vee:
      s.target_mass = {0.3, 0.15, 0.1, 0.15, 0.3};
      break;
    case ShapeKind::wedge:
      s.target_mass = {0.1, 0.2, 0.4, 0.2, 0.1};
      break;
    case ShapeKind::m_shape:
      s.target_mass = {0.1, 0.3, 0.2, 0.3, 0.1};
      break;
  }
  return s;
}

ShapeSpec ShapeSpec::parse(std::string_view name) {
  for (ShapeKind k : {ShapeKind::original, ShapeKind::uniform, ShapeKind::vee, ShapeKind::wedge,
                      ShapeKind::m_shape}) {
    if (name == to_string(k)) return named(k);
  }
  throw CurationError("unknown filter shape: " + std::string(name));
}

std::vector<SftSample> build_sft(const Corpus& corpus,
                                 const std::map<std::string, RecordAggregate>& aggregated,
                                 const Taxonomy& taxonomy, const PromptTemplate& tmpl) {
  std::vector<SftSample> out;
  out.reserve(corpus.records.size());
  for (const auto& record : corpus.records) {
    auto it = aggregated.find(record.record_id);
    if (it == aggregated.end())
      throw MissingAggregation("no aggregated result for record " + record.record_id);

    AnnotationSet target_set;
    target_set.record_id = record.record_id;
    for (const auto& dim : taxonomy.dimensions()) {
      const auto& agg = it->second.at(dim.id);
      DimensionAnnotation ann;
      ann.dimension_id = dim.id;
      ann.tag = agg.vote.voted_tag;
      ann.confidence = agg.confidence.level;
      ann.evidence = agg.evidence;
      target_set.annotations.emplace(dim.id, std::move(ann));
    }
    SftSample sample;
    sample.record_id = record.record_id;
    sample.prompt = render_prompt(tmpl, record, taxonomy);
    sample.target = render_annotation(target_set, taxonomy);
    out.push_back(std::move(sample));
  }
  return out;
}

int record_difficulty_level(const RecordAggregate& aggregate) {
  if (aggregate.empty()) throw EmptyInput("difficulty of empty aggregate");
  double sum = 0;
  for (const auto& [dim, agg] : aggregate) sum += agg.confidence.level;
  int level = static_cast<int>(std::floor(sum / aggregate.size() + 0.5));
  return std::clamp(level, kMinLevel, kMaxLevel);
}

FilterReport filter_to_shape(const std::vector<DifficultyProfile>& profiles,
                             const ShapeSpec& spec, std::uint64_t seed) {
  if (profiles.empty()) throw EmptyInput("filter over empty profile list");
  std::array<std::vector<std::string>, 5> bins;
  for (const auto& p : profiles) {
    if (!is_valid_level(p.level)) throw CurationError("difficulty level out of range");
    bins[p.level - 1].push_back(p.record_id);
  }
  FilterReport report;
  for (int b = 0; b < 5; ++b) report.before[b] = static_cast<int>(bins[b].size());

  if (spec.name == ShapeKind::original) {
    report.after = report.before;
    for (auto& bin : bins)
      report.kept.insert(report.kept.end(), bin.begin(), bin.end());
    std::sort(report.kept.begin(), report.kept.end());
    return report;
  }

  const double total = static_cast<double>(profiles.size());
  double lambda = std::numeric_limits<double>::infinity();
  for (int b = 0; b < 5; ++b) {
    if (spec.target_mass[b] > 0)
      lambda = std::min(lambda, bins[b].size() / (spec.target_mass[b] * total));
  }
  report.lambda = lambda;

  for (int b = 0; b < 5; ++b) {
    auto& bin = bins[b];
    std::sort(bin.begin(), bin.end());
    // Small epsilon so exact-ratio cases are not lost to float rounding.
    auto keep =
        static_cast<std::size_t>(std::floor(lambda * spec.target_mass[b] * total + 1e-9));
    keep = std::min(keep, bin.size());
    auto rng = seeded_rng(derive_seed(seed, "filter-bin:" + std::to_string(b)));
    // Partial Fisher-Yates: the first `keep` slots are a uniform sample.
    for (std::size_t i = 0; i < keep; ++i) {
      std::size_t j = i + rand_below(rng, bin.size() - i);
      std::swap(bin[i], bin[j]);
    }
    report.after[b] = static_cast<int>(keep);
    report.kept.insert(report.kept.end(), bin.begin(), bin.begin() + keep);
  }
  std::sort(report.kept.begin(), report.kept.end());
  return report;
}

}  // namespace profiler
