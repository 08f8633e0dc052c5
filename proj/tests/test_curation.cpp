#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "profiler/curation.hpp"
#include "profiler/util.hpp"

using namespace profiler;

namespace {

// One-record aggregate with every dimension at the given level and tag index.
RecordAggregate flat_aggregate(const Taxonomy& t, const std::vector<int>& levels) {
  RecordAggregate agg;
  std::size_t i = 0;
  for (const auto& dim : t.dimensions()) {
    DimensionAggregate d;
    d.vote.dimension_id = dim.id;
    d.vote.voted_tag = dim.tags[0];
    d.vote.winning_score = levels[i];
    d.confidence.dimension_id = dim.id;
    d.confidence.level = levels[i];
    d.evidence = "because";
    agg.emplace(dim.id, std::move(d));
    ++i;
  }
  return agg;
}

}  // namespace

TEST_CASE("record difficulty is the rounded mean of calibrated levels") {
  Taxonomy t = Taxonomy::default_taxonomy();
  CHECK(record_difficulty_level(flat_aggregate(t, {5, 5, 5, 5, 5, 5})) == 5);
  CHECK(record_difficulty_level(flat_aggregate(t, {1, 1, 1, 1, 1, 2})) == 1);  // mean 1.17
  CHECK(record_difficulty_level(flat_aggregate(t, {2, 3, 3, 3, 4, 4})) == 3);  // mean 3.17
  CHECK(record_difficulty_level(flat_aggregate(t, {2, 3, 3, 3, 3, 4})) == 3);  // mean 3.0
  CHECK(record_difficulty_level(flat_aggregate(t, {2, 2, 3, 3, 3, 2})) == 3);  // mean 2.5 half-up
}

TEST_CASE("named shape masses sum to one") {
  for (ShapeKind k : {ShapeKind::uniform, ShapeKind::vee, ShapeKind::wedge, ShapeKind::m_shape}) {
    double sum = 0;
    for (double m : ShapeSpec::named(k).target_mass) sum += m;
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
  CHECK(ShapeSpec::parse("vee").name == ShapeKind::vee);
  CHECK_THROWS_AS(ShapeSpec::parse("zigzag"), CurationError);
}

TEST_CASE("water-filling: worked vee example on 1000 uniform records") {
  std::vector<DifficultyProfile> profiles;
  for (int i = 0; i < 1000; ++i)
    profiles.push_back({"r" + std::to_string(1000 + i), 1 + i % 5});
  FilterReport report = filter_to_shape(profiles, ShapeSpec::named(ShapeKind::vee), 7);
  CHECK(report.after == std::array<int, 5>{200, 100, 66, 100, 200});
  CHECK(report.lambda == doctest::Approx(2.0 / 3.0));
  CHECK(report.kept.size() == 666);
}

TEST_CASE("uniform spec on an already-uniform input keeps everything") {
  std::vector<DifficultyProfile> profiles;
  for (int i = 0; i < 500; ++i) profiles.push_back({"r" + std::to_string(i), 1 + i % 5});
  FilterReport report = filter_to_shape(profiles, ShapeSpec::named(ShapeKind::uniform), 3);
  CHECK(report.kept.size() == 500);
  CHECK(report.lambda == doctest::Approx(1.0));
}

TEST_CASE("filtering is deterministic, duplicate-free, and a subset") {
  std::mt19937_64 rng(5);
  std::vector<DifficultyProfile> profiles;
  std::set<std::string> ids;
  for (int i = 0; i < 700; ++i) {
    std::string id = "rec" + std::to_string(i);
    profiles.push_back({id, 1 + static_cast<int>(rand_below(rng, 5))});
    ids.insert(id);
  }
  ShapeSpec spec = ShapeSpec::named(ShapeKind::m_shape);
  FilterReport a = filter_to_shape(profiles, spec, 42);
  FilterReport b = filter_to_shape(profiles, spec, 42);
  CHECK(a.kept == b.kept);
  FilterReport c = filter_to_shape(profiles, spec, 43);
  CHECK(a.kept != c.kept);  // different seed, different selection

  CHECK(std::is_sorted(a.kept.begin(), a.kept.end()));
  std::set<std::string> unique(a.kept.begin(), a.kept.end());
  CHECK(unique.size() == a.kept.size());
  for (const auto& id : a.kept) CHECK(ids.count(id));
}

TEST_CASE("achieved histogram deviates from lambda*target by at most one per bin") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<DifficultyProfile> profiles;
    std::size_t n = 50 + rand_below(rng, 2000);
    for (std::size_t i = 0; i < n; ++i)
      profiles.push_back({"r" + std::to_string(i), 1 + static_cast<int>(rand_below(rng, 5))});
    for (ShapeKind k : {ShapeKind::uniform, ShapeKind::vee, ShapeKind::wedge, ShapeKind::m_shape}) {
      ShapeSpec spec = ShapeSpec::named(k);
      FilterReport report = filter_to_shape(profiles, spec, trial);
      for (int b = 0; b < 5; ++b) {
        double ideal = report.lambda * spec.target_mass[b] * profiles.size();
        CHECK(std::abs(report.after[b] - ideal) <= 1.0);
        CHECK(report.after[b] <= report.before[b]);
      }
    }
  }
}

TEST_CASE("empty input is rejected") {
  CHECK_THROWS_AS(filter_to_shape({}, ShapeSpec::named(ShapeKind::uniform), 1), EmptyInput);
}

TEST_CASE("build_sft targets re-parse into the voted tags") {
  Taxonomy t = Taxonomy::default_taxonomy();
  Corpus corpus = generate_synthetic_corpus(t, 10, 0.2, 9);
  std::map<std::string, RecordAggregate> aggregated;
  std::mt19937_64 rng(13);
  for (const auto& r : corpus.records) {
    std::vector<int> levels;
    for (std::size_t i = 0; i < t.size(); ++i)
      levels.push_back(1 + static_cast<int>(rand_below(rng, 5)));
    aggregated.emplace(r.record_id, flat_aggregate(t, levels));
  }
  auto samples = build_sft(corpus, aggregated, t, PromptTemplate::standard());
  REQUIRE(samples.size() == corpus.records.size());
  for (const auto& s : samples) {
    auto parsed = parse_annotation(s.target, t, s.record_id);
    REQUIRE(parsed.complete());
    for (const auto& [dim_id, ann] : parsed.set->annotations) {
      const auto& agg = aggregated.at(s.record_id).at(dim_id);
      CHECK(ann.tag == agg.vote.voted_tag);
      CHECK(ann.confidence == agg.confidence.level);
    }
  }
}

TEST_CASE("all-NA vote renders six NA blocks") {
  Taxonomy t = Taxonomy::default_taxonomy();
  Corpus corpus = generate_synthetic_corpus(t, 1, 0.0, 2);
  RecordAggregate agg;
  for (const auto& dim : t.dimensions()) {
    DimensionAggregate d;
    d.vote.dimension_id = dim.id;
    d.vote.voted_tag = dim.na_tag;
    d.confidence.level = 1;
    agg.emplace(dim.id, std::move(d));
  }
  std::map<std::string, RecordAggregate> aggregated{{corpus.records[0].record_id, agg}};
  auto samples = build_sft(corpus, aggregated, t, PromptTemplate::standard());
  std::size_t na_blocks = 0, pos = 0;
  while ((pos = samples[0].target.find("<tag>Unknown(NA)</tag>", pos)) != std::string::npos) {
    ++na_blocks;
    ++pos;
  }
  CHECK(na_blocks == 6);
}

TEST_CASE("missing aggregation is an error") {
  Taxonomy t = Taxonomy::default_taxonomy();
  Corpus corpus = generate_synthetic_corpus(t, 2, 0.0, 2);
  std::map<std::string, RecordAggregate> aggregated;
  CHECK_THROWS_AS(build_sft(corpus, aggregated, t, PromptTemplate::standard()),
                  MissingAggregation);
}
