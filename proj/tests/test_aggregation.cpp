#include <doctest.h>

#include <algorithm>
#include <random>

#include "profiler/aggregation.hpp"
#include "profiler/util.hpp"

using namespace profiler;

namespace {

Taxonomy gender_taxonomy() { return Taxonomy::default_taxonomy(); }

// Builds M single-dimension-relevant AnnotationSets over the gender dimension.
std::vector<AnnotationSet> gender_samples(const Taxonomy& t,
                                          const std::vector<std::pair<std::string, int>>& votes) {
  std::vector<AnnotationSet> sets;
  int index = 0;
  for (const auto& [tag, conf] : votes) {
    AnnotationSet s;
    s.record_id = "u1";
    s.sample_index = index++;
    for (const auto& dim : t.dimensions()) {
      std::string use_tag = dim.id == "gender" ? tag : dim.na_tag;
      s.annotations.emplace(dim.id,
                            DimensionAnnotation{dim.id, use_tag, conf, "ev" + std::to_string(index)});
    }
    sets.push_back(std::move(s));
  }
  return sets;
}

// Independent oracle: enumerate tags, sum weights, argmax with NA-first then
// tag-order tie-break.
std::pair<std::string, double> brute_force_vote(
    const TaxonomyDimension& dim, const std::vector<std::pair<std::string, int>>& votes,
    bool weighted) {
  std::string best;
  double best_score = -1;
  for (std::size_t pref = 0; pref <= dim.tags.size(); ++pref) {
    // preference order: NA first, then canonical tag order
    std::string tag;
    if (pref == 0) {
      tag = dim.na_tag;
    } else {
      tag = dim.tags[pref - 1];
      if (tag == dim.na_tag) continue;
    }
    double score = 0;
    bool seen = false;
    for (const auto& [vtag, conf] : votes) {
      if (vtag == tag) {
        score += weighted ? conf : 1;
        seen = true;
      }
    }
    if (seen && score > best_score) {
      best = tag;
      best_score = score;
    }
  }
  return {best, best_score};
}

}  // namespace

TEST_CASE("tally sums confidence weights or counts") {
  Taxonomy t = gender_taxonomy();
  auto samples = gender_samples(t, {{"Male", 5}, {"Male", 4}, {"Female", 3}});

  VoteTally weighted = tally(samples, "gender", VoteStrategy::confidence_weighted);
  CHECK(weighted.scores.at("Male") == 9);
  CHECK(weighted.scores.at("Female") == 3);
  CHECK(weighted.m_samples == 3);

  VoteTally counted = tally(samples, "gender", VoteStrategy::majority);
  CHECK(counted.scores.at("Male") == 2);
  CHECK(counted.scores.at("Female") == 1);

  VoteTally single = tally(samples, "gender", VoteStrategy::single_sample);
  CHECK(single.scores.size() == 1);
  CHECK(single.scores.at("Male") == 5);

  auto unanimous = gender_samples(t, {{"Female", 2}, {"Female", 2}, {"Female", 2}});
  CHECK(tally(unanimous, "gender", VoteStrategy::confidence_weighted).scores.at("Female") == 6);
}

TEST_CASE("tally errors") {
  Taxonomy t = gender_taxonomy();
  std::vector<AnnotationSet> empty;
  CHECK_THROWS_AS(tally(empty, "gender", VoteStrategy::majority), EmptySampleList);
  auto samples = gender_samples(t, {{"Male", 5}, {"Male", 4}});
  samples[1].record_id = "u2";
  CHECK_THROWS_AS(tally(samples, "gender", VoteStrategy::majority), MixedRecordIds);
}

TEST_CASE("vote picks the argmax with the stated tie-break") {
  Taxonomy t = gender_taxonomy();
  const auto& gender = t.at("gender");

  auto samples = gender_samples(t, {{"Male", 5}, {"Male", 4}, {"Female", 3}});
  VoteResult r = vote(tally(samples, "gender", VoteStrategy::confidence_weighted), gender);
  CHECK(r.voted_tag == "Male");
  CHECK(r.winning_score == 9);

  // Female precedes Male in canonical order
  auto tie = gender_samples(t, {{"Male", 3}, {"Female", 3}});
  CHECK(vote(tally(tie, "gender", VoteStrategy::confidence_weighted), gender).voted_tag ==
        "Female");

  // NA wins any tie
  auto na_tie = gender_samples(t, {{"Male", 3}, {kNaTag, 3}});
  VoteResult nr = vote(tally(na_tie, "gender", VoteStrategy::confidence_weighted), gender);
  CHECK(nr.voted_tag == kNaTag);
  CHECK(nr.winning_score == 3);
}

TEST_CASE("vote+tally equals the brute-force oracle on random instances") {
  Taxonomy t = gender_taxonomy();
  const auto& gender = t.at("gender");
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 2000; ++trial) {
    int m = 1 + static_cast<int>(rand_below(rng, 6));
    std::vector<std::pair<std::string, int>> votes;
    for (int i = 0; i < m; ++i)
      votes.emplace_back(gender.tags[rand_below(rng, gender.tags.size())],
                         1 + static_cast<int>(rand_below(rng, 5)));
    auto samples = gender_samples(t, votes);
    for (bool weighted : {true, false}) {
      auto strategy = weighted ? VoteStrategy::confidence_weighted : VoteStrategy::majority;
      VoteResult got = vote(tally(samples, "gender", strategy), gender);
      auto [tag, score] = brute_force_vote(gender, votes, weighted);
      CHECK(got.voted_tag == tag);
      CHECK(got.winning_score == score);
    }
  }
}

TEST_CASE("tally and vote are permutation invariant") {
  Taxonomy t = gender_taxonomy();
  const auto& gender = t.at("gender");
  std::mt19937_64 rng(23);
  auto votes = std::vector<std::pair<std::string, int>>{
      {"Male", 5}, {"Female", 4}, {"Male", 1}, {kNaTag, 3}, {"Female", 2}};
  auto samples = gender_samples(t, votes);
  VoteResult base = vote(tally(samples, "gender", VoteStrategy::confidence_weighted), gender);
  for (int i = 0; i < 20; ++i) {
    std::shuffle(samples.begin(), samples.end(), rng);
    VoteResult r = vote(tally(samples, "gender", VoteStrategy::confidence_weighted), gender);
    CHECK(r.voted_tag == base.voted_tag);
    CHECK(r.winning_score == base.winning_score);
  }
}

TEST_CASE("calibration boundaries are equal-mass rank cut points") {
  std::vector<double> scores = {10, 12, 14, 16, 18, 20, 22, 24, 26, 28};
  CalibrationTable table = fit_calibration(scores, "gender");
  CHECK(table.boundaries == std::array<double, 4>{12, 16, 20, 24});
  // each bin holds exactly 2
  std::array<int, 5> counts{};
  for (double s : scores) ++counts[apply_calibration(table, s) - 1];
  for (int c : counts) CHECK(c == 2);
}

TEST_CASE("calibration on a uniform score range lands near the quintiles") {
  std::vector<double> scores;
  for (int v = 10; v <= 50; ++v) scores.push_back(v);
  CalibrationTable table = fit_calibration(scores, "age");
  CHECK(table.boundaries == std::array<double, 4>{18, 26, 34, 42});
}

TEST_CASE("degenerate all-equal scores collapse to level 3") {
  CalibrationTable table = fit_calibration({7, 7, 7, 7, 7}, "gender");
  CHECK(apply_calibration(table, 7) == 3);
  CHECK(apply_calibration(table, 6) == 1);
  CHECK(apply_calibration(table, 8) == 5);
}

TEST_CASE("apply_calibration levels and boundary handling") {
  CalibrationTable table;
  table.dimension_id = "age";
  table.boundaries = {18, 26, 34, 42};
  table.sample_count = 41;
  CHECK(apply_calibration(table, 10) == 1);
  CHECK(apply_calibration(table, 26) == 2);  // equal-to-boundary goes lower
  CHECK(apply_calibration(table, 50) == 5);
  // monotone non-decreasing
  int prev = 1;
  for (double raw = 0; raw <= 60; raw += 0.25) {
    int level = apply_calibration(table, raw);
    CHECK(level >= prev);
    prev = level;
  }
}

TEST_CASE("fit_calibration requires at least five scores") {
  CHECK_THROWS_AS(fit_calibration({1, 2, 3, 4}, "gender"), TooFewSamples);
}

TEST_CASE("aggregate_record calibrates and selects evidence") {
  Taxonomy t = gender_taxonomy();

  SUBCASE("M=1 passthrough without table") {
    auto samples = gender_samples(t, {{"Male", 4}});
    RecordAggregate agg = aggregate_record(samples, t, VoteStrategy::confidence_weighted);
    CHECK(agg.at("gender").vote.voted_tag == "Male");
    CHECK(agg.at("gender").confidence.level == 4);
  }
  SUBCASE("table maps a low unanimous score to level 1") {
    auto samples = gender_samples(t, {{"Female", 2}, {"Female", 2}, {"Female", 2}});
    std::map<std::string, CalibrationTable> tables;
    for (const auto& dim : t.dimensions()) {
      CalibrationTable table;
      table.dimension_id = dim.id;
      table.boundaries = {7, 9, 11, 13};  // score 6 sits below every cut
      table.sample_count = 100;
      tables.emplace(dim.id, table);
    }
    RecordAggregate agg =
        aggregate_record(samples, t, VoteStrategy::confidence_weighted, &tables);
    CHECK(agg.at("gender").vote.winning_score == 6);
    CHECK(agg.at("gender").confidence.level == 1);
  }
  SUBCASE("evidence comes from the highest-confidence voter") {
    auto samples = gender_samples(t, {{"Male", 3}, {"Male", 5}, {"Female", 4}});
    RecordAggregate agg = aggregate_record(samples, t, VoteStrategy::confidence_weighted);
    // samples carry evidence "ev1","ev2","ev3"; the confidence-5 voter is #2
    CHECK(agg.at("gender").evidence == "ev2");
  }
}

TEST_CASE("unanimous confidence-weighted scores stay within [M, 5M]") {
  Taxonomy t = gender_taxonomy();
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    int m = 1 + static_cast<int>(rand_below(rng, 10));
    std::vector<std::pair<std::string, int>> votes;
    for (int i = 0; i < m; ++i)
      votes.emplace_back("Male", 1 + static_cast<int>(rand_below(rng, 5)));
    auto samples = gender_samples(t, votes);
    VoteResult r =
        vote(tally(samples, "gender", VoteStrategy::confidence_weighted), t.at("gender"));
    CHECK(r.winning_score >= m);
    CHECK(r.winning_score <= 5 * m);
  }
}

TEST_CASE("calibration mass balance within +/-1 for distinct scores") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 5 + rand_below(rng, 500);
    std::vector<double> scores;
    for (std::size_t i = 0; i < n; ++i) scores.push_back(static_cast<double>(i) + 0.5);
    std::shuffle(scores.begin(), scores.end(), rng);
    CalibrationTable table = fit_calibration(scores, "x");
    std::array<int, 5> counts{};
    for (double s : scores) ++counts[apply_calibration(table, s) - 1];
    for (int c : counts) CHECK(std::abs(c - static_cast<double>(n) / 5) <= 1.0);
  }
}
