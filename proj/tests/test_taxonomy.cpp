#include <doctest.h>

#include <random>

#include "profiler/taxonomy.hpp"
#include "profiler/util.hpp"

using namespace profiler;

TEST_CASE("default taxonomy matches the built-in profiling system") {
  Taxonomy t = Taxonomy::default_taxonomy();
  REQUIRE(t.size() == 6);
  CHECK(t.dimensions()[0].id == "gender");
  CHECK(t.dimensions()[1].id == "age");
  CHECK(t.dimensions()[2].id == "industry");
  CHECK(t.dimensions()[3].id == "occupation");
  CHECK(t.dimensions()[4].id == "education_level");
  CHECK(t.dimensions()[5].id == "life_stage");
  CHECK(t.at("gender").tags.size() == 3);
  CHECK(t.at("age").tags.size() == 7);
  CHECK(t.at("industry").tags.size() == 14);
  CHECK(t.at("occupation").tags.size() == 20);
  CHECK(t.at("education_level").tags.size() == 5);
  CHECK(t.at("life_stage").tags.size() == 13);
  for (const auto& dim : t.dimensions()) CHECK(dim.contains(kNaTag));
}

TEST_CASE("tag membership is exact and case-sensitive after trimming") {
  const auto& gender = Taxonomy::default_taxonomy().at("gender");
  CHECK(gender.contains("Male"));
  CHECK(gender.contains(" Male "));
  CHECK(!gender.contains("male"));
  CHECK(!gender.contains("Malex"));
  CHECK(!gender.contains(""));
}

TEST_CASE("membership property over random perturbations") {
  Taxonomy t = Taxonomy::default_taxonomy();
  std::mt19937_64 rng(42);
  for (const auto& dim : t.dimensions()) {
    for (const auto& tag : dim.tags) {
      CHECK(dim.contains(tag));
      // suffix perturbation
      CHECK(!dim.contains(tag + "x"));
      // case perturbation on a random alphabetic position
      std::string mutated = tag;
      for (int tries = 0; tries < 8; ++tries) {
        auto i = rand_below(rng, mutated.size());
        char c = mutated[i];
        if (c >= 'a' && c <= 'z') {
          mutated[i] = static_cast<char>(c - 'a' + 'A');
          CHECK(!dim.contains(mutated));
          break;
        }
        if (c >= 'A' && c <= 'Z') {
          mutated[i] = static_cast<char>(c - 'A' + 'a');
          CHECK(!dim.contains(mutated));
          break;
        }
      }
    }
  }
}

TEST_CASE("load rejects invalid documents") {
  nlohmann::json one_dim = {
      {"dimensions",
       {{{"id", "flag"}, {"display_name", "Flag"}, {"tags", {"Yes", "No", kNaTag}}}}}};
  Taxonomy t = Taxonomy::from_json(one_dim);
  CHECK(t.size() == 1);
  CHECK(t.at("flag").tags.size() == 3);

  nlohmann::json no_na = {
      {"dimensions", {{{"id", "flag"}, {"tags", {"Yes", "No"}}}}}};
  CHECK_THROWS_AS(Taxonomy::from_json(no_na), MissingNaTag);

  nlohmann::json dup = {
      {"dimensions", {{{"id", "flag"}, {"tags", {"Yes", "Yes", kNaTag}}}}}};
  CHECK_THROWS_AS(Taxonomy::from_json(dup), DuplicateTag);

  nlohmann::json empty = {{"dimensions", nlohmann::json::array()}};
  CHECK_THROWS_AS(Taxonomy::from_json(empty), EmptyTaxonomy);
}

TEST_CASE("serialization round-trips field for field") {
  Taxonomy t = Taxonomy::default_taxonomy();
  Taxonomy back = Taxonomy::from_json(t.to_json());
  CHECK(back == t);
  CHECK(back.fingerprint() == t.fingerprint());
}
