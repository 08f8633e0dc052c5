#include "profiler/records.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include "profiler/util.hpp"

namespace profiler {

namespace {

const std::string kNaString = kNaTag;

std::string lower_ascii(std::string s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

// Versioned keyphrase pool: changing these templates invalidates golden files,
// so treat them as frozen fixtures.
std::vector<std::string> keyphrase_pool(const TaxonomyDimension& dim, const std::string& tag) {
  std::string t = lower_ascii(tag);
  return {
      "interested in " + t + " topics",
      "frequently watches " + t + " content",
      "posts about " + t,
      dim.id + " signal: " + t,
  };
}

}  // namespace

const std::string& Profile::tag_or_na(const std::string& dimension_id) const {
  auto it = assignments.find(dimension_id);
  return it == assignments.end() ? kNaString : it->second;
}

const UserRecord* Corpus::find(const std::string& record_id) const {
  for (const auto& r : records) {
    if (r.record_id == record_id) return &r;
  }
  return nullptr;
}

nlohmann::ordered_json record_to_json(const UserRecord& r) {
  nlohmann::ordered_json j;
  j["record_id"] = r.record_id;
  j["behavioral_cues"] = r.behavioral_cues;
  j["demographic_cues"] = r.demographic_cues;
  if (r.gold) j["gold"] = r.gold->assignments;
  if (!r.evidence_present.empty()) j["evidence_present"] = r.evidence_present;
  return j;
}

UserRecord record_from_json(const nlohmann::json& j, const Taxonomy& taxonomy) {
  UserRecord r;
  r.record_id = j.at("record_id").get<std::string>();
  if (r.record_id.empty()) throw RecordError("empty record_id");
  if (j.contains("behavioral_cues"))
    r.behavioral_cues = j["behavioral_cues"].get<std::vector<std::string>>();
  if (j.contains("demographic_cues"))
    r.demographic_cues = j["demographic_cues"].get<std::map<std::string, std::string>>();
  if (j.contains("gold") && !j["gold"].is_null()) {
    Profile p;
    p.assignments = j["gold"].get<std::map<std::string, std::string>>();
    for (const auto& [dim_id, tag] : p.assignments) {
      const auto* dim = taxonomy.find(dim_id);
      if (!dim || !dim->contains(tag))
        throw InvalidGoldTag("record " + r.record_id + ": gold tag '" + tag +
                             "' not in closed set of dimension '" + dim_id + "'");
    }
    r.gold = std::move(p);
  }
  if (j.contains("evidence_present"))
    r.evidence_present = j["evidence_present"].get<std::map<std::string, bool>>();
  return r;
}

Corpus read_corpus(const std::filesystem::path& path, const Taxonomy& taxonomy) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file: " + path.string());
  Corpus corpus;
  corpus.taxonomy_fingerprint = taxonomy.fingerprint();
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, e.what());
    }
    UserRecord r;
    try {
      r = record_from_json(j, taxonomy);
    } catch (const InvalidGoldTag&) {
      throw;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, e.what());
    }
    if (!seen.insert(r.record_id).second)
      throw DuplicateRecordId("duplicate record_id: " + r.record_id);
    corpus.records.push_back(std::move(r));
  }
  return corpus;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open output file: " + path.string());
  for (const auto& r : corpus.records) out << record_to_json(r).dump() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

Corpus generate_synthetic_corpus(const Taxonomy& taxonomy, std::size_t n, double noise,
                                 std::uint64_t seed) {
  Corpus corpus;
  corpus.taxonomy_fingerprint = taxonomy.fingerprint();
  corpus.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string id = "u" + std::to_string(100000 + i);
    auto rng = seeded_rng(derive_seed(seed, "record:" + id));
    UserRecord r;
    r.record_id = id;
    Profile gold;
    for (const auto& dim : taxonomy.dimensions()) {
      // Gold is NA for a small slice of records, so evaluation always has
      // gold-NA exclusions to exercise.
      bool gold_na = rand_unit(rng) < 0.05;
      std::size_t tag_idx = gold_na ? dim.tags.size() - 1 : rand_below(rng, dim.tags.size() - 1);
      const std::string& tag = dim.tags[tag_idx];
      gold.assignments[dim.id] = tag;

      bool uninformative = rand_unit(rng) < noise;
      r.evidence_present[dim.id] = !uninformative;
      if (uninformative) {
        if (rand_unit(rng) < 0.5 && dim.tags.size() > 2) {
          // Contradictory cue: a keyphrase for some other tag.
          std::size_t other = rand_below(rng, dim.tags.size() - 1);
          if (dim.tags[other] == tag) other = (other + 1) % (dim.tags.size() - 1);
          auto pool = keyphrase_pool(dim, dim.tags[other]);
          r.behavioral_cues.push_back(pool[rand_below(rng, pool.size())]);
        }
        // else: no cue at all for this dimension.
      } else if (!dim.is_na(tag)) {
        auto pool = keyphrase_pool(dim, tag);
        std::size_t count = 1 + rand_below(rng, 2);
        for (std::size_t c = 0; c < count; ++c)
          r.behavioral_cues.push_back(pool[rand_below(rng, pool.size())]);
      }
    }
    r.gold = std::move(gold);
    if (rand_unit(rng) < 0.5) {
      static const char* regions[] = {"north", "south", "east", "west", "central"};
      r.demographic_cues["region"] = regions[rand_below(rng, 5)];
    }
    corpus.records.push_back(std::move(r));
  }
  return corpus;
}

}  // namespace profiler
