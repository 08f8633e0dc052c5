#include "profiler/taxonomy.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include "profiler/util.hpp"

namespace profiler {

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

bool TaxonomyDimension::contains(std::string_view candidate) const {
  return tag_index(candidate).has_value();
}

std::optional<std::size_t> TaxonomyDimension::tag_index(std::string_view candidate) const {
  std::string c = trim(candidate);
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i] == c) return i;
  }
  return std::nullopt;
}

bool TaxonomyDimension::is_na(std::string_view tag) const { return trim(tag) == na_tag; }

Taxonomy::Taxonomy(std::vector<TaxonomyDimension> dims) : dims_(std::move(dims)) { validate(); }

void Taxonomy::validate() const {
  if (dims_.empty()) throw EmptyTaxonomy("taxonomy has no dimensions");
  std::unordered_set<std::string> ids;
  for (const auto& d : dims_) {
    if (d.id.empty()) throw TaxonomyError("dimension with empty id");
    if (!ids.insert(d.id).second) throw TaxonomyError("duplicate dimension id: " + d.id);
    if (d.tags.size() < 2)
      throw TaxonomyError("dimension " + d.id + " needs at least 2 tags");
    std::unordered_set<std::string> seen;
    for (const auto& t : d.tags) {
      if (!seen.insert(trim(t)).second)
        throw DuplicateTag("duplicate tag '" + t + "' in dimension " + d.id);
    }
    if (!seen.count(d.na_tag))
      throw MissingNaTag("dimension " + d.id + " lacks abstention tag " + d.na_tag);
  }
}

const TaxonomyDimension* Taxonomy::find(std::string_view id) const {
  for (const auto& d : dims_) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

const TaxonomyDimension& Taxonomy::at(std::string_view id) const {
  if (const auto* d = find(id)) return *d;
  throw UnknownDimension("unknown dimension id: " + std::string(id));
}

nlohmann::ordered_json Taxonomy::to_json() const {
  nlohmann::ordered_json doc;
  doc["dimensions"] = nlohmann::ordered_json::array();
  for (const auto& d : dims_) {
    nlohmann::ordered_json jd;
    jd["id"] = d.id;
    jd["display_name"] = d.display_name;
    jd["tags"] = d.tags;
    jd["na_tag"] = d.na_tag;
    doc["dimensions"].push_back(std::move(jd));
  }
  return doc;
}

Taxonomy Taxonomy::from_json(const nlohmann::json& doc) {
  if (!doc.contains("dimensions") || !doc["dimensions"].is_array() || doc["dimensions"].empty())
    throw EmptyTaxonomy("taxonomy document has no dimensions array");
  std::vector<TaxonomyDimension> dims;
  for (const auto& jd : doc["dimensions"]) {
    TaxonomyDimension d;
    d.id = trim(jd.at("id").get<std::string>());
    d.display_name = jd.value("display_name", d.id);
    for (const auto& t : jd.at("tags")) d.tags.push_back(trim(t.get<std::string>()));
    d.na_tag = trim(jd.value("na_tag", std::string(kNaTag)));
    dims.push_back(std::move(d));
  }
  return Taxonomy(std::move(dims));
}

Taxonomy Taxonomy::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TaxonomyError("cannot open taxonomy file: " + path.string());
  nlohmann::json doc = nlohmann::json::parse(in);
  return from_json(doc);
}

std::string Taxonomy::fingerprint() const { return hex64(fnv1a(to_json().dump())); }

bool Taxonomy::operator==(const Taxonomy& other) const {
  return to_json() == other.to_json();
}

Taxonomy Taxonomy::default_taxonomy() {
  std::vector<TaxonomyDimension> dims;
  dims.push_back({"gender", "Gender", {"Female", "Male", kNaTag}});
  dims.push_back({"age", "Age", {"0-18", "18-23", "24-30", "31-40", "41-50", "50+", kNaTag}});
  dims.push_back({"industry",
                  "Industry",
                  {"Agriculture and Fishery", "Manufacturing", "Real Estate and Construction",
                   "Commerce and Retail", "Transport and Logistics", "High-Tech", "Services",
                   "Finance", "Education and Training", "Healthcare",
                   "Media, Culture, Sports and Entertainment",
                   "Government and Public Institutions", "Not Employed", kNaTag}});
  dims.push_back({"occupation",
                  "Occupation",
                  {"Software", "Clerical Staff", "Education and Trainer",
                   "Beauty and Hairdressing", "Skilled Workers", "Government and Public Sector",
                   "Transportation and Logistics", "Hospitality and Entertainment",
                   "Media and Culture", "Independent Media", "Healthcare",
                   "Agriculture and Fishery", "Finance and Insurance", "Self-Employed",
                   "Domestic and Security", "Student", "High-Tech Hardware", "Retiree",
                   "Homemaker", kNaTag}});
  dims.push_back({"education_level",
                  "Education Level",
                  {"Junior High or Below", "Senior/Vocational High", "Bachelor/Associate",
                   "Postgraduate or Above", kNaTag}});
  dims.push_back({"life_stage",
                  "Life Stage",
                  {"Single", "In Relationship", "Pre-Marital", "Married, No Children",
                   "Pre-Pregnancy and Pregnancy", "Parenting (Child 0-2)",
                   "Parenting (Child 3-5)", "Parenting (Child 6-11)", "Parenting (Child 12-14)",
                   "Parenting (Child 15-17)", "Parenting (Adult Child)",
                   "Parenting (Child Age Unknown)", kNaTag}});
  return Taxonomy(std::move(dims));
}

}  // namespace profiler
