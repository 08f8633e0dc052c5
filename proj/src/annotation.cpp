#include "profiler/annotation.hpp"

#include <array>

#include "profiler/util.hpp"

namespace profiler {

namespace {

constexpr std::array<const char*, 5> kVerbalScale = {"very low", "low", "medium", "high",
                                                    "very high"};

// First <name>...</name> element at or after `from`. Returns the content and
// advances `from` past the closing tag.
std::optional<std::string> extract_element(std::string_view text, std::string_view name,
                                           std::size_t& from) {
  std::string open = "<" + std::string(name) + ">";
  std::string close = "</" + std::string(name) + ">";
  auto b = text.find(open, from);
  if (b == std::string_view::npos) return std::nullopt;
  auto content_begin = b + open.size();
  auto e = text.find(close, content_begin);
  if (e == std::string_view::npos) return std::nullopt;
  from = e + close.size();
  return std::string(text.substr(content_begin, e - content_begin));
}

std::optional<std::string> extract_element(std::string_view text, std::string_view name) {
  std::size_t from = 0;
  return extract_element(text, name, from);
}

}  // namespace

std::optional<int> verbal_to_level(std::string_view word) {
  std::string w = trim(word);
  for (char& c : w) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  for (int i = 0; i < 5; ++i) {
    if (w == kVerbalScale[i]) return i + 1;
  }
  if (w.size() == 1 && w[0] >= '1' && w[0] <= '5') return w[0] - '0';
  return std::nullopt;
}

const char* level_to_verbal(int level) {
  if (!is_valid_level(level)) return "";
  return kVerbalScale[level - 1];
}

const RawDimensionOutput* ParsedAnnotation::dimension(std::string_view id) const {
  for (const auto& d : dimensions) {
    if (d.dimension_id == id) return &d;
  }
  return nullptr;
}

std::string render_annotation(const AnnotationSet& set, const Taxonomy& taxonomy) {
  std::string out;
  for (const auto& dim : taxonomy.dimensions()) {
    const auto& ann = set.annotations.at(dim.id);
    out += "<box><dim>" + dim.id + "</dim><tag>" + ann.tag + "</tag><score>" +
           std::to_string(ann.confidence) + "</score><evidence>" + ann.evidence +
           "</evidence></box>\n";
  }
  return out;
}

ParsedAnnotation parse_annotation(std::string_view text, const Taxonomy& taxonomy,
                                  std::string record_id, int sample_index) {
  ParsedAnnotation result;
  result.record_id = std::move(record_id);
  result.sample_index = sample_index;

  std::map<std::string, RawDimensionOutput, std::less<>> found;
  std::size_t cursor = 0;
  while (true) {
    auto box = extract_element(text, "box", cursor);
    if (!box) break;
    auto dim_id = extract_element(*box, "dim");
    if (!dim_id) continue;
    std::string id = trim(*dim_id);
    const auto* dim = taxonomy.find(id);
    if (!dim) continue;
    if (found.count(id)) continue;  // first block per dimension wins

    RawDimensionOutput raw;
    raw.dimension_id = id;
    raw.raw_tag = trim(extract_element(*box, "tag").value_or(""));
    raw.raw_score = trim(extract_element(*box, "score").value_or(""));
    raw.raw_evidence = trim(extract_element(*box, "evidence").value_or(""));
    bool has_all = extract_element(*box, "tag") && extract_element(*box, "score") &&
                   extract_element(*box, "evidence");
    raw.well_formed =
        has_all && dim->contains(raw.raw_tag) && verbal_to_level(raw.raw_score).has_value();
    found.emplace(id, std::move(raw));
  }

  bool all_well_formed = true;
  for (const auto& dim : taxonomy.dimensions()) {
    auto it = found.find(dim.id);
    if (it != found.end()) {
      result.dimensions.push_back(it->second);
    } else {
      RawDimensionOutput missing;
      missing.dimension_id = dim.id;
      result.dimensions.push_back(std::move(missing));
    }
    all_well_formed = all_well_formed && result.dimensions.back().well_formed;
  }

  if (all_well_formed) {
    AnnotationSet set;
    set.record_id = result.record_id;
    set.sample_index = result.sample_index;
    for (const auto& raw : result.dimensions) {
      DimensionAnnotation ann;
      ann.dimension_id = raw.dimension_id;
      ann.tag = raw.raw_tag;
      ann.confidence = *verbal_to_level(raw.raw_score);
      ann.evidence = raw.raw_evidence;
      set.annotations.emplace(raw.dimension_id, std::move(ann));
    }
    result.set = std::move(set);
  }
  return result;
}

}  // namespace profiler
