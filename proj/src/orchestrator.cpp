#include "profiler/orchestrator.hpp"

#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <optional>
#include <semaphore>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "profiler/util.hpp"

namespace profiler {

PromptTemplate PromptTemplate::standard() {
  PromptTemplate t;
  t.task_description =
      "You are a user profiling analyst. Infer one tag per attribute for the user "
      "described below, strictly from the predefined closed tag sets.";
  t.analysis_principles =
      "Principles:\n"
      "- Use only the provided cues; do not invent facts.\n"
      "- When the evidence for an attribute is insufficient or contradictory, "
      "answer Unknown(NA) rather than guessing.\n"
      "- Every tag must be copied verbatim from the attribute's tag list.";
  t.confidence_criteria =
      "Confidence scale (use the integer): 1 = very low (pure speculation), "
      "2 = low, 3 = medium, 4 = high, 5 = very high (explicit evidence).";
  // Synthetic one-shot exemplar; not taken from any production system.
  t.exemplar =
      "Example input: behavioral cues: posts about software; frequently watches "
      "software content.\n"
      "Example output line: <box><dim>occupation</dim><tag>Software</tag>"
      "<score>4</score><evidence>repeated software-related activity</evidence></box>";
  return t;
}

std::string render_prompt(const PromptTemplate& tmpl, const UserRecord& record,
                          const Taxonomy& taxonomy) {
  std::string p;
  p += tmpl.task_description + "\n\n";
  p += tmpl.analysis_principles + "\n\n";
  p += "Attributes and allowed tags:\n";
  for (const auto& dim : taxonomy.dimensions()) {
    p += "- " + dim.id + " (" + dim.display_name + "): ";
    for (std::size_t i = 0; i < dim.tags.size(); ++i) {
      if (i) p += " | ";
      p += dim.tags[i];
    }
    p += "\n";
  }
  p += "\n" + tmpl.confidence_criteria + "\n\n";
  p += "Output format: for each attribute emit exactly one line\n";
  p += "<box><dim>{attribute id}</dim><tag>{tag}</tag><score>{1-5}</score>"
       "<evidence>{short rationale}</evidence></box>\n\n";
  p += tmpl.exemplar + "\n\n";
  p += "User input:\n";
  p += "Behavioral cues:\n";
  if (record.behavioral_cues.empty()) {
    p += "  (none provided)\n";
  } else {
    for (const auto& cue : record.behavioral_cues) p += "  - " + cue + "\n";
  }
  p += "Demographic fields:\n";
  if (record.demographic_cues.empty()) {
    p += "  (none provided)\n";
  } else {
    for (const auto& [k, v] : record.demographic_cues) p += "  " + k + ": " + v + "\n";
  }
  return p;
}

std::string mock_infer(const UserRecord& record, const Taxonomy& taxonomy, std::uint64_t seed,
                       double fidelity, double malformed_rate, int sample_index) {
  auto rng = seeded_rng(
      derive_seed(seed, "mock:" + record.record_id + ":" + std::to_string(sample_index)));
  std::string out;
  for (const auto& dim : taxonomy.dimensions()) {
    std::string gold = record.gold ? record.gold->tag_or_na(dim.id) : std::string(kNaTag);
    bool evidence = false;
    if (auto it = record.evidence_present.find(dim.id); it != record.evidence_present.end())
      evidence = it->second;

    std::string tag;
    if (rand_unit(rng) < fidelity) {
      tag = gold;
    } else if (rand_unit(rng) < 0.5) {
      tag = dim.na_tag;
    } else {
      // A wrong non-NA tag.
      std::size_t idx = rand_below(rng, dim.tags.size() - 1);
      if (dim.tags[idx] == gold) idx = (idx + 1) % (dim.tags.size() - 1);
      tag = dim.tags[idx];
    }
    int confidence = evidence ? 4 + static_cast<int>(rand_below(rng, 2))
                              : 1 + static_cast<int>(rand_below(rng, 2));
    std::string evidence_text = dim.is_na(tag)
                                    ? std::string()
                                    : "cues consistent with " + tag + " for " + dim.id;

    if (rand_unit(rng) < malformed_rate) {
      // Corrupted block: score element dropped.
      out += "<box><dim>" + dim.id + "</dim><tag>" + tag + "</tag><evidence>" + evidence_text +
             "</evidence></box>\n";
    } else {
      out += "<box><dim>" + dim.id + "</dim><tag>" + tag + "</tag><score>" +
             std::to_string(confidence) + "</score><evidence>" + evidence_text +
             "</evidence></box>\n";
    }
  }
  return out;
}

RawSampleSink::RawSampleSink(std::filesystem::path path) : path_(std::move(path)) {
  std::ofstream out(path_, std::ios::trunc);
  if (!out) throw IoError("cannot open raw sample sink: " + path_.string());
}

void RawSampleSink::append(const std::string& record_id, int sample_index,
                           const std::string& raw_text) {
  std::lock_guard<std::mutex> lock(mutex_);
  std::ofstream out(path_, std::ios::app);
  nlohmann::ordered_json j;
  j["record_id"] = record_id;
  j["sample_index"] = sample_index;
  j["raw_text"] = raw_text;
  j["timestamp"] = static_cast<std::int64_t>(std::time(nullptr));
  out << j.dump() << '\n';
}

namespace {

// One chat-completion call; returns the assistant text or nullopt.
std::optional<std::string> http_chat_once(const BackendSpec& backend,
                                          const SamplingConfig& config,
                                          const std::string& prompt) {
  httplib::Client client(backend.endpoint);
  client.set_connection_timeout(backend.timeout_sec);
  client.set_read_timeout(backend.timeout_sec);
  httplib::Headers headers;
  if (!backend.auth_env_var.empty()) {
    if (const char* token = std::getenv(backend.auth_env_var.c_str()))
      headers.emplace("Authorization", std::string("Bearer ") + token);
  }
  nlohmann::json body;
  body["model"] = backend.model_name;
  body["temperature"] = config.temperature;
  body["top_p"] = config.top_p;
  body["messages"] = nlohmann::json::array(
      {{{"role", "system"}, {"content", "Follow the output format exactly."}},
       {{"role", "user"}, {"content", prompt}}});
  auto res = client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
  if (!res || res->status != 200) return std::nullopt;
  try {
    auto j = nlohmann::json::parse(res->body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

}  // namespace

std::vector<SampleOutcome> sample_record(const BackendSpec& backend, const SamplingConfig& config,
                                         const UserRecord& record, const Taxonomy& taxonomy,
                                         const std::string& prompt, RawSampleSink* sink) {
  const int m = config.m_samples;
  std::vector<std::string> raw_texts(m);
  std::vector<char> succeeded(m, 0);

  if (backend.kind == BackendSpec::Kind::mock) {
    for (int i = 0; i < m; ++i) {
      raw_texts[i] = mock_infer(record, taxonomy, config.seed, backend.mock_fidelity,
                                backend.mock_malformed_rate, i);
      succeeded[i] = 1;
      if (sink) sink->append(record.record_id, i, raw_texts[i]);
    }
  } else {
    std::counting_semaphore<> slots(std::max(1, config.max_parallel));
    std::vector<std::thread> workers;
    workers.reserve(m);
    for (int i = 0; i < m; ++i) {
      // sample_index is assigned at dispatch; completion order is irrelevant.
      workers.emplace_back([&, i] {
        slots.acquire();
        for (int attempt = 0; attempt <= config.retry_limit; ++attempt) {
          if (auto text = http_chat_once(backend, config, prompt)) {
            raw_texts[i] = *text;
            succeeded[i] = 1;
            break;
          }
        }
        slots.release();
        if (sink) sink->append(record.record_id, i, raw_texts[i]);
      });
    }
    for (auto& w : workers) w.join();
  }

  bool any = false;
  for (char s : succeeded) any = any || s;
  if (!any) throw BackendUnavailable("no sample succeeded for record " + record.record_id);

  std::vector<SampleOutcome> out;
  out.reserve(m);
  for (int i = 0; i < m; ++i) {
    SampleOutcome o;
    o.sample_index = i;
    o.raw_text = raw_texts[i];  // empty (all-malformed) when the request failed
    o.parsed = parse_annotation(o.raw_text, taxonomy, record.record_id, i);
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace profiler
