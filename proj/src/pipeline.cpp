#include "profiler/pipeline.hpp"

#include <algorithm>
#include <ctime>
#include <fstream>
#include <iostream>

#include "profiler/util.hpp"

namespace profiler {

namespace {

void require_file(const std::filesystem::path& p, const std::string& stage) {
  if (!std::filesystem::exists(p))
    throw StageInputMissing(stage + ": missing input file " + p.string());
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + p.string());
  out << text;
}

// Sidecar metadata next to a primary artifact. Timestamps live only here so
// the primary artifact stays byte-stable across reruns.
void write_meta(const PipelineConfig& cfg, const std::filesystem::path& artifact,
                const std::string& stage) {
  nlohmann::ordered_json meta;
  meta["stage"] = stage;
  meta["config_fingerprint"] = cfg.fingerprint();
  meta["taxonomy_fingerprint"] = cfg.taxonomy().fingerprint();
  meta["timestamp"] = static_cast<std::int64_t>(std::time(nullptr));
  write_text(artifact.string() + ".meta.json", meta.dump(2) + "\n");
}

std::string reference_fingerprint(const std::map<std::string, int>& levels) {
  std::string repr;
  for (const auto& [dim, level] : levels) repr += dim + "=" + std::to_string(level) + ";";
  return hex64(fnv1a(repr));
}

}  // namespace

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  PipelineConfig cfg;
  try {
    if (j.contains("workdir")) cfg.workdir = j["workdir"].get<std::string>();
    if (j.contains("taxonomy_path")) cfg.taxonomy_path = j["taxonomy_path"].get<std::string>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("tau")) cfg.tau = j["tau"].get<int>();
    if (j.contains("strategy")) cfg.strategy = strategy_from_string(j["strategy"].get<std::string>());
    if (j.contains("shape")) cfg.shape = ShapeSpec::parse(j["shape"].get<std::string>());
    if (j.contains("reward_mode"))
      cfg.reward_mode = reward_mode_from_string(j["reward_mode"].get<std::string>());
    if (j.contains("gen")) {
      cfg.gen_n = j["gen"].value("n", cfg.gen_n);
      cfg.gen_noise = j["gen"].value("noise", cfg.gen_noise);
    }
    if (j.contains("sampling")) {
      const auto& s = j["sampling"];
      cfg.sampling.m_samples = s.value("m_samples", cfg.sampling.m_samples);
      cfg.sampling.temperature = s.value("temperature", cfg.sampling.temperature);
      cfg.sampling.top_p = s.value("top_p", cfg.sampling.top_p);
      cfg.sampling.max_parallel = s.value("max_parallel", cfg.sampling.max_parallel);
      cfg.sampling.retry_limit = s.value("retry_limit", cfg.sampling.retry_limit);
    }
    if (j.contains("backend")) {
      const auto& b = j["backend"];
      std::string kind = b.value("kind", std::string("mock"));
      if (kind == "mock") {
        cfg.backend.kind = BackendSpec::Kind::mock;
      } else if (kind == "http_chat") {
        cfg.backend.kind = BackendSpec::Kind::http_chat;
      } else {
        throw ConfigError("unknown backend kind: " + kind);
      }
      cfg.backend.endpoint = b.value("endpoint", std::string());
      cfg.backend.auth_env_var = b.value("auth_env_var", std::string());
      cfg.backend.model_name = b.value("model_name", std::string());
      cfg.backend.timeout_sec = b.value("timeout_sec", cfg.backend.timeout_sec);
      cfg.backend.mock_fidelity = b.value("mock_fidelity", cfg.backend.mock_fidelity);
      cfg.backend.mock_malformed_rate =
          b.value("mock_malformed_rate", cfg.backend.mock_malformed_rate);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid config value: ") + e.what());
  }
  if (cfg.sampling.m_samples < 1 || cfg.sampling.max_parallel < 1 || cfg.tau < 1 || cfg.tau > 5)
    throw ConfigError("config out of range: m_samples/max_parallel >= 1, tau in 1..5");
  return cfg;
}

nlohmann::ordered_json PipelineConfig::to_json() const {
  nlohmann::ordered_json j;
  j["workdir"] = workdir.string();
  j["taxonomy_path"] = taxonomy_path.string();
  j["seed"] = seed;
  j["tau"] = tau;
  j["strategy"] = to_string(strategy);
  j["shape"] = to_string(shape.name);
  j["reward_mode"] = profiler::to_string(reward_mode);
  j["gen"] = {{"n", gen_n}, {"noise", gen_noise}};
  j["sampling"] = {{"m_samples", sampling.m_samples},
                   {"temperature", sampling.temperature},
                   {"top_p", sampling.top_p},
                   {"max_parallel", sampling.max_parallel},
                   {"retry_limit", sampling.retry_limit}};
  j["backend"] = {{"kind", backend.kind == BackendSpec::Kind::mock ? "mock" : "http_chat"},
                  {"endpoint", backend.endpoint},
                  {"auth_env_var", backend.auth_env_var},
                  {"model_name", backend.model_name},
                  {"timeout_sec", backend.timeout_sec},
                  {"mock_fidelity", backend.mock_fidelity},
                  {"mock_malformed_rate", backend.mock_malformed_rate}};
  return j;
}

std::string PipelineConfig::fingerprint() const { return hex64(fnv1a(to_json().dump())); }

Taxonomy PipelineConfig::taxonomy() const {
  if (taxonomy_path.empty()) return Taxonomy::default_taxonomy();
  return Taxonomy::load_file(taxonomy_path);
}

void write_annotations(const AnnotationStore& store, const Taxonomy& taxonomy,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open output file: " + path.string());
  for (const auto& [record_id, samples] : store) {
    for (const auto& parsed : samples) {
      nlohmann::ordered_json j;
      j["record_id"] = record_id;
      j["sample_index"] = parsed.sample_index;
      nlohmann::ordered_json dims;
      for (const auto& raw : parsed.dimensions) {
        dims[raw.dimension_id] = {{"tag", raw.raw_tag},
                                  {"score", raw.raw_score},
                                  {"evidence", raw.raw_evidence},
                                  {"well_formed", raw.well_formed}};
      }
      j["dims"] = std::move(dims);
      out << j.dump() << '\n';
    }
  }
  (void)taxonomy;
}

AnnotationStore read_annotations(const std::filesystem::path& path, const Taxonomy& taxonomy) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open annotations file: " + path.string());
  AnnotationStore store;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      ParsedAnnotation parsed;
      parsed.record_id = j.at("record_id").get<std::string>();
      parsed.sample_index = j.at("sample_index").get<int>();
      bool all = true;
      for (const auto& dim : taxonomy.dimensions()) {
        RawDimensionOutput raw;
        raw.dimension_id = dim.id;
        if (j.at("dims").contains(dim.id)) {
          const auto& jd = j["dims"][dim.id];
          raw.raw_tag = jd.value("tag", std::string());
          raw.raw_score = jd.value("score", std::string());
          raw.raw_evidence = jd.value("evidence", std::string());
          raw.well_formed = jd.value("well_formed", false);
        }
        all = all && raw.well_formed;
        parsed.dimensions.push_back(std::move(raw));
      }
      if (all) {
        AnnotationSet set;
        set.record_id = parsed.record_id;
        set.sample_index = parsed.sample_index;
        for (const auto& raw : parsed.dimensions) {
          set.annotations.emplace(
              raw.dimension_id,
              DimensionAnnotation{raw.dimension_id, raw.raw_tag,
                                  *verbal_to_level(raw.raw_score), raw.raw_evidence});
        }
        parsed.set = std::move(set);
      }
      store[parsed.record_id].push_back(std::move(parsed));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, e.what());
    }
  }
  for (auto& [id, samples] : store) {
    std::sort(samples.begin(), samples.end(),
              [](const auto& a, const auto& b) { return a.sample_index < b.sample_index; });
  }
  return store;
}

void write_tables(const std::map<std::string, CalibrationTable>& tables,
                  const Taxonomy& taxonomy, const std::filesystem::path& path) {
  nlohmann::ordered_json doc;
  doc["taxonomy_fingerprint"] = taxonomy.fingerprint();
  doc["tables"] = nlohmann::ordered_json::array();
  for (const auto& dim : taxonomy.dimensions()) {
    auto it = tables.find(dim.id);
    if (it == tables.end()) continue;
    const auto& t = it->second;
    doc["tables"].push_back({{"dimension_id", t.dimension_id},
                             {"boundaries", t.boundaries},
                             {"sample_count", t.sample_count},
                             {"fingerprint", t.fingerprint()}});
  }
  write_text(path, doc.dump(2) + "\n");
}

std::map<std::string, CalibrationTable> read_tables(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open tables file: " + path.string());
  nlohmann::json doc = nlohmann::json::parse(in);
  std::map<std::string, CalibrationTable> tables;
  for (const auto& jt : doc.at("tables")) {
    CalibrationTable t;
    t.dimension_id = jt.at("dimension_id").get<std::string>();
    auto b = jt.at("boundaries").get<std::vector<double>>();
    std::copy_n(b.begin(), 4, t.boundaries.begin());
    t.sample_count = jt.at("sample_count").get<int>();
    tables.emplace(t.dimension_id, std::move(t));
  }
  return tables;
}

void write_votes(const std::map<std::string, RecordAggregate>& votes,
                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open output file: " + path.string());
  for (const auto& [record_id, aggregate] : votes) {
    nlohmann::ordered_json j;
    j["record_id"] = record_id;
    nlohmann::ordered_json dims;
    for (const auto& [dim_id, agg] : aggregate) {
      dims[dim_id] = {{"voted_tag", agg.vote.voted_tag},
                      {"raw_score", agg.vote.winning_score},
                      {"level", agg.confidence.level},
                      {"evidence", agg.evidence}};
    }
    j["dims"] = std::move(dims);
    out << j.dump() << '\n';
  }
}

std::map<std::string, RecordAggregate> read_votes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open votes file: " + path.string());
  std::map<std::string, RecordAggregate> votes;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      RecordAggregate aggregate;
      std::string record_id = j.at("record_id").get<std::string>();
      for (const auto& [dim_id, jd] : j.at("dims").items()) {
        DimensionAggregate agg;
        agg.vote.dimension_id = dim_id;
        agg.vote.voted_tag = jd.at("voted_tag").get<std::string>();
        agg.vote.winning_score = jd.at("raw_score").get<double>();
        agg.confidence.dimension_id = dim_id;
        agg.confidence.level = jd.at("level").get<int>();
        agg.confidence.raw_score = agg.vote.winning_score;
        agg.evidence = jd.value("evidence", std::string());
        aggregate.emplace(dim_id, std::move(agg));
      }
      votes.emplace(std::move(record_id), std::move(aggregate));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return votes;
}

void write_reference(const std::map<std::string, ReferenceConfidence>& refs,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open output file: " + path.string());
  for (const auto& [record_id, ref] : refs) {
    nlohmann::ordered_json j;
    j["record_id"] = record_id;
    j["levels"] = ref.levels;
    j["fingerprint"] = ref.fingerprint;
    out << j.dump() << '\n';
  }
}

std::map<std::string, ReferenceConfidence> read_reference(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open reference file: " + path.string());
  std::map<std::string, ReferenceConfidence> refs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      ReferenceConfidence ref;
      ref.record_id = j.at("record_id").get<std::string>();
      ref.levels = j.at("levels").get<std::map<std::string, int>>();
      ref.fingerprint = j.value("fingerprint", std::string());
      if (ref.fingerprint != reference_fingerprint(ref.levels))
        throw RewardError("reference fingerprint mismatch for record " + ref.record_id);
      ref.frozen = true;
      refs.emplace(ref.record_id, std::move(ref));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return refs;
}

std::map<std::string, RecordPrediction> votes_to_predictions(
    const std::map<std::string, RecordAggregate>& votes) {
  std::map<std::string, RecordPrediction> predictions;
  for (const auto& [record_id, aggregate] : votes) {
    RecordPrediction pred;
    for (const auto& [dim_id, agg] : aggregate)
      pred[dim_id] = TaggedPrediction{agg.vote.voted_tag, agg.confidence.level};
    predictions.emplace(record_id, std::move(pred));
  }
  return predictions;
}

int stage_gen(const PipelineConfig& cfg) {
  Taxonomy taxonomy = cfg.taxonomy();
  Corpus corpus = generate_synthetic_corpus(taxonomy, cfg.gen_n, cfg.gen_noise,
                                            derive_seed(cfg.seed, "gen"));
  write_corpus(corpus, cfg.corpus_path());
  write_meta(cfg, cfg.corpus_path(), "gen");
  std::cout << "gen: wrote " << corpus.records.size() << " records to "
            << cfg.corpus_path().string() << "\n";
  return kOk;
}

int stage_synthesize(const PipelineConfig& cfg) {
  require_file(cfg.corpus_path(), "synthesize");
  Taxonomy taxonomy = cfg.taxonomy();
  Corpus corpus = read_corpus(cfg.corpus_path(), taxonomy);
  SamplingConfig sampling = cfg.sampling;
  sampling.seed = derive_seed(cfg.seed, "synthesize");
  PromptTemplate tmpl = PromptTemplate::standard();
  RawSampleSink sink(cfg.raw_samples_path());

  AnnotationStore store;
  for (const auto& record : corpus.records) {
    std::string prompt = render_prompt(tmpl, record, taxonomy);
    auto outcomes = sample_record(cfg.backend, sampling, record, taxonomy, prompt, &sink);
    auto& samples = store[record.record_id];
    for (auto& o : outcomes) samples.push_back(std::move(o.parsed));
  }
  write_annotations(store, taxonomy, cfg.annotations_path());
  write_meta(cfg, cfg.annotations_path(), "synthesize");
  std::cout << "synthesize: " << store.size() << " records x " << sampling.m_samples
            << " samples\n";
  return kOk;
}

namespace {

// Complete (every dimension well-formed) sets for one record.
std::vector<AnnotationSet> complete_sets(const std::vector<ParsedAnnotation>& samples) {
  std::vector<AnnotationSet> sets;
  for (const auto& p : samples) {
    if (p.set) sets.push_back(*p.set);
  }
  return sets;
}

}  // namespace

int stage_calibrate(const PipelineConfig& cfg) {
  require_file(cfg.annotations_path(), "calibrate");
  Taxonomy taxonomy = cfg.taxonomy();
  AnnotationStore store = read_annotations(cfg.annotations_path(), taxonomy);

  std::map<std::string, std::vector<double>> scores;
  for (const auto& [record_id, samples] : store) {
    auto sets = complete_sets(samples);
    if (sets.empty()) continue;
    RecordAggregate agg = aggregate_record(sets, taxonomy, cfg.strategy);
    for (const auto& [dim_id, d] : agg) scores[dim_id].push_back(d.vote.winning_score);
  }
  std::map<std::string, CalibrationTable> tables;
  for (const auto& dim : taxonomy.dimensions()) {
    auto it = scores.find(dim.id);
    if (it == scores.end() || it->second.size() < 5)
      throw StageInputMissing("calibrate: fewer than 5 scores for dimension " + dim.id);
    tables.emplace(dim.id, fit_calibration(it->second, dim.id));
  }
  write_tables(tables, taxonomy, cfg.tables_path());
  write_meta(cfg, cfg.tables_path(), "calibrate");
  std::cout << "calibrate: fitted " << tables.size() << " tables\n";
  return kOk;
}

int stage_vote(const PipelineConfig& cfg) {
  require_file(cfg.annotations_path(), "vote");
  Taxonomy taxonomy = cfg.taxonomy();
  AnnotationStore store = read_annotations(cfg.annotations_path(), taxonomy);
  std::map<std::string, CalibrationTable> tables;
  const std::map<std::string, CalibrationTable>* tables_ptr = nullptr;
  if (std::filesystem::exists(cfg.tables_path())) {
    tables = read_tables(cfg.tables_path());
    tables_ptr = &tables;
  }
  std::map<std::string, RecordAggregate> votes;
  for (const auto& [record_id, samples] : store) {
    auto sets = complete_sets(samples);
    if (sets.empty()) {
      std::cerr << "vote: record " << record_id << " has no complete sample, skipped\n";
      continue;
    }
    votes.emplace(record_id, aggregate_record(sets, taxonomy, cfg.strategy, tables_ptr));
  }
  write_votes(votes, cfg.votes_path());
  write_meta(cfg, cfg.votes_path(), "vote");
  std::cout << "vote: " << votes.size() << " records, strategy " << to_string(cfg.strategy)
            << (tables_ptr ? ", calibrated" : ", uncalibrated") << "\n";
  return kOk;
}

int stage_build_sft(const PipelineConfig& cfg) {
  require_file(cfg.corpus_path(), "build-sft");
  require_file(cfg.votes_path(), "build-sft");
  Taxonomy taxonomy = cfg.taxonomy();
  Corpus corpus = read_corpus(cfg.corpus_path(), taxonomy);
  auto votes = read_votes(cfg.votes_path());
  // Records without a vote (all samples malformed) are dropped from SFT.
  Corpus covered;
  covered.taxonomy_fingerprint = corpus.taxonomy_fingerprint;
  for (const auto& r : corpus.records) {
    if (votes.count(r.record_id)) covered.records.push_back(r);
  }
  auto samples = build_sft(covered, votes, taxonomy, PromptTemplate::standard());
  std::ofstream out(cfg.sft_path(), std::ios::trunc);
  if (!out) throw IoError("cannot open output file: " + cfg.sft_path().string());
  for (const auto& s : samples) {
    nlohmann::ordered_json j;
    j["prompt"] = s.prompt;
    j["target"] = s.target;
    out << j.dump() << '\n';
  }
  write_meta(cfg, cfg.sft_path(), "build-sft");
  std::cout << "build-sft: wrote " << samples.size() << " samples\n";
  return kOk;
}

int stage_filter(const PipelineConfig& cfg) {
  require_file(cfg.votes_path(), "filter");
  auto votes = read_votes(cfg.votes_path());
  std::vector<DifficultyProfile> profiles;
  for (const auto& [record_id, aggregate] : votes)
    profiles.push_back({record_id, record_difficulty_level(aggregate)});
  FilterReport report = filter_to_shape(profiles, cfg.shape, derive_seed(cfg.seed, "filter"));

  std::string ids_text;
  for (const auto& id : report.kept) ids_text += id + "\n";
  write_text(cfg.kept_ids_path(), ids_text);

  nlohmann::ordered_json j;
  j["shape"] = to_string(cfg.shape.name);
  j["lambda"] = report.lambda;
  j["before"] = report.before;
  j["after"] = report.after;
  j["kept_count"] = report.kept.size();
  write_text(cfg.filter_report_path(), j.dump(2) + "\n");
  write_meta(cfg, cfg.kept_ids_path(), "filter");

  if (std::filesystem::exists(cfg.corpus_path())) {
    Taxonomy taxonomy = cfg.taxonomy();
    Corpus corpus = read_corpus(cfg.corpus_path(), taxonomy);
    Corpus filtered;
    filtered.taxonomy_fingerprint = corpus.taxonomy_fingerprint;
    for (const auto& r : corpus.records) {
      if (std::binary_search(report.kept.begin(), report.kept.end(), r.record_id))
        filtered.records.push_back(r);
    }
    write_corpus(filtered, cfg.filtered_corpus_path());
  }

  std::cout << "filter: shape " << to_string(cfg.shape.name) << "\n";
  std::cout << "bin   before   after\n";
  for (int b = 0; b < 5; ++b) {
    char line[64];
    std::snprintf(line, sizeof(line), "%3d %8d %7d\n", b + 1, report.before[b],
                  report.after[b]);
    std::cout << line;
  }
  return kOk;
}

int stage_reference(const PipelineConfig& cfg) {
  require_file(cfg.votes_path(), "reference");
  auto votes = read_votes(cfg.votes_path());
  std::map<std::string, ReferenceConfidence> refs;
  for (const auto& [record_id, aggregate] : votes) {
    ReferenceConfidence ref;
    ref.record_id = record_id;
    for (const auto& [dim_id, agg] : aggregate) ref.levels[dim_id] = agg.confidence.level;
    ref.fingerprint = reference_fingerprint(ref.levels);
    ref.frozen = true;
    refs.emplace(record_id, std::move(ref));
  }
  write_reference(refs, cfg.reference_path());
  write_meta(cfg, cfg.reference_path(), "reference");
  std::cout << "reference: froze " << refs.size() << " records\n";
  return kOk;
}

int stage_reward(const PipelineConfig& cfg) {
  require_file(cfg.reward_requests_path(), "reward");
  Taxonomy taxonomy = cfg.taxonomy();
  std::map<std::string, ReferenceConfidence> refs;
  if (cfg.reward_mode == RewardMode::frozen) {
    require_file(cfg.reference_path(), "reward");
    refs = read_reference(cfg.reference_path());
  }

  std::ifstream in(cfg.reward_requests_path());
  std::ofstream out(cfg.rewards_path(), std::ios::trunc);
  if (!out) throw IoError("cannot open output file: " + cfg.rewards_path().string());
  std::string line;
  std::size_t lineno = 0, count = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json req;
    try {
      req = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, e.what());
    }
    std::string record_id = req.at("record_id").get<std::string>();
    auto texts = req.at("rollout_texts").get<std::vector<std::string>>();
    RewardMode mode = cfg.reward_mode;
    if (req.contains("mode")) mode = reward_mode_from_string(req["mode"].get<std::string>());

    ReferenceConfidence ref;
    if (mode == RewardMode::frozen) {
      auto it = refs.find(record_id);
      if (it == refs.end())
        throw MissingReference("no frozen reference for record " + record_id);
      ref = it->second;
    } else {
      ref.record_id = record_id;
    }
    auto breakdowns = reward_batch(record_id, texts, ref, mode, taxonomy);
    for (const auto& b : breakdowns) {
      nlohmann::ordered_json j;
      j["record_id"] = b.record_id;
      j["rollout_index"] = b.rollout_index;
      nlohmann::ordered_json dims;
      for (const auto& [dim_id, d] : b.dimensions) {
        nlohmann::ordered_json jd;
        jd["well_formed"] = d.well_formed;
        if (d.matched) jd["matched"] = *d.matched;
        jd["weight"] = d.weight;
        jd["reward"] = d.reward;
        dims[dim_id] = std::move(jd);
      }
      j["dims"] = std::move(dims);
      j["total"] = b.total;
      out << j.dump() << '\n';
    }
    ++count;
  }
  write_meta(cfg, cfg.rewards_path(), "reward");
  std::cout << "reward: scored " << count << " batches (" << profiler::to_string(cfg.reward_mode)
            << " mode)\n";
  return kOk;
}

int stage_evaluate(const PipelineConfig& cfg) {
  require_file(cfg.votes_path(), "evaluate");
  require_file(cfg.corpus_path(), "evaluate");
  Taxonomy taxonomy = cfg.taxonomy();
  Corpus corpus = read_corpus(cfg.corpus_path(), taxonomy);
  auto predictions = votes_to_predictions(read_votes(cfg.votes_path()));
  EvalReport report = evaluate(predictions, corpus, taxonomy, cfg.tau);
  write_text(cfg.report_json_path(), report_to_json(report).dump(2) + "\n");
  write_text(cfg.report_txt_path(), report_table(report));
  write_meta(cfg, cfg.report_json_path(), "evaluate");
  std::cout << report_table(report);
  return kOk;
}

int stage_sweep(const PipelineConfig& cfg) {
  require_file(cfg.votes_path(), "sweep");
  require_file(cfg.corpus_path(), "sweep");
  Taxonomy taxonomy = cfg.taxonomy();
  Corpus corpus = read_corpus(cfg.corpus_path(), taxonomy);
  auto predictions = votes_to_predictions(read_votes(cfg.votes_path()));
  auto reports = sweep(predictions, corpus, taxonomy);
  write_text(cfg.sweep_csv_path(), sweep_csv(reports));
  write_meta(cfg, cfg.sweep_csv_path(), "sweep");
  std::cout << "sweep: wrote " << cfg.sweep_csv_path().string() << "\n";
  return kOk;
}

int stage_plot(const PipelineConfig& cfg) {
  require_file(cfg.sweep_csv_path(), "plot");
  // Rebuild macro curves from the sweep CSV.
  std::ifstream in(cfg.sweep_csv_path());
  std::string line;
  std::vector<EvalReport> reports;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    auto fields = [&] {
      std::vector<std::string> f;
      std::size_t pos = 0;
      while (true) {
        auto comma = line.find(',', pos);
        if (comma == std::string::npos) {
          f.push_back(line.substr(pos));
          break;
        }
        f.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
      }
      return f;
    }();
    if (fields.size() < 8 || fields[1] != "macro") continue;
    EvalReport r;
    r.tau = std::stoi(fields[0]);
    r.macro_precision = std::stod(fields[5]);
    r.macro_recall = std::stod(fields[6]);
    r.macro_f1 = std::stod(fields[7]);
    reports.push_back(std::move(r));
  }
  if (reports.size() != 5) throw StageInputMissing("plot: sweep CSV lacks 5 macro rows");
  write_text(cfg.sweep_svg_path(), sweep_svg(reports));
  write_meta(cfg, cfg.sweep_svg_path(), "plot");
  std::cout << "plot: wrote " << cfg.sweep_svg_path().string() << "\n";
  return kOk;
}

int run_stage(const std::string& name, const PipelineConfig& cfg) {
  try {
    std::filesystem::create_directories(cfg.workdir);
    if (name == "gen") return stage_gen(cfg);
    if (name == "synthesize") return stage_synthesize(cfg);
    if (name == "calibrate") return stage_calibrate(cfg);
    if (name == "vote") return stage_vote(cfg);
    if (name == "build-sft") return stage_build_sft(cfg);
    if (name == "filter") return stage_filter(cfg);
    if (name == "reference") return stage_reference(cfg);
    if (name == "reward") return stage_reward(cfg);
    if (name == "evaluate") return stage_evaluate(cfg);
    if (name == "sweep") return stage_sweep(cfg);
    if (name == "plot") return stage_plot(cfg);
    std::cerr << "unknown stage: " << name << "\n";
    return kConfigError;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const StageInputMissing& e) {
    std::cerr << "stage input missing: " << e.what() << "\n";
    return kStageInputMissing;
  } catch (const BackendUnavailable& e) {
    std::cerr << "backend unavailable: " << e.what() << "\n";
    return kBackendUnavailable;
  } catch (const RecordError& e) {
    std::cerr << "ingest error: " << e.what() << "\n";
    return kIngestError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace profiler
