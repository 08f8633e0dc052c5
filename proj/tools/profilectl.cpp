// Pipeline driver: each subcommand runs one stage, stages communicate only
// through files in the working directory.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "profiler/pipeline.hpp"

using profiler::PipelineConfig;

int main(int argc, char** argv) {
  CLI::App app{"label-free user profiling pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::string workdir;
  std::string taxonomy_path;
  app.add_option("--config", config_path, "pipeline config file (JSON)");
  app.add_option("--workdir", workdir, "artifact directory (default: .)");
  app.add_option("--taxonomy", taxonomy_path, "taxonomy config file (default: built-in)");

  // Per-stage overrides.
  std::int64_t seed = -1;
  int m = -1, tau = -1;
  std::string strategy, shape, backend, mode;
  std::size_t gen_n = 0;
  double gen_noise = -1, fidelity = -1, malformed_rate = -1;
  app.add_option("--seed", seed, "base seed for all stage randomness");
  app.add_option("--m", m, "parallel samples per record");
  app.add_option("--tau", tau, "confidence threshold 1..5");
  app.add_option("--strategy", strategy, "confidence_weighted | majority | single_sample");
  app.add_option("--shape", shape, "original | uniform | vee | wedge | m_shape");
  app.add_option("--backend", backend, "mock | http_chat");
  app.add_option("--mode", mode, "reward mode: frozen | self");
  app.add_option("--n", gen_n, "records to generate (gen stage)");
  app.add_option("--noise", gen_noise, "uninformative-cue fraction (gen stage)");
  app.add_option("--fidelity", fidelity, "mock backend fidelity");
  app.add_option("--malformed-rate", malformed_rate, "mock backend malformed-block rate");

  for (const char* stage : {"gen", "synthesize", "calibrate", "vote", "build-sft", "filter",
                            "reference", "reward", "evaluate", "sweep", "plot"}) {
    app.add_subcommand(stage);
  }

  CLI11_PARSE(app, argc, argv);

  PipelineConfig cfg;
  try {
    if (!config_path.empty()) cfg = PipelineConfig::load(config_path);
    if (!workdir.empty()) cfg.workdir = workdir;
    if (!taxonomy_path.empty()) cfg.taxonomy_path = taxonomy_path;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (m > 0) cfg.sampling.m_samples = m;
    if (tau > 0) cfg.tau = tau;
    if (!strategy.empty()) cfg.strategy = profiler::strategy_from_string(strategy);
    if (!shape.empty()) cfg.shape = profiler::ShapeSpec::parse(shape);
    if (!mode.empty()) cfg.reward_mode = profiler::reward_mode_from_string(mode);
    if (!backend.empty()) {
      if (backend == "mock") {
        cfg.backend.kind = profiler::BackendSpec::Kind::mock;
      } else if (backend == "http_chat") {
        cfg.backend.kind = profiler::BackendSpec::Kind::http_chat;
      } else {
        throw profiler::ConfigError("unknown backend: " + backend);
      }
    }
    if (gen_n > 0) cfg.gen_n = gen_n;
    if (gen_noise >= 0) cfg.gen_noise = gen_noise;
    if (fidelity >= 0) cfg.backend.mock_fidelity = fidelity;
    if (malformed_rate >= 0) cfg.backend.mock_malformed_rate = malformed_rate;
    if (cfg.tau < 1 || cfg.tau > 5)
      throw profiler::ConfigError("tau must be in 1..5");
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return profiler::kConfigError;
  }

  return profiler::run_stage(app.get_subcommands().front()->get_name(), cfg);
}
