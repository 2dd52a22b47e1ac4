#include <omp.h>

#include <cstdio>
#include <exception>
#include <fstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mfg/experiments.hpp"
#include "mfg/model_lq.hpp"
#include "mfg/version.hpp"

namespace {

int cmd_run(const std::string& config_path, std::uint64_t* seed_override,
            const std::string* out_override, int threads) {
  if (threads > 0) omp_set_num_threads(threads);
  mfg::ExperimentConfig cfg = mfg::ExperimentConfig::load(config_path);
  if (seed_override) cfg.base_seed = *seed_override;
  if (out_override) cfg.output_dir = *out_override;
  const mfg::ExperimentResult res = mfg::run_experiment(cfg);
  std::printf("experiment: %s\n", cfg.experiment.c_str());
  std::printf("csv:  %s\n", res.csv_path.c_str());
  std::printf("json: %s\n", res.json_path.c_str());
  std::printf("result: %s\n", res.pass ? "PASS" : "FAIL");
  return res.pass ? 0 : 2;
}

int cmd_validate(const std::string& config_path) {
  const mfg::ExperimentConfig cfg = mfg::ExperimentConfig::load(config_path);
  std::printf("ok: %s (experiment=%s, hash=%016llx)\n", config_path.c_str(),
              cfg.experiment.c_str(),
              static_cast<unsigned long long>(mfg::config_hash(cfg)));
  return 0;
}

int cmd_riccati(const std::string& n_str, const std::string& params_path, int steps) {
  std::ifstream is(params_path);
  if (!is) throw std::runtime_error("cannot open params " + params_path);
  nlohmann::json j;
  is >> j;
  // Accept either a bare params object or a config carrying one.
  const mfg::ModelParams p = (j.contains("params") ? j.at("params") : j).get<mfg::ModelParams>();
  mfg::NLabel n = mfg::NLabel::inf();
  if (n_str != "inf") n = mfg::NLabel::of(std::stol(n_str));
  std::printf("t,phi\n");
  for (int i = 0; i <= steps; ++i) {
    const double t = p.T * i / steps;
    std::printf("%.17g,%.17g\n", t, mfg::phi_closed_form(t, n, p));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo laboratory for a linear-quadratic mean field game"};
  app.set_version_flag("--version", mfg::kVersion);
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  run->add_option("--config", config_path, "experiment config JSON file")->required();
  auto* seed_opt = run->add_option("--seed", seed, "override base_seed");
  auto* out_opt = run->add_option("--out", out_dir, "override output_dir");
  run->add_option("--threads", threads, "OpenMP thread count");

  auto* validate = app.add_subcommand("validate-config", "parse and validate a config");
  std::string validate_path;
  validate->add_option("config", validate_path, "experiment config JSON file")->required();

  auto* riccati = app.add_subcommand("riccati", "print a Riccati curve as CSV");
  std::string n_str = "inf", params_path;
  int steps = 1000;
  riccati->add_option("--n", n_str, "player count, integer or 'inf'")->required();
  riccati->add_option("--params", params_path, "model params JSON file")->required();
  riccati->add_option("--steps", steps, "grid intervals");

  try {
    app.parse(argc, argv);
    if (run->parsed()) {
      return cmd_run(config_path, seed_opt->count() ? &seed : nullptr,
                     out_opt->count() ? &out_dir : nullptr, threads);
    }
    if (validate->parsed()) return cmd_validate(validate_path);
    if (riccati->parsed()) return cmd_riccati(n_str, params_path, steps);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
