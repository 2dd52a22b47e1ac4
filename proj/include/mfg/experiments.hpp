#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "mfg/clt_oracle.hpp"
#include "mfg/model_lq.hpp"
#include "mfg/stats.hpp"

namespace mfg {

// Experiment kinds: lln_rate, coupling_rate, clt, l4_rate, hat_rate,
// concentration.
struct ExperimentConfig {
  std::string experiment;
  ModelParams params;
  std::vector<long> n_ladder;
  int replications = 0;
  int dt_steps = 0;  // 0 picks the per-kind default (500; 2000 for clt)
  std::uint64_t base_seed = 0;
  std::string output_dir = ".";
  int max_degree = 3;          // clt only
  std::vector<double> times;   // clt only; empty means {T/2, T}

  void validate() const;
  int effective_dt_steps() const;
  std::vector<double> effective_times() const;

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  static ExperimentConfig load(const std::string& path);
};

struct ExperimentResult {
  bool pass = false;
  std::string csv_path;
  std::string json_path;
  nlohmann::json report;
};

// Runs the configured experiment and writes <out>/<experiment>_<hash>.csv and
// .json. The hash covers the canonical config serialization (seed included),
// and reports carry no timestamps, so a rerun reproduces both files byte for
// byte.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// FNV-1a over the canonical config serialization.
std::uint64_t config_hash(const ExperimentConfig& cfg);

// Finite-n regression estimate of the degree-2 moment drift. Simulates the
// n-player system to t0, then regresses the windowed increment of <S^n, x^2>
// (with the realized common-noise term subtracted) on (mu_bar s_1, s_2, 1).
// The limit drift gives coefficients (4 c(t), -2 c(t), 0).
struct DriftRegressionResult {
  OlsFit fit;          // beta[0] ~ 4c, beta[1] ~ -2c, beta[2] ~ 0
  double c_mid = 0.0;  // c at the window midpoint
  double t0 = 0.0;
  double window = 0.0;
};
DriftRegressionResult run_drift_regression(const LqModel& model, int n, int M, int dt_steps,
                                           double t0, int window_steps, std::uint64_t base_seed);

}  // namespace mfg
