#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qmdp/analysis.hpp"
#include "qmdp/benchmarks.hpp"
#include "qmdp/learner.hpp"

namespace qmdp {

/// Schema-validated experiment configuration. Unknown keys anywhere in the
/// document are rejected with the offending field path.
struct ExperimentConfig {
  nlohmann::json raw;

  std::string benchmark_name = "linear_gaussian_1d";
  nlohmann::json benchmark_params;

  std::string criterion = "discounted";
  double beta = 0.5;

  std::string quant_mode = "lyapunov";  // lyapunov | explicit
  int k = 16;
  double half_width = 0.0;              // explicit mode only
  std::string representatives = "midpoint";  // midpoint | median
  std::string weighting = "dirac";           // dirac | uniform | empirical

  std::vector<int> sweep_k;
  std::vector<std::pair<double, double>> synthetic_sweep;  // test mode

  long learn_iterations = 100'000;
  std::string exploration = "uniform";
  bool trajectory_log = false;

  int samples_per_bin = 2000;
  int occupation_samples = 20'000;
  int burn_in = 10'000;
  int thinning = 1;
  int rollouts = 200;
  int horizon = 200;

  int k_ref = 0;                 // 0 -> derived default
  double half_width_ref = 0.0;   // 0 -> derived default
  double consistency_tol = 0.0;  // 0 -> derived default

  std::vector<double> x0;  // empty -> benchmark default
  std::uint64_t seed = 1;
  int jobs = 1;

  static ExperimentConfig parse(const nlohmann::json& doc);
  static ExperimentConfig load(const std::filesystem::path& path);

  Benchmark make_bench() const;
  State initial_state(const Benchmark& bench) const;
};

struct SweepRow {
  int k = 0;
  long M = 0;
  double half_width = 0.0;
  double expected_loss = 0.0;
  double expected_loss_se = 0.0;
  double bound = 0.0;
  double j_hat = 0.0;
  double j_ref = 0.0;
  double abs_err = 0.0;
  double overflow_mass = 0.0;
  double overflow_cap = 0.0;
  double overflow_se = 0.0;
  bool overflow_pass = false;
  std::uint64_t seed = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  RateFit loss_fit;
  RateFit err_fit;
  double oracle_value = 0.0;
  double oracle_consistency_gap = 0.0;
};

struct CompareResult {
  int k = 0;
  long M = 0;
  double half_width = 0.0;
  double j_ref = 0.0;
  double planning_value = 0.0;
  double learning_value = 0.0;
  double planning_gap = 0.0;
  double learning_gap = 0.0;
  double planning_bound = 0.0;
  double learning_bound = 0.0;
  double bound_ratio = 0.0;  // learning / planning
};

struct LearnResult {
  Eigen::MatrixXd q_learned;
  Eigen::MatrixXd q_empirical;   // q_from_model(empirical_model(traj))
  Eigen::MatrixXd q_weighted;    // q_from_model of the invariant-weighted model
  double gap_empirical = 0.0;    // sup-norm, learned vs empirical route
  double gap_weighted = 0.0;     // sup-norm, learned vs weighted model
  CoverageReport coverage;
};

SweepResult run_sweep(const ExperimentConfig& cfg);
CompareResult run_compare(const ExperimentConfig& cfg);
LearnResult run_learn(const ExperimentConfig& cfg);

/// CLI subcommand bodies. Each writes its artifacts under out_dir and a
/// JSON metadata sidecar echoing the config; throws on failure (ConfigError,
/// ConvergenceError, OracleError map to exit codes 2, 3, 4).
void cmd_design(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
void cmd_solve(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
void cmd_learn(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
void cmd_sweep(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
void cmd_compare(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
void cmd_verify(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Fixed-precision float formatting shared by all CSV emitters, so output
/// is byte-identical across runs.
std::string format_double(double v);

nlohmann::json quantizer_to_json(const GridQuantizer& qz);
GridQuantizer quantizer_from_json(const nlohmann::json& j);

} // namespace qmdp
