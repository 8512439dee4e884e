#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

#include "qmdp/finite_model.hpp"
#include "qmdp/mdp.hpp"
#include "qmdp/quantizer.hpp"

namespace qmdp {

struct QLearnResult {
  Eigen::MatrixXd q;        // (M+1) x |U|
  Eigen::MatrixXi visits;   // (M+1) x |U|, total executed updates per pair
  Trajectory trajectory;    // the exploration trajectory, for model learning
};

/// Tabular Q-learning on quantized observations of the continuous chain.
/// Q starts at zero; the j-th update of a pair uses learning rate 1/j;
/// costs are observed at the true (pre-quantization) state.
QLearnResult quantized_q_learning(const ContinuousMdp& mdp,
                                  const GridQuantizer& qz,
                                  const StationaryPolicy& exploration,
                                  long iterations, const State& x0,
                                  std::uint64_t seed);

struct CoverageReport {
  std::vector<std::pair<int, int>> unvisited;  // (bin, action) fallback pairs
  double visited_fraction = 0.0;
};

/// Visit-count model estimates from a single trajectory: C* as per-pair
/// sample mean cost, P* as landing-bin frequencies. Unvisited pairs get the
/// pessimistic cost c_sup and a self-loop, and are listed in the report.
std::pair<FiniteMdp, CoverageReport> empirical_model(const Trajectory& traj,
                                                     const GridQuantizer& qz,
                                                     double c_sup);

/// Q-value iteration on a finite model to sup-norm accuracy tol.
Eigen::MatrixXd q_from_model(const FiniteMdp& fmdp, double beta, double tol,
                             int max_iter = 1'000'000);

/// policy(x) = argmin_u Q(q(x), u), lowest-index tie-break.
StationaryPolicy greedy_policy(const Eigen::MatrixXd& q, const GridQuantizer& qz);

struct PolicyValue {
  double mean = 0.0;
  double std_error = 0.0;
  double truncation_bias = 0.0;  // beta^horizon * c_sup / (1 - beta)
};

/// Monte Carlo estimate of the discounted cost of a policy from x0, over
/// independent truncated rollouts.
PolicyValue evaluate_policy(const ContinuousMdp& mdp,
                            const StationaryPolicy& policy, double beta,
                            const State& x0, int rollouts, int horizon,
                            std::uint64_t seed);

/// Appends one transition per line: t, x..., u, c, x_next...
void write_trajectory(const Trajectory& traj, const std::string& path);

} // namespace qmdp
