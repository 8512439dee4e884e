#pragma once

#include <Eigen/Dense>

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qmdp/finite_model.hpp"
#include "qmdp/mdp.hpp"
#include "qmdp/quantizer.hpp"

#include <nlohmann/json.hpp>

namespace qmdp {

/// A concrete model with exact regularity certificates, so every bound and
/// rate claim is testable end to end.
struct BenchmarkSpec {
  std::string name;
  LyapunovCertificate drift;           // E[V'] <= (1-alpha) V + b
  double avg_drift_b = 0.0;            // b for the V - f + b form (= b/alpha)
  std::optional<MinorizationCertificate> minorization;
  double alpha_c = 0.0;
  double alpha_T = 0.0;
  double c_sup = 0.0;
  State x0;                            // designated initial state
  std::vector<State> drift_probes;
  nlohmann::json params;
};

struct Benchmark {
  ContinuousMdp mdp;
  BenchmarkSpec spec;
};

/// Controlled AR(1): X' = a X + u + W, W ~ N(0, sigma^2).
/// Cost c(x,u) = min(|x|, cost_cap)/cost_cap + 0.1 |u| / (1 + |u|).
/// Certificate m = 2, alpha = 1 - a, b = u_max^2/(1-a) + sigma^2.
Benchmark linear_gaussian_1d(double a, double sigma,
                             const std::vector<double>& action_grid,
                             double cost_cap);

/// Mixture kernel T = (1-lambda) N(a x + u, sigma^2) + lambda nu0 with nu0
/// uniform on [-1, 1]; minorizing measure mu = lambda nu0, mass lambda.
Benchmark linear_gaussian_minorized(double a, double sigma, double lambda,
                                    const std::vector<double>& action_grid,
                                    double cost_cap);

/// X' = A X + u e + W with componentwise Gaussian noise; requires the
/// l1-induced norm of A below 1.
Benchmark linear_gaussian_2d(const Eigen::Matrix2d& A, double sigma,
                             const std::vector<double>& action_grid,
                             double cost_cap);

/// Dispatch by name + parameter map (CLI entry point).
Benchmark make_benchmark(const std::string& name, const nlohmann::json& params);

enum class Criterion { Discounted, Average };

struct ReferenceSolution {
  GridQuantizer quantizer;
  ValueSolution solution;
  double value_at_x0 = 0.0;    // extended value (discounted) or gain (average)
  double consistency_gap = 0.0;
};

/// Desk-scale oracle: a finite-model solution at reference resolution with
/// Dirac-at-median representatives fitted from a long occupation sample.
/// Throws OracleError when the k_ref vs k_ref/2 values disagree beyond
/// consistency_tol.
ReferenceSolution reference_solution(const Benchmark& bench, Criterion criterion,
                                     double beta, int k_ref,
                                     double half_width_ref, int samples_per_bin,
                                     const StationaryPolicy& sampling_policy,
                                     int occupation_samples, std::uint64_t seed,
                                     double consistency_tol);

} // namespace qmdp
