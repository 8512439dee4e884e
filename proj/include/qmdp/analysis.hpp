#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qmdp/mdp.hpp"
#include "qmdp/occupation.hpp"
#include "qmdp/quantizer.hpp"

namespace qmdp {

/// Unbiased sampler of the normalized discounted occupation measure: each
/// sample simulates a fresh trajectory for a Geometric(1 - beta) horizon
/// (support {0, 1, ...}) and records the terminal state.
OccupationSample discounted_occupation(const ContinuousMdp& mdp,
                                       const StationaryPolicy& policy,
                                       double beta, const State& x0,
                                       int n_samples, std::uint64_t seed);

/// Ergodic-average estimator of the invariant measure: states collected
/// along one trajectory after burn-in, with optional thinning.
OccupationSample invariant_occupation(const ContinuousMdp& mdp,
                                      const StationaryPolicy& policy,
                                      const State& x0, int burn_in,
                                      int n_samples, int thinning,
                                      std::uint64_t seed);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Weighted mean of the loss over the occupation sample.
Estimate expected_loss(const OccupationSample& samples, const GridQuantizer& qz,
                       const BinWeighting& weighting);

/// Assembled right-hand side of one of the error bounds. The exact
/// arithmetic relation total == prefactor * loss_term always holds.
struct BoundReport {
  std::string formula;
  double prefactor = 0.0;
  double loss_term = 0.0;
  double total = 0.0;
  std::map<std::string, double> inputs;
  std::vector<std::pair<std::string, double>> per_policy;
  std::string maximizer;
  std::string note;
};

/// Occupation-measure bound for the discounted criterion. The supplied
/// policy set only lower-bounds the theoretical supremum over all
/// stationary policies; the report says so.
BoundReport bound_discounted_occupation(
    double alpha_c, double alpha_T, double c_sup, double beta,
    const std::vector<std::pair<std::string, double>>& loss_integrals);

/// Closed-form Lyapunov bound for the discounted criterion, coefficient
/// (2n + 1). M must be a perfect n-th power.
BoundReport bound_lyapunov_discounted(const LyapunovCertificate& cert, long M,
                                      int n, double beta, const State& x0,
                                      double alpha_c, double alpha_T,
                                      double c_sup);

/// Closed-form Lyapunov bound for the average-cost criterion; cert.b is the
/// drift constant of the V - f + b form.
BoundReport bound_lyapunov_average(const LyapunovCertificate& cert, long M,
                                   int n, double mu_mass, double alpha_c,
                                   double alpha_T, double c_sup);

/// Learning-route Lyapunov bound, coefficient 4 instead of (2n + 1).
BoundReport bound_learning(const LyapunovCertificate& cert, long M, int n,
                           double beta, const State& x0, double alpha_c,
                           double alpha_T, double c_sup);

/// Occupation-measure bound for the average-cost criterion.
BoundReport bound_average_occupation(
    double alpha_c, double alpha_T, double c_sup, double mu_mass,
    const std::vector<std::pair<std::string, double>>& loss_integrals);

struct OverflowReport {
  double empirical_mass = 0.0;
  double cap = 0.0;  // 1 / k
  double std_error = 0.0;
  bool pass = false;
  std::size_t n_samples = 0;
};

/// Checks the Markov-inequality cap on overflow mass for a quantizer sized
/// from the certificate: pass iff empirical mass <= 1/k + 3 binomial SE.
OverflowReport overflow_mass_check(const OccupationSample& samples,
                                   const GridQuantizer& qz,
                                   const LyapunovCertificate& cert, int k);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS residual in log-log space
};

/// Least squares through (log M, log value). Requires >= 3 points with
/// distinct M and positive values.
RateFit rate_fit(const std::vector<std::pair<double, double>>& points);

struct MedianCheck {
  Eigen::VectorXd median;
  Eigen::VectorXd brute_force;
  double median_value = 0.0;
  double brute_value = 0.0;
  double gap = 0.0;  // median_value - brute_value
};

/// Compares the coordinate-wise weighted median against a per-axis grid
/// scan of the expected l1 distortion; the scan is the oracle.
MedianCheck median_optimality_check(const std::vector<Eigen::VectorXd>& samples,
                                    const std::vector<double>& weights,
                                    int grid_resolution);

} // namespace qmdp
