#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "qmdp/mdp.hpp"
#include "qmdp/quantizer.hpp"

namespace qmdp {

/// Finite MDP over the quantized state set: effective cost C*(y, u) and
/// effective kernel P*(y' | y, u). Rows of every transition matrix sum to 1.
struct FiniteMdp {
  int num_states = 0;
  int num_actions = 0;
  double c_sup = 0.0;
  Eigen::MatrixXd cost;               // num_states x num_actions
  std::vector<Eigen::MatrixXd> trans; // per action, num_states x num_states

  void validate(double tol = 1e-9) const;
};

/// Builds the finite model from a quantizer and a weighting measure.
///
/// When the model exposes an analytic kernel (box_prob) and
/// force_monte_carlo is false, P* rows are exact integrals of the kernel
/// against the weighting samples. Otherwise both C* and P* are nested
/// Monte Carlo estimates: draw x from the bin weighting, draw one next
/// state per draw, count landing bins, and normalize by the draw count so
/// rows sum to exactly 1.
FiniteMdp build_finite_model(const ContinuousMdp& mdp, const GridQuantizer& qz,
                             const BinWeighting& weighting, int samples_per_bin,
                             std::uint64_t seed, bool force_monte_carlo = false);

struct ValueSolution {
  Eigen::VectorXd values;  // J for discounted, relative value h for average
  std::vector<int> greedy; // lowest-index tie-break
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> residual_history;
  double gain = std::numeric_limits<double>::quiet_NaN();  // average only
};

/// Discounted value iteration. Stops when the sup-norm successive
/// difference drops below tol * (1 - beta) / (2 beta), certifying
/// ||J - J_fixed||_inf <= tol. Throws ConvergenceError at the iteration cap.
ValueSolution discounted_vi(const FiniteMdp& fmdp, double beta, double tol,
                            int max_iter);

/// Relative value iteration for the average-cost criterion under a
/// minorization vector mu_hat (the quantized minorizing measure):
///   h <- min_u { C*(y,u) + sum_y' h(y') P*(y'|y,u) } - <h, mu_hat>.
/// Requires P*(.|y,u) >= mu_hat entrywise; violations beyond 1e-6 raise
/// CertificateError, smaller ones are clipped and the row renormalized.
/// The iteration contracts with modulus 1 - sum(mu_hat); stops when the
/// successive difference certifies ||h - h_fixed||_inf <= tol. The gain is
/// j = <h_fixed, mu_hat>, and ||h||_inf <= c_sup / mass is verified.
ValueSolution relative_vi(const FiniteMdp& fmdp, const Eigen::VectorXd& mu_hat,
                          double tol, int max_iter);

/// Piecewise-constant extension of bin values through the quantizer.
std::function<double(const Eigen::VectorXd&)> extend_values(
    const Eigen::VectorXd& values, const GridQuantizer& qz);

double extend_value(const Eigen::VectorXd& values, const GridQuantizer& qz,
                    const Eigen::VectorXd& x);

/// Pushes the minorizing measure through the quantizer: mu_hat(i) = mu(B_i),
/// with the overflow entry recovered as mass minus the granular total.
Eigen::VectorXd quantize_measure(const MinorizationCertificate& cert,
                                 const GridQuantizer& qz);

void save_finite_mdp(const FiniteMdp& fmdp, const std::string& path);
FiniteMdp load_finite_mdp(const std::string& path);

} // namespace qmdp
