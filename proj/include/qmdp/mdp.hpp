#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qmdp/errors.hpp"
#include "qmdp/rng.hpp"

namespace qmdp {

using State = Eigen::VectorXd;

struct Action {
  std::string name;
  Eigen::VectorXd payload;
};

/// Continuous-state controlled Markov model: a sampler for the transition
/// kernel, a bounded cost that is Lipschitz in the state (l1 norm), and the
/// regularity constants the error bounds consume. Immutable after
/// construction and safe to share across threads.
struct ContinuousMdp {
  int n = 0;
  std::vector<Action> actions;
  std::function<State(const State&, int, Rng&)> step;
  std::function<double(const State&, int)> cost;
  double c_sup = 0.0;    // uniform cost bound
  double alpha_c = 0.0;  // Lipschitz constant of cost in x (l1)
  double alpha_T = 0.0;  // total-variation Lipschitz constant of the kernel
  double beta = 0.0;     // discount factor

  /// Optional analytic kernel: P(X' in [lo, hi) | x, u) for axis-aligned
  /// boxes. Set for models whose kernels admit closed-form box
  /// probabilities; lets finite models be built without transition
  /// sampling noise.
  std::function<double(const State&, int, const State&, const State&)> box_prob;

  int num_actions() const { return static_cast<int>(actions.size()); }
  void validate() const;
};

/// Drift certificate for V(x) = ||x||_1^m:
///   E[V(X') | x, u] <= (1 - alpha) V(x) + b   for all x, u.
struct LyapunovCertificate {
  double m = 2.0;
  double alpha = 1.0;
  double b = 0.0;

  void validate() const;
  double lyapunov(const State& x) const { return std::pow(x.lpNorm<1>(), m); }
};

/// Minorization certificate: T(. | x, u) >= mu(.) uniformly, with
/// mu(X) = mass. `sampler` draws from the normalized measure mu / mass;
/// `bin_mass` evaluates mu on half-open boxes [lo, hi).
struct MinorizationCertificate {
  double mass = 0.0;
  std::function<State(Rng&)> sampler;
  std::function<double(const State&, const State&)> bin_mass;

  void validate() const;
};

/// Stationary (possibly randomized) policy: state -> action index.
struct StationaryPolicy {
  std::string id;
  std::function<int(const State&, Rng&)> act;
};

StationaryPolicy constant_policy(int action_index);
StationaryPolicy uniform_policy(int num_actions);

struct Transition {
  State x;
  int u = 0;
  double cost = 0.0;
  State x_next;
};

struct Trajectory {
  std::vector<Transition> steps;
  std::uint64_t seed = 0;
};

/// Runs the controlled chain for `horizon` transitions. Deterministic given
/// the seed. Realized costs are checked against [0, c_sup].
Trajectory simulate(const ContinuousMdp& mdp, const StationaryPolicy& policy,
                    const State& x0, int horizon, std::uint64_t seed);

struct DriftEntry {
  State x;
  int u = 0;
  double empirical_moment = 0.0;  // estimate of E[V(X') | x, u]
  double budget = 0.0;            // (1 - alpha) V(x) + b
  double margin = 0.0;            // empirical_moment - budget
  double std_error = 0.0;
  bool flagged = false;           // margin > 3 * std_error
};

struct DriftReport {
  std::vector<DriftEntry> entries;
  double max_margin = 0.0;
  bool any_flagged = false;
};

/// Statistical check of the drift inequality at the given probe states,
/// for every action. Positive margins beyond 3 standard errors are flagged.
DriftReport verify_drift(const ContinuousMdp& mdp,
                         const LyapunovCertificate& cert,
                         const std::vector<State>& probes,
                         int samples_per_probe, std::uint64_t seed);

} // namespace qmdp
