#include "qmdp/mdp.hpp"

#include <cmath>
#include <string>

namespace qmdp {

void ContinuousMdp::validate() const {
  if (n < 1) throw ConfigError("ContinuousMdp: n must be >= 1");
  if (actions.empty()) throw ConfigError("ContinuousMdp: empty action set");
  if (!step) throw ConfigError("ContinuousMdp: missing step sampler");
  if (!cost) throw ConfigError("ContinuousMdp: missing cost function");
  if (!(c_sup > 0.0)) throw ConfigError("ContinuousMdp: c_sup must be > 0");
  if (alpha_c < 0.0) throw ConfigError("ContinuousMdp: alpha_c must be >= 0");
  if (alpha_T < 0.0) throw ConfigError("ContinuousMdp: alpha_T must be >= 0");
  if (!(beta > 0.0 && beta < 1.0))
    throw ConfigError("ContinuousMdp: beta must lie in (0, 1)");
}

void LyapunovCertificate::validate() const {
  if (!(m > 1.0)) throw CertificateError("LyapunovCertificate: m must be > 1");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw CertificateError("LyapunovCertificate: alpha must lie in (0, 1]");
  if (b < 0.0) throw CertificateError("LyapunovCertificate: b must be >= 0");
}

void MinorizationCertificate::validate() const {
  if (!(mass > 0.0 && mass < 1.0))
    throw CertificateError("MinorizationCertificate: mass must lie in (0, 1)");
  if (!sampler) throw CertificateError("MinorizationCertificate: missing sampler");
  if (!bin_mass)
    throw CertificateError("MinorizationCertificate: missing bin_mass");
}

StationaryPolicy constant_policy(int action_index) {
  StationaryPolicy p;
  p.id = "const_" + std::to_string(action_index);
  p.act = [action_index](const State&, Rng&) { return action_index; };
  return p;
}

StationaryPolicy uniform_policy(int num_actions) {
  StationaryPolicy p;
  p.id = "uniform_" + std::to_string(num_actions);
  p.act = [num_actions](const State&, Rng& rng) {
    return rng.uniform_int(num_actions);
  };
  return p;
}

Trajectory simulate(const ContinuousMdp& mdp, const StationaryPolicy& policy,
                    const State& x0, int horizon, std::uint64_t seed) {
  mdp.validate();
  if (x0.size() != mdp.n) throw ConfigError("simulate: x0 dimension mismatch");
  if (horizon < 0) throw ConfigError("simulate: negative horizon");

  Rng root(seed);
  Rng policy_rng = root.split(0);
  Rng step_rng = root.split(1);

  Trajectory traj;
  traj.seed = seed;
  traj.steps.reserve(static_cast<std::size_t>(horizon));
  State x = x0;
  for (int t = 0; t < horizon; ++t) {
    int u = policy.act(x, policy_rng);
    if (u < 0 || u >= mdp.num_actions())
      throw ConfigError("simulate: policy returned action out of range");
    double c = mdp.cost(x, u);
    if (c < -1e-12 || c > mdp.c_sup + 1e-12)
      throw ConfigError("simulate: realized cost outside [0, c_sup]");
    State x_next = mdp.step(x, u, step_rng);
    traj.steps.push_back(Transition{x, u, c, x_next});
    x = x_next;
  }
  return traj;
}

DriftReport verify_drift(const ContinuousMdp& mdp,
                         const LyapunovCertificate& cert,
                         const std::vector<State>& probes,
                         int samples_per_probe, std::uint64_t seed) {
  mdp.validate();
  cert.validate();
  if (probes.empty()) throw ConfigError("verify_drift: empty probe set");
  if (samples_per_probe < 100)
    throw ConfigError("verify_drift: need at least 100 samples per probe");

  Rng root(seed);
  DriftReport report;
  std::uint64_t stream = 0;
  for (const State& x : probes) {
    for (int u = 0; u < mdp.num_actions(); ++u) {
      Rng rng = root.split(stream++);
      double sum = 0.0, sum_sq = 0.0;
      for (int s = 0; s < samples_per_probe; ++s) {
        State x_next = mdp.step(x, u, rng);
        double v = cert.lyapunov(x_next);
        sum += v;
        sum_sq += v * v;
      }
      double mean = sum / samples_per_probe;
      double var =
          (sum_sq - samples_per_probe * mean * mean) / (samples_per_probe - 1);
      double se = std::sqrt(std::max(var, 0.0) / samples_per_probe);

      DriftEntry e;
      e.x = x;
      e.u = u;
      e.empirical_moment = mean;
      e.budget = (1.0 - cert.alpha) * cert.lyapunov(x) + cert.b;
      e.margin = mean - e.budget;
      e.std_error = se;
      e.flagged = e.margin > 3.0 * se;
      report.max_margin = std::max(report.max_margin, e.margin);
      report.any_flagged = report.any_flagged || e.flagged;
      report.entries.push_back(std::move(e));
    }
  }
  return report;
}

} // namespace qmdp
