#include "qmdp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qmdp {

OccupationSample discounted_occupation(const ContinuousMdp& mdp,
                                       const StationaryPolicy& policy,
                                       double beta, const State& x0,
                                       int n_samples, std::uint64_t seed) {
  mdp.validate();
  if (!(beta > 0.0 && beta < 1.0))
    throw ConfigError("discounted_occupation: beta must lie in (0, 1)");
  if (n_samples < 1)
    throw ConfigError("discounted_occupation: n_samples must be >= 1");

  Rng root(seed);
  OccupationSample out;
  out.normalized = true;
  out.provenance = "discounted";
  out.policy_id = policy.id;
  out.seed = seed;
  out.states.reserve(static_cast<std::size_t>(n_samples));
  out.weights.assign(static_cast<std::size_t>(n_samples),
                     1.0 / static_cast<double>(n_samples));

  const double log_beta = std::log(beta);
  for (int s = 0; s < n_samples; ++s) {
    Rng rng = root.split(static_cast<std::uint64_t>(s));
    double u = rng.uniform01();
    while (u <= 0.0) u = rng.uniform01();
    int horizon = static_cast<int>(std::floor(std::log(u) / log_beta));
    State x = x0;
    for (int t = 0; t < horizon; ++t) x = mdp.step(x, policy.act(x, rng), rng);
    out.states.push_back(std::move(x));
  }
  return out;
}

OccupationSample invariant_occupation(const ContinuousMdp& mdp,
                                      const StationaryPolicy& policy,
                                      const State& x0, int burn_in,
                                      int n_samples, int thinning,
                                      std::uint64_t seed) {
  mdp.validate();
  if (burn_in < 0) throw ConfigError("invariant_occupation: negative burn_in");
  if (n_samples < 1)
    throw ConfigError("invariant_occupation: n_samples must be >= 1");
  if (thinning < 1)
    throw ConfigError("invariant_occupation: thinning must be >= 1");

  Rng rng(seed);
  OccupationSample out;
  out.normalized = true;
  out.provenance = "invariant";
  out.policy_id = policy.id;
  out.seed = seed;
  out.states.reserve(static_cast<std::size_t>(n_samples));
  out.weights.assign(static_cast<std::size_t>(n_samples),
                     1.0 / static_cast<double>(n_samples));

  State x = x0;
  for (int t = 0; t < burn_in; ++t) x = mdp.step(x, policy.act(x, rng), rng);
  for (int s = 0; s < n_samples; ++s) {
    for (int t = 0; t < thinning; ++t)
      x = mdp.step(x, policy.act(x, rng), rng);
    out.states.push_back(x);
  }
  return out;
}

Estimate expected_loss(const OccupationSample& samples, const GridQuantizer& qz,
                       const BinWeighting& weighting) {
  if (samples.size() == 0)
    throw ConfigError("expected_loss: empty occupation sample");
  const double w_total = samples.total_weight();
  double mean = 0.0, mean_sq = 0.0;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    double l = loss(qz, weighting, samples.states[s]);
    double w = samples.weights[s] / w_total;
    mean += w * l;
    mean_sq += w * l * l;
  }
  Estimate e;
  e.value = mean;
  double var = std::max(mean_sq - mean * mean, 0.0);
  e.std_error = std::sqrt(var / static_cast<double>(samples.size()));
  return e;
}

namespace {

void fill_policy_terms(
    BoundReport& report,
    const std::vector<std::pair<std::string, double>>& loss_integrals) {
  if (loss_integrals.empty())
    throw ConfigError("bound: empty loss integral list");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [id, value] : loss_integrals) {
    report.per_policy.emplace_back(id, value);
    if (value > best) {
      best = value;
      report.maximizer = id;
    }
  }
  report.inputs["max_loss_integral"] = best;
}

// k with k^n == M, or -1.
long nth_root_exact(long M, int n) {
  if (M < 1 || n < 1) return -1;
  long k = std::llround(std::pow(static_cast<double>(M), 1.0 / n));
  for (long c = std::max(1L, k - 2); c <= k + 2; ++c) {
    long p = 1;
    for (int j = 0; j < n; ++j) p *= c;
    if (p == M) return c;
  }
  return -1;
}

} // namespace

BoundReport bound_discounted_occupation(
    double alpha_c, double alpha_T, double c_sup, double beta,
    const std::vector<std::pair<std::string, double>>& loss_integrals) {
  if (!(beta > 0.0 && beta < 1.0))
    throw ConfigError("bound_discounted_occupation: beta must lie in (0, 1)");
  BoundReport report;
  report.formula = "discounted_occupation";
  fill_policy_terms(report, loss_integrals);
  report.prefactor = alpha_c + beta * alpha_T * c_sup / (1.0 - beta);
  report.loss_term = report.inputs["max_loss_integral"] / (1.0 - beta);
  report.total = report.prefactor * report.loss_term;
  report.inputs["alpha_c"] = alpha_c;
  report.inputs["alpha_T"] = alpha_T;
  report.inputs["c_sup"] = c_sup;
  report.inputs["beta"] = beta;
  report.note =
      "max over the supplied policy set only lower-bounds the theoretical "
      "supremum over all stationary policies";
  return report;
}

BoundReport bound_lyapunov_discounted(const LyapunovCertificate& cert, long M,
                                      int n, double beta, const State& x0,
                                      double alpha_c, double alpha_T,
                                      double c_sup) {
  cert.validate();
  if (!(beta > 0.0 && beta < 1.0))
    throw ConfigError("bound_lyapunov_discounted: beta must lie in (0, 1)");
  long k = nth_root_exact(M, n);
  if (k < 0)
    throw ConfigError("bound_lyapunov_discounted: M is not a perfect n-th power");

  double v0 = cert.lyapunov(x0);
  double c_moment = (v0 * (1.0 - beta) + cert.b * beta) /
                    (1.0 - beta * (1.0 - cert.alpha));

  BoundReport report;
  report.formula = "lyapunov_discounted";
  report.prefactor = alpha_c + beta * alpha_T * c_sup / (1.0 - beta);
  double decay = std::pow(static_cast<double>(M),
                          (1.0 / n) * (1.0 - 1.0 / cert.m));
  report.loss_term = (2.0 * n + 1.0) * std::pow(c_moment, 1.0 / cert.m) /
                     (decay * (1.0 - beta));
  report.total = report.prefactor * report.loss_term;
  report.inputs["C"] = c_moment;
  report.inputs["M"] = static_cast<double>(M);
  report.inputs["k"] = static_cast<double>(k);
  report.inputs["beta"] = beta;
  report.inputs["alpha_c"] = alpha_c;
  report.inputs["alpha_T"] = alpha_T;
  report.inputs["c_sup"] = c_sup;
  if (c_moment > 0.0) {
    DiscountedSizing sizing =
        size_for_discounted(cert, static_cast<int>(k), beta, x0);
    report.inputs["half_width"] = sizing.half_width;
  }
  return report;
}

BoundReport bound_lyapunov_average(const LyapunovCertificate& cert, long M,
                                   int n, double mu_mass, double alpha_c,
                                   double alpha_T, double c_sup) {
  cert.validate();
  if (!(mu_mass > 0.0 && mu_mass <= 1.0))
    throw ConfigError("bound_lyapunov_average: mu_mass must lie in (0, 1]");
  if (!(cert.b > 0.0))
    throw ConfigError("bound_lyapunov_average: b must be > 0");
  long k = nth_root_exact(M, n);
  if (k < 0)
    throw ConfigError("bound_lyapunov_average: M is not a perfect n-th power");

  BoundReport report;
  report.formula = "lyapunov_average";
  report.prefactor = alpha_c + alpha_T * c_sup / mu_mass;
  double decay = std::pow(static_cast<double>(M),
                          (1.0 / n) * (1.0 - 1.0 / cert.m));
  report.loss_term = (2.0 * n + 1.0) * std::pow(cert.b, 1.0 / cert.m) / decay;
  report.total = report.prefactor * report.loss_term;
  report.inputs["b"] = cert.b;
  report.inputs["M"] = static_cast<double>(M);
  report.inputs["k"] = static_cast<double>(k);
  report.inputs["mu_mass"] = mu_mass;
  report.inputs["alpha_c"] = alpha_c;
  report.inputs["alpha_T"] = alpha_T;
  report.inputs["c_sup"] = c_sup;
  report.inputs["half_width"] = size_for_average(cert, static_cast<int>(k));
  return report;
}

BoundReport bound_learning(const LyapunovCertificate& cert, long M, int n,
                           double beta, const State& x0, double alpha_c,
                           double alpha_T, double c_sup) {
  cert.validate();
  if (!(beta > 0.0 && beta < 1.0))
    throw ConfigError("bound_learning: beta must lie in (0, 1)");
  long k = nth_root_exact(M, n);
  if (k < 0)
    throw ConfigError("bound_learning: M is not a perfect n-th power");

  double v0 = cert.lyapunov(x0);
  double c_moment = (v0 * (1.0 - beta) + cert.b * beta) /
                    (1.0 - beta * (1.0 - cert.alpha));

  BoundReport report;
  report.formula = "learning";
  report.prefactor = alpha_c + beta * alpha_T * c_sup / (1.0 - beta);
  double decay = std::pow(static_cast<double>(M),
                          (1.0 / n) * (1.0 - 1.0 / cert.m));
  report.loss_term =
      4.0 * std::pow(c_moment, 1.0 / cert.m) / (decay * (1.0 - beta));
  report.total = report.prefactor * report.loss_term;
  report.inputs["C"] = c_moment;
  report.inputs["M"] = static_cast<double>(M);
  report.inputs["k"] = static_cast<double>(k);
  report.inputs["beta"] = beta;
  report.inputs["alpha_c"] = alpha_c;
  report.inputs["alpha_T"] = alpha_T;
  report.inputs["c_sup"] = c_sup;
  return report;
}

BoundReport bound_average_occupation(
    double alpha_c, double alpha_T, double c_sup, double mu_mass,
    const std::vector<std::pair<std::string, double>>& loss_integrals) {
  if (!(mu_mass > 0.0 && mu_mass <= 1.0))
    throw ConfigError("bound_average_occupation: mu_mass must lie in (0, 1]");
  BoundReport report;
  report.formula = "average_occupation";
  fill_policy_terms(report, loss_integrals);
  report.prefactor = alpha_c + alpha_T * c_sup / mu_mass;
  report.loss_term = report.inputs["max_loss_integral"];
  report.total = report.prefactor * report.loss_term;
  report.inputs["alpha_c"] = alpha_c;
  report.inputs["alpha_T"] = alpha_T;
  report.inputs["c_sup"] = c_sup;
  report.inputs["mu_mass"] = mu_mass;
  report.note =
      "max over the supplied policy set only lower-bounds the theoretical "
      "supremum over all stationary policies";
  return report;
}

OverflowReport overflow_mass_check(const OccupationSample& samples,
                                   const GridQuantizer& qz,
                                   const LyapunovCertificate& cert, int k) {
  cert.validate();
  if (samples.size() == 0)
    throw ConfigError("overflow_mass_check: empty occupation sample");
  const double w_total = samples.total_weight();
  double mass = 0.0;
  for (std::size_t s = 0; s < samples.size(); ++s)
    if (qz.is_overflow(qz.quantize(samples.states[s])))
      mass += samples.weights[s] / w_total;

  OverflowReport report;
  report.empirical_mass = mass;
  report.cap = 1.0 / k;
  report.n_samples = samples.size();
  report.std_error = std::sqrt(std::max(mass * (1.0 - mass), 0.0) /
                               static_cast<double>(samples.size()));
  report.pass = mass <= report.cap + 3.0 * report.std_error;
  return report;
}

RateFit rate_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw ConfigError("rate_fit: need at least 3 points");
  std::vector<double> xs, ys;
  for (const auto& [m, v] : points) {
    if (!(m > 0.0)) throw ConfigError("rate_fit: M must be positive");
    if (!(v > 0.0)) throw ConfigError("rate_fit: values must be positive");
    xs.push_back(std::log(m));
    ys.push_back(std::log(v));
  }
  {
    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 1; i < sorted.size(); ++i)
      if (sorted[i] == sorted[i - 1])
        throw ConfigError("rate_fit: M values must be distinct");
  }
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  RateFit fit;
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / n;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    rss += r * r;
  }
  fit.residual = std::sqrt(rss / n);
  return fit;
}

MedianCheck median_optimality_check(const std::vector<Eigen::VectorXd>& samples,
                                    const std::vector<double>& weights,
                                    int grid_resolution) {
  if (samples.empty() || samples.size() != weights.size())
    throw ConfigError("median_optimality_check: empty or mismatched inputs");
  if (grid_resolution < 2)
    throw ConfigError("median_optimality_check: grid_resolution must be >= 2");

  const int n = static_cast<int>(samples.front().size());
  const double w_total = std::accumulate(weights.begin(), weights.end(), 0.0);

  MedianCheck check;
  check.median.resize(n);
  check.brute_force.resize(n);
  for (int j = 0; j < n; ++j) {
    std::vector<double> vals;
    vals.reserve(samples.size());
    double lo = samples.front()[j], hi = samples.front()[j];
    for (const auto& x : samples) {
      vals.push_back(x[j]);
      lo = std::min(lo, x[j]);
      hi = std::max(hi, x[j]);
    }
    check.median[j] = weighted_median(vals, weights);

    auto objective = [&](double c) {
      double total = 0.0;
      for (std::size_t s = 0; s < vals.size(); ++s)
        total += weights[s] * std::abs(vals[s] - c);
      return total / w_total;
    };
    check.median_value += objective(check.median[j]);

    double best_c = lo, best_v = objective(lo);
    for (int g = 1; g < grid_resolution; ++g) {
      double c = lo + (hi - lo) * g / (grid_resolution - 1);
      double v = objective(c);
      if (v < best_v) {
        best_v = v;
        best_c = c;
      }
    }
    check.brute_force[j] = best_c;
    check.brute_value += best_v;
  }
  check.gap = check.median_value - check.brute_value;
  return check;
}

} // namespace qmdp
