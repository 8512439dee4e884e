#include "qmdp/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qmdp/analysis.hpp"

namespace qmdp {

namespace {

constexpr double kSqrt2OverPi = 0.79788456080286535588;

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double gauss_interval(double mean, double sigma, double lo, double hi) {
  return norm_cdf((hi - mean) / sigma) - norm_cdf((lo - mean) / sigma);
}

// Length of [lo, hi) ∩ [-1, 1].
double unit_overlap(double lo, double hi) {
  return std::max(0.0, std::min(hi, 1.0) - std::max(lo, -1.0));
}

std::vector<Action> make_actions(const std::vector<double>& grid) {
  if (grid.empty()) throw ConfigError("benchmark: empty action grid");
  std::vector<Action> actions;
  for (double u : grid) {
    Eigen::VectorXd payload(1);
    payload[0] = u;
    actions.push_back(Action{std::to_string(u), payload});
  }
  return actions;
}

double max_abs(const std::vector<double>& grid) {
  double m = 0.0;
  for (double u : grid) m = std::max(m, std::abs(u));
  return m;
}

std::function<double(const State&, int)> scalar_cost(
    const std::vector<double>& grid, double cost_cap) {
  return [grid, cost_cap](const State& x, int u) {
    double a = std::abs(grid[static_cast<std::size_t>(u)]);
    return std::min(x.lpNorm<1>(), cost_cap) / cost_cap + 0.1 * a / (1.0 + a);
  };
}

std::vector<State> scalar_probes() {
  std::vector<State> probes;
  for (double v : {-10.0, -1.0, 0.0, 0.5, 1.0, 10.0}) {
    State x(1);
    x[0] = v;
    probes.push_back(x);
  }
  return probes;
}

void check_keys(const nlohmann::json& params,
                const std::set<std::string>& allowed) {
  for (auto it = params.begin(); it != params.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("benchmark: unknown parameter '" + it.key() + "'");
}

} // namespace

Benchmark linear_gaussian_1d(double a, double sigma,
                             const std::vector<double>& action_grid,
                             double cost_cap) {
  if (!(a > 0.0 && a < 1.0))
    throw ConfigError("linear_gaussian_1d: a must lie in (0, 1)");
  if (!(sigma > 0.0)) throw ConfigError("linear_gaussian_1d: sigma must be > 0");
  if (!(cost_cap > 0.0))
    throw ConfigError("linear_gaussian_1d: cost_cap must be > 0");

  Benchmark bench;
  bench.mdp.n = 1;
  bench.mdp.actions = make_actions(action_grid);
  bench.mdp.step = [a, sigma, action_grid](const State& x, int u, Rng& rng) {
    State next(1);
    next[0] = a * x[0] + action_grid[static_cast<std::size_t>(u)] +
              sigma * rng.normal();
    return next;
  };
  bench.mdp.cost = scalar_cost(action_grid, cost_cap);
  bench.mdp.c_sup = 1.1;
  bench.mdp.alpha_c = 1.0 / cost_cap;
  bench.mdp.alpha_T = a * kSqrt2OverPi / sigma;
  bench.mdp.beta = 0.95;
  bench.mdp.box_prob = [a, sigma, action_grid](const State& x, int u,
                                               const State& lo,
                                               const State& hi) {
    double mean = a * x[0] + action_grid[static_cast<std::size_t>(u)];
    return gauss_interval(mean, sigma, lo[0], hi[0]);
  };

  double u_max = max_abs(action_grid);
  bench.spec.name = "linear_gaussian_1d";
  bench.spec.drift.m = 2.0;
  bench.spec.drift.alpha = 1.0 - a;
  bench.spec.drift.b = u_max * u_max / (1.0 - a) + sigma * sigma;
  bench.spec.avg_drift_b = bench.spec.drift.b / bench.spec.drift.alpha;
  bench.spec.alpha_c = bench.mdp.alpha_c;
  bench.spec.alpha_T = bench.mdp.alpha_T;
  bench.spec.c_sup = bench.mdp.c_sup;
  bench.spec.x0 = State::Constant(1, 1.0);
  bench.spec.drift_probes = scalar_probes();
  bench.spec.params = {{"a", a}, {"sigma", sigma}, {"cost_cap", cost_cap}};
  return bench;
}

Benchmark linear_gaussian_minorized(double a, double sigma, double lambda,
                                    const std::vector<double>& action_grid,
                                    double cost_cap) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw ConfigError("linear_gaussian_minorized: lambda must lie in (0, 1)");
  Benchmark bench = linear_gaussian_1d(a, sigma, action_grid, cost_cap);
  bench.mdp.step = [a, sigma, lambda, action_grid](const State& x, int u,
                                                   Rng& rng) {
    State next(1);
    if (rng.uniform01() < lambda) {
      next[0] = rng.uniform(-1.0, 1.0);
    } else {
      next[0] = a * x[0] + action_grid[static_cast<std::size_t>(u)] +
                sigma * rng.normal();
    }
    return next;
  };
  bench.mdp.box_prob = [a, sigma, lambda, action_grid](const State& x, int u,
                                                       const State& lo,
                                                       const State& hi) {
    double mean = a * x[0] + action_grid[static_cast<std::size_t>(u)];
    return (1.0 - lambda) * gauss_interval(mean, sigma, lo[0], hi[0]) +
           lambda * unit_overlap(lo[0], hi[0]) / 2.0;
  };
  bench.mdp.alpha_T = (1.0 - lambda) * a * kSqrt2OverPi / sigma;

  double u_max = max_abs(action_grid);
  bench.spec.name = "linear_gaussian_minorized";
  bench.spec.drift.alpha = 1.0 - (1.0 - lambda) * a;
  bench.spec.drift.b =
      (1.0 - lambda) * (u_max * u_max / (1.0 - a) + sigma * sigma) +
      lambda / 3.0;
  bench.spec.avg_drift_b = bench.spec.drift.b / bench.spec.drift.alpha;
  bench.spec.alpha_T = bench.mdp.alpha_T;

  MinorizationCertificate minor;
  minor.mass = lambda;
  minor.sampler = [](Rng& rng) {
    State x(1);
    x[0] = rng.uniform(-1.0, 1.0);
    return x;
  };
  minor.bin_mass = [lambda](const State& lo, const State& hi) {
    return lambda * unit_overlap(lo[0], hi[0]) / 2.0;
  };
  bench.spec.minorization = minor;
  bench.spec.params["lambda"] = lambda;
  return bench;
}

Benchmark linear_gaussian_2d(const Eigen::Matrix2d& A, double sigma,
                             const std::vector<double>& action_grid,
                             double cost_cap) {
  double a_norm = std::max(A.col(0).lpNorm<1>(), A.col(1).lpNorm<1>());
  if (!(a_norm > 0.0 && a_norm < 1.0))
    throw ConfigError(
        "linear_gaussian_2d: l1-induced norm of A must lie in (0, 1)");
  if (!(sigma > 0.0)) throw ConfigError("linear_gaussian_2d: sigma must be > 0");
  if (!(cost_cap > 0.0))
    throw ConfigError("linear_gaussian_2d: cost_cap must be > 0");
  if (action_grid.empty())
    throw ConfigError("linear_gaussian_2d: empty action grid");

  Benchmark bench;
  bench.mdp.n = 2;
  bench.mdp.actions = make_actions(action_grid);
  bench.mdp.step = [A, sigma, action_grid](const State& x, int u, Rng& rng) {
    State next = A * x;
    double uu = action_grid[static_cast<std::size_t>(u)];
    next[0] += uu + sigma * rng.normal();
    next[1] += uu + sigma * rng.normal();
    return next;
  };
  bench.mdp.cost = scalar_cost(action_grid, cost_cap);
  bench.mdp.c_sup = 1.1;
  bench.mdp.alpha_c = 1.0 / cost_cap;
  bench.mdp.alpha_T = a_norm * kSqrt2OverPi / sigma;
  bench.mdp.beta = 0.95;
  bench.mdp.box_prob = [A, sigma, action_grid](const State& x, int u,
                                               const State& lo,
                                               const State& hi) {
    Eigen::Vector2d mean = A * x;
    double uu = action_grid[static_cast<std::size_t>(u)];
    return gauss_interval(mean[0] + uu, sigma, lo[0], hi[0]) *
           gauss_interval(mean[1] + uu, sigma, lo[1], hi[1]);
  };

  const int n = 2;
  double u_max = max_abs(action_grid);
  double ew1 = n * sigma * kSqrt2OverPi;            // E ||W||_1
  double ew2 = n * sigma * sigma +
               n * (n - 1) * kSqrt2OverPi * kSqrt2OverPi * sigma * sigma;
  double eq = n * u_max + ew1;
  double eq2 = n * u_max * n * u_max + 2.0 * n * u_max * ew1 + ew2;

  bench.spec.name = "linear_gaussian_2d";
  bench.spec.drift.m = 2.0;
  bench.spec.drift.alpha = 1.0 - a_norm;
  bench.spec.drift.b = eq2 + a_norm / (1.0 - a_norm) * eq * eq;
  bench.spec.avg_drift_b = bench.spec.drift.b / bench.spec.drift.alpha;
  bench.spec.alpha_c = bench.mdp.alpha_c;
  bench.spec.alpha_T = bench.mdp.alpha_T;
  bench.spec.c_sup = bench.mdp.c_sup;
  bench.spec.x0 = State::Constant(2, 1.0);
  for (double v : {-4.0, -1.0, 0.0, 1.0, 4.0}) {
    State p(2);
    p[0] = v;
    p[1] = -0.5 * v;
    bench.spec.drift_probes.push_back(p);
  }
  bench.spec.params = {{"A", {{A(0, 0), A(0, 1)}, {A(1, 0), A(1, 1)}}},
                       {"sigma", sigma},
                       {"cost_cap", cost_cap}};
  return bench;
}

Benchmark make_benchmark(const std::string& name,
                         const nlohmann::json& params) {
  if (!params.is_object() && !params.is_null())
    throw ConfigError("make_benchmark: params must be an object");
  nlohmann::json p = params.is_null() ? nlohmann::json::object() : params;

  auto grid = [&]() -> std::vector<double> {
    if (!p.contains("actions")) return {-0.25, 0.0, 0.25};
    return p["actions"].get<std::vector<double>>();
  };
  double a = p.value("a", 0.5);
  double sigma = p.value("sigma", 1.0);
  double cost_cap = p.value("cost_cap", 1.0);

  if (name == "linear_gaussian_1d") {
    check_keys(p, {"a", "sigma", "cost_cap", "actions"});
    return linear_gaussian_1d(a, sigma, grid(), cost_cap);
  }
  if (name == "linear_gaussian_minorized") {
    check_keys(p, {"a", "sigma", "cost_cap", "actions", "lambda"});
    return linear_gaussian_minorized(a, sigma, p.value("lambda", 0.1), grid(),
                                     cost_cap);
  }
  if (name == "linear_gaussian_2d") {
    check_keys(p, {"A", "sigma", "cost_cap", "actions"});
    Eigen::Matrix2d A;
    A << 0.4, 0.1, 0.1, 0.4;
    if (p.contains("A"))
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          A(i, j) = p["A"].at(i).at(j).get<double>();
    return linear_gaussian_2d(A, sigma, grid(), cost_cap);
  }
  throw ConfigError("make_benchmark: unknown benchmark '" + name + "'");
}

ReferenceSolution reference_solution(const Benchmark& bench,
                                     Criterion criterion, double beta,
                                     int k_ref, double half_width_ref,
                                     int samples_per_bin,
                                     const StationaryPolicy& sampling_policy,
                                     int occupation_samples, std::uint64_t seed,
                                     double consistency_tol) {
  if (k_ref < 4 || k_ref % 2 != 0)
    throw ConfigError("reference_solution: k_ref must be even and >= 4");
  if (!(consistency_tol > 0.0))
    throw ConfigError("reference_solution: consistency_tol must be > 0");

  ContinuousMdp mdp = bench.mdp;
  mdp.beta = beta;
  const State& x0 = bench.spec.x0;

  OccupationSample occ =
      criterion == Criterion::Discounted
          ? discounted_occupation(mdp, sampling_policy, beta, x0,
                                  occupation_samples, seed)
          : invariant_occupation(mdp, sampling_policy, x0, 10'000,
                                 occupation_samples, 1, seed);

  auto solve_at = [&](int k) -> std::pair<GridQuantizer, ValueSolution> {
    GridQuantizer base = build_uniform(mdp.n, k, half_width_ref);
    GridQuantizer qz = set_median_representatives(base, occ).quantizer;
    FiniteMdp fmdp = build_finite_model(mdp, qz, BinWeighting::dirac(),
                                        samples_per_bin, seed + 1);
    if (criterion == Criterion::Discounted)
      return {qz, discounted_vi(fmdp, beta, 1e-6, 200'000)};
    if (!bench.spec.minorization)
      throw CertificateError(
          "reference_solution: average criterion needs a minorization "
          "certificate");
    Eigen::VectorXd mu_hat = quantize_measure(*bench.spec.minorization, qz);
    return {qz, relative_vi(fmdp, mu_hat, 1e-8, 200'000)};
  };

  auto [qz_fine, sol_fine] = solve_at(k_ref);
  auto [qz_coarse, sol_coarse] = solve_at(k_ref / 2);

  ReferenceSolution ref;
  ref.quantizer = qz_fine;
  ref.value_at_x0 = criterion == Criterion::Discounted
                        ? extend_value(sol_fine.values, qz_fine, x0)
                        : sol_fine.gain;
  double coarse_value = criterion == Criterion::Discounted
                            ? extend_value(sol_coarse.values, qz_coarse, x0)
                            : sol_coarse.gain;
  ref.consistency_gap = std::abs(ref.value_at_x0 - coarse_value);
  ref.solution = std::move(sol_fine);
  if (ref.consistency_gap > consistency_tol)
    throw OracleError(
        "reference_solution: refinement consistency gap " +
        std::to_string(ref.consistency_gap) + " exceeds tolerance " +
        std::to_string(consistency_tol));
  return ref;
}

} // namespace qmdp
