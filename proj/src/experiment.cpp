#include "qmdp/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "qmdp/learner.hpp"

namespace qmdp {

namespace {

using nlohmann::json;

double require_in(const json& doc, const std::string& key, double lo, double hi,
                  double fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc[key].is_number())
    throw ConfigError("config." + key + ": expected a number");
  double v = doc[key].get<double>();
  if (v < lo || v > hi)
    throw ConfigError("config." + key + ": value out of range");
  return v;
}

long require_int(const json& doc, const std::string& key, long lo, long hi,
                 long fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc[key].is_number_integer())
    throw ConfigError("config." + key + ": expected an integer");
  long v = doc[key].get<long>();
  if (v < lo || v > hi)
    throw ConfigError("config." + key + ": value out of range");
  return v;
}

std::string require_enum(const json& doc, const std::string& key,
                         const std::set<std::string>& allowed,
                         const std::string& fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc[key].is_string())
    throw ConfigError("config." + key + ": expected a string");
  std::string v = doc[key].get<std::string>();
  if (!allowed.count(v))
    throw ConfigError("config." + key + ": unsupported value '" + v + "'");
  return v;
}

} // namespace

ExperimentConfig ExperimentConfig::parse(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
  static const std::set<std::string> known = {
      "benchmark",     "benchmark_params", "criterion",
      "beta",          "quant_mode",       "k",
      "half_width",    "representatives",  "weighting",
      "sweep_k",       "synthetic_sweep",  "learn_iterations",
      "exploration",   "trajectory_log",   "samples_per_bin",
      "occupation_samples", "burn_in",     "thinning",
      "rollouts",      "horizon",          "k_ref",
      "half_width_ref", "consistency_tol", "x0",
      "seed",          "jobs"};
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (!known.count(it.key()))
      throw ConfigError("config." + it.key() + ": unknown key");

  ExperimentConfig cfg;
  cfg.raw = doc;
  cfg.benchmark_name = require_enum(
      doc, "benchmark",
      {"linear_gaussian_1d", "linear_gaussian_minorized", "linear_gaussian_2d"},
      cfg.benchmark_name);
  if (doc.contains("benchmark_params")) {
    if (!doc["benchmark_params"].is_object())
      throw ConfigError("config.benchmark_params: expected an object");
    cfg.benchmark_params = doc["benchmark_params"];
  }
  cfg.criterion =
      require_enum(doc, "criterion", {"discounted", "average"}, cfg.criterion);
  cfg.beta = require_in(doc, "beta", 1e-6, 1.0 - 1e-6, cfg.beta);
  cfg.quant_mode =
      require_enum(doc, "quant_mode", {"lyapunov", "explicit"}, cfg.quant_mode);
  cfg.k = static_cast<int>(require_int(doc, "k", 1, 100'000, cfg.k));
  cfg.half_width = require_in(doc, "half_width", 0.0, 1e9, cfg.half_width);
  if (cfg.quant_mode == "explicit" && !(cfg.half_width > 0.0))
    throw ConfigError("config.half_width: explicit mode needs half_width > 0");
  cfg.representatives = require_enum(doc, "representatives",
                                     {"midpoint", "median"}, cfg.representatives);
  cfg.weighting = require_enum(doc, "weighting",
                               {"dirac", "uniform", "empirical"}, cfg.weighting);
  if (doc.contains("sweep_k")) {
    if (!doc["sweep_k"].is_array())
      throw ConfigError("config.sweep_k: expected an array");
    for (const auto& v : doc["sweep_k"]) {
      if (!v.is_number_integer() || v.get<long>() < 1)
        throw ConfigError("config.sweep_k: entries must be positive integers");
      cfg.sweep_k.push_back(v.get<int>());
    }
  }
  if (doc.contains("synthetic_sweep")) {
    if (!doc["synthetic_sweep"].is_array())
      throw ConfigError("config.synthetic_sweep: expected an array of pairs");
    for (const auto& v : doc["synthetic_sweep"]) {
      if (!v.is_array() || v.size() != 2)
        throw ConfigError("config.synthetic_sweep: entries must be [M, value]");
      cfg.synthetic_sweep.emplace_back(v.at(0).get<double>(),
                                       v.at(1).get<double>());
    }
  }
  cfg.learn_iterations =
      require_int(doc, "learn_iterations", 1, 1'000'000'000L, cfg.learn_iterations);
  cfg.exploration = require_enum(doc, "exploration", {"uniform"}, cfg.exploration);
  if (doc.contains("trajectory_log")) {
    if (!doc["trajectory_log"].is_boolean())
      throw ConfigError("config.trajectory_log: expected a boolean");
    cfg.trajectory_log = doc["trajectory_log"].get<bool>();
  }
  cfg.samples_per_bin = static_cast<int>(
      require_int(doc, "samples_per_bin", 1, 10'000'000, cfg.samples_per_bin));
  cfg.occupation_samples = static_cast<int>(require_int(
      doc, "occupation_samples", 1, 100'000'000, cfg.occupation_samples));
  cfg.burn_in =
      static_cast<int>(require_int(doc, "burn_in", 0, 100'000'000, cfg.burn_in));
  cfg.thinning =
      static_cast<int>(require_int(doc, "thinning", 1, 1'000'000, cfg.thinning));
  cfg.rollouts =
      static_cast<int>(require_int(doc, "rollouts", 2, 10'000'000, cfg.rollouts));
  cfg.horizon =
      static_cast<int>(require_int(doc, "horizon", 1, 100'000'000, cfg.horizon));
  cfg.k_ref = static_cast<int>(require_int(doc, "k_ref", 0, 100'000, cfg.k_ref));
  cfg.half_width_ref =
      require_in(doc, "half_width_ref", 0.0, 1e9, cfg.half_width_ref);
  cfg.consistency_tol =
      require_in(doc, "consistency_tol", 0.0, 1e9, cfg.consistency_tol);
  if (doc.contains("x0")) {
    if (!doc["x0"].is_array())
      throw ConfigError("config.x0: expected an array of numbers");
    for (const auto& v : doc["x0"]) cfg.x0.push_back(v.get<double>());
  }
  cfg.seed = static_cast<std::uint64_t>(
      require_int(doc, "seed", 0, 1'000'000'000'000L, static_cast<long>(cfg.seed)));
  cfg.jobs = static_cast<int>(require_int(doc, "jobs", 1, 1024, cfg.jobs));
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
  }
  return parse(doc);
}

Benchmark ExperimentConfig::make_bench() const {
  Benchmark bench = make_benchmark(benchmark_name, benchmark_params);
  bench.mdp.beta = beta;
  return bench;
}

State ExperimentConfig::initial_state(const Benchmark& bench) const {
  if (x0.empty()) return bench.spec.x0;
  if (static_cast<int>(x0.size()) != bench.mdp.n)
    throw ConfigError("config.x0: dimension mismatch with benchmark");
  State s(bench.mdp.n);
  for (int j = 0; j < bench.mdp.n; ++j) s[j] = x0[static_cast<std::size_t>(j)];
  return s;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

json quantizer_to_json(const GridQuantizer& qz) {
  json j;
  j["n"] = qz.n();
  j["k"] = qz.k();
  j["half_width"] = qz.half_width();
  j["rep_mode"] = qz.rep_mode();
  json reps = json::array();
  for (const auto& r : qz.representatives()) {
    json row = json::array();
    for (int i = 0; i < r.size(); ++i) row.push_back(r[i]);
    reps.push_back(std::move(row));
  }
  j["representatives"] = std::move(reps);
  return j;
}

GridQuantizer quantizer_from_json(const json& j) {
  std::vector<Eigen::VectorXd> reps;
  for (const auto& row : j.at("representatives")) {
    Eigen::VectorXd r(row.size());
    for (std::size_t i = 0; i < row.size(); ++i)
      r[static_cast<int>(i)] = row.at(i).get<double>();
    reps.push_back(std::move(r));
  }
  return GridQuantizer(j.at("n").get<int>(), j.at("k").get<int>(),
                       j.at("half_width").get<double>(), std::move(reps),
                       j.at("rep_mode").get<std::string>());
}

namespace {

LyapunovCertificate sizing_cert(const ExperimentConfig& cfg,
                                const Benchmark& bench) {
  LyapunovCertificate cert = bench.spec.drift;
  if (cfg.criterion == "average") cert.b = bench.spec.avg_drift_b;
  return cert;
}

double sized_half_width(const ExperimentConfig& cfg, const Benchmark& bench,
                        const State& x0, int k) {
  if (cfg.quant_mode == "explicit") return cfg.half_width;
  LyapunovCertificate cert = sizing_cert(cfg, bench);
  if (cfg.criterion == "discounted")
    return size_for_discounted(cert, k, cfg.beta, x0).half_width;
  return size_for_average(cert, k);
}

OccupationSample sample_occupation(const ExperimentConfig& cfg,
                                   const ContinuousMdp& mdp,
                                   const StationaryPolicy& policy,
                                   const State& x0, std::uint64_t seed) {
  if (cfg.criterion == "discounted")
    return discounted_occupation(mdp, policy, cfg.beta, x0,
                                 cfg.occupation_samples, seed);
  return invariant_occupation(mdp, policy, x0, cfg.burn_in,
                              cfg.occupation_samples, cfg.thinning, seed);
}

GridQuantizer design_quantizer(const ExperimentConfig& cfg,
                               const Benchmark& bench, const State& x0, int k,
                               const OccupationSample* occ) {
  GridQuantizer qz =
      build_uniform(bench.mdp.n, k, sized_half_width(cfg, bench, x0, k));
  if (cfg.representatives == "median") {
    if (!occ)
      throw ConfigError("median representatives need an occupation sample");
    qz = set_median_representatives(qz, *occ).quantizer;
  }
  return qz;
}

BinWeighting make_weighting(const ExperimentConfig& cfg,
                            const GridQuantizer& qz,
                            const OccupationSample* occ) {
  if (cfg.weighting == "dirac") return BinWeighting::dirac();
  if (cfg.weighting == "uniform") return BinWeighting::uniform();
  if (!occ) throw ConfigError("empirical weighting needs an occupation sample");
  return BinWeighting::empirical(*occ, qz);
}

double oracle_tolerance(const ExperimentConfig& cfg, const Benchmark& bench) {
  if (cfg.consistency_tol > 0.0) return cfg.consistency_tol;
  if (cfg.criterion == "discounted")
    return 0.01 * bench.spec.c_sup / (1.0 - cfg.beta);
  return 0.01 * bench.spec.c_sup;
}

ReferenceSolution make_oracle(const ExperimentConfig& cfg,
                              const Benchmark& bench, int max_k,
                              const StationaryPolicy& policy) {
  int k_ref = cfg.k_ref > 0 ? cfg.k_ref : std::max(8 * max_k, 64);
  if (k_ref % 2 != 0) ++k_ref;
  double hw_ref = cfg.half_width_ref > 0.0
                      ? cfg.half_width_ref
                      : 2.0 * sized_half_width(cfg, bench,
                                               cfg.initial_state(bench), max_k);
  Criterion crit = cfg.criterion == "discounted" ? Criterion::Discounted
                                                 : Criterion::Average;
  return reference_solution(bench, crit, cfg.beta, k_ref, hw_ref,
                            cfg.samples_per_bin, policy,
                            cfg.occupation_samples, cfg.seed + 1'000'003,
                            oracle_tolerance(cfg, bench));
}

ValueSolution solve_model(const ExperimentConfig& cfg, const Benchmark& bench,
                          const GridQuantizer& qz, const FiniteMdp& fmdp) {
  if (cfg.criterion == "discounted")
    return discounted_vi(fmdp, cfg.beta, 1e-6, 200'000);
  if (!bench.spec.minorization)
    throw ConfigError("average criterion needs a minorized benchmark");
  Eigen::VectorXd mu_hat = quantize_measure(*bench.spec.minorization, qz);
  return relative_vi(fmdp, mu_hat, 1e-8, 200'000);
}

double solution_value(const ExperimentConfig& cfg, const ValueSolution& sol,
                      const GridQuantizer& qz, const State& x0) {
  if (cfg.criterion == "discounted")
    return extend_value(sol.values, qz, x0);
  return sol.gain;
}

void write_metadata(const ExperimentConfig& cfg, const std::string& command,
                    const std::filesystem::path& out_dir, const json& extra) {
  json meta;
  meta["command"] = command;
  meta["config"] = cfg.raw;
  meta["seed"] = cfg.seed;
  meta["results"] = extra;
  std::ofstream out(out_dir / (command + "_meta.json"));
  if (!out)
    throw ConfigError("cannot write metadata under " + out_dir.string());
  out << meta.dump(2) << "\n";
}

std::ofstream open_csv(const std::filesystem::path& out_dir,
                       const std::string& name) {
  std::filesystem::create_directories(out_dir);
  std::ofstream out(out_dir / name);
  if (!out) throw ConfigError("cannot write " + (out_dir / name).string());
  return out;
}

} // namespace

SweepResult run_sweep(const ExperimentConfig& cfg) {
  SweepResult result;
  if (!cfg.synthetic_sweep.empty()) {
    for (const auto& [m, v] : cfg.synthetic_sweep) {
      SweepRow row;
      row.M = static_cast<long>(m);
      row.expected_loss = v;
      row.seed = cfg.seed;
      result.rows.push_back(row);
    }
    result.loss_fit = rate_fit(cfg.synthetic_sweep);
    return result;
  }

  if (cfg.sweep_k.size() < 3)
    throw ConfigError("config.sweep_k: need at least 3 sweep points");
  if (cfg.quant_mode != "lyapunov")
    throw ConfigError("config.quant_mode: sweeps use lyapunov sizing");
  std::vector<int> ks = cfg.sweep_k;
  std::sort(ks.begin(), ks.end());

  Benchmark bench = cfg.make_bench();
  const State x0 = cfg.initial_state(bench);
  StationaryPolicy policy = uniform_policy(bench.mdp.num_actions());
  OccupationSample occ =
      sample_occupation(cfg, bench.mdp, policy, x0, cfg.seed + 11);

  ReferenceSolution oracle = make_oracle(cfg, bench, ks.back(), policy);
  result.oracle_value = oracle.value_at_x0;
  result.oracle_consistency_gap = oracle.consistency_gap;

  const LyapunovCertificate cert = sizing_cert(cfg, bench);
  const int n = bench.mdp.n;
  std::vector<std::pair<double, double>> loss_points, err_points;
  bool err_fit_ok = true;

  for (int k : ks) {
    GridQuantizer qz = design_quantizer(cfg, bench, x0, k, &occ);
    BinWeighting weighting = make_weighting(cfg, qz, &occ);
    FiniteMdp fmdp =
        build_finite_model(bench.mdp, qz, weighting, cfg.samples_per_bin,
                           cfg.seed + static_cast<std::uint64_t>(k));
    ValueSolution sol = solve_model(cfg, bench, qz, fmdp);

    SweepRow row;
    row.k = k;
    row.M = qz.num_granular();
    row.half_width = qz.half_width();
    row.seed = cfg.seed;
    row.j_hat = solution_value(cfg, sol, qz, x0);
    row.j_ref = oracle.value_at_x0;
    row.abs_err = std::abs(row.j_hat - row.j_ref);

    Estimate loss_est = expected_loss(occ, qz, weighting);
    row.expected_loss = loss_est.value;
    row.expected_loss_se = loss_est.std_error;

    if (cfg.criterion == "discounted") {
      row.bound = bound_lyapunov_discounted(cert, row.M, n, cfg.beta, x0,
                                            bench.spec.alpha_c,
                                            bench.spec.alpha_T,
                                            bench.spec.c_sup)
                      .total;
    } else {
      if (!bench.spec.minorization)
        throw ConfigError("average criterion needs a minorized benchmark");
      row.bound = bound_lyapunov_average(cert, row.M, n,
                                         bench.spec.minorization->mass,
                                         bench.spec.alpha_c,
                                         bench.spec.alpha_T, bench.spec.c_sup)
                      .total;
    }

    OverflowReport over = overflow_mass_check(occ, qz, cert, k);
    row.overflow_mass = over.empirical_mass;
    row.overflow_cap = over.cap;
    row.overflow_se = over.std_error;
    row.overflow_pass = over.pass;

    loss_points.emplace_back(static_cast<double>(row.M), row.expected_loss);
    if (row.abs_err > 0.0)
      err_points.emplace_back(static_cast<double>(row.M), row.abs_err);
    else
      err_fit_ok = false;
    result.rows.push_back(row);
  }

  result.loss_fit = rate_fit(loss_points);
  if (err_fit_ok && err_points.size() >= 3)
    result.err_fit = rate_fit(err_points);
  else
    result.err_fit = RateFit{std::nan(""), std::nan(""), std::nan("")};
  return result;
}

LearnResult run_learn(const ExperimentConfig& cfg) {
  Benchmark bench = cfg.make_bench();
  const State x0 = cfg.initial_state(bench);
  StationaryPolicy exploration = uniform_policy(bench.mdp.num_actions());
  OccupationSample occ_inv =
      invariant_occupation(bench.mdp, exploration, x0, cfg.burn_in,
                           cfg.occupation_samples, cfg.thinning, cfg.seed + 21);
  GridQuantizer qz = design_quantizer(
      cfg, bench, x0, cfg.k,
      cfg.representatives == "median" ? &occ_inv : nullptr);

  QLearnResult ql = quantized_q_learning(bench.mdp, qz, exploration,
                                         cfg.learn_iterations, x0, cfg.seed);
  auto [emp_model, coverage] =
      empirical_model(ql.trajectory, qz, bench.spec.c_sup);

  LearnResult out;
  out.q_learned = ql.q;
  out.coverage = coverage;
  out.q_empirical = q_from_model(emp_model, cfg.beta, 1e-6);

  BinWeighting weighting = BinWeighting::empirical(occ_inv, qz);
  FiniteMdp weighted = build_finite_model(bench.mdp, qz, weighting,
                                          cfg.samples_per_bin, cfg.seed + 23);
  out.q_weighted = q_from_model(weighted, cfg.beta, 1e-6);

  out.gap_empirical =
      (out.q_learned - out.q_empirical).lpNorm<Eigen::Infinity>();
  out.gap_weighted = (out.q_learned - out.q_weighted).lpNorm<Eigen::Infinity>();
  return out;
}

CompareResult run_compare(const ExperimentConfig& cfg) {
  if (cfg.criterion != "discounted")
    throw ConfigError("config.criterion: compare runs the discounted criterion");

  Benchmark bench = cfg.make_bench();
  const State x0 = cfg.initial_state(bench);
  StationaryPolicy exploration = uniform_policy(bench.mdp.num_actions());
  OccupationSample occ_inv =
      invariant_occupation(bench.mdp, exploration, x0, cfg.burn_in,
                           cfg.occupation_samples, cfg.thinning, cfg.seed + 31);
  GridQuantizer qz = design_quantizer(
      cfg, bench, x0, cfg.k,
      cfg.representatives == "median" ? &occ_inv : nullptr);

  CompareResult out;
  out.k = cfg.k;
  out.M = qz.num_granular();
  out.half_width = qz.half_width();

  BinWeighting planning_weighting = make_weighting(cfg, qz, &occ_inv);
  FiniteMdp planning_model =
      build_finite_model(bench.mdp, qz, planning_weighting,
                         cfg.samples_per_bin, cfg.seed + 33);
  ValueSolution planning = discounted_vi(planning_model, cfg.beta, 1e-6, 200'000);
  out.planning_value = extend_value(planning.values, qz, x0);

  Trajectory traj = simulate(bench.mdp, exploration, x0,
                             static_cast<int>(cfg.learn_iterations),
                             cfg.seed + 37);
  auto [learned_model, coverage] =
      empirical_model(traj, qz, bench.spec.c_sup);
  Eigen::MatrixXd q = q_from_model(learned_model, cfg.beta, 1e-6);
  out.learning_value = q.row(qz.quantize(x0)).minCoeff();

  ReferenceSolution oracle = make_oracle(cfg, bench, cfg.k, exploration);
  out.j_ref = oracle.value_at_x0;
  out.planning_gap = std::abs(out.planning_value - out.j_ref);
  out.learning_gap = std::abs(out.learning_value - out.j_ref);

  const LyapunovCertificate& cert = bench.spec.drift;
  out.planning_bound =
      bound_lyapunov_discounted(cert, out.M, bench.mdp.n, cfg.beta, x0,
                                bench.spec.alpha_c, bench.spec.alpha_T,
                                bench.spec.c_sup)
          .total;
  out.learning_bound =
      bound_learning(cert, out.M, bench.mdp.n, cfg.beta, x0,
                     bench.spec.alpha_c, bench.spec.alpha_T, bench.spec.c_sup)
          .total;
  out.bound_ratio = out.learning_bound / out.planning_bound;
  return out;
}

void cmd_design(const ExperimentConfig& cfg,
                const std::filesystem::path& out_dir) {
  Benchmark bench = cfg.make_bench();
  const State x0 = cfg.initial_state(bench);
  GridQuantizer qz = design_quantizer(cfg, bench, x0, cfg.k, nullptr);

  std::ofstream csv = open_csv(out_dir, "design.csv");
  csv << "k,M,half_width,delta,num_bins\n";
  csv << qz.k() << "," << qz.num_granular() << ","
      << format_double(qz.half_width()) << "," << format_double(qz.delta())
      << "," << qz.num_bins() << "\n";
  csv.close();

  std::ofstream spec_out(out_dir / "quantizer.json");
  spec_out << quantizer_to_json(qz).dump(2) << "\n";
  write_metadata(cfg, "design", out_dir,
                 {{"half_width", qz.half_width()}, {"M", qz.num_granular()}});
}

void cmd_solve(const ExperimentConfig& cfg,
               const std::filesystem::path& out_dir) {
  Benchmark bench = cfg.make_bench();
  const State x0 = cfg.initial_state(bench);
  StationaryPolicy policy = uniform_policy(bench.mdp.num_actions());

  OccupationSample occ;
  const bool needs_occ =
      cfg.representatives == "median" || cfg.weighting == "empirical";
  if (needs_occ)
    occ = sample_occupation(cfg, bench.mdp, policy, x0, cfg.seed + 41);

  GridQuantizer qz =
      design_quantizer(cfg, bench, x0, cfg.k, needs_occ ? &occ : nullptr);
  BinWeighting weighting =
      make_weighting(cfg, qz, needs_occ ? &occ : nullptr);
  FiniteMdp fmdp = build_finite_model(bench.mdp, qz, weighting,
                                      cfg.samples_per_bin, cfg.seed + 43);
  ValueSolution sol = solve_model(cfg, bench, qz, fmdp);

  std::ofstream csv = open_csv(out_dir, "solve.csv");
  csv << "bin,value,action\n";
  for (int i = 0; i < qz.num_bins(); ++i)
    csv << i << "," << format_double(sol.values[i]) << ","
        << sol.greedy[static_cast<std::size_t>(i)] << "\n";
  csv.close();

  json extra = {{"value_at_x0", solution_value(cfg, sol, qz, x0)},
                {"iterations", sol.iterations},
                {"residual", sol.residual}};
  if (cfg.criterion == "average") extra["gain"] = sol.gain;
  write_metadata(cfg, "solve", out_dir, extra);
}

void cmd_learn(const ExperimentConfig& cfg,
               const std::filesystem::path& out_dir) {
  LearnResult result = run_learn(cfg);

  std::ofstream csv = open_csv(out_dir, "learn.csv");
  csv << "bin,action,q_learned,q_empirical,q_weighted\n";
  for (int i = 0; i < result.q_learned.rows(); ++i)
    for (int u = 0; u < result.q_learned.cols(); ++u)
      csv << i << "," << u << "," << format_double(result.q_learned(i, u))
          << "," << format_double(result.q_empirical(i, u)) << ","
          << format_double(result.q_weighted(i, u)) << "\n";
  csv.close();

  write_metadata(cfg, "learn", out_dir,
                 {{"gap_empirical", result.gap_empirical},
                  {"gap_weighted", result.gap_weighted},
                  {"visited_fraction", result.coverage.visited_fraction},
                  {"unvisited_pairs", result.coverage.unvisited.size()}});
}

void cmd_sweep(const ExperimentConfig& cfg,
               const std::filesystem::path& out_dir) {
  SweepResult result = run_sweep(cfg);

  std::ofstream csv = open_csv(out_dir, "sweep.csv");
  csv << "k,M,half_width,expected_loss,bound,j_hat,j_ref,abs_err,"
         "overflow_mass,seed\n";
  for (const SweepRow& row : result.rows)
    csv << row.k << "," << row.M << "," << format_double(row.half_width) << ","
        << format_double(row.expected_loss) << "," << format_double(row.bound)
        << "," << format_double(row.j_hat) << "," << format_double(row.j_ref)
        << "," << format_double(row.abs_err) << ","
        << format_double(row.overflow_mass) << "," << row.seed << "\n";
  csv << "fit_expected_loss," << format_double(result.loss_fit.slope) << ","
      << format_double(result.loss_fit.intercept) << ","
      << format_double(result.loss_fit.residual) << ",,,,,,\n";
  csv << "fit_abs_err," << format_double(result.err_fit.slope) << ","
      << format_double(result.err_fit.intercept) << ","
      << format_double(result.err_fit.residual) << ",,,,,,\n";
  csv.close();

  write_metadata(cfg, "sweep", out_dir,
                 {{"oracle_value", result.oracle_value},
                  {"oracle_consistency_gap", result.oracle_consistency_gap},
                  {"loss_slope", result.loss_fit.slope}});
}

void cmd_compare(const ExperimentConfig& cfg,
                 const std::filesystem::path& out_dir) {
  CompareResult r = run_compare(cfg);

  std::ofstream csv = open_csv(out_dir, "compare.csv");
  csv << "k,M,half_width,j_ref,planning_value,learning_value,planning_gap,"
         "learning_gap,planning_bound,learning_bound,bound_ratio\n";
  csv << r.k << "," << r.M << "," << format_double(r.half_width) << ","
      << format_double(r.j_ref) << "," << format_double(r.planning_value)
      << "," << format_double(r.learning_value) << ","
      << format_double(r.planning_gap) << "," << format_double(r.learning_gap)
      << "," << format_double(r.planning_bound) << ","
      << format_double(r.learning_bound) << ","
      << format_double(r.bound_ratio) << "\n";
  csv.close();

  write_metadata(cfg, "compare", out_dir,
                 {{"bound_ratio", r.bound_ratio},
                  {"planning_gap", r.planning_gap},
                  {"learning_gap", r.learning_gap}});
}

void cmd_verify(const ExperimentConfig& cfg,
                const std::filesystem::path& out_dir) {
  Benchmark bench = cfg.make_bench();
  const State x0 = cfg.initial_state(bench);
  StationaryPolicy policy = uniform_policy(bench.mdp.num_actions());

  DriftReport drift = verify_drift(bench.mdp, bench.spec.drift,
                                   bench.spec.drift_probes, 4000, cfg.seed + 51);

  OccupationSample occ =
      sample_occupation(cfg, bench.mdp, policy, x0, cfg.seed + 53);
  LyapunovCertificate cert = sizing_cert(cfg, bench);
  GridQuantizer qz = design_quantizer(cfg, bench, x0, cfg.k, nullptr);
  OverflowReport over = overflow_mass_check(occ, qz, cert, cfg.k);

  Rng rng(cfg.seed + 57);
  double worst_median_gap = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<Eigen::VectorXd> samples;
    std::vector<double> weights;
    for (int s = 0; s < 40; ++s) {
      Eigen::VectorXd x(bench.mdp.n);
      for (int j = 0; j < bench.mdp.n; ++j) x[j] = rng.uniform(-2.0, 2.0);
      samples.push_back(std::move(x));
      weights.push_back(rng.uniform(0.1, 1.0));
    }
    MedianCheck check = median_optimality_check(samples, weights, 2001);
    worst_median_gap = std::max(worst_median_gap, check.gap);
  }

  std::ofstream csv = open_csv(out_dir, "verify.csv");
  csv << "check,pass,value\n";
  csv << "drift," << (drift.any_flagged ? 0 : 1) << ","
      << format_double(drift.max_margin) << "\n";
  csv << "overflow," << (over.pass ? 1 : 0) << ","
      << format_double(over.empirical_mass) << "\n";
  csv << "median," << (worst_median_gap <= 1e-9 ? 1 : 0) << ","
      << format_double(worst_median_gap) << "\n";
  csv.close();

  write_metadata(cfg, "verify", out_dir,
                 {{"drift_max_margin", drift.max_margin},
                  {"overflow_mass", over.empirical_mass},
                  {"median_gap", worst_median_gap}});
}

} // namespace qmdp
