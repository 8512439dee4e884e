// Acceptance suite. Runs the full desk-scale battery against the library and
// the CLI binary (argv[1]); prints one PASS/FAIL line per criterion.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qmdp/experiment.hpp"

using namespace qmdp;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int idx, const std::string& name, bool ok,
            const std::string& detail) {
  std::printf("%s criterion %d (%s): %s\n", ok ? "PASS" : "FAIL", idx,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(double v) { return format_double(v); }

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("qmdp_acceptance_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Criteria 1-3: discounted sweep on the 1-d benchmark.
void sweep_criteria() {
  json doc = {{"benchmark", "linear_gaussian_1d"},
              {"criterion", "discounted"},
              {"beta", 0.5},
              {"sweep_k", {4, 8, 16, 32, 64, 128}},
              {"representatives", "median"},
              {"occupation_samples", 20'000},
              {"samples_per_bin", 500},
              {"seed", 1}};
  ExperimentConfig cfg = ExperimentConfig::parse(doc);

  SweepResult result;
  try {
    result = run_sweep(cfg);
  } catch (const std::exception& e) {
    std::string why = std::string("sweep failed: ") + e.what();
    report(1, "loss decay rate", false, why);
    report(2, "bound dominance", false, why);
    report(3, "overflow cap", false, why);
    return;
  }

  double slope = result.loss_fit.slope;
  report(1, "loss decay rate", slope >= -0.65 && slope <= -0.35,
         "expected_loss slope " + fmt(slope) + " vs target -0.5 in [-0.65, -0.35]");

  bool dominated = true;
  double worst_margin = 1e300;
  for (const SweepRow& row : result.rows) {
    double allowance = row.bound + 3.0 * row.expected_loss_se +
                       result.oracle_consistency_gap;
    worst_margin = std::min(worst_margin, allowance - row.abs_err);
    if (row.abs_err > allowance) dominated = false;
  }
  report(2, "bound dominance", dominated,
         "min(bound - |j_hat - j_ref|) = " + fmt(worst_margin) +
             " over " + std::to_string(result.rows.size()) + " sweep points");

  bool sized_ok = true;
  for (const SweepRow& row : result.rows)
    if (!row.overflow_pass) sized_ok = false;

  // Negative control: a quarter-width grid must blow the raw 1/k cap.
  Benchmark bench = cfg.make_bench();
  const State x0 = cfg.initial_state(bench);
  OccupationSample occ =
      discounted_occupation(bench.mdp, uniform_policy(3), 0.5, x0,
                            cfg.occupation_samples, cfg.seed + 11);
  double hw = size_for_discounted(bench.spec.drift, 16, 0.5, x0).half_width;
  GridQuantizer undersized = build_uniform(1, 16, hw / 4.0);
  OverflowReport under =
      overflow_mass_check(occ, undersized, bench.spec.drift, 16);
  bool control_fails = under.empirical_mass > under.cap;
  report(3, "overflow cap", sized_ok && control_fails,
         "designed grids all within 1/k + 3 SE; undersized control mass " +
             fmt(under.empirical_mass) + " > cap " + fmt(under.cap));
}

// Criteria 4-5: quantized Q-learning vs the two model routes.
void learning_criteria() {
  const double tol = 0.05 * 1.1 / 0.5;
  json doc = {{"benchmark", "linear_gaussian_1d"},
              {"beta", 0.5},
              {"quant_mode", "explicit"},
              {"k", 16},
              {"half_width", 3.0},
              {"learn_iterations", 2'000'000},
              {"occupation_samples", 1'000'000},
              {"samples_per_bin", 2000},
              {"seed", 1}};
  ExperimentConfig cfg = ExperimentConfig::parse(doc);

  LearnResult full;
  try {
    full = run_learn(cfg);
  } catch (const std::exception& e) {
    std::string why = std::string("learn failed: ") + e.what();
    report(4, "Q-learning fixed point", false, why);
    report(5, "learning-route equivalence", false, why);
    return;
  }

  report(4, "Q-learning fixed point", full.gap_weighted <= tol,
         "sup gap to invariant-weighted model " + fmt(full.gap_weighted) +
             " vs " + fmt(tol) + " at 2e6 iterations");

  Benchmark bench = cfg.make_bench();
  const State x0 = cfg.initial_state(bench);
  GridQuantizer qz = build_uniform(1, 16, 3.0);
  std::vector<long> lengths = {10'000, 100'000, 1'000'000};
  std::vector<double> gaps;
  for (long len : lengths) {
    QLearnResult ql = quantized_q_learning(bench.mdp, qz, uniform_policy(3),
                                           len, x0, cfg.seed);
    auto [model, coverage] = empirical_model(ql.trajectory, qz, 1.1);
    gaps.push_back(
        (ql.q - q_from_model(model, 0.5, 1e-6)).lpNorm<Eigen::Infinity>());
  }
  gaps.push_back(full.gap_empirical);

  bool ok = full.gap_empirical <= tol;
  for (std::size_t i = 1; i < gaps.size(); ++i)
    if (gaps[i] > gaps[i - 1] + 0.02) ok = false;
  std::string series;
  for (double g : gaps) series += fmt(g) + " ";
  report(5, "learning-route equivalence", ok,
         "gaps over {1e4, 1e5, 1e6, 2e6} steps: " + series + "(final vs " +
             fmt(tol) + ", non-increasing within 0.02)");
}

void median_criterion() {
  Rng rng(61);
  double worst = -1e300;
  bool ok = true;
  for (int n = 1; n <= 3; ++n)
    for (int rep = 0; rep < 100; ++rep) {
      std::vector<Eigen::VectorXd> samples;
      std::vector<double> weights;
      for (int s = 0; s < 30; ++s) {
        Eigen::VectorXd x(n);
        for (int j = 0; j < n; ++j) x[j] = rng.uniform(-2.0, 2.0);
        samples.push_back(std::move(x));
        weights.push_back(rng.uniform(0.1, 1.0));
      }
      MedianCheck check = median_optimality_check(samples, weights, 10'000);
      worst = std::max(worst, check.gap);
      if (check.gap > 1e-6) ok = false;
    }
  report(6, "median optimality", ok,
         "worst median-vs-grid-scan gap " + fmt(worst) +
             " over 300 sets, tolerance 1e-06");
}

void average_criterion() {
  json doc = {{"benchmark", "linear_gaussian_minorized"},
              {"benchmark_params", {{"lambda", 0.1}}},
              {"criterion", "average"},
              {"sweep_k", {4, 8, 16, 32}},
              {"occupation_samples", 20'000},
              {"samples_per_bin", 500},
              {"seed", 1}};
  ExperimentConfig cfg = ExperimentConfig::parse(doc);

  Benchmark bench = cfg.make_bench();
  LyapunovCertificate cert = bench.spec.drift;
  cert.b = bench.spec.avg_drift_b;
  GridQuantizer qz = build_uniform(1, 16, size_for_average(cert, 16));
  FiniteMdp fmdp =
      build_finite_model(bench.mdp, qz, BinWeighting::dirac(), 500, 3);
  Eigen::VectorXd mu_hat = quantize_measure(*bench.spec.minorization, qz);
  ValueSolution sol = relative_vi(fmdp, mu_hat, 1e-10, 200'000);

  double worst_ratio = 0.0;
  const auto& hist = sol.residual_history;
  for (std::size_t t = 1; t < hist.size(); ++t)
    if (hist[t - 1] > 1e-10)
      worst_ratio = std::max(worst_ratio, hist[t] / hist[t - 1]);
  double h_norm = sol.values.lpNorm<Eigen::Infinity>();

  bool bounds_ok = true;
  std::string sweep_note;
  try {
    SweepResult result = run_sweep(cfg);
    for (const SweepRow& row : result.rows)
      if (row.abs_err > row.bound + result.oracle_consistency_gap)
        bounds_ok = false;
    sweep_note = "gain bound dominates on k in {4, 8, 16, 32}";
  } catch (const std::exception& e) {
    bounds_ok = false;
    sweep_note = std::string("average sweep failed: ") + e.what();
  }

  bool ok = worst_ratio <= 0.92 && h_norm <= 11.0 && bounds_ok;
  report(7, "average-cost solver", ok,
         "residual modulus " + fmt(worst_ratio) + " <= 0.92, ||h|| " +
             fmt(h_norm) + " <= 11, " + sweep_note);
}

void compare_criterion() {
  json doc = {{"benchmark", "linear_gaussian_1d"},
              {"beta", 0.5},
              {"k", 16},
              {"learn_iterations", 200'000},
              {"occupation_samples", 20'000},
              {"samples_per_bin", 500},
              {"seed", 1}};
  try {
    CompareResult r = run_compare(ExperimentConfig::parse(doc));
    bool ratio_ok = std::abs(r.bound_ratio - 4.0 / 3.0) <= 1e-12;
    bool gaps_ok =
        r.planning_gap <= r.planning_bound && r.learning_gap <= r.learning_bound;
    report(8, "planning vs learning", ratio_ok && gaps_ok,
           "bound ratio " + fmt(r.bound_ratio) + " (target 4/3), gaps " +
               fmt(r.planning_gap) + "/" + fmt(r.learning_gap) +
               " under bounds " + fmt(r.planning_bound) + "/" +
               fmt(r.learning_bound));
  } catch (const std::exception& e) {
    report(8, "planning vs learning", false,
           std::string("compare failed: ") + e.what());
  }
}

void determinism_criterion(const std::string& cli) {
  fs::path work = fresh_dir("cli");
  {
    std::ofstream cfg(work / "config.json");
    cfg << R"({"benchmark": "linear_gaussian_1d", "beta": 0.5,
               "sweep_k": [4, 8, 16], "occupation_samples": 2000,
               "samples_per_bin": 200, "k_ref": 64,
               "consistency_tol": 0.2, "seed": 5})";
  }
  auto run = [&](const std::string& out) {
    std::string cmd = "\"" + cli + "\" sweep --config \"" +
                      (work / "config.json").string() + "\" --out \"" +
                      (work / out).string() + "\"";
    return std::system(cmd.c_str());
  };
  int rc_a = run("a");
  int rc_b = run("b");
  bool ran = rc_a == 0 && rc_b == 0;
  bool same = ran &&
              slurp(work / "a" / "sweep.csv") == slurp(work / "b" / "sweep.csv") &&
              slurp(work / "a" / "sweep_meta.json") ==
                  slurp(work / "b" / "sweep_meta.json");
  report(9, "CLI determinism", same,
         ran ? "repeated sweep runs byte-identical (csv + metadata)"
             : "CLI exited with " + std::to_string(rc_a) + "/" +
                   std::to_string(rc_b));
}

} // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path-to-qmdp_cli>\n");
    return 2;
  }
  sweep_criteria();
  learning_criteria();
  median_criterion();
  average_criterion();
  compare_criterion();
  determinism_criterion(argv[1]);
  std::printf("%s\n", failures == 0 ? "acceptance: all criteria passed"
                                    : "acceptance: FAILURES");
  return failures == 0 ? 0 : 1;
}
