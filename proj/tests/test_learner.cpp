#include <doctest.h>

#include <cmath>

#include "qmdp/benchmarks.hpp"
#include "qmdp/learner.hpp"

using namespace qmdp;

namespace {

ContinuousMdp single_state_mdp(double cost, double beta) {
  ContinuousMdp mdp;
  mdp.n = 1;
  mdp.actions = {Action{"0", Eigen::VectorXd::Zero(1)}};
  mdp.step = [](const State&, int, Rng&) { return State::Zero(1); };
  mdp.cost = [cost](const State&, int) { return cost; };
  mdp.c_sup = std::max(cost, 1.0);
  mdp.beta = beta;
  return mdp;
}

} // namespace

TEST_CASE("quantized_q_learning: single-state fixed point") {
  ContinuousMdp mdp = single_state_mdp(1.0, 0.5);
  GridQuantizer qz = build_uniform(1, 1, 1.0);
  QLearnResult r = quantized_q_learning(mdp, qz, constant_policy(0), 10'000,
                                        State::Zero(1), 9);
  CHECK(r.q(0, 0) == doctest::Approx(2.0).epsilon(1e-2));
  CHECK(r.visits.sum() == 10'000);
  CHECK(r.trajectory.steps.size() == 10'000);
}

TEST_CASE("quantized_q_learning: first update uses learning rate 1") {
  ContinuousMdp mdp = single_state_mdp(0.4, 0.9);
  GridQuantizer qz = build_uniform(1, 1, 1.0);
  QLearnResult r =
      quantized_q_learning(mdp, qz, constant_policy(0), 1, State::Zero(1), 9);
  CHECK(r.q(0, 0) == doctest::Approx(0.4));
  CHECK(r.visits(0, 0) == 1);
}

TEST_CASE("quantized_q_learning: at beta 0 the table averages observed costs") {
  // The j-th update with rate 1/j and beta = 0 leaves the running mean.
  ContinuousMdp mdp = single_state_mdp(0.0, 0.5);
  mdp.cost = [](const State& x, int) { return x[0] > 0.0 ? 0.8 : 0.2; };
  mdp.step = [](const State& x, int, Rng&) {
    return State::Constant(1, x[0] > 0.0 ? -0.5 : 0.5);
  };
  mdp.beta = 1e-6;
  GridQuantizer qz = build_uniform(1, 2, 1.0);
  QLearnResult r = quantized_q_learning(mdp, qz, constant_policy(0), 1000,
                                        State::Constant(1, -0.5), 9);
  int bin0 = qz.quantize(State::Constant(1, -0.5));
  int bin1 = qz.quantize(State::Constant(1, 0.5));
  CHECK(r.q(bin0, 0) == doctest::Approx(0.2).epsilon(1e-4));
  CHECK(r.q(bin1, 0) == doctest::Approx(0.8).epsilon(1e-4));
}

TEST_CASE("quantized_q_learning: zero cost keeps Q at zero, iterates bounded") {
  Benchmark bench = linear_gaussian_1d(0.5, 1.0, {-0.25, 0.0, 0.25}, 1.0);
  ContinuousMdp zero = bench.mdp;
  zero.cost = [](const State&, int) { return 0.0; };
  zero.beta = 0.5;
  GridQuantizer qz = build_uniform(1, 8, 3.0);
  QLearnResult r = quantized_q_learning(zero, qz, uniform_policy(3), 5000,
                                        State::Zero(1), 9);
  CHECK(r.q.norm() == 0.0);

  ContinuousMdp real = bench.mdp;
  real.beta = 0.5;
  QLearnResult s = quantized_q_learning(real, qz, uniform_policy(3), 5000,
                                        State::Zero(1), 9);
  CHECK(s.q.minCoeff() >= 0.0);
  CHECK(s.q.maxCoeff() <= real.c_sup / (1.0 - real.beta));
}

TEST_CASE("empirical_model: counts, means and the unvisited fallback") {
  GridQuantizer qz = build_uniform(1, 2, 1.0);
  Trajectory traj;
  auto at = [](double v) { return State::Constant(1, v); };
  traj.steps = {Transition{at(0.5), 0, 0.1, at(0.5)},
                Transition{at(0.5), 0, 0.2, at(-0.5)},
                Transition{at(0.5), 0, 0.3, at(0.5)}};
  auto [fmdp, coverage] = empirical_model(traj, qz, 1.0);
  int b = qz.quantize(at(0.5));
  int a = qz.quantize(at(-0.5));
  CHECK(fmdp.cost(b, 0) == doctest::Approx(0.2));
  CHECK(fmdp.trans[0](b, b) == doctest::Approx(2.0 / 3.0));
  CHECK(fmdp.trans[0](b, a) == doctest::Approx(1.0 / 3.0));
  // Unvisited rows: pessimistic cost and a self-loop.
  CHECK(fmdp.cost(a, 0) == 1.0);
  CHECK(fmdp.trans[0](a, a) == 1.0);
  CHECK(coverage.visited_fraction == doctest::Approx(1.0 / 3.0));
  CHECK(coverage.unvisited.size() == 2);
}

TEST_CASE("empirical_model agrees with the CDF oracle on long runs") {
  Benchmark bench = linear_gaussian_1d(0.5, 1.0, {-0.25, 0.0, 0.25}, 1.0);
  bench.mdp.beta = 0.5;
  GridQuantizer qz = build_uniform(1, 4, 2.0);
  Trajectory traj =
      simulate(bench.mdp, uniform_policy(3), State::Zero(1), 200'000, 17);
  auto [fmdp, coverage] = empirical_model(traj, qz, bench.spec.c_sup);
  CHECK(coverage.visited_fraction == 1.0);

  // Oracle: per-sample Gaussian CDF averaging over the same visit sets.
  std::vector<std::vector<double>> landing(
      static_cast<std::size_t>(qz.num_bins() * 3));
  Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(qz.num_bins(), qz.num_bins());
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(qz.num_bins(), 3);
  std::vector<Eigen::MatrixXd> probs(
      3, Eigen::MatrixXd::Zero(qz.num_bins(), qz.num_bins()));
  Eigen::VectorXd lo, hi;
  for (const Transition& tr : traj.steps) {
    int i = qz.quantize(tr.x);
    counts(i, tr.u) += 1.0;
    for (int j = 0; j < qz.num_granular(); ++j) {
      qz.bin_bounds(j, lo, hi);
      probs[static_cast<std::size_t>(tr.u)](i, j) +=
          bench.mdp.box_prob(tr.x, tr.u, lo, hi);
    }
  }
  for (int u = 0; u < 3; ++u)
    for (int i = 0; i < qz.num_bins(); ++i)
      for (int j = 0; j < qz.num_granular(); ++j) {
        double n = counts(i, u);
        if (n < 100) continue;
        double p = probs[static_cast<std::size_t>(u)](i, j) / n;
        double se = std::sqrt(p * (1.0 - p) / n) + 1e-9;
        CHECK(std::abs(fmdp.trans[static_cast<std::size_t>(u)](i, j) - p) <=
              4.0 * se);
      }
}

TEST_CASE("q_from_model: closed forms and Bellman consistency") {
  FiniteMdp one;
  one.num_states = 1;
  one.num_actions = 1;
  one.c_sup = 1.0;
  one.cost = Eigen::MatrixXd::Ones(1, 1);
  one.trans = {Eigen::MatrixXd::Ones(1, 1)};
  CHECK(q_from_model(one, 0.9, 1e-9)(0, 0) == doctest::Approx(10.0));

  FiniteMdp swap;
  swap.num_states = 2;
  swap.num_actions = 1;
  swap.c_sup = 1.0;
  swap.cost.resize(2, 1);
  swap.cost << 0.0, 1.0;
  Eigen::MatrixXd p(2, 2);
  p << 0.0, 1.0, 1.0, 0.0;
  swap.trans = {p};
  Eigen::MatrixXd q = q_from_model(swap, 0.5, 1e-9);
  CHECK(q(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-7));
  CHECK(q(1, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-7));

  ValueSolution vi = discounted_vi(swap, 0.5, 1e-9, 100'000);
  CHECK(std::abs(q.rowwise().minCoeff()[0] - vi.values[0]) <= 2e-9);
}

TEST_CASE("greedy_policy: argmin with tie-break, scale invariant") {
  GridQuantizer qz = build_uniform(1, 1, 1.0);
  Eigen::MatrixXd q(2, 3);
  q << 1.0, 0.0, 2.0, 0.0, 0.0, 1.0;
  Rng rng(1);
  StationaryPolicy p = greedy_policy(q, qz);
  CHECK(p.act(State::Zero(1), rng) == 1);
  StationaryPolicy tied = greedy_policy(Eigen::MatrixXd::Zero(2, 2), qz);
  CHECK(tied.act(State::Zero(1), rng) == 0);
  StationaryPolicy scaled = greedy_policy(3.0 * q, qz);
  CHECK(scaled.act(State::Zero(1), rng) == p.act(State::Zero(1), rng));
}

TEST_CASE("evaluate_policy") {
  ContinuousMdp zero = single_state_mdp(0.0, 0.9);
  PolicyValue pv = evaluate_policy(zero, constant_policy(0), 0.9,
                                   State::Zero(1), 10, 50, 3);
  CHECK(pv.mean == 0.0);
  CHECK(pv.std_error == 0.0);

  ContinuousMdp unit = single_state_mdp(1.0, 0.9);
  PolicyValue pu = evaluate_policy(unit, constant_policy(0), 0.9,
                                   State::Zero(1), 10, 200, 3);
  CHECK(pu.mean == doctest::Approx(10.0).epsilon(1e-6));
  CHECK(pu.truncation_bias ==
        doctest::Approx(std::pow(0.9, 200) * 1.0 / 0.1));
}

TEST_CASE("learning routes agree at moderate scale") {
  Benchmark bench = linear_gaussian_1d(0.5, 1.0, {-0.25, 0.0, 0.25}, 1.0);
  bench.mdp.beta = 0.5;
  GridQuantizer qz = build_uniform(1, 8, 3.0);
  QLearnResult r = quantized_q_learning(bench.mdp, qz, uniform_policy(3),
                                        400'000, State::Zero(1), 23);
  auto [fmdp, coverage] = empirical_model(r.trajectory, qz, bench.spec.c_sup);
  REQUIRE(coverage.visited_fraction == 1.0);
  Eigen::MatrixXd q = q_from_model(fmdp, 0.5, 1e-8);
  CHECK((r.q - q).lpNorm<Eigen::Infinity>() < 0.15);
}
