#include "qmdp/learner.hpp"

#include <cmath>
#include <fstream>

namespace qmdp {

QLearnResult quantized_q_learning(const ContinuousMdp& mdp,
                                  const GridQuantizer& qz,
                                  const StationaryPolicy& exploration,
                                  long iterations, const State& x0,
                                  std::uint64_t seed) {
  mdp.validate();
  if (iterations < 1)
    throw ConfigError("quantized_q_learning: iterations must be >= 1");
  if (x0.size() != mdp.n)
    throw ConfigError("quantized_q_learning: x0 dimension mismatch");

  const int s_count = qz.num_bins();
  const int a_count = mdp.num_actions();
  const double beta = mdp.beta;

  Rng root(seed);
  Rng policy_rng = root.split(0);
  Rng step_rng = root.split(1);

  QLearnResult out;
  out.q = Eigen::MatrixXd::Zero(s_count, a_count);
  out.visits = Eigen::MatrixXi::Zero(s_count, a_count);
  out.trajectory.seed = seed;
  out.trajectory.steps.reserve(static_cast<std::size_t>(iterations));

  State x = x0;
  for (long t = 0; t < iterations; ++t) {
    int i = qz.quantize(x);
    int u = exploration.act(x, policy_rng);
    if (u < 0 || u >= a_count)
      throw ConfigError("quantized_q_learning: exploration action out of range");
    double c = mdp.cost(x, u);
    State x_next = mdp.step(x, u, step_rng);
    int j = qz.quantize(x_next);

    double alpha = 1.0 / (1.0 + out.visits(i, u));
    double target = c + beta * out.q.row(j).minCoeff();
    out.q(i, u) += alpha * (target - out.q(i, u));
    out.visits(i, u) += 1;

    out.trajectory.steps.push_back(Transition{x, u, c, x_next});
    x = x_next;
  }
  return out;
}

std::pair<FiniteMdp, CoverageReport> empirical_model(const Trajectory& traj,
                                                     const GridQuantizer& qz,
                                                     double c_sup) {
  if (traj.steps.empty())
    throw ConfigError("empirical_model: empty trajectory");

  int a_count = 0;
  for (const Transition& tr : traj.steps) a_count = std::max(a_count, tr.u + 1);
  const int s_count = qz.num_bins();

  FiniteMdp fmdp;
  fmdp.num_states = s_count;
  fmdp.num_actions = a_count;
  fmdp.c_sup = c_sup;
  fmdp.cost = Eigen::MatrixXd::Zero(s_count, a_count);
  fmdp.trans.assign(static_cast<std::size_t>(a_count),
                    Eigen::MatrixXd::Zero(s_count, s_count));
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(s_count, a_count);

  for (const Transition& tr : traj.steps) {
    int i = qz.quantize(tr.x);
    int j = qz.quantize(tr.x_next);
    counts(i, tr.u) += 1.0;
    fmdp.cost(i, tr.u) += tr.cost;
    fmdp.trans[static_cast<std::size_t>(tr.u)](i, j) += 1.0;
  }

  CoverageReport report;
  int visited = 0;
  for (int i = 0; i < s_count; ++i) {
    for (int u = 0; u < a_count; ++u) {
      if (counts(i, u) > 0.0) {
        fmdp.cost(i, u) /= counts(i, u);
        fmdp.trans[static_cast<std::size_t>(u)].row(i) /= counts(i, u);
        ++visited;
      } else {
        fmdp.cost(i, u) = c_sup;
        fmdp.trans[static_cast<std::size_t>(u)](i, i) = 1.0;
        report.unvisited.emplace_back(i, u);
      }
    }
  }
  report.visited_fraction =
      static_cast<double>(visited) / (s_count * a_count);
  fmdp.validate();
  return {std::move(fmdp), std::move(report)};
}

Eigen::MatrixXd q_from_model(const FiniteMdp& fmdp, double beta, double tol,
                             int max_iter) {
  fmdp.validate();
  if (!(beta > 0.0 && beta < 1.0))
    throw ConfigError("q_from_model: beta must lie in (0, 1)");
  if (!(tol > 0.0)) throw ConfigError("q_from_model: tol must be > 0");

  const int s_count = fmdp.num_states;
  const int a_count = fmdp.num_actions;
  const double stop = tol * (1.0 - beta) / (2.0 * beta);

  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(s_count, a_count);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(s_count);
  double residual = 0.0;
  for (int t = 0; t < max_iter; ++t) {
    Eigen::MatrixXd next(s_count, a_count);
    for (int u = 0; u < a_count; ++u)
      next.col(u) =
          fmdp.cost.col(u) + beta * (fmdp.trans[static_cast<std::size_t>(u)] * v);
    residual = (next - q).lpNorm<Eigen::Infinity>();
    q = next;
    v = q.rowwise().minCoeff();
    if (residual <= stop) return q;
  }
  throw ConvergenceError("q_from_model: iteration cap reached", residual);
}

StationaryPolicy greedy_policy(const Eigen::MatrixXd& q,
                               const GridQuantizer& qz) {
  if (q.rows() != qz.num_bins())
    throw ConfigError("greedy_policy: Q row count mismatch");
  std::vector<int> choice(static_cast<std::size_t>(q.rows()));
  for (int i = 0; i < q.rows(); ++i) {
    int best = 0;
    for (int u = 1; u < q.cols(); ++u)
      if (q(i, u) < q(i, best)) best = u;
    choice[static_cast<std::size_t>(i)] = best;
  }
  StationaryPolicy p;
  p.id = "greedy";
  p.act = [choice, qz](const State& x, Rng&) {
    return choice[static_cast<std::size_t>(qz.quantize(x))];
  };
  return p;
}

PolicyValue evaluate_policy(const ContinuousMdp& mdp,
                            const StationaryPolicy& policy, double beta,
                            const State& x0, int rollouts, int horizon,
                            std::uint64_t seed) {
  mdp.validate();
  if (rollouts < 2) throw ConfigError("evaluate_policy: need >= 2 rollouts");
  if (horizon < 1) throw ConfigError("evaluate_policy: horizon must be >= 1");

  Rng root(seed);
  double sum = 0.0, sum_sq = 0.0;
  for (int r = 0; r < rollouts; ++r) {
    Trajectory traj = simulate(mdp, policy, x0, horizon,
                               root.split(static_cast<std::uint64_t>(r))
                                   .next_u64());
    double total = 0.0, disc = 1.0;
    for (const Transition& tr : traj.steps) {
      total += disc * tr.cost;
      disc *= beta;
    }
    sum += total;
    sum_sq += total * total;
  }
  PolicyValue out;
  out.mean = sum / rollouts;
  double var = (sum_sq - rollouts * out.mean * out.mean) / (rollouts - 1);
  out.std_error = std::sqrt(std::max(var, 0.0) / rollouts);
  out.truncation_bias = std::pow(beta, horizon) * mdp.c_sup / (1.0 - beta);
  return out;
}

void write_trajectory(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("write_trajectory: cannot open " + path);
  for (std::size_t t = 0; t < traj.steps.size(); ++t) {
    const Transition& tr = traj.steps[t];
    out << t;
    for (int j = 0; j < tr.x.size(); ++j) out << "," << tr.x[j];
    out << "," << tr.u << "," << tr.cost;
    for (int j = 0; j < tr.x_next.size(); ++j) out << "," << tr.x_next[j];
    out << "\n";
  }
}

} // namespace qmdp
