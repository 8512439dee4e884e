#include "qmdp/finite_model.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <utility>

namespace qmdp {

void FiniteMdp::validate(double tol) const {
  if (num_states < 1 || num_actions < 1)
    throw ConfigError("FiniteMdp: empty state or action set");
  if (cost.rows() != num_states || cost.cols() != num_actions)
    throw ConfigError("FiniteMdp: cost matrix shape mismatch");
  if (static_cast<int>(trans.size()) != num_actions)
    throw ConfigError("FiniteMdp: one transition matrix per action required");
  for (const auto& p : trans) {
    if (p.rows() != num_states || p.cols() != num_states)
      throw ConfigError("FiniteMdp: transition matrix shape mismatch");
    if (p.minCoeff() < -tol)
      throw ConfigError("FiniteMdp: negative transition probability");
    for (int i = 0; i < num_states; ++i)
      if (std::abs(p.row(i).sum() - 1.0) > tol)
        throw ConfigError("FiniteMdp: transition row does not sum to 1");
  }
  if (cost.minCoeff() < -tol || cost.maxCoeff() > c_sup + tol)
    throw ConfigError("FiniteMdp: cost outside [0, c_sup]");
}

namespace {

// Support points and weights of one bin's weighting measure.
struct BinSupport {
  std::vector<Eigen::VectorXd> points;
  std::vector<double> weights;
};

BinSupport bin_support(const ContinuousMdp& mdp, const GridQuantizer& qz,
                       const BinWeighting& weighting, int bin,
                       int samples_per_bin, Rng& rng) {
  BinSupport s;
  switch (weighting.kind) {
    case BinWeighting::Kind::Dirac:
      s.points.push_back(qz.representative(bin));
      s.weights.push_back(1.0);
      return s;
    case BinWeighting::Kind::Uniform: {
      if (qz.is_overflow(bin)) {
        s.points.push_back(qz.representative(bin));
        s.weights.push_back(1.0);
        return s;
      }
      Eigen::VectorXd lo, hi;
      qz.bin_bounds(bin, lo, hi);
      for (int d = 0; d < samples_per_bin; ++d) {
        Eigen::VectorXd x(mdp.n);
        for (int j = 0; j < mdp.n; ++j) x[j] = rng.uniform(lo[j], hi[j]);
        s.points.push_back(std::move(x));
        s.weights.push_back(1.0);
      }
      return s;
    }
    case BinWeighting::Kind::Empirical: {
      const auto bi = static_cast<std::size_t>(bin);
      if (bi >= weighting.samples.size() || weighting.samples[bi].empty()) {
        s.points.push_back(qz.representative(bin));
        s.weights.push_back(1.0);
        return s;
      }
      const auto& pts = weighting.samples[bi];
      const auto& wts = weighting.weights[bi];
      std::size_t stride =
          1 + (pts.size() - 1) / static_cast<std::size_t>(samples_per_bin);
      for (std::size_t p = 0; p < pts.size(); p += stride) {
        s.points.push_back(pts[p]);
        s.weights.push_back(wts[p]);
      }
      return s;
    }
  }
  throw ConfigError("bin_support: unknown weighting kind");
}

} // namespace

FiniteMdp build_finite_model(const ContinuousMdp& mdp, const GridQuantizer& qz,
                             const BinWeighting& weighting, int samples_per_bin,
                             std::uint64_t seed, bool force_monte_carlo) {
  mdp.validate();
  if (samples_per_bin < 1)
    throw ConfigError("build_finite_model: samples_per_bin must be >= 1");

  const int s_count = qz.num_bins();
  const int a_count = mdp.num_actions();
  const bool analytic = static_cast<bool>(mdp.box_prob) && !force_monte_carlo;

  FiniteMdp fmdp;
  fmdp.num_states = s_count;
  fmdp.num_actions = a_count;
  fmdp.c_sup = mdp.c_sup;
  fmdp.cost = Eigen::MatrixXd::Zero(s_count, a_count);
  fmdp.trans.assign(static_cast<std::size_t>(a_count),
                    Eigen::MatrixXd::Zero(s_count, s_count));

  Rng root(seed);
  for (int i = 0; i < s_count; ++i) {
    Rng support_rng = root.split(2ULL * static_cast<std::uint64_t>(i));
    BinSupport support =
        bin_support(mdp, qz, weighting, i, samples_per_bin, support_rng);
    const double w_total =
        std::accumulate(support.weights.begin(), support.weights.end(), 0.0);

    for (int u = 0; u < a_count; ++u) {
      double c_num = 0.0;
      for (std::size_t p = 0; p < support.points.size(); ++p)
        c_num += support.weights[p] * mdp.cost(support.points[p], u);
      fmdp.cost(i, u) = c_num / w_total;

      Eigen::MatrixXd& pu = fmdp.trans[static_cast<std::size_t>(u)];
      if (analytic) {
        double granular_total = 0.0;
        Eigen::VectorXd lo, hi;
        for (int j = 0; j < qz.num_granular(); ++j) {
          qz.bin_bounds(j, lo, hi);
          double prob = 0.0;
          for (std::size_t p = 0; p < support.points.size(); ++p)
            prob += support.weights[p] *
                    mdp.box_prob(support.points[p], u, lo, hi);
          prob /= w_total;
          pu(i, j) = prob;
          granular_total += prob;
        }
        pu(i, qz.overflow_index()) = std::max(0.0, 1.0 - granular_total);
        pu.row(i) /= pu.row(i).sum();
      } else {
        Rng draw_rng = root.split(2ULL * static_cast<std::uint64_t>(i) + 1)
                           .split(static_cast<std::uint64_t>(u));
        for (int d = 0; d < samples_per_bin; ++d) {
          std::size_t p;
          if (support.points.size() == 1) {
            p = 0;
          } else {
            double target = draw_rng.uniform01() * w_total;
            double cum = 0.0;
            p = support.points.size() - 1;
            for (std::size_t q = 0; q < support.points.size(); ++q) {
              cum += support.weights[q];
              if (cum > target) {
                p = q;
                break;
              }
            }
          }
          State x_next = mdp.step(support.points[p], u, draw_rng);
          pu(i, qz.quantize(x_next)) += 1.0;
        }
        pu.row(i) /= static_cast<double>(samples_per_bin);
      }
    }
  }
  fmdp.validate();
  return fmdp;
}

ValueSolution discounted_vi(const FiniteMdp& fmdp, double beta, double tol,
                            int max_iter) {
  fmdp.validate();
  if (!(beta > 0.0 && beta < 1.0))
    throw ConfigError("discounted_vi: beta must lie in (0, 1)");
  if (!(tol > 0.0)) throw ConfigError("discounted_vi: tol must be > 0");

  const int s_count = fmdp.num_states;
  const int a_count = fmdp.num_actions;
  const double stop = tol * (1.0 - beta) / (2.0 * beta);

  ValueSolution sol;
  sol.values = Eigen::VectorXd::Zero(s_count);
  sol.greedy.assign(static_cast<std::size_t>(s_count), 0);

  Eigen::MatrixXd q(s_count, a_count);
  for (int t = 0; t < max_iter; ++t) {
    for (int u = 0; u < a_count; ++u)
      q.col(u) = fmdp.cost.col(u) +
                 beta * (fmdp.trans[static_cast<std::size_t>(u)] * sol.values);
    Eigen::VectorXd next(s_count);
    for (int i = 0; i < s_count; ++i) {
      int best = 0;
      for (int u = 1; u < a_count; ++u)
        if (q(i, u) < q(i, best)) best = u;
      sol.greedy[static_cast<std::size_t>(i)] = best;
      next[i] = q(i, best);
    }
    sol.residual = (next - sol.values).lpNorm<Eigen::Infinity>();
    sol.residual_history.push_back(sol.residual);
    sol.values = next;
    sol.iterations = t + 1;
    if (sol.residual <= stop) return sol;
  }
  throw ConvergenceError("discounted_vi: iteration cap reached", sol.residual);
}

ValueSolution relative_vi(const FiniteMdp& fmdp, const Eigen::VectorXd& mu_hat,
                          double tol, int max_iter) {
  fmdp.validate();
  if (!(tol > 0.0)) throw ConfigError("relative_vi: tol must be > 0");
  if (mu_hat.size() != fmdp.num_states)
    throw ConfigError("relative_vi: mu_hat length mismatch");
  if (mu_hat.minCoeff() < 0.0)
    throw ConfigError("relative_vi: mu_hat must be nonnegative");
  const double mass = mu_hat.sum();
  if (!(mass > 0.0 && mass <= 1.0 + 1e-9))
    throw CertificateError("relative_vi: mu_hat mass must lie in (0, 1]");

  const int s_count = fmdp.num_states;
  const int a_count = fmdp.num_actions;

  // Enforce the dominance P*(. | y, u) >= mu_hat entrywise.
  std::vector<Eigen::MatrixXd> trans = fmdp.trans;
  for (auto& pu : trans) {
    for (int i = 0; i < s_count; ++i) {
      double worst = 0.0;
      for (int j = 0; j < s_count; ++j)
        worst = std::max(worst, mu_hat[j] - pu(i, j));
      if (worst > 1e-6)
        throw CertificateError(
            "relative_vi: transition row fails to dominate mu_hat");
      if (worst > 0.0) {
        double slack_total = 0.0;
        for (int j = 0; j < s_count; ++j) {
          pu(i, j) = std::max(pu(i, j), mu_hat[j]);
          slack_total += pu(i, j) - mu_hat[j];
        }
        double scale = slack_total > 0.0 ? (1.0 - mass) / slack_total : 0.0;
        for (int j = 0; j < s_count; ++j)
          pu(i, j) = mu_hat[j] + scale * (pu(i, j) - mu_hat[j]);
      }
    }
  }

  ValueSolution sol;
  sol.values = Eigen::VectorXd::Zero(s_count);
  sol.greedy.assign(static_cast<std::size_t>(s_count), 0);

  const double stop = tol * mass;
  Eigen::MatrixXd q(s_count, a_count);
  for (int t = 0; t < max_iter; ++t) {
    for (int u = 0; u < a_count; ++u)
      q.col(u) =
          fmdp.cost.col(u) + trans[static_cast<std::size_t>(u)] * sol.values;
    const double shift = mu_hat.dot(sol.values);
    Eigen::VectorXd next(s_count);
    for (int i = 0; i < s_count; ++i) {
      int best = 0;
      for (int u = 1; u < a_count; ++u)
        if (q(i, u) < q(i, best)) best = u;
      sol.greedy[static_cast<std::size_t>(i)] = best;
      next[i] = q(i, best) - shift;
    }
    sol.residual = (next - sol.values).lpNorm<Eigen::Infinity>();
    sol.residual_history.push_back(sol.residual);
    sol.values = next;
    sol.iterations = t + 1;
    if (sol.residual <= stop) {
      sol.gain = mu_hat.dot(sol.values);
      return sol;
    }
  }
  throw ConvergenceError("relative_vi: iteration cap reached", sol.residual);
}

std::function<double(const Eigen::VectorXd&)> extend_values(
    const Eigen::VectorXd& values, const GridQuantizer& qz) {
  if (values.size() != qz.num_bins())
    throw ConfigError("extend_values: value vector length mismatch");
  return [values, qz](const Eigen::VectorXd& x) {
    return values[qz.quantize(x)];
  };
}

double extend_value(const Eigen::VectorXd& values, const GridQuantizer& qz,
                    const Eigen::VectorXd& x) {
  if (values.size() != qz.num_bins())
    throw ConfigError("extend_value: value vector length mismatch");
  return values[qz.quantize(x)];
}

Eigen::VectorXd quantize_measure(const MinorizationCertificate& cert,
                                 const GridQuantizer& qz) {
  cert.validate();
  Eigen::VectorXd mu_hat = Eigen::VectorXd::Zero(qz.num_bins());
  Eigen::VectorXd lo, hi;
  double granular_total = 0.0;
  for (int i = 0; i < qz.num_granular(); ++i) {
    qz.bin_bounds(i, lo, hi);
    double m = cert.bin_mass(lo, hi);
    if (m < -1e-12)
      throw CertificateError("quantize_measure: negative bin mass");
    mu_hat[i] = std::max(m, 0.0);
    granular_total += mu_hat[i];
  }
  if (granular_total > cert.mass + 1e-9)
    throw CertificateError("quantize_measure: bin masses exceed total mass");
  mu_hat[qz.overflow_index()] = std::max(0.0, cert.mass - granular_total);
  return mu_hat;
}

void save_finite_mdp(const FiniteMdp& fmdp, const std::string& path) {
  nlohmann::json j;
  j["num_states"] = fmdp.num_states;
  j["num_actions"] = fmdp.num_actions;
  j["c_sup"] = fmdp.c_sup;
  auto& cost = j["cost"] = nlohmann::json::array();
  for (int i = 0; i < fmdp.num_states; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int u = 0; u < fmdp.num_actions; ++u) row.push_back(fmdp.cost(i, u));
    cost.push_back(std::move(row));
  }
  auto& trans = j["trans"] = nlohmann::json::array();
  for (const auto& pu : fmdp.trans) {
    nlohmann::json mat = nlohmann::json::array();
    for (int i = 0; i < fmdp.num_states; ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int jj = 0; jj < fmdp.num_states; ++jj) row.push_back(pu(i, jj));
      mat.push_back(std::move(row));
    }
    trans.push_back(std::move(mat));
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("save_finite_mdp: cannot open " + path);
  out << j.dump() << "\n";
}

FiniteMdp load_finite_mdp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_finite_mdp: cannot open " + path);
  nlohmann::json j;
  in >> j;
  FiniteMdp fmdp;
  fmdp.num_states = j.at("num_states").get<int>();
  fmdp.num_actions = j.at("num_actions").get<int>();
  fmdp.c_sup = j.at("c_sup").get<double>();
  fmdp.cost.resize(fmdp.num_states, fmdp.num_actions);
  for (int i = 0; i < fmdp.num_states; ++i)
    for (int u = 0; u < fmdp.num_actions; ++u)
      fmdp.cost(i, u) = j.at("cost").at(i).at(u).get<double>();
  fmdp.trans.resize(static_cast<std::size_t>(fmdp.num_actions));
  for (int u = 0; u < fmdp.num_actions; ++u) {
    auto& pu = fmdp.trans[static_cast<std::size_t>(u)];
    pu.resize(fmdp.num_states, fmdp.num_states);
    for (int i = 0; i < fmdp.num_states; ++i)
      for (int jj = 0; jj < fmdp.num_states; ++jj)
        pu(i, jj) = j.at("trans").at(u).at(i).at(jj).get<double>();
  }
  fmdp.validate();
  return fmdp;
}

} // namespace qmdp
