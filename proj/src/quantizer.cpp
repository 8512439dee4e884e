#include "qmdp/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qmdp {

GridQuantizer::GridQuantizer(int n, int k, double half_width,
                             std::vector<Eigen::VectorXd> representatives,
                             std::string rep_mode)
    : n_(n), k_(k), half_width_(half_width), rep_mode_(std::move(rep_mode)) {
  if (n < 1) throw ConfigError("GridQuantizer: n must be >= 1");
  if (k < 1) throw ConfigError("GridQuantizer: k must be >= 1");
  if (!(half_width > 0.0))
    throw ConfigError("GridQuantizer: half_width must be > 0");
  delta_ = 2.0 * half_width / k;
  long m = 1;
  for (int j = 0; j < n; ++j) m *= k;
  num_granular_ = static_cast<int>(m);
  if (representatives.size() != static_cast<std::size_t>(num_granular_) + 1)
    throw ConfigError("GridQuantizer: need k^n + 1 representatives");
  reps_ = std::move(representatives);
}

int GridQuantizer::quantize(const Eigen::VectorXd& x) const {
  int flat = 0;
  for (int j = 0; j < n_; ++j) {
    double shifted = x[j] + half_width_;
    if (shifted < 0.0) return num_granular_;
    int cell = static_cast<int>(std::floor(shifted / delta_));
    if (cell >= k_) return num_granular_;
    flat = flat * k_ + cell;
  }
  return flat;
}

void GridQuantizer::bin_bounds(int i, Eigen::VectorXd& lo,
                               Eigen::VectorXd& hi) const {
  if (i < 0 || i >= num_granular_)
    throw ConfigError("bin_bounds: index outside the granular range");
  lo.resize(n_);
  hi.resize(n_);
  for (int j = n_ - 1; j >= 0; --j) {
    int cell = i % k_;
    i /= k_;
    lo[j] = -half_width_ + cell * delta_;
    hi[j] = lo[j] + delta_;
  }
}

GridQuantizer build_uniform(int n, int k, double half_width,
                            const Eigen::VectorXd& overflow_rep,
                            long cell_cap) {
  if (n < 1) throw ConfigError("build_uniform: n must be >= 1");
  if (k < 1) throw ConfigError("build_uniform: k must be >= 1");
  long m = 1;
  for (int j = 0; j < n; ++j) {
    m *= k;
    if (m > cell_cap)
      throw ResourceError("build_uniform: k^n exceeds the cell cap");
  }
  double delta = 2.0 * half_width / k;
  std::vector<Eigen::VectorXd> reps(static_cast<std::size_t>(m) + 1);
  for (long i = 0; i < m; ++i) {
    Eigen::VectorXd rep(n);
    long rem = i;
    for (int j = n - 1; j >= 0; --j) {
      int cell = static_cast<int>(rem % k);
      rem /= k;
      rep[j] = -half_width + (cell + 0.5) * delta;
    }
    reps[static_cast<std::size_t>(i)] = rep;
  }
  reps.back() = overflow_rep.size() == n ? overflow_rep
                                         : Eigen::VectorXd::Zero(n);
  return GridQuantizer(n, k, half_width, std::move(reps), "midpoint");
}

DiscountedSizing size_for_discounted(const LyapunovCertificate& cert, int k,
                                     double beta, const Eigen::VectorXd& x0) {
  cert.validate();
  if (k < 1) throw ConfigError("size_for_discounted: k must be >= 1");
  if (!(beta > 0.0 && beta < 1.0))
    throw ConfigError("size_for_discounted: beta must lie in (0, 1)");
  double v0 = cert.lyapunov(x0);
  double c = (v0 * (1.0 - beta) + cert.b * beta) /
             (1.0 - beta * (1.0 - cert.alpha));
  if (!(c > 0.0))
    throw CertificateError(
        "size_for_discounted: degenerate moment bound, cannot size a region");
  return DiscountedSizing{std::pow(c * k, 1.0 / cert.m), c};
}

double size_for_average(const LyapunovCertificate& cert, int k) {
  cert.validate();
  if (k < 1) throw ConfigError("size_for_average: k must be >= 1");
  if (!(cert.b > 0.0))
    throw CertificateError(
        "size_for_average: degenerate drift constant, cannot size a region");
  return std::pow(cert.b * k, 1.0 / cert.m);
}

BinWeighting BinWeighting::empirical(const OccupationSample& occupation,
                                     const GridQuantizer& qz) {
  BinWeighting w;
  w.kind = Kind::Empirical;
  w.samples.resize(static_cast<std::size_t>(qz.num_bins()));
  w.weights.resize(static_cast<std::size_t>(qz.num_bins()));
  for (std::size_t s = 0; s < occupation.size(); ++s) {
    auto i = static_cast<std::size_t>(qz.quantize(occupation.states[s]));
    w.samples[i].push_back(occupation.states[s]);
    w.weights[i].push_back(occupation.weights[s]);
  }
  return w;
}

double loss(const GridQuantizer& qz, const BinWeighting& weighting,
            const Eigen::VectorXd& x) {
  int i = qz.quantize(x);
  switch (weighting.kind) {
    case BinWeighting::Kind::Dirac:
      return (x - qz.representative(i)).lpNorm<1>();
    case BinWeighting::Kind::Uniform: {
      if (qz.is_overflow(i)) return (x - qz.representative(i)).lpNorm<1>();
      Eigen::VectorXd lo, hi;
      qz.bin_bounds(i, lo, hi);
      // E|x_j - U[lo,hi]| = ((x-lo)^2 + (hi-x)^2) / (2 (hi-lo))
      double total = 0.0;
      for (int j = 0; j < qz.n(); ++j) {
        double a = x[j] - lo[j], b = hi[j] - x[j];
        total += (a * a + b * b) / (2.0 * (hi[j] - lo[j]));
      }
      return total;
    }
    case BinWeighting::Kind::Empirical: {
      auto bi = static_cast<std::size_t>(i);
      if (bi >= weighting.samples.size() || weighting.samples[bi].empty())
        throw ConfigError("loss: empirical weighting has no samples in bin");
      double num = 0.0, den = 0.0;
      for (std::size_t s = 0; s < weighting.samples[bi].size(); ++s) {
        num += weighting.weights[bi][s] *
               (x - weighting.samples[bi][s]).lpNorm<1>();
        den += weighting.weights[bi][s];
      }
      return num / den;
    }
  }
  throw ConfigError("loss: unknown weighting kind");
}

double weighted_median(std::vector<double> values,
                       std::vector<double> weights) {
  if (values.empty() || values.size() != weights.size())
    throw ConfigError("weighted_median: empty or mismatched inputs");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw ConfigError("weighted_median: negative weight");
    total += w;
  }
  if (!(total > 0.0)) throw ConfigError("weighted_median: zero total weight");
  double cum = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    cum += weights[order[r]];
    if (cum > total / 2.0) return values[order[r]];
    if (cum == total / 2.0) {
      std::size_t s = r + 1;
      while (s < order.size() && weights[order[s]] == 0.0) ++s;
      if (s == order.size()) return values[order[r]];
      return 0.5 * (values[order[r]] + values[order[s]]);
    }
  }
  return values[order.back()];
}

MedianResult set_median_representatives(const GridQuantizer& qz,
                                        const OccupationSample& occupation) {
  std::vector<std::vector<std::size_t>> by_bin(
      static_cast<std::size_t>(qz.num_bins()));
  for (std::size_t s = 0; s < occupation.size(); ++s)
    by_bin[static_cast<std::size_t>(qz.quantize(occupation.states[s]))]
        .push_back(s);

  std::vector<Eigen::VectorXd> reps = qz.representatives();
  MedianResult out;
  for (int i = 0; i < qz.num_granular(); ++i) {
    const auto& idx = by_bin[static_cast<std::size_t>(i)];
    if (idx.empty()) {
      out.empty_bins.push_back(i);
      continue;
    }
    Eigen::VectorXd rep(qz.n());
    for (int j = 0; j < qz.n(); ++j) {
      std::vector<double> vals, wts;
      vals.reserve(idx.size());
      wts.reserve(idx.size());
      for (std::size_t s : idx) {
        vals.push_back(occupation.states[s][j]);
        wts.push_back(occupation.weights[s]);
      }
      rep[j] = weighted_median(std::move(vals), std::move(wts));
    }
    reps[static_cast<std::size_t>(i)] = rep;
  }
  out.quantizer =
      GridQuantizer(qz.n(), qz.k(), qz.half_width(), std::move(reps), "median");
  return out;
}

} // namespace qmdp
