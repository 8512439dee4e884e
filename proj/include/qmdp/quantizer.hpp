#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "qmdp/errors.hpp"
#include "qmdp/mdp.hpp"
#include "qmdp/occupation.hpp"

namespace qmdp {

/// Hyper-cubic partition of K = [-half_width, +half_width)^n into k^n
/// half-open cells plus an overflow bin covering the complement of K.
/// Bin indices are 0-based; the overflow bin is index k^n.
///
/// The overflow representative is a fixed point (zero by default) and is
/// never sample-dependent.
class GridQuantizer {
public:
  GridQuantizer() = default;
  GridQuantizer(int n, int k, double half_width,
                std::vector<Eigen::VectorXd> representatives,
                std::string rep_mode);

  int n() const { return n_; }
  int k() const { return k_; }
  double half_width() const { return half_width_; }
  double delta() const { return delta_; }
  int num_granular() const { return num_granular_; }  // M = k^n
  int num_bins() const { return num_granular_ + 1; }  // M + 1
  int overflow_index() const { return num_granular_; }
  bool is_overflow(int i) const { return i == num_granular_; }
  const std::string& rep_mode() const { return rep_mode_; }

  /// Index of the unique bin containing x; overflow iff x is outside K.
  int quantize(const Eigen::VectorXd& x) const;

  const Eigen::VectorXd& representative(int i) const { return reps_[static_cast<std::size_t>(i)]; }
  const std::vector<Eigen::VectorXd>& representatives() const { return reps_; }

  /// Half-open bounds [lo, hi) of granular bin i.
  void bin_bounds(int i, Eigen::VectorXd& lo, Eigen::VectorXd& hi) const;

private:
  int n_ = 0;
  int k_ = 0;
  double half_width_ = 0.0;
  double delta_ = 0.0;
  int num_granular_ = 0;
  std::vector<Eigen::VectorXd> reps_;
  std::string rep_mode_ = "midpoint";
};

/// Builds the uniform grid with midpoint representatives. Throws
/// ResourceError if k^n exceeds `cell_cap`.
GridQuantizer build_uniform(int n, int k, double half_width,
                            const Eigen::VectorXd& overflow_rep = Eigen::VectorXd(),
                            long cell_cap = 10'000'000L);

struct DiscountedSizing {
  double half_width;
  double moment_bound;  // C = (||x0||_1^m (1-beta) + b beta) / (1 - beta (1-alpha))
};

/// Compact-region sizing for the discounted criterion:
/// half_width = (C k)^{1/m}. Throws CertificateError on degenerate C == 0.
DiscountedSizing size_for_discounted(const LyapunovCertificate& cert, int k,
                                     double beta, const Eigen::VectorXd& x0);

/// Compact-region sizing for the average-cost criterion:
/// half_width = (b k)^{1/m}, with cert.b the drift constant of the
/// V - f + b form. Throws CertificateError when b == 0.
double size_for_average(const LyapunovCertificate& cert, int k);

/// Normalized weighting measure per bin, used to average cost and
/// transitions when building finite models and to evaluate the loss.
struct BinWeighting {
  enum class Kind { Dirac, Uniform, Empirical };
  Kind kind = Kind::Dirac;
  // Empirical variant only: per-bin samples and weights, indexed by bin.
  std::vector<std::vector<Eigen::VectorXd>> samples;
  std::vector<std::vector<double>> weights;

  static BinWeighting dirac() { return BinWeighting{Kind::Dirac, {}, {}}; }
  static BinWeighting uniform() { return BinWeighting{Kind::Uniform, {}, {}}; }
  static BinWeighting empirical(const OccupationSample& occupation,
                                const GridQuantizer& qz);
};

/// Expected l1 distance from x to a point drawn from its bin's weighting
/// measure. Dirac: distance to the representative. Uniform: closed-form
/// per-axis expected absolute deviation (falls back to the fixed overflow
/// representative on the overflow bin). Empirical: weighted sample mean;
/// throws when the bin holds no samples.
double loss(const GridQuantizer& qz, const BinWeighting& weighting,
            const Eigen::VectorXd& x);

/// Weighted median with the midpoint-of-interval tie-break for even-mass
/// splits. Exposed for the brute-force optimality checks.
double weighted_median(std::vector<double> values, std::vector<double> weights);

struct MedianResult {
  GridQuantizer quantizer;
  std::vector<int> empty_bins;  // granular bins left at their midpoints
};

/// Replaces each granular representative by the coordinate-wise weighted
/// median of the in-bin samples. Bins without samples keep midpoints and
/// are reported; the overflow representative is unchanged.
MedianResult set_median_representatives(const GridQuantizer& qz,
                                        const OccupationSample& occupation);

} // namespace qmdp
