#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace qmdp {

/// Weighted state samples approximating a normalized discounted occupation
/// measure or an invariant measure.
struct OccupationSample {
  std::vector<Eigen::VectorXd> states;
  std::vector<double> weights;
  bool normalized = false;
  std::string provenance;  // "discounted" | "invariant"
  std::string policy_id;
  std::uint64_t seed = 0;

  std::size_t size() const { return states.size(); }

  double total_weight() const {
    double w = 0.0;
    for (double wi : weights) w += wi;
    return w;
  }
};

} // namespace qmdp
