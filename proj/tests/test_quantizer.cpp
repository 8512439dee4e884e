#include <doctest.h>

#include <cmath>

#include "qmdp/quantizer.hpp"
#include "qmdp/rng.hpp"

using namespace qmdp;

TEST_CASE("build_uniform: 1-d grid arithmetic") {
  GridQuantizer qz = build_uniform(1, 4, 2.0);
  CHECK(qz.num_granular() == 4);
  CHECK(qz.delta() == doctest::Approx(1.0));
  CHECK(qz.representative(0)[0] == doctest::Approx(-1.5));
  CHECK(qz.representative(3)[0] == doctest::Approx(1.5));
  CHECK(qz.representative(qz.overflow_index())[0] == 0.0);
  CHECK(qz.quantize(State::Constant(1, 0.5)) == 2);
  CHECK(qz.quantize(State::Constant(1, 2.0)) == qz.overflow_index());
  CHECK(qz.quantize(State::Constant(1, -2.0)) == 0);
  CHECK(qz.quantize(State::Constant(1, -2.0001)) == qz.overflow_index());
}

TEST_CASE("build_uniform: 2-d cells and degenerate grid") {
  GridQuantizer qz = build_uniform(2, 2, 1.0);
  CHECK(qz.num_granular() == 4);
  Eigen::VectorXd x(2);
  x << -0.3, 0.7;
  int i = qz.quantize(x);
  Eigen::VectorXd lo, hi;
  qz.bin_bounds(i, lo, hi);
  CHECK(lo[0] == doctest::Approx(-1.0));
  CHECK(hi[0] == doctest::Approx(0.0));
  CHECK(lo[1] == doctest::Approx(0.0));
  CHECK(hi[1] == doctest::Approx(1.0));

  GridQuantizer one = build_uniform(1, 1, 1.0);
  CHECK(one.num_granular() == 1);
  CHECK(one.delta() == doctest::Approx(2.0));
  CHECK(one.representative(0)[0] == doctest::Approx(0.0));
}

TEST_CASE("build_uniform: cell cap") {
  CHECK_THROWS_AS(build_uniform(3, 100, 1.0, Eigen::VectorXd(), 100'000L),
                  ResourceError);
}

TEST_CASE("partition property over random states") {
  for (int n : {1, 2}) {
    GridQuantizer qz = build_uniform(n, 7, 1.8);
    Rng rng(13 + static_cast<std::uint64_t>(n));
    Eigen::VectorXd lo, hi;
    for (int s = 0; s < 100'000 / n; ++s) {
      Eigen::VectorXd x(n);
      for (int j = 0; j < n; ++j) x[j] = rng.uniform(-3.0, 3.0);
      int i = qz.quantize(x);
      bool inside_k = true;
      for (int j = 0; j < n; ++j)
        if (x[j] < -qz.half_width() || x[j] >= qz.half_width()) inside_k = false;
      if (qz.is_overflow(i)) {
        REQUIRE_FALSE(inside_k);
      } else {
        qz.bin_bounds(i, lo, hi);
        for (int j = 0; j < n; ++j) {
          REQUIRE(x[j] >= lo[j]);
          REQUIRE(x[j] < hi[j]);
        }
      }
    }
  }
}

TEST_CASE("idempotence of representatives") {
  GridQuantizer qz = build_uniform(2, 5, 2.5);
  for (int i = 0; i < qz.num_granular(); ++i)
    CHECK(qz.quantize(qz.representative(i)) == i);
}

TEST_CASE("size_for_discounted: moment constant and half width") {
  LyapunovCertificate cert{2.0, 0.5, 1.0};
  DiscountedSizing s = size_for_discounted(cert, 16, 0.9, State::Zero(1));
  CHECK(s.moment_bound == doctest::Approx(0.9 / 0.55).epsilon(1e-12));
  CHECK(s.half_width == doctest::Approx(std::sqrt(16.0 * 0.9 / 0.55)));
  CHECK(s.half_width == doctest::Approx(5.117).epsilon(1e-3));

  DiscountedSizing s2 = size_for_discounted(cert, 16, 0.9, State::Constant(1, 2.0));
  CHECK(s2.moment_bound == doctest::Approx((4.0 * 0.1 + 0.9) / 0.55).epsilon(1e-12));

  LyapunovCertificate pinned{2.0, 1.0, 0.0};
  CHECK_THROWS_AS(size_for_discounted(pinned, 16, 0.9, State::Zero(1)),
                  CertificateError);
}

TEST_CASE("size_for_discounted: monotone in k, b and the initial state") {
  LyapunovCertificate cert{2.0, 0.5, 1.0};
  double prev = 0.0;
  for (int k : {2, 4, 8, 16, 32}) {
    double hw = size_for_discounted(cert, k, 0.9, State::Zero(1)).half_width;
    CHECK(hw >= prev);
    prev = hw;
  }
  LyapunovCertificate bigger{2.0, 0.5, 2.0};
  CHECK(size_for_discounted(bigger, 8, 0.9, State::Zero(1)).half_width >
        size_for_discounted(cert, 8, 0.9, State::Zero(1)).half_width);
  CHECK(size_for_discounted(cert, 8, 0.9, State::Constant(1, 3.0)).half_width >
        size_for_discounted(cert, 8, 0.9, State::Zero(1)).half_width);
}

TEST_CASE("size_for_average") {
  CHECK(size_for_average(LyapunovCertificate{2.0, 0.5, 1.0}, 16) ==
        doctest::Approx(4.0));
  CHECK(size_for_average(LyapunovCertificate{2.0, 0.5, 1.0}, 1) ==
        doctest::Approx(1.0));
  CHECK(size_for_average(LyapunovCertificate{3.0, 0.5, 8.0}, 8) ==
        doctest::Approx(4.0));
  CHECK_THROWS_AS(size_for_average(LyapunovCertificate{2.0, 0.5, 0.0}, 16),
                  CertificateError);
}

TEST_CASE("loss: dirac weighting") {
  GridQuantizer qz = build_uniform(1, 4, 2.0);
  BinWeighting w = BinWeighting::dirac();
  CHECK(loss(qz, w, State::Constant(1, 0.5)) == doctest::Approx(0.0));
  CHECK(loss(qz, w, State::Constant(1, 0.9)) == doctest::Approx(0.4));
  // granular loss bound n * delta
  Rng rng(3);
  for (int s = 0; s < 2000; ++s) {
    State x = State::Constant(1, rng.uniform(-2.0, 2.0));
    CHECK(loss(qz, w, x) <= 1 * qz.delta());
  }
}

TEST_CASE("loss: uniform weighting closed form") {
  GridQuantizer qz = build_uniform(1, 4, 2.0);
  BinWeighting w = BinWeighting::uniform();
  // At the midpoint of [0,1): E|0.5 - U| = 0.25.
  CHECK(loss(qz, w, State::Constant(1, 0.5)) == doctest::Approx(0.25));
  // At the edge: E|0 - U| = 0.5.
  CHECK(loss(qz, w, State::Constant(1, 1e-12)) == doctest::Approx(0.5));
  // Overflow falls back to the fixed representative.
  CHECK(loss(qz, w, State::Constant(1, 3.0)) == doctest::Approx(3.0));
}

TEST_CASE("loss: empirical weighting") {
  GridQuantizer qz = build_uniform(1, 4, 2.0);
  OccupationSample occ;
  occ.states = {State::Constant(1, 0.2), State::Constant(1, 0.8)};
  occ.weights = {1.0, 1.0};
  BinWeighting w = BinWeighting::empirical(occ, qz);
  CHECK(loss(qz, w, State::Constant(1, 0.5)) == doctest::Approx(0.3));
  CHECK_THROWS_AS(loss(qz, w, State::Constant(1, -0.5)), ConfigError);
}

TEST_CASE("weighted_median") {
  CHECK(weighted_median({1, 2, 3}, {1, 1, 1}) == doctest::Approx(2.0));
  CHECK(weighted_median({1, 2, 3, 4}, {1, 1, 1, 1}) == doctest::Approx(2.5));
  CHECK(weighted_median({1, 2, 3}, {1, 1, 3}) == doctest::Approx(3.0));
  CHECK(weighted_median({3, 1, 2}, {1, 1, 1}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(weighted_median({}, {}), ConfigError);
  CHECK_THROWS_AS(weighted_median({1.0}, {-1.0}), ConfigError);
}

TEST_CASE("set_median_representatives") {
  GridQuantizer qz = build_uniform(1, 4, 2.0);
  OccupationSample occ;
  for (double v : {0.1, 0.2, 0.9, 1.2, 1.3, 1.9}) {
    occ.states.push_back(State::Constant(1, v));
    occ.weights.push_back(1.0);
  }
  MedianResult result = set_median_representatives(qz, occ);
  CHECK(result.quantizer.representative(2)[0] == doctest::Approx(0.2));
  CHECK(result.quantizer.representative(3)[0] == doctest::Approx(1.3));
  // Bins without samples keep their midpoints and are reported.
  CHECK(result.quantizer.representative(0)[0] == doctest::Approx(-1.5));
  REQUIRE(result.empty_bins.size() == 2);
  CHECK(result.empty_bins[0] == 0);
  CHECK(result.empty_bins[1] == 1);
  CHECK(result.quantizer.representative(qz.overflow_index())[0] == 0.0);
  CHECK(result.quantizer.rep_mode() == "median");
}

TEST_CASE("set_median_representatives: coordinate-wise in 2-d") {
  GridQuantizer qz = build_uniform(2, 1, 8.0);
  OccupationSample occ;
  Eigen::VectorXd a(2), b(2), c(2);
  a << 0, 0;
  b << 0, 4;
  c << 2, 0;
  occ.states = {a, b, c};
  occ.weights = {1.0, 1.0, 1.0};
  MedianResult result = set_median_representatives(qz, occ);
  CHECK(result.quantizer.representative(0)[0] == doctest::Approx(0.0));
  CHECK(result.quantizer.representative(0)[1] == doctest::Approx(0.0));
}
