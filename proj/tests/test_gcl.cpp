#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gvpr/gcl.hpp"

namespace {

using gvpr::LossConfig;
using gvpr::PairLabel;

// Central difference with h = 1e-6. Quadratic pieces make the truncation
// error vanish, leaving roundoff of order 1e-10.
template <typename F>
double central_difference(F f, double x, double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2 * h);
}

// Relative error with a 1e-3 floor on the scale, so gradients that cross
// zero are compared absolutely near their root.
double rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-3});
}

TEST(DescriptorDistance, Examples) {
  const std::vector<double> a{1, 0}, b{0, 1}, c{3, 4}, z{0, 0};
  EXPECT_EQ(gvpr::descriptor_distance(a, a), 0.0);
  EXPECT_DOUBLE_EQ(gvpr::descriptor_distance(a, b), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(gvpr::descriptor_distance(c, z), 5.0);
  const std::vector<double> three{1, 2, 3};
  EXPECT_THROW(gvpr::descriptor_distance(a, three), std::invalid_argument);
}

TEST(ClLoss, Examples) {
  const LossConfig cfg(0.5);
  EXPECT_NEAR(gvpr::cl_loss(0.3, 1, cfg), 0.045, 1e-15);
  EXPECT_NEAR(gvpr::cl_loss(0.3, 0, cfg), 0.02, 1e-15);
  EXPECT_EQ(gvpr::cl_loss(0.5, 0, cfg), 0.0);
  EXPECT_EQ(gvpr::cl_loss(0.9, 0, cfg), 0.0);
}

TEST(GclLoss, Examples) {
  const LossConfig cfg(0.5);
  EXPECT_NEAR(gvpr::gcl_loss(0.3, 0.5, cfg), 0.0325, 1e-15);
  EXPECT_NEAR(gvpr::gcl_loss(0.6, 0.5, cfg), 0.09, 1e-15);
}

TEST(ClGrad, Examples) {
  const LossConfig cfg(0.5);
  EXPECT_DOUBLE_EQ(gvpr::cl_grad_d(0.3, 1, cfg), 0.3);
  EXPECT_NEAR(gvpr::cl_grad_d(0.3, 0, cfg), -0.2, 1e-15);
  EXPECT_EQ(gvpr::cl_grad_d(0.7, 0, cfg), 0.0);
}

TEST(GclGrad, Examples) {
  const LossConfig cfg(0.5);
  EXPECT_NEAR(gvpr::gcl_grad_d(0.3, 0.5, cfg), 0.05, 1e-15);
  EXPECT_DOUBLE_EQ(gvpr::gcl_grad_d(0.6, 0.5, cfg), 0.3);
  for (double d : {0.0, 0.2, 0.5, 1.7}) EXPECT_EQ(gvpr::gcl_grad_d(d, 1.0, cfg), d);
}

TEST(Gcl, EndpointsReduceToClExactly) {
  for (double tau : {0.3, 1.0, 1.9}) {
    const LossConfig cfg(tau);
    for (double d = 0.0; d <= 2.5; d += 0.01) {
      EXPECT_EQ(gvpr::gcl_loss(d, 1.0, cfg), gvpr::cl_loss(d, 1, cfg));
      EXPECT_EQ(gvpr::gcl_loss(d, 0.0, cfg), gvpr::cl_loss(d, 0, cfg));
      EXPECT_EQ(gvpr::gcl_grad_d(d, 1.0, cfg), gvpr::cl_grad_d(d, 1, cfg));
      EXPECT_EQ(gvpr::gcl_grad_d(d, 0.0, cfg), gvpr::cl_grad_d(d, 0, cfg));
    }
  }
}

TEST(Gcl, ContinuousAtMargin) {
  const LossConfig cfg(0.8);
  for (double psi = 0.0; psi <= 1.0; psi += 0.05) {
    const double below = std::nextafter(cfg.tau, 0.0);
    EXPECT_NEAR(gvpr::gcl_grad_d(below, psi, cfg), cfg.tau * psi, 1e-12);
    EXPECT_DOUBLE_EQ(gvpr::gcl_grad_d(cfg.tau, psi, cfg), cfg.tau * psi);
    EXPECT_NEAR(gvpr::gcl_loss(below, psi, cfg), gvpr::gcl_loss(cfg.tau, psi, cfg), 1e-12);
  }
}

TEST(Gcl, BoundedByClBranches) {
  for (double tau : {0.5, 1.0}) {
    const LossConfig cfg(tau);
    for (double d = 0.0; d <= 2.0; d += 0.05) {
      const double lo = std::min(gvpr::cl_loss(d, 0, cfg), gvpr::cl_loss(d, 1, cfg));
      const double hi = std::max(gvpr::cl_loss(d, 0, cfg), gvpr::cl_loss(d, 1, cfg));
      for (double psi = 0.0; psi <= 1.0; psi += 0.1) {
        const double g = gvpr::gcl_loss(d, psi, cfg);
        EXPECT_GE(g, lo - 1e-15);
        EXPECT_LE(g, hi + 1e-15);
      }
    }
  }
}

TEST(Gcl, GradientMatchesFiniteDifferences) {
  for (double tau : {0.25, 0.5, 1.0, 1.5}) {
    const LossConfig cfg(tau);
    for (double d = 0.01; d <= 2.0; d += 0.0173) {
      if (std::abs(d - tau) <= 1e-4) continue;
      for (double psi = 0.0; psi <= 1.0; psi += 0.125) {
        const double fd = central_difference([&](double x) { return gvpr::gcl_loss(x, psi, cfg); }, d);
        EXPECT_LE(rel_error(gvpr::gcl_grad_d(d, psi, cfg), fd), 1e-5)
            << "d=" << d << " psi=" << psi << " tau=" << tau;
      }
      for (int y : {0, 1}) {
        const double fd = central_difference([&](double x) { return gvpr::cl_loss(x, y, cfg); }, d);
        EXPECT_LE(rel_error(gvpr::cl_grad_d(d, y, cfg), fd), 1e-5);
      }
    }
  }
}

TEST(PairGrad, Examples) {
  const LossConfig cfg(0.5);
  const std::vector<double> same{0.3, -0.1};
  const auto z = gvpr::pair_grad(same, same, PairLabel::graded(1.0), cfg);
  EXPECT_EQ(z.loss, 0.0);
  EXPECT_EQ(z.grad_fi, (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(z.grad_fj, (std::vector<double>{0.0, 0.0}));

  const std::vector<double> fi{1, 0}, fj{0, 0};
  const auto g = gvpr::pair_grad(fi, fj, PairLabel::graded(0.5), cfg);
  EXPECT_DOUBLE_EQ(g.d_loss_d_distance, 0.5);
  EXPECT_DOUBLE_EQ(g.grad_fi[0], 0.5);
  EXPECT_DOUBLE_EQ(g.grad_fi[1], 0.0);
}

TEST(PairGrad, ZeroDistanceSubgradientForNegatives) {
  const std::vector<double> v{0.2, 0.2};
  const auto g = gvpr::pair_grad(v, v, PairLabel::binary(0), LossConfig(1.0));
  EXPECT_DOUBLE_EQ(g.loss, 0.5);
  EXPECT_EQ(g.grad_fi, (std::vector<double>{0.0, 0.0}));
}

TEST(PairGrad, MatchesFiniteDifferencesAndIsAntisymmetric) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(0.0, 0.5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const LossConfig cfg(0.3 + 1.5 * u(rng));
    std::vector<double> fi(5), fj(5);
    for (auto& v : fi) v = n(rng);
    for (auto& v : fj) v = n(rng);
    if (std::abs(gvpr::descriptor_distance(fi, fj) - cfg.tau) <= 1e-4) continue;
    const PairLabel label = trial % 3 == 0 ? PairLabel::binary(trial % 2)
                                           : PairLabel::graded(u(rng));
    const auto g = gvpr::pair_grad(fi, fj, label, cfg);
    for (std::size_t k = 0; k < fi.size(); ++k) {
      EXPECT_EQ(g.grad_fj[k], -g.grad_fi[k]);
      const auto loss_at = [&](double x) {
        auto moved = fi;
        moved[k] = x;
        return gvpr::pair_loss(gvpr::descriptor_distance(moved, fj), label, cfg);
      };
      EXPECT_LE(rel_error(g.grad_fi[k], central_difference(loss_at, fi[k])), 1e-5);
    }
  }
}

TEST(Labels, Validation) {
  EXPECT_THROW(LossConfig(0.0), std::invalid_argument);
  EXPECT_THROW(PairLabel::graded(1.01), std::invalid_argument);
  EXPECT_THROW(PairLabel::graded(-0.01), std::invalid_argument);
  EXPECT_THROW(PairLabel::binary(2), std::invalid_argument);
}

}  // namespace
