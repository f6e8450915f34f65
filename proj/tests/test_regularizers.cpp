#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "pnpd/regularizers.hpp"
#include "test_util.hpp"

using namespace pnpd;
using pnpd::test_util::random_dual;
using pnpd::test_util::random_image;
using pnpd::test_util::rel_diff;

namespace {

Eigen::MatrixXd dense_of(const std::function<Image(const Image&)>& op, std::size_t h, std::size_t w) {
  const std::size_t n = h * w;
  Eigen::MatrixXd M(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    Image e(h, w);
    e[c] = 1.0;
    const Image col = op(e);
    for (std::size_t r = 0; r < n; ++r) M(r, c) = col[r];
  }
  return M;
}

Eigen::VectorXd vec(const Image& u) { return Eigen::Map<const Eigen::VectorXd>(u.data().data(), Eigen::Index(u.size())); }

Image unvec(const Eigen::VectorXd& v, std::size_t h, std::size_t w) {
  return Image(h, w, std::vector<double>(v.data(), v.data() + v.size()));
}

// Well-conditioned spectral operator: a kernel with a dominant center tap.
Spectrum random_invertible_spectrum(std::size_t h, std::size_t w, std::mt19937_64& rng) {
  Image k = random_image(3, 3, rng, 0.0, 0.3);
  k(1, 1) = 2.0;
  return psf_to_spectrum(k, h, w);
}

// Minimizer of 0.5 (x - u)^2 + theta |x| by golden-section search.
double scalar_prox_l1(double u, double theta) {
  auto f = [&](double x) { return 0.5 * (x - u) * (x - u) + theta * std::abs(x); };
  double lo = -std::abs(u) - 1.0, hi = std::abs(u) + 1.0;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
  for (int it = 0; it < 200; ++it) {
    if (f(a) < f(b)) {
      hi = b;
      b = a;
      a = hi - g * (hi - lo);
    } else {
      lo = a;
      a = b;
      b = lo + g * (hi - lo);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(Regularizer, RejectsNonPositiveLambda) {
  EXPECT_THROW(Regularizer(RegKind::TV_ISO, 0.0), std::invalid_argument);
  EXPECT_THROW(Regularizer(RegKind::L1, -1.0), std::invalid_argument);
  EXPECT_EQ(Regularizer(RegKind::L1, 2.0).with_lambda(3.0).lambda, 3.0);
}

TEST(TvValue, ConstantIsZero) { EXPECT_EQ(tv_value(Image(5, 5, 0.4)), 0.0); }

TEST(TvValue, OneByTwoWrapsAround) { EXPECT_EQ(tv_value(Image(1, 2, std::vector<double>{0.0, 1.0})), 2.0); }

TEST(TvValue, MatchesDefinition) {
  std::mt19937_64 rng(41);
  const Image u = random_image(7, 5, rng);
  double ref = 0.0;
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      const double gx = u(i, (j + 1) % 5) - u(i, j), gy = u((i + 1) % 7, j) - u(i, j);
      ref += std::sqrt(gx * gx + gy * gy);
    }
  EXPECT_NEAR(tv_value(u), ref, 1e-13 * ref);
}

TEST(ProxConjTv, InteriorPointsUnchanged) {
  std::mt19937_64 rng(42);
  const DualField v = random_dual(4, 4, rng, 0.1);
  EXPECT_EQ(prox_conj_tv(v, 10.0), v);
}

TEST(ProxConjTv, ProjectsOntoDisk) {
  const DualField p = prox_conj_tv(DualField(1, 1, {3.0}, {4.0}), 1.0);
  EXPECT_NEAR(p.gx()[0], 0.6, 1e-15);
  EXPECT_NEAR(p.gy()[0], 0.8, 1e-15);
}

TEST(ProxConjTv, IdempotentBoundedNonexpansive) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    const double lam = 0.05 + 0.1 * trial;
    const DualField a = random_dual(5, 6, rng, 1.0), b = random_dual(5, 6, rng, 1.0);
    const DualField pa = prox_conj_tv(a, lam), pb = prox_conj_tv(b, lam);
    const DualField ppa = prox_conj_tv(pa, lam);
    for (std::size_t k = 0; k < pa.size(); ++k) {
      EXPECT_LE(std::hypot(pa.gx()[k], pa.gy()[k]), lam * (1 + 1e-15));
      EXPECT_NEAR(ppa.gx()[k], pa.gx()[k], 1e-15);
      EXPECT_NEAR(ppa.gy()[k], pa.gy()[k], 1e-15);
    }
    EXPECT_LE(norm2(axpy(-1.0, pb, pa)), norm2(axpy(-1.0, b, a)) + 1e-15);
  }
}

TEST(ProxConjL1, ClampsToBall) {
  const Image v(1, 4, std::vector<double>{2.5, -2.5, 0.3, -1.0});
  EXPECT_EQ(prox_conj_l1(v, 1.0), Image(1, 4, std::vector<double>{1.0, -1.0, 0.3, -1.0}));
  std::mt19937_64 rng(44);
  const Image w = random_image(4, 4, rng, -0.5, 0.5);
  EXPECT_EQ(prox_conj_l1(w, 0.5), w);
}

TEST(ProxConjL1, MoreauDecomposition) {
  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 20; ++trial) {
    const Image x = random_image(6, 6, rng, -3.0, 3.0);
    const double lam = 0.1 + 0.1 * trial;
    EXPECT_LE(max_abs(soft_threshold(x, lam) + prox_conj_l1(x, lam) - x), 1e-12);
  }
}

TEST(ProxConjL1, IsExactBallProjection) {
  std::mt19937_64 rng(46);
  const Image x = random_image(8, 8, rng, -2.0, 2.0);
  const Image p = prox_conj_l1(x, 0.7);
  for (std::size_t k = 0; k < x.size(); ++k) {
    EXPECT_LE(std::abs(p[k]), 0.7);
    if (std::abs(x[k]) <= 0.7) {
      EXPECT_EQ(p[k], x[k]);
    }
  }
}

TEST(SoftThreshold, Formula) {
  const Image s = soft_threshold(Image(1, 3, std::vector<double>{0.5, 2.0, -3.0}), 1.0);
  EXPECT_EQ(s, Image(1, 3, std::vector<double>{0.0, 1.0, -2.0}));
  std::mt19937_64 rng(47);
  const Image u = random_image(3, 3, rng);
  EXPECT_EQ(soft_threshold(u, 0.0), u);
  EXPECT_THROW(soft_threshold(u, -1.0), std::invalid_argument);
}

TEST(SoftThreshold, MinimizesScalarProblem) {
  std::mt19937_64 rng(48);
  const Image u = random_image(5, 5, rng, -3.0, 3.0);
  for (double theta : {0.0, 0.3, 1.0, 2.5}) {
    const Image s = soft_threshold(u, theta);
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double ref = scalar_prox_l1(u[k], theta);
      auto f = [&](double x) { return 0.5 * (x - u[k]) * (x - u[k]) + theta * std::abs(x); };
      // a bracketing search only pins x to ~sqrt(eps), so compare objective values too
      EXPECT_LE(f(s[k]), f(ref) + 1e-15);
      EXPECT_NEAR(s[k], ref, 1e-7);
    }
  }
}

TEST(RegValue, Values) {
  EXPECT_EQ(reg_value(Regularizer(RegKind::TV_ISO, 3.0), Image(4, 4, 1.0)), 0.0);
  EXPECT_EQ(reg_value(Regularizer(RegKind::L1, 2.0), Image(1, 2, std::vector<double>{1.0, -1.0})), 4.0);
  std::mt19937_64 rng(49);
  const Image u = random_image(6, 6, rng);
  double l1 = 0.0;
  for (double v : u.data()) l1 += std::abs(v);
  EXPECT_NEAR(reg_value(Regularizer(RegKind::L1, 0.3), u), 0.3 * l1, 1e-14);
  EXPECT_NEAR(reg_value(Regularizer(RegKind::TV_ISO, 0.3), u), 0.3 * tv_value(u), 1e-14);
}

TEST(QuadraticGradientProx, MatchesDenseSolve) {
  std::mt19937_64 rng(50);
  const std::size_t h = 6, w = 5;
  const Eigen::MatrixXd Dx = dense_of([](const Image& u) {
    const DualField g = grad_apply(u);
    return Image(u.height(), u.width(), g.gx());
  }, h, w);
  const Eigen::MatrixXd Dy = dense_of([](const Image& u) {
    const DualField g = grad_apply(u);
    return Image(u.height(), u.width(), g.gy());
  }, h, w);
  const Eigen::MatrixXd WtW = Dx.transpose() * Dx + Dy.transpose() * Dy;
  const Image a = random_image(h, w, rng);
  const double alpha = 0.7, mu = 1.3;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(h * w, h * w);
  const Eigen::VectorXd ref = (I + alpha * mu * WtW).ldlt().solve(vec(a));
  EXPECT_LE(rel_diff(quadratic_gradient_prox(a, alpha, mu), unvec(ref, h, w)), 1e-12);

  const Spectrum s = random_invertible_spectrum(h, w, rng);
  const PrecondSpectrum m = build_precond(Polynomial({0.1, 1.0}), s);
  const Eigen::MatrixXd M = dense_of([&](const Image& u) { return precond_apply(m, u); }, h, w);
  const Eigen::VectorXd ref_m = (M + alpha * mu * WtW).ldlt().solve(M * vec(a));
  EXPECT_LE(rel_diff(quadratic_gradient_prox(a, alpha, mu, m), unvec(ref_m, h, w)), 1e-12);
}

// prox of alpha h(W R^{-1} .) at z equals R times the R^T R-metric prox of
// alpha h(W .) at R^{-1} z, for h = mu/2 ||.||^2.
TEST(RightPreconditioning, EquivalenceWithQuadraticRegularizer) {
  std::mt19937_64 rng(51);
  const std::size_t h = 8, w = 8;
  const Eigen::MatrixXd Dx = dense_of([](const Image& u) { return Image(8, 8, grad_apply(u).gx()); }, h, w);
  const Eigen::MatrixXd Dy = dense_of([](const Image& u) { return Image(8, 8, grad_apply(u).gy()); }, h, w);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(h * w, h * w);
  for (int trial = 0; trial < 10; ++trial) {
    const Spectrum r = random_invertible_spectrum(h, w, rng);
    const Spectrum r_inv = reciprocal(r);
    const double alpha = 0.5 + trial * 0.1, mu = 0.2 + trial * 0.3;
    const Image z = random_image(h, w, rng);

    const Eigen::MatrixXd Rinv = dense_of([&](const Image& u) { return conv_apply(r_inv, u); }, h, w);
    const Eigen::MatrixXd Wx = Dx * Rinv, Wy = Dy * Rinv;
    const Eigen::VectorXd lhs = (I + alpha * mu * (Wx.transpose() * Wx + Wy.transpose() * Wy)).ldlt().solve(vec(z));

    std::vector<double> rtr(r.size());
    for (std::size_t k = 0; k < r.size(); ++k) rtr[k] = std::norm(r[k]);
    const PrecondSpectrum metric(h, w, rtr, false);
    const Image rhs = conv_apply(r, quadratic_gradient_prox(conv_apply(r_inv, z), alpha, mu, metric));
    EXPECT_LE(rel_diff(rhs, unvec(lhs, h, w)), 1e-10);
  }
}
