#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "grid.hpp"
#include "problem.hpp"
#include "spectral.hpp"

namespace pnpd {

/// ||x_true - x_rec|| / ||x_true||.
inline double rre(const Image& x_rec, const Image& x_true) {
  detail::require(x_rec.same_shape(x_true), "rre: shape mismatch");
  const double den = norm2(x_true);
  detail::require(den > 0.0, "rre: x_true is zero");
  return norm2(x_true - x_rec) / den;
}

struct SsimParams {
  std::size_t window = 7;
  double k1 = 0.01;
  double k2 = 0.03;
  double data_range = 1.0;
};

/*
 * Mean structural similarity over every fully contained window x window
 * block (uniform weights, no padding):
 *
 *   (2 mx my + C1)(2 sxy + C2) / ((mx^2 + my^2 + C1)(sx^2 + sy^2 + C2))
 *
 * with C1 = (k1 R)^2, C2 = (k2 R)^2 and unbiased (N-1) second moments.
 * Both inputs are clamped to [0, R] first.
 */
inline double ssim(const Image& x, const Image& y, const SsimParams& p = {}) {
  detail::require(x.same_shape(y), "ssim: shape mismatch");
  detail::require(p.window % 2 == 1, "ssim: window must be odd");
  detail::require(p.data_range > 0.0, "ssim: data_range must be > 0");
  detail::require(p.window <= std::min(x.height(), x.width()), "ssim: image smaller than window");

  const auto clamp_r = [&](double v) { return std::clamp(v, 0.0, p.data_range); };
  const double c1 = (p.k1 * p.data_range) * (p.k1 * p.data_range);
  const double c2 = (p.k2 * p.data_range) * (p.k2 * p.data_range);
  const std::size_t win = p.window;
  const double np = double(win * win);
  const double cov_norm = np / (np - 1.0);

  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i0 = 0; i0 + win <= x.height(); ++i0) {
    for (std::size_t j0 = 0; j0 + win <= x.width(); ++j0) {
      double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
      for (std::size_t i = i0; i < i0 + win; ++i) {
        for (std::size_t j = j0; j < j0 + win; ++j) {
          const double a = clamp_r(x(i, j));
          const double b = clamp_r(y(i, j));
          sx += a;
          sy += b;
          sxx += a * a;
          syy += b * b;
          sxy += a * b;
        }
      }
      const double mx = sx / np, my = sy / np;
      const double vx = cov_norm * (sxx / np - mx * mx);
      const double vy = cov_norm * (syy / np - my * my);
      const double vxy = cov_norm * (sxy / np - mx * my);
      const double num = (2.0 * mx * my + c1) * (2.0 * vxy + c2);
      const double den = (mx * mx + my * my + c1) * (vx + vy + c2);
      total += num / den;
      ++count;
    }
  }
  return total / double(count);
}

/// 1/2 <r, S^{-1} r> + h(Wu) with S = p(A A^T) and r = A u - b_delta.
inline double objective(const Problem& pb, const Image& u, const Polynomial& s_poly) {
  const Image r = residual(pb, u);
  const PrecondSpectrum s = build_precond(s_poly, pb.spec);
  return 0.5 * dot(r, precond_solve(s, r)) + reg_value(pb.reg, u);
}

/// Objective of the least-squares model, or of the S-weighted model with
/// S = A A^T + nu I when nu is given.
inline double objective(const Problem& pb, const Image& u, std::optional<double> nu_effective = std::nullopt) {
  if (nu_effective) return objective(pb, u, Polynomial::shifted(*nu_effective));
  return fidelity(pb, u) + reg_value(pb.reg, u);
}

}  // namespace pnpd
