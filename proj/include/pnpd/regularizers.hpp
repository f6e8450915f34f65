#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "grid.hpp"
#include "spectral.hpp"

namespace pnpd {

enum class RegKind { TV_ISO, L1 };

inline std::string_view to_string(RegKind k) { return k == RegKind::TV_ISO ? "TV_ISO" : "L1"; }

/// Non-smooth term h(Wu) with the weight folded in. TV_ISO binds W to the
/// periodic gradient; L1 binds W = I.
struct Regularizer {
  RegKind kind = RegKind::TV_ISO;
  double lambda = 1.0;

  Regularizer() = default;
  Regularizer(RegKind k, double lam) : kind(k), lambda(lam) {
    detail::require(std::isfinite(lam) && lam > 0.0, "Regularizer: lambda must be > 0");
  }

  Regularizer with_lambda(double lam) const { return Regularizer(kind, lam); }
};

/// Isotropic total variation without the weight.
inline double tv_value(const Image& u) {
  const DualField g = grad_apply(u);
  double s = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) s += std::hypot(g.gx()[k], g.gy()[k]);
  return s;
}

inline void prox_conj_tv_inplace(DualField& v, double lambda) {
  auto& gx = v.gx();
  auto& gy = v.gy();
  for (std::size_t k = 0; k < gx.size(); ++k) {
    const double n = std::hypot(gx[k], gy[k]);
    if (n > lambda) {
      const double s = lambda / n;
      gx[k] *= s;
      gy[k] *= s;
    }
  }
}

/// Pixelwise projection onto the lambda-disk: the prox of the conjugate of
/// lambda*||.||_{2,1}, whatever the step.
inline DualField prox_conj_tv(DualField v, double lambda) {
  detail::require(lambda > 0.0, "prox_conj_tv: lambda must be > 0");
  prox_conj_tv_inplace(v, lambda);
  return v;
}

inline void prox_conj_l1_inplace(Image& v, double lambda) {
  for (auto& x : v.data()) x = std::clamp(x, -lambda, lambda);
}

/// Projection onto the l-infinity ball of radius lambda.
inline Image prox_conj_l1(Image v, double lambda) {
  detail::require(lambda > 0.0, "prox_conj_l1: lambda must be > 0");
  prox_conj_l1_inplace(v, lambda);
  return v;
}

/// sign(u) * max(|u| - theta, 0), elementwise.
inline Image soft_threshold(Image u, double theta) {
  detail::require(theta >= 0.0, "soft_threshold: theta must be >= 0");
  for (auto& x : u.data()) {
    const double m = std::abs(x) - theta;
    x = m > 0.0 ? std::copysign(m, x) : 0.0;
  }
  return u;
}

inline double reg_value(const Regularizer& reg, const Image& u) {
  if (reg.kind == RegKind::TV_ISO) return reg.lambda * tv_value(u);
  double s = 0.0;
  for (double x : u.data()) s += std::abs(x);
  return reg.lambda * s;
}

/// Closed-form prox of h(Wu) = (mu/2)||Wu||^2 (W the periodic gradient) in
/// the metric induced by a spectral operator M, or the Euclidean metric when
/// absent: solves (M + alpha*mu*W^T W) u = M a in frequency space.
inline Image quadratic_gradient_prox(const Image& a, double alpha, double mu,
                                     const std::optional<PrecondSpectrum>& metric = std::nullopt) {
  detail::require(alpha > 0.0 && mu >= 0.0, "quadratic_gradient_prox: bad parameters");
  if (metric) detail::require(metric->matches(a), "quadratic_gradient_prox: shape mismatch");
  const std::size_t h = a.height(), w = a.width();
  constexpr double pi = 3.14159265358979323846;
  return detail::spectral_apply(a, [&](std::size_t k) {
    const double si = std::sin(pi * double(k / w) / double(h));
    const double sj = std::sin(pi * double(k % w) / double(w));
    const double laplace = 4.0 * (si * si + sj * sj);
    const double m = metric ? (*metric)[k] : 1.0;
    return Complex(m / (m + alpha * mu * laplace), 0.0);
  });
}

}  // namespace pnpd
