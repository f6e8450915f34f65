#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "fft.hpp"
#include "grid.hpp"
#include "io.hpp"

namespace pnpd {

using Complex = std::complex<double>;

/// Eigenvalues of a BCCB (periodic convolution) operator: the unnormalized
/// 2-D DFT of its circularly shifted kernel. The adjoint uses conj(values).
class Spectrum {
 public:
  Spectrum() = default;
  Spectrum(std::size_t height, std::size_t width, std::vector<Complex> values)
      : height_(height), width_(width), values_(std::move(values)) {
    detail::require(height > 0 && width > 0, "Spectrum: dimensions must be positive");
    detail::require(values_.size() == height * width, "Spectrum: values length != height*width");
    for (const auto& v : values_)
      detail::require(std::isfinite(v.real()) && std::isfinite(v.imag()), "Spectrum: non-finite value");
  }

  static Spectrum identity(std::size_t height, std::size_t width) {
    return Spectrum(height, width, std::vector<Complex>(height * width, Complex(1.0, 0.0)));
  }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<Complex>& values() const noexcept { return values_; }
  const Complex& operator[](std::size_t k) const noexcept { return values_[k]; }

  bool matches(const Image& u) const noexcept { return u.height() == height_ && u.width() == width_; }

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<Complex> values_;
};

/// p(x) = sum_i c_i x^i with c_i >= 0 and c_0 > 0.
class Polynomial {
 public:
  Polynomial() : coeffs_{1.0} {}
  explicit Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    detail::require(!coeffs_.empty(), "Polynomial: needs at least c0");
    for (double c : coeffs_)
      detail::require(std::isfinite(c) && c >= 0.0, "Polynomial: coefficients must be finite and >= 0");
    detail::require(coeffs_[0] > 0.0, "Polynomial: c0 must be > 0");
  }

  /// p(x) = x + nu, i.e. P = A^T A + nu I.
  static Polynomial shifted(double nu) { return Polynomial({nu, 1.0}); }
  /// p(x) = (1 - nu) x + nu, the convex blend between A^T A and I.
  static Polynomial blended(double nu) { return Polynomial({nu, 1.0 - nu}); }

  const std::vector<double>& coeffs() const noexcept { return coeffs_; }
  double coeff(std::size_t i) const noexcept { return i < coeffs_.size() ? coeffs_[i] : 0.0; }

  /// True when every coefficient past c0 is zero (P is a multiple of I).
  bool is_constant() const noexcept {
    return std::all_of(coeffs_.begin() + 1, coeffs_.end(), [](double c) { return c == 0.0; });
  }

  double operator()(double x) const noexcept {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

 private:
  std::vector<double> coeffs_;
};

/// Real eigenvalues p(|a_k|^2) of P = p(A^T A) (equivalently S = p(A A^T)).
class PrecondSpectrum {
 public:
  PrecondSpectrum() = default;
  PrecondSpectrum(std::size_t height, std::size_t width, std::vector<double> values, bool scalar)
      : height_(height), width_(width), values_(std::move(values)), scalar_(scalar) {
    detail::require(values_.size() == height * width, "PrecondSpectrum: values length != height*width");
    for (double v : values_)
      detail::require(std::isfinite(v) && v > 0.0, "PrecondSpectrum: values must be finite and > 0");
  }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  const std::vector<double>& values() const noexcept { return values_; }
  double operator[](std::size_t k) const noexcept { return values_[k]; }
  /// All values equal (constant polynomial): applied as a scalar, no DFT.
  bool is_scalar() const noexcept { return scalar_; }

  bool matches(const Image& u) const noexcept { return u.height() == height_ && u.width() == width_; }

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> values_;
  bool scalar_ = false;
};

// ---------------------------------------------------------------------------

/// Normalizes the kernel to unit sum, embeds it in a grid_h x grid_w canvas
/// with its center pixel (ph/2, pw/2) moved to the origin, and transforms.
inline Spectrum psf_to_spectrum(const Image& psf, std::size_t grid_h, std::size_t grid_w) {
  detail::require(psf.height() <= grid_h && psf.width() <= grid_w, "psf_to_spectrum: psf larger than grid");
  double sum = 0.0;
  for (double v : psf.data()) sum += v;
  detail::require(std::isfinite(sum) && sum > 0.0, "psf_to_spectrum: psf must sum to a positive value");

  const std::size_t ci = psf.height() / 2;
  const std::size_t cj = psf.width() / 2;
  fft::ComplexGrid canvas(grid_h * grid_w);
  for (std::size_t i = 0; i < psf.height(); ++i) {
    const std::size_t ti = (i + grid_h - ci) % grid_h;
    for (std::size_t j = 0; j < psf.width(); ++j) {
      const std::size_t tj = (j + grid_w - cj) % grid_w;
      canvas[ti * grid_w + tj] += psf(i, j) / sum;
    }
  }
  fft::forward(canvas, grid_h, grid_w);
  return Spectrum(grid_h, grid_w, std::move(canvas));
}

/// Spectrum of the inverse operator (elementwise reciprocal).
inline Spectrum reciprocal(const Spectrum& s) {
  std::vector<Complex> v(s.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    detail::require(std::abs(s[k]) > 0.0, "reciprocal: singular spectrum");
    v[k] = 1.0 / s[k];
  }
  return Spectrum(s.height(), s.width(), std::move(v));
}

namespace detail {

// IDFT(mult_k * DFT(u)); the imaginary residue must stay at roundoff level
// relative to the input, otherwise the multiplier was not Hermitian.
template <class Multiplier>
Image spectral_apply(const Image& u, Multiplier&& mult) {
  auto c = fft::forward(u);
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= mult(k);
  fft::inverse(c, u.height(), u.width());
  const double tol = 1e-9 * norm2(u);
  Image out(u.height(), u.width());
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (std::abs(c[k].imag()) > tol)
      throw numerical_error("spectral_apply: imaginary residue exceeds tolerance");
    out[k] = c[k].real();
  }
  return out;
}

}  // namespace detail

/// A u.
inline Image conv_apply(const Spectrum& spec, const Image& u) {
  detail::require(spec.matches(u), "conv_apply: shape mismatch");
  return detail::spectral_apply(u, [&](std::size_t k) { return spec[k]; });
}

/// A^T y.
inline Image conv_adjoint_apply(const Spectrum& spec, const Image& y) {
  detail::require(spec.matches(y), "conv_adjoint_apply: shape mismatch");
  return detail::spectral_apply(y, [&](std::size_t k) { return std::conj(spec[k]); });
}

/// A^T A u in a single transform pair.
inline Image normal_apply(const Spectrum& spec, const Image& u) {
  detail::require(spec.matches(u), "normal_apply: shape mismatch");
  return detail::spectral_apply(u, [&](std::size_t k) { return Complex(std::norm(spec[k]), 0.0); });
}

inline PrecondSpectrum build_precond(const Polynomial& p, const Spectrum& spec) {
  std::vector<double> v(spec.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = p(std::norm(spec[k]));
  return PrecondSpectrum(spec.height(), spec.width(), std::move(v), p.is_constant());
}

/// P^{-1} x (identically S^{-1} x: both share the eigenvalue grid).
inline Image precond_solve(const PrecondSpectrum& pspec, const Image& x) {
  detail::require(pspec.matches(x), "precond_solve: shape mismatch");
  if (pspec.is_scalar()) {
    const double c0 = pspec[0];
    return c0 == 1.0 ? x : scale(1.0 / c0, x);
  }
  return detail::spectral_apply(x, [&](std::size_t k) { return Complex(1.0 / pspec[k], 0.0); });
}

/// P x.
inline Image precond_apply(const PrecondSpectrum& pspec, const Image& x) {
  detail::require(pspec.matches(x), "precond_apply: shape mismatch");
  if (pspec.is_scalar()) {
    const double c0 = pspec[0];
    return c0 == 1.0 ? x : scale(c0, x);
  }
  return detail::spectral_apply(x, [&](std::size_t k) { return Complex(pspec[k], 0.0); });
}

/// <x, P x> evaluated by Parseval without leaving frequency space.
inline double precond_quadratic_form(const PrecondSpectrum& pspec, const Image& x) {
  detail::require(pspec.matches(x), "precond_quadratic_form: shape mismatch");
  if (pspec.is_scalar()) return pspec[0] * dot(x, x);
  const auto c = fft::forward(x);
  double s = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) s += pspec[k] * std::norm(c[k]);
  return s / double(c.size());
}

struct OperatorNorms {
  double normA = 0.0;        ///< max |a_k|
  double normPinv = 0.0;     ///< 1 / min p(|a_k|^2)
  double normPinvAtA = 0.0;  ///< max |a_k|^2 / p(|a_k|^2)
  double normSinv = 0.0;     ///< equals normPinv for square BCCB A
};

inline OperatorNorms operator_norms(const Spectrum& spec, const Polynomial& p) {
  OperatorNorms n;
  double pmin = std::numeric_limits<double>::infinity();
  for (const auto& a : spec.values()) {
    const double a2 = std::norm(a);
    const double pv = p(a2);
    n.normA = std::max(n.normA, std::abs(a));
    pmin = std::min(pmin, pv);
    n.normPinvAtA = std::max(n.normPinvAtA, a2 / pv);
  }
  n.normPinv = 1.0 / pmin;
  n.normSinv = n.normPinv;
  return n;
}

// ---------------------------------------------------------------------------
// discrete gradient, periodic forward differences

inline void grad_apply_into(const Image& u, DualField& out) {
  const std::size_t h = u.height(), w = u.width();
  auto& gx = out.gx();
  auto& gy = out.gy();
  for (std::size_t i = 0; i < h; ++i) {
    const std::size_t ip = (i + 1 == h) ? 0 : i + 1;
    for (std::size_t j = 0; j < w; ++j) {
      const std::size_t jp = (j + 1 == w) ? 0 : j + 1;
      const double c = u(i, j);
      gx[i * w + j] = u(i, jp) - c;
      gy[i * w + j] = u(ip, j) - c;
    }
  }
}

/// W u.
inline DualField grad_apply(const Image& u) {
  DualField out(u.height(), u.width());
  grad_apply_into(u, out);
  return out;
}

inline void grad_adjoint_into(const DualField& v, Image& out) {
  const std::size_t h = v.height(), w = v.width();
  const auto& gx = v.gx();
  const auto& gy = v.gy();
  for (std::size_t i = 0; i < h; ++i) {
    const std::size_t im = (i == 0) ? h - 1 : i - 1;
    for (std::size_t j = 0; j < w; ++j) {
      const std::size_t jm = (j == 0) ? w - 1 : j - 1;
      const std::size_t k = i * w + j;
      out[k] = (gx[i * w + jm] - gx[k]) + (gy[im * w + j] - gy[k]);
    }
  }
}

/// W^T v = -div v (backward differences, periodic).
inline Image grad_adjoint(const DualField& v) {
  Image out(v.height(), v.width());
  grad_adjoint_into(v, out);
  return out;
}

/// Upper bound on ||W||^2 for the periodic forward-difference gradient.
constexpr double grad_norm_sq_bound() noexcept { return 8.0; }

/// Power iteration on W^T W from a fixed pseudo-random start.
inline double grad_norm_sq_estimate(std::size_t h, std::size_t w, std::size_t iters) {
  detail::require(iters >= 1, "grad_norm_sq_estimate: iters must be >= 1");
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Image x(h, w);
  for (auto& v : x.data()) v = dist(rng);
  double rayleigh = 0.0;
  for (std::size_t it = 0; it < iters; ++it) {
    const double nx = norm2(x);
    if (nx == 0.0) return 0.0;
    x = scale(1.0 / nx, x);
    const DualField wx = grad_apply(x);
    rayleigh = dot(wx, wx);
    x = grad_adjoint(wx);
  }
  return rayleigh;
}

// ---------------------------------------------------------------------------
// spectrum serialization: a raw dump of a (2h) x w grid, real plane rows
// first, then the imaginary plane

inline Bytes write_spectrum_raw(const Spectrum& s) {
  Image planes(2 * s.height(), s.width());
  const std::size_t n = s.size();
  for (std::size_t k = 0; k < n; ++k) {
    planes[k] = s[k].real();
    planes[n + k] = s[k].imag();
  }
  return write_raw(planes);
}

inline Spectrum read_spectrum_raw(const Bytes& bytes) {
  const Image planes = read_raw(bytes);
  if (planes.height() % 2 != 0) throw format_error("spectrum raw: odd plane height");
  const std::size_t h = planes.height() / 2, w = planes.width(), n = h * w;
  std::vector<Complex> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = Complex(planes[k], planes[n + k]);
  return Spectrum(h, w, std::move(v));
}

}  // namespace pnpd
