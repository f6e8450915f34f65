#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "grid.hpp"
#include "io.hpp"

namespace pnpd {

enum class PsfKind { GAUSSIAN, MOTION };

inline std::string_view to_string(PsfKind k) { return k == PsfKind::GAUSSIAN ? "gaussian" : "motion"; }

struct PsfSpec {
  PsfKind kind = PsfKind::GAUSSIAN;
  double sigma = 2.0;        ///< GAUSSIAN, pixels
  std::size_t length = 9;    ///< MOTION, pixels
  double angle_deg = 45.0;   ///< MOTION, counter-clockwise from the row axis
  std::size_t support = 21;  ///< odd side of the kernel array
};

struct NoiseSpec {
  double level = 0.01;
  std::uint64_t seed = 0;
};

namespace detail {

inline void normalize_sum(Image& k) {
  double s = 0.0;
  for (double x : k.data()) s += x;
  require(s > 0.0, "psf: kernel sums to zero");
  for (auto& x : k.data()) x /= s;
}

}  // namespace detail

/*
 * GAUSSIAN samples exp(-(i^2 + j^2)/(2 sigma^2)) on the centered grid.
 * MOTION splats `length` unit-spaced points t_k = k - (length-1)/2 along the
 * direction (cos a, sin a) bilinearly onto pixels, so each point carries
 * unit mass split by linear coverage. Both are normalized to sum 1.
 */
inline Image gen_psf(const PsfSpec& s) {
  detail::require(s.support % 2 == 1, "gen_psf: support must be odd");
  const std::size_t n = s.support;
  const double c = double(n / 2);
  Image k(n, n);
  if (s.kind == PsfKind::GAUSSIAN) {
    detail::require(s.sigma > 0.0, "gen_psf: sigma must be > 0");
    const double inv = 1.0 / (2.0 * s.sigma * s.sigma);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double di = double(i) - c, dj = double(j) - c;
        k(i, j) = std::exp(-(di * di + dj * dj) * inv);
      }
  } else {
    detail::require(s.length >= 1, "gen_psf: motion length must be >= 1");
    constexpr double pi = 3.14159265358979323846;
    const double a = s.angle_deg * pi / 180.0;
    // image rows grow downward, so a positive angle moves up
    const double dx = std::cos(a), dy = -std::sin(a);
    for (std::size_t p = 0; p < s.length; ++p) {
      const double t = double(p) - double(s.length - 1) / 2.0;
      const double x = c + t * dx, y = c + t * dy;
      const double x0 = std::floor(x), y0 = std::floor(y);
      const double fx = x - x0, fy = y - y0;
      const double wts[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
      const double xs[4] = {x0, x0 + 1, x0, x0 + 1};
      const double ys[4] = {y0, y0, y0 + 1, y0 + 1};
      for (int q = 0; q < 4; ++q) {
        if (wts[q] <= 1e-15) continue;
        detail::require(xs[q] >= 0 && ys[q] >= 0 && xs[q] < double(n) && ys[q] < double(n),
                        "gen_psf: motion segment does not fit the support");
        k(std::size_t(ys[q]), std::size_t(xs[q])) += wts[q];
      }
    }
  }
  detail::normalize_sum(k);
  return k;
}

struct NoisyData {
  Image b_delta;
  Image eta;
  double delta = 0.0;
};

/// b + eta with eta i.i.d. normal from mt19937_64(seed), rescaled so that
/// ||eta|| = level ||b|| exactly.
inline NoisyData add_noise(const Image& b, const NoiseSpec& spec) {
  detail::require(spec.level > 0.0 && spec.level < 1.0, "add_noise: level must lie in (0, 1)");
  const double nb = norm2(b);
  detail::require(nb > 0.0, "add_noise: b is zero");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Image eta(b.height(), b.width());
  for (auto& x : eta.data()) x = normal(rng);
  const double delta = spec.level * nb;
  const double s = delta / norm2(eta);
  for (auto& x : eta.data()) x *= s;
  return {b + eta, std::move(eta), delta};
}

/// Noise already drawn (e.g. loaded from disk).
inline Image apply_noise(const Image& b, const Image& eta) {
  detail::require(b.same_shape(eta), "apply_noise: shape mismatch");
  return b + eta;
}

/*
 * Piecewise-constant test image: zero background with nested rectangles
 * at 0.3, 0.7 and 1.0. Corners scale with n (n = 64 gives rows/cols
 * [8,56)x[6,58), [16,48)x[14,46), [24,40)x[24,36)).
 */
inline Image phantom(std::size_t n = 64) {
  detail::require(n >= 16, "phantom: size must be >= 16");
  Image img(n, n);
  auto fill = [&](double r0, double r1, double c0, double c1, double v) {
    const auto at = [&](double f) { return std::size_t(std::lround(f * double(n))); };
    for (std::size_t i = at(r0); i < at(r1); ++i)
      for (std::size_t j = at(c0); j < at(c1); ++j) img(i, j) = v;
  };
  fill(8 / 64.0, 56 / 64.0, 6 / 64.0, 58 / 64.0, 0.3);
  fill(16 / 64.0, 48 / 64.0, 14 / 64.0, 46 / 64.0, 0.7);
  fill(24 / 64.0, 40 / 64.0, 24 / 64.0, 36 / 64.0, 1.0);
  return img;
}

// ---------------------------------------------------------------------------
// textual specs: "gaussian:sigma=2:support=21", "motion:length=9:angle=45",
// "level=0.01,seed=7"

inline PsfSpec parse_psf_spec(std::string_view text) {
  auto parts = split(text, ':');
  PsfSpec s;
  if (parts[0] == "gaussian")
    s.kind = PsfKind::GAUSSIAN;
  else if (parts[0] == "motion")
    s.kind = PsfKind::MOTION;
  else
    throw format_error("psf: unknown kind '" + std::string(parts[0]) + "'");
  bool have_support = false;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string_view::npos) throw format_error("psf: expected key=value, got '" + std::string(parts[i]) + "'");
    const auto key = parts[i].substr(0, eq), val = parts[i].substr(eq + 1);
    if (key == "sigma" && s.kind == PsfKind::GAUSSIAN)
      s.sigma = parse_double(val);
    else if (key == "length" && s.kind == PsfKind::MOTION)
      s.length = parse_uint(val);
    else if (key == "angle" && s.kind == PsfKind::MOTION)
      s.angle_deg = parse_double(val);
    else if (key == "support") {
      s.support = parse_uint(val);
      have_support = true;
    } else
      throw format_error("psf: unknown key '" + std::string(key) + "'");
  }
  if (!have_support) {
    s.support = s.kind == PsfKind::GAUSSIAN ? 2 * std::size_t(std::ceil(5.0 * s.sigma)) + 1
                                            : 2 * ((s.length + 1) / 2) + 3;
  }
  return s;
}

inline std::string format_psf_spec(const PsfSpec& s) {
  if (s.kind == PsfKind::GAUSSIAN)
    return "gaussian:sigma=" + format_double(s.sigma) + ":support=" + std::to_string(s.support);
  return "motion:length=" + std::to_string(s.length) + ":angle=" + format_double(s.angle_deg) +
         ":support=" + std::to_string(s.support);
}

inline NoiseSpec parse_noise_spec(std::string_view text) {
  NoiseSpec n;
  bool have_level = false;
  for (auto part : split(text, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) throw format_error("noise: expected key=value, got '" + std::string(part) + "'");
    const auto key = part.substr(0, eq), val = part.substr(eq + 1);
    if (key == "level") {
      n.level = parse_double(val);
      have_level = true;
    } else if (key == "seed") {
      n.seed = parse_uint(val);
    } else {
      throw format_error("noise: unknown key '" + std::string(key) + "'");
    }
  }
  if (!have_level) throw format_error("noise: level is required");
  if (!(n.level > 0.0 && n.level < 1.0)) throw format_error("noise: level must lie in (0, 1)");
  return n;
}

}  // namespace pnpd
