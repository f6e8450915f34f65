#pragma once

#include <cstdint>
#include <random>

#include "pnpd/grid.hpp"

namespace pnpd::test_util {

inline Image random_image(std::size_t h, std::size_t w, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Image img(h, w);
  for (auto& v : img.data()) v = u(rng);
  return img;
}

inline DualField random_dual(std::size_t h, std::size_t w, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  DualField v(h, w);
  for (auto& x : v.gx()) x = n(rng);
  for (auto& x : v.gy()) x = n(rng);
  return v;
}

inline double rel_diff(const Image& a, const Image& ref) {
  const double d = norm2(a - ref), r = norm2(ref);
  return r > 0.0 ? d / r : d;
}

}  // namespace pnpd::test_util
