#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "grid.hpp"

namespace pnpd::fft {

using Complex = std::complex<double>;
using ComplexGrid = std::vector<Complex>;

namespace detail {

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const noexcept { fftw_destroy_plan(p); }
};
using PlanHandle = std::unique_ptr<fftw_plan_s, PlanDeleter>;

// FFTW planning is not thread-safe; execution of an existing plan on fresh
// buffers is. Plans are created once per (h, w, direction) under a lock and
// then shared. FFTW_ESTIMATE keeps the chosen algorithm, and therefore the
// rounding, fixed for a given shape.
inline fftw_plan plan_for(std::size_t h, std::size_t w, int sign) {
  static std::mutex mu;
  static std::map<std::tuple<std::size_t, std::size_t, int>, PlanHandle> plans;
  std::lock_guard lock(mu);
  auto key = std::make_tuple(h, w, sign);
  auto it = plans.find(key);
  if (it == plans.end()) {
    ComplexGrid scratch(h * w);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan p = fftw_plan_dft_2d(int(h), int(w), buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!p) throw numerical_error("fftw: plan creation failed");
    it = plans.emplace(key, PlanHandle(p)).first;
  }
  return it->second.get();
}

inline void execute(ComplexGrid& data, std::size_t h, std::size_t w, int sign) {
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan_for(h, w, sign), buf, buf);
}

}  // namespace detail

/// Unnormalized forward 2-D DFT, in place.
inline void forward(ComplexGrid& data, std::size_t h, std::size_t w) {
  pnpd::detail::require(data.size() == h * w, "fft::forward: size mismatch");
  detail::execute(data, h, w, FFTW_FORWARD);
}

/// Inverse 2-D DFT including the 1/(hw) factor, in place.
inline void inverse(ComplexGrid& data, std::size_t h, std::size_t w) {
  pnpd::detail::require(data.size() == h * w, "fft::inverse: size mismatch");
  detail::execute(data, h, w, FFTW_BACKWARD);
  const double s = 1.0 / double(h * w);
  for (auto& c : data) c *= s;
}

inline ComplexGrid forward(const Image& u) {
  ComplexGrid c(u.data().begin(), u.data().end());
  forward(c, u.height(), u.width());
  return c;
}

}  // namespace pnpd::fft
