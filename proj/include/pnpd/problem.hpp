#pragma once

#include <optional>

#include "grid.hpp"
#include "regularizers.hpp"
#include "spectral.hpp"

namespace pnpd {

/// min_u 1/2 ||A u - b_delta||^2 + h(W u), with A periodic convolution.
struct Problem {
  Spectrum spec;
  Image b_delta;
  Regularizer reg;
  std::optional<Image> x_true;

  Problem() = default;
  Problem(Spectrum s, Image b, Regularizer r, std::optional<Image> truth = std::nullopt)
      : spec(std::move(s)), b_delta(std::move(b)), reg(r), x_true(std::move(truth)) {
    detail::require(spec.matches(b_delta), "Problem: spectrum and data shapes differ");
    if (x_true) detail::require(x_true->same_shape(b_delta), "Problem: ground truth shape differs");
  }
};

inline Image residual(const Problem& pb, const Image& u) {
  return conv_apply(pb.spec, u) - pb.b_delta;
}

/// f(u) = 1/2 ||A u - b_delta||^2.
inline double fidelity(const Problem& pb, const Image& u) {
  const Image r = residual(pb, u);
  return 0.5 * dot(r, r);
}

/// A^T (A u - b_delta).
inline Image grad_f(const Problem& pb, const Image& u) {
  detail::require(pb.spec.matches(u), "grad_f: shape mismatch");
  return conv_adjoint_apply(pb.spec, residual(pb, u));
}

}  // namespace pnpd
