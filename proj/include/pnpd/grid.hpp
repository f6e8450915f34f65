#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pnpd {

/// Raised when an iteration produces non-finite values or a numerical
/// safeguard (imaginary residue, backtracking guard) trips.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace detail

/// Real-valued 2-D grid, row-major. Holds primal iterates, data and
/// ground truth alike; values are not clamped.
class Image {
 public:
  Image() = default;

  Image(std::size_t height, std::size_t width, double fill = 0.0)
      : height_(height), width_(width), data_(height * width, fill) {
    detail::require(height > 0 && width > 0, "Image: dimensions must be positive");
  }

  Image(std::size_t height, std::size_t width, std::vector<double> data)
      : height_(height), width_(width), data_(std::move(data)) {
    detail::require(height > 0 && width > 0, "Image: dimensions must be positive");
    detail::require(data_.size() == height * width, "Image: data length != height*width");
  }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * width_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * width_ + j]; }
  double& operator[](std::size_t k) noexcept { return data_[k]; }
  double operator[](std::size_t k) const noexcept { return data_[k]; }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  bool same_shape(const Image& o) const noexcept {
    return height_ == o.height_ && width_ == o.width_;
  }

  bool operator==(const Image&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

/// Two-channel per-pixel field in the range of the discrete gradient:
/// gx holds horizontal differences, gy vertical ones.
class DualField {
 public:
  DualField() = default;

  DualField(std::size_t height, std::size_t width)
      : height_(height), width_(width), gx_(height * width, 0.0), gy_(height * width, 0.0) {
    detail::require(height > 0 && width > 0, "DualField: dimensions must be positive");
  }

  DualField(std::size_t height, std::size_t width, std::vector<double> gx, std::vector<double> gy)
      : height_(height), width_(width), gx_(std::move(gx)), gy_(std::move(gy)) {
    detail::require(height > 0 && width > 0, "DualField: dimensions must be positive");
    detail::require(gx_.size() == height * width && gy_.size() == height * width,
                    "DualField: channel length != height*width");
  }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return gx_.size(); }

  std::vector<double>& gx() noexcept { return gx_; }
  std::vector<double>& gy() noexcept { return gy_; }
  const std::vector<double>& gx() const noexcept { return gx_; }
  const std::vector<double>& gy() const noexcept { return gy_; }

  bool same_shape(const DualField& o) const noexcept {
    return height_ == o.height_ && width_ == o.width_;
  }

  bool operator==(const DualField&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> gx_;
  std::vector<double> gy_;
};

/// One line of a solver trace.
struct MetricsRow {
  std::size_t iteration = 0;
  double elapsed_s = 0.0;
  double objective = 0.0;
  double rre = 0.0;
  double ssim = 0.0;

  bool operator==(const MetricsRow&) const = default;
};

using Trace = std::vector<MetricsRow>;

// ---------------------------------------------------------------------------
// algebra

inline Image axpy(double alpha, const Image& x, const Image& y) {
  detail::require(x.same_shape(y), "axpy: shape mismatch");
  Image out = y;
  auto& o = out.data();
  const auto& xd = x.data();
  for (std::size_t k = 0; k < o.size(); ++k) o[k] += alpha * xd[k];
  return out;
}

inline Image scale(double alpha, const Image& x) {
  Image out = x;
  for (auto& v : out.data()) v *= alpha;
  return out;
}

inline Image operator+(const Image& x, const Image& y) { return axpy(1.0, x, y); }
inline Image operator-(const Image& x, const Image& y) { return axpy(-1.0, y, x); }

inline double dot(const Image& x, const Image& y) {
  detail::require(x.same_shape(y), "dot: shape mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * y[k];
  return s;
}

inline double dot(const DualField& a, const DualField& b) {
  detail::require(a.same_shape(b), "dot: shape mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a.gx()[k] * b.gx()[k] + a.gy()[k] * b.gy()[k];
  return s;
}

/// Euclidean norm of the row-major vectorization.
inline double norm2(const std::vector<double>& v) {
  double ssq = 0.0;
  for (double x : v) ssq += x * x;
  return std::sqrt(ssq);
}

inline double norm2(const Image& x) { return norm2(x.data()); }

inline double norm2(const DualField& v) {
  return std::hypot(norm2(v.gx()), norm2(v.gy()));
}

inline double max_abs(const Image& x) {
  double m = 0.0;
  for (double v : x.data()) m = std::max(m, std::abs(v));
  return m;
}

inline bool all_finite(const Image& x) {
  return std::all_of(x.data().begin(), x.data().end(), [](double v) { return std::isfinite(v); });
}

inline Image clamp01(const Image& x) {
  Image out = x;
  for (auto& v : out.data()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

// DualField algebra used by the dual loops.

inline DualField axpy(double alpha, const DualField& x, const DualField& y) {
  detail::require(x.same_shape(y), "axpy: shape mismatch");
  DualField out = y;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out.gx()[k] += alpha * x.gx()[k];
    out.gy()[k] += alpha * x.gy()[k];
  }
  return out;
}

}  // namespace pnpd
