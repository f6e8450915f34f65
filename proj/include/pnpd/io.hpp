#pragma once

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "grid.hpp"

namespace pnpd {

/// Malformed or truncated file content.
class format_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Bytes = std::vector<std::uint8_t>;

// ---------------------------------------------------------------------------
// locale-independent number parsing

inline double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    throw format_error("not a number: '" + std::string(s) + "'");
  return v;
}

inline std::uint64_t parse_uint(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    throw format_error("not a non-negative integer: '" + std::string(s) + "'");
  return v;
}

/// Shortest decimal form that round-trips exactly (at most 17 significant digits).
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// PGM (P2 ASCII / P5 binary)

namespace detail {

class PgmCursor {
 public:
  explicit PgmCursor(const Bytes& b) : b_(b) {}

  // Next whitespace-delimited header token; '#' starts a comment to end of line.
  std::string token() {
    skip_space_and_comments();
    std::string t;
    while (pos_ < b_.size() && !is_space(b_[pos_]) && b_[pos_] != '#') t.push_back(char(b_[pos_++]));
    if (t.empty()) throw format_error("pgm: truncated header");
    return t;
  }

  // Binary raster starts after exactly one whitespace byte following maxval.
  void consume_single_space() {
    if (pos_ >= b_.size() || !is_space(b_[pos_])) throw format_error("pgm: malformed header");
    ++pos_;
  }

  std::size_t pos() const { return pos_; }

 private:
  static bool is_space(std::uint8_t c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
  }
  void skip_space_and_comments() {
    while (pos_ < b_.size()) {
      if (is_space(b_[pos_])) {
        ++pos_;
      } else if (b_[pos_] == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const Bytes& b_;
  std::size_t pos_ = 0;
};

inline std::uint64_t pgm_header_uint(PgmCursor& cur, const char* what) {
  try {
    return parse_uint(cur.token());
  } catch (const format_error&) {
    throw format_error(std::string("pgm: bad ") + what);
  }
}

}  // namespace detail

/// Parses a P2 or P5 graymap; samples map to value/maxval.
inline Image read_pgm(const Bytes& bytes) {
  detail::PgmCursor cur(bytes);
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
    throw format_error("pgm: magic must be P2 or P5");
  const bool binary = bytes[1] == '5';
  cur.token();  // magic
  const auto width = detail::pgm_header_uint(cur, "width");
  const auto height = detail::pgm_header_uint(cur, "height");
  const auto maxval = detail::pgm_header_uint(cur, "maxval");
  if (width == 0 || height == 0) throw format_error("pgm: zero dimension");
  if (maxval == 0 || maxval > 65535) throw format_error("pgm: maxval out of range");

  Image img(height, width);
  const auto n = img.size();
  const double denom = double(maxval);
  if (binary) {
    cur.consume_single_space();
    const std::size_t bps = maxval < 256 ? 1 : 2;
    std::size_t pos = cur.pos();
    if (bytes.size() - pos < n * bps) throw format_error("pgm: truncated payload");
    for (std::size_t k = 0; k < n; ++k) {
      std::uint32_t s = bytes[pos++];
      if (bps == 2) s = (s << 8) | bytes[pos++];
      if (s > maxval) throw format_error("pgm: sample exceeds maxval");
      img[k] = double(s) / denom;
    }
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      std::uint64_t s = 0;
      try {
        s = parse_uint(cur.token());
      } catch (const format_error&) {
        throw format_error("pgm: truncated payload");
      }
      if (s > maxval) throw format_error("pgm: sample exceeds maxval");
      img[k] = double(s) / denom;
    }
  }
  return img;
}

enum class PgmEncoding { Binary, Ascii };

/// Clamps to [0,1], quantizes by round(v*maxval); maxval must be 255 or 65535.
inline Bytes write_pgm(const Image& img, unsigned maxval = 255,
                       PgmEncoding enc = PgmEncoding::Binary) {
  if (maxval != 255 && maxval != 65535) throw std::invalid_argument("write_pgm: maxval must be 255 or 65535");
  std::ostringstream head;
  head << (enc == PgmEncoding::Binary ? "P5" : "P2") << '\n'
       << img.width() << ' ' << img.height() << '\n'
       << maxval << '\n';
  const std::string h = head.str();
  Bytes out(h.begin(), h.end());
  auto quantize = [maxval](double v) {
    return static_cast<std::uint32_t>(std::lround(std::clamp(v, 0.0, 1.0) * maxval));
  };
  if (enc == PgmEncoding::Binary) {
    for (double v : img.data()) {
      const auto s = quantize(v);
      if (maxval > 255) out.push_back(std::uint8_t(s >> 8));
      out.push_back(std::uint8_t(s & 0xff));
    }
  } else {
    for (std::size_t i = 0; i < img.height(); ++i) {
      std::string line;
      for (std::size_t j = 0; j < img.width(); ++j) {
        if (j) line.push_back(' ');
        line += std::to_string(quantize(img(i, j)));
      }
      line.push_back('\n');
      out.insert(out.end(), line.begin(), line.end());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// raw little-endian float64 dump: u64 height, u64 width, row-major data

namespace detail {

template <class T>
void put_le(Bytes& out, T v) {
  auto u = std::bit_cast<std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>>(v);
  for (std::size_t b = 0; b < sizeof(T); ++b) out.push_back(std::uint8_t(u >> (8 * b)));
}

template <class T>
T get_le(const Bytes& in, std::size_t pos) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U u = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) u |= U(in[pos + b]) << (8 * b);
  return std::bit_cast<T>(u);
}

}  // namespace detail

inline Bytes write_raw(const Image& img) {
  Bytes out;
  out.reserve(16 + 8 * img.size());
  detail::put_le<std::uint64_t>(out, img.height());
  detail::put_le<std::uint64_t>(out, img.width());
  for (double v : img.data()) detail::put_le<double>(out, v);
  return out;
}

inline Image read_raw(const Bytes& in) {
  if (in.size() < 16) throw format_error("raw: truncated header");
  const auto h = detail::get_le<std::uint64_t>(in, 0);
  const auto w = detail::get_le<std::uint64_t>(in, 8);
  if (h == 0 || w == 0) throw format_error("raw: zero dimension");
  if (h > (std::uint64_t(1) << 28) / w) throw format_error("raw: implausible dimensions");
  if (in.size() != 16 + 8 * h * w) throw format_error("raw: payload length mismatch");
  Image img(h, w);
  for (std::size_t k = 0; k < img.size(); ++k) img[k] = detail::get_le<double>(in, 16 + 8 * k);
  return img;
}

// ---------------------------------------------------------------------------
// trace CSV

inline constexpr std::string_view kTraceHeader = "iteration,elapsed_s,objective,rre,ssim";

inline std::string trace_csv_row(const MetricsRow& r) {
  std::string s = std::to_string(r.iteration);
  for (double v : {r.elapsed_s, r.objective, r.rre, r.ssim}) {
    // 17 significant digits in scientific form: round-trips bit-exactly.
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, 16);
    if (ec != std::errc{}) throw std::runtime_error("trace csv: format failure");
    s.push_back(',');
    s.append(buf, ptr);
  }
  return s;
}

/// Header plus one LF-terminated row per record.
inline void write_trace_csv(const Trace& trace, std::ostream& sink) {
  sink << kTraceHeader << '\n';
  for (const auto& r : trace) sink << trace_csv_row(r) << '\n';
  if (!sink) throw std::runtime_error("write_trace_csv: sink write failure");
}

inline std::string write_trace_csv(const Trace& trace) {
  std::ostringstream os;
  write_trace_csv(trace, os);
  return os.str();
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto k = s.find(sep, start);
    parts.push_back(s.substr(start, k == std::string_view::npos ? std::string_view::npos : k - start));
    if (k == std::string_view::npos) break;
    start = k + 1;
  }
  return parts;
}

inline Trace read_trace_csv(std::string_view text) {
  Trace out;
  auto lines = split(text, '\n');
  if (lines.empty() || lines.front() != kTraceHeader) throw format_error("trace csv: bad header");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto f = split(lines[i], ',');
    if (f.size() != 5) throw format_error("trace csv: expected 5 fields");
    out.push_back({parse_uint(f[0]), parse_double(f[1]), parse_double(f[2]), parse_double(f[3]),
                   parse_double(f[4])});
  }
  return out;
}

// ---------------------------------------------------------------------------
// file helpers

inline Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, const Bytes& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) throw std::runtime_error("cannot write " + path);
}

inline void write_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  out.write(text.data(), std::streamsize(text.size()));
  if (!out) throw std::runtime_error("cannot write " + path);
}

}  // namespace pnpd
