#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <clocale>
#include <cmath>
#include <limits>

#include "pnpd/io.hpp"
#include "test_util.hpp"

using namespace pnpd;

namespace {
Bytes bytes_of(std::string_view s) { return Bytes(s.begin(), s.end()); }
}  // namespace

TEST(Pgm, ReadsBinary8Bit) {
  Bytes f = bytes_of("P5\n2 2\n255\n");
  for (int v : {0, 128, 255, 64}) f.push_back(std::uint8_t(v));
  const Image img = read_pgm(f);
  ASSERT_EQ(img.height(), 2u);
  EXPECT_EQ(img(0, 0), 0.0);
  EXPECT_EQ(img(0, 1), 128.0 / 255.0);
  EXPECT_EQ(img(1, 0), 1.0);
  EXPECT_EQ(img(1, 1), 64.0 / 255.0);
}

TEST(Pgm, CanonicalBinaryRoundTripIsByteIdentical) {
  Bytes f = bytes_of("P5\n3 2\n255\n");
  for (int v : {0, 1, 2, 253, 254, 255}) f.push_back(std::uint8_t(v));
  EXPECT_EQ(write_pgm(read_pgm(f)), f);

  Bytes g = bytes_of("P5\n2 1\n65535\n");
  for (int v : {0x12, 0x34, 0xff, 0xfe}) g.push_back(std::uint8_t(v));
  EXPECT_EQ(write_pgm(read_pgm(g), 65535), g);
}

TEST(Pgm, AsciiAndBinaryAgree) {
  std::mt19937_64 rng(5);
  Image img = test_util::random_image(5, 7, rng, 0.0, 1.0);
  for (unsigned maxval : {255u, 65535u}) {
    const Image a = read_pgm(write_pgm(img, maxval, PgmEncoding::Ascii));
    const Image b = read_pgm(write_pgm(img, maxval, PgmEncoding::Binary));
    EXPECT_EQ(a, b);
  }
}

TEST(Pgm, AsciiWithCommentsParses) {
  const Image img = read_pgm(bytes_of("P2\n# a comment\n2 1 # trailing\n10\n5 10\n"));
  EXPECT_EQ(img(0, 0), 0.5);
  EXPECT_EQ(img(0, 1), 1.0);
}

TEST(Pgm, QuantizedImagesRoundTripLosslessly) {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> d(0, 65535);
  Image img(4, 9);
  for (auto& v : img.data()) v = d(rng) / 65535.0;
  EXPECT_EQ(read_pgm(write_pgm(img, 65535)), img);
}

TEST(Pgm, ClampsAndRoundsOnWrite) {
  const Image img(1, 3, std::vector<double>{-1.0, 0.5, 7.0});
  const Image back = read_pgm(write_pgm(img));
  EXPECT_EQ(back(0, 0), 0.0);
  EXPECT_EQ(back(0, 1), 128.0 / 255.0);
  EXPECT_EQ(back(0, 2), 1.0);
}

TEST(Pgm, RejectsMalformedInput) {
  EXPECT_THROW(read_pgm(bytes_of("P6\n1 1\n255\n\x01")), format_error);
  EXPECT_THROW(read_pgm(bytes_of("P5\n2 x\n255\n")), format_error);
  EXPECT_THROW(read_pgm(bytes_of("P5\n2 2\n255\n\x01\x02")), format_error);
  EXPECT_THROW(read_pgm(bytes_of("P2\n2 2\n255\n1 2 3")), format_error);
  EXPECT_THROW(read_pgm(bytes_of("P2\n1 1\n10\n11\n")), format_error);
  EXPECT_THROW(read_pgm(bytes_of("P5\n1 1\n70000\n\x01\x02")), format_error);
  EXPECT_THROW(write_pgm(Image(1, 1), 100), std::invalid_argument);
}

TEST(Raw, RoundTripIsBitExact) {
  std::mt19937_64 rng(7);
  Image img = test_util::random_image(3, 5, rng);
  img[0] = std::numeric_limits<double>::denorm_min();
  img[1] = -0.0;
  const Bytes b = write_raw(img);
  EXPECT_EQ(b.size(), 16u + 8u * 15u);
  EXPECT_EQ(b[0], 3u);  // little-endian height
  EXPECT_EQ(b[8], 5u);
  const Image back = read_raw(b);
  for (std::size_t k = 0; k < img.size(); ++k)
    EXPECT_EQ(std::bit_cast<std::uint64_t>(back[k]), std::bit_cast<std::uint64_t>(img[k]));
}

TEST(Raw, RejectsTruncated) {
  Bytes b = write_raw(Image(2, 2, 1.0));
  b.pop_back();
  EXPECT_THROW(read_raw(b), format_error);
  EXPECT_THROW(read_raw(Bytes(8, 0)), format_error);
}

TEST(TraceCsv, EmptyTraceIsHeaderOnly) {
  EXPECT_EQ(write_trace_csv(Trace{}), "iteration,elapsed_s,objective,rre,ssim\n");
}

TEST(TraceCsv, SingleRowRoundTrips) {
  const Trace t{{0, 0.0, 1.5, 0.1, 0.9}};
  const std::string s = write_trace_csv(t);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 2);
  EXPECT_EQ(s.find('\r'), std::string::npos);
  EXPECT_EQ(read_trace_csv(s), t);
}

TEST(TraceCsv, RandomRowsRoundTrip) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  Trace t;
  for (std::size_t i = 0; i < 100; ++i) t.push_back({i + 1, std::abs(u(rng)), u(rng), std::abs(u(rng)), u(rng) / 1e3});
  const Trace back = read_trace_csv(write_trace_csv(t));
  ASSERT_EQ(back.size(), t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(back[i].iteration, t[i].iteration);
    EXPECT_NEAR(back[i].objective, t[i].objective, 1e-12 * std::abs(t[i].objective));
    EXPECT_NEAR(back[i].elapsed_s, t[i].elapsed_s, 1e-12 * std::abs(t[i].elapsed_s));
    EXPECT_NEAR(back[i].rre, t[i].rre, 1e-12 * std::abs(t[i].rre));
    EXPECT_NEAR(back[i].ssim, t[i].ssim, 1e-12 * std::abs(t[i].ssim));
  }
}

TEST(TraceCsv, AtLeastFifteenSignificantDigits) {
  const std::string row = trace_csv_row({1, 1.0 / 3.0, 2.0 / 3.0, 0.1, 0.2});
  const auto f = split(row, ',');
  // mantissa digits of "3.3333333333333331e-01"
  const auto mant = f[1].substr(0, f[1].find('e'));
  EXPECT_GE(std::count_if(mant.begin(), mant.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }), 15);
}

TEST(Numbers, ParsingIgnoresLocale) {
  const char* old = std::setlocale(LC_NUMERIC, nullptr);
  std::string saved = old ? old : "C";
  std::setlocale(LC_NUMERIC, "de_DE.UTF-8");  // may be unavailable; harmless then
  EXPECT_EQ(parse_double("0.25"), 0.25);
  EXPECT_EQ(parse_double(" +1e-3 "), 1e-3);
  EXPECT_EQ(format_double(0.5), "0.5");
  std::setlocale(LC_NUMERIC, saved.c_str());
  EXPECT_THROW(parse_double("0,25"), format_error);
  EXPECT_THROW(parse_uint("-3"), format_error);
  EXPECT_EQ(parse_uint("42"), 42u);
}
