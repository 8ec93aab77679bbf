#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include <boost/multiprecision/cpp_int.hpp>

#include "veasyguide/detect.hpp"
#include "veasyguide/error.hpp"

namespace veasyguide {

/// Hu's seven invariant moments of a binary region and their log-scaled form
/// m_i = sign(h_i) * log10(max(|h_i|, 1e-30)).
struct HuSignature {
  std::array<double, 7> h{};
  std::array<double, 7> m{};
};

namespace detail {

using BigInt = boost::multiprecision::cpp_int;

inline BigInt to_big(__int128 v) {
  const bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
  BigInt r = static_cast<std::uint64_t>(u >> 64);
  r <<= 64;
  r += static_cast<std::uint64_t>(u);
  return neg ? BigInt(-r) : r;
}

inline long double ratio(const BigInt& num, long double den) { return num.convert_to<long double>() / den; }

}  // namespace detail

inline double log_scaled(double h) {
  const double sign = (h > 0) - (h < 0);
  return sign * std::log10(std::max(std::abs(h), 1e-30));
}

/// Hu invariants of the set pixels in `mask`.
///
/// Central moments are evaluated exactly: with N = m00 the quantities
/// I_pq = sum (N x - m10)^p (N y - m01)^q are integers equal to N^(p+q) mu_pq,
/// and every invariant is a homogeneous polynomial in them divided by a power
/// of N. Only the final division is rounded, so symmetric shapes yield exact
/// zeros and translated or 90-degree rotated rasters yield identical values.
inline HuSignature hu_signature(const BinaryMask& mask) {
  using detail::BigInt;
  std::int64_t n = 0, sx = 0, sy = 0;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.get(x, y)) continue;
      ++n;
      sx += x;
      sy += y;
    }
  }
  if (n == 0) throw DegenerateRegion("hu_signature: region has no set pixels");

  // Accumulate per row in 128-bit, flush to arbitrary precision.
  BigInt i20 = 0, i11 = 0, i02 = 0, i30 = 0, i21 = 0, i12 = 0, i03 = 0;
  for (int y = 0; y < mask.height; ++y) {
    __int128 r20 = 0, r11 = 0, r02 = 0, r30 = 0, r21 = 0, r12 = 0, r03 = 0;
    const __int128 v = static_cast<__int128>(n) * y - sy;
    bool any = false;
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.get(x, y)) continue;
      any = true;
      const __int128 u = static_cast<__int128>(n) * x - sx;
      r20 += u * u;
      r11 += u * v;
      r02 += v * v;
      r30 += u * u * u;
      r21 += u * u * v;
      r12 += u * v * v;
      r03 += v * v * v;
    }
    if (!any) continue;
    i20 += detail::to_big(r20);
    i11 += detail::to_big(r11);
    i02 += detail::to_big(r02);
    i30 += detail::to_big(r30);
    i21 += detail::to_big(r21);
    i12 += detail::to_big(r12);
    i03 += detail::to_big(r03);
  }

  const BigInt a = 3 * i21 - i03;  // 3 eta21 - eta03
  const BigInt b = i30 + i12;      // eta30 + eta12
  const BigInt c = i30 - 3 * i12;  // eta30 - 3 eta12
  const BigInt d = i21 + i03;      // eta21 + eta03
  const BigInt e = i20 - i02;
  const BigInt b2 = b * b, d2 = d * d;

  const long double nn = static_cast<long double>(n);
  HuSignature s;
  s.h[0] = static_cast<double>(detail::ratio(i20 + i02, std::pow(nn, 4)));
  s.h[1] = static_cast<double>(detail::ratio(e * e + 4 * i11 * i11, std::pow(nn, 8)));
  s.h[2] = static_cast<double>(detail::ratio(c * c + a * a, std::pow(nn, 11)));
  s.h[3] = static_cast<double>(detail::ratio(b2 + d2, std::pow(nn, 11)));
  s.h[4] = static_cast<double>(detail::ratio(c * b * (b2 - 3 * d2) + a * d * (3 * b2 - d2), std::pow(nn, 22)));
  s.h[5] = static_cast<double>(detail::ratio(e * (b2 - d2) + 4 * i11 * b * d, std::pow(nn, 15)));
  s.h[6] = static_cast<double>(detail::ratio(a * b * (b2 - 3 * d2) - c * d * (3 * b2 - d2), std::pow(nn, 22)));
  for (std::size_t i = 0; i < 7; ++i) s.m[i] = log_scaled(s.h[i]);
  return s;
}

inline HuSignature hu_signature(const RegionOfChange& roc) { return hu_signature(roc.mask_crop); }

/// L1 distance between log-scaled signatures.
inline double shape_dissimilarity(const HuSignature& a, const HuSignature& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < 7; ++i) d += std::abs(a.m[i] - b.m[i]);
  return d;
}

}  // namespace veasyguide
