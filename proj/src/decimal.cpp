#include "kidex/decimal.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace kidex {

namespace {

constexpr std::int64_t kPow10[] = {1,
                                   10,
                                   100,
                                   1000,
                                   10000,
                                   100000,
                                   1000000,
                                   10000000,
                                   100000000,
                                   1000000000,
                                   10000000000,
                                   100000000000,
                                   1000000000000,
                                   10000000000000,
                                   100000000000000,
                                   1000000000000000,
                                   10000000000000000,
                                   100000000000000000,
                                   1000000000000000000};

constexpr std::int64_t kMaxUnits = 999999999999999999;  // 18 nines

}  // namespace

Decimal Decimal::from_scaled(std::int64_t units, int scale) {
  if (scale < 0) {
    if (-scale > kMaxDigits) throw std::overflow_error("decimal exponent out of range");
    const std::int64_t factor = kPow10[-scale];
    if (std::llabs(units) > kMaxUnits / factor) throw std::overflow_error("decimal overflow");
    units *= factor;
    scale = 0;
  }
  while (scale > 0 && units % 10 == 0) {
    units /= 10;
    --scale;
  }
  if (units == 0) scale = 0;
  if (scale > kMaxDigits || std::llabs(units) > kMaxUnits) {
    throw std::overflow_error("decimal exceeds 18 significant digits");
  }
  return Decimal(units, scale);
}

std::optional<Decimal> Decimal::parse(std::string_view text) {
  std::size_t i = 0;
  bool neg = false;
  if (i < text.size() && text[i] == '-') {
    neg = true;
    ++i;
  }
  std::int64_t units = 0;
  int scale = 0;
  int digits = 0;
  bool seen_point = false;
  bool int_digit = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '.') {
      if (seen_point || !int_digit) return std::nullopt;
      seen_point = true;
      continue;
    }
    if (c < '0' || c > '9') return std::nullopt;
    if (!seen_point) int_digit = true;
    if (units != 0 || c != '0') ++digits;
    if (digits > kMaxDigits) return std::nullopt;
    units = units * 10 + (c - '0');
    if (seen_point) ++scale;
  }
  if (!int_digit) return std::nullopt;
  if (seen_point && scale == 0) return std::nullopt;
  return from_scaled(neg ? -units : units, scale);
}

std::string Decimal::to_string() const {
  const std::int64_t mag = units_ < 0 ? -units_ : units_;
  std::string out = units_ < 0 ? "-" : "";
  if (scale_ == 0) return out + std::to_string(mag);
  const std::int64_t whole = mag / kPow10[scale_];
  std::string frac = std::to_string(mag % kPow10[scale_]);
  frac.insert(0, static_cast<std::size_t>(scale_) - frac.size(), '0');
  if (frac.size() == 3) frac.push_back('0');
  return out + std::to_string(whole) + "." + frac;
}

double Decimal::to_double() const noexcept {
  return static_cast<double>(units_) / static_cast<double>(kPow10[scale_]);
}

std::strong_ordering operator<=>(const Decimal& a, const Decimal& b) {
  // Compare a.units * 10^(s - a.scale) with b.units * 10^(s - b.scale) using
  // 128-bit intermediates so no rescaling can overflow.
  const int s = a.scale_ > b.scale_ ? a.scale_ : b.scale_;
  const __int128 lhs = static_cast<__int128>(a.units_) * kPow10[s - a.scale_];
  const __int128 rhs = static_cast<__int128>(b.units_) * kPow10[s - b.scale_];
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

}  // namespace kidex
