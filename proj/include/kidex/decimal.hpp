#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace kidex {

/// Exact decimal stored as a scaled integer: value = units / 10^scale.
///
/// Always kept in reduced form (no trailing zero digits in the fraction), so
/// two decimals are equal iff their members are equal.
class Decimal {
 public:
  static constexpr int kMaxDigits = 18;

  constexpr Decimal() = default;

  /// Throws std::overflow_error when the reduced value needs more than
  /// kMaxDigits significant digits.
  static Decimal from_scaled(std::int64_t units, int scale);

  /// Parses the canonical rendering produced by to_string():
  /// -?digits(.digits)?. Returns nullopt on anything else.
  static std::optional<Decimal> parse(std::string_view text);

  std::int64_t units() const noexcept { return units_; }
  int scale() const noexcept { return scale_; }
  bool negative() const noexcept { return units_ < 0; }

  /// Canonical rendering with '.' as separator. A fraction of exactly three
  /// digits is padded to four ("1.2340") so the text never reads as a
  /// thousands-grouped integer when fed back into normalize_number.
  std::string to_string() const;

  double to_double() const noexcept;

  friend bool operator==(const Decimal&, const Decimal&) = default;
  friend std::strong_ordering operator<=>(const Decimal& a, const Decimal& b);

 private:
  constexpr Decimal(std::int64_t units, int scale) : units_(units), scale_(scale) {}

  std::int64_t units_ = 0;
  int scale_ = 0;
};

}  // namespace kidex
