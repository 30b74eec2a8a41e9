#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "etlgen/common.hpp"

namespace etlgen {

/// Exact fixed-point decimal with six fractional digits.
class Decimal {
 public:
  static constexpr int kFractionDigits = 6;
  static constexpr std::int64_t kScale = 1'000'000;

  constexpr Decimal() = default;
  static constexpr Decimal from_units(std::int64_t units) {
    Decimal d;
    d.units_ = units;
    return d;
  }
  static std::optional<Decimal> from_int(std::int64_t value);

  /// Accepts `[+-]digits[.digits]` with at most six fractional digits.
  static std::optional<Decimal> parse(std::string_view text);

  std::int64_t units() const { return units_; }
  bool is_zero() const { return units_ == 0; }

  /// Canonical text: no exponent, trailing fractional zeros stripped.
  std::string to_string() const;

  // Arithmetic returns nullopt on overflow or division by zero. Products and
  // quotients round half away from zero to six fractional digits.
  std::optional<Decimal> add(Decimal other) const;
  std::optional<Decimal> sub(Decimal other) const;
  std::optional<Decimal> mul(Decimal other) const;
  std::optional<Decimal> div(Decimal other) const;

  auto operator<=>(const Decimal&) const = default;
  bool operator==(const Decimal&) const = default;

 private:
  std::int64_t units_ = 0;
};

/// Calendar date without time of day.
struct Date {
  int year = 1970;
  unsigned month = 1;
  unsigned day = 1;

  static std::optional<Date> make(int year, unsigned month, unsigned day);
  /// "YYYY-MM-DD" or "DD/MM/YYYY".
  static std::optional<Date> parse(std::string_view text);
  static std::optional<Date> parse_iso(std::string_view text);
  static std::optional<Date> parse_dmy(std::string_view text);

  std::string iso() const;
  std::string dmy() const;
  /// English month name with initial capital.
  std::string_view month_name() const;

  auto operator<=>(const Date&) const = default;
  bool operator==(const Date&) const = default;
};

struct Null {
  auto operator<=>(const Null&) const = default;
  bool operator==(const Null&) const = default;
};

/// A cell value. Alternative order defines cross-type ordering; Null sorts last.
using Value = std::variant<Decimal, std::string, Date, Null>;

inline bool is_null(const Value& v) { return std::holds_alternative<Null>(v); }

/// Total order used for canonical row sorting: by alternative, then value.
std::strong_ordering compare_values(const Value& a, const Value& b);

/// Text used in CSV export and for string conversion of non-string parts.
std::string value_text(const Value& v);

}  // namespace etlgen
