#include "etlgen/value.hpp"

#include <array>
#include <chrono>
#include <cstdio>
#include <limits>

namespace etlgen {

namespace {

using Wide = __int128;

std::optional<Decimal> narrow(Wide value) {
  if (value > std::numeric_limits<std::int64_t>::max() ||
      value < std::numeric_limits<std::int64_t>::min()) {
    return std::nullopt;
  }
  return Decimal::from_units(static_cast<std::int64_t>(value));
}

// Round-half-away-from-zero integer division.
Wide div_round(Wide num, Wide den) {
  const bool negative = (num < 0) != (den < 0);
  Wide n = num < 0 ? -num : num;
  Wide d = den < 0 ? -den : den;
  Wide q = n / d;
  if ((n % d) * 2 >= d) {
    ++q;
  }
  return negative ? -q : q;
}

bool parse_uint(std::string_view digits, unsigned& out) {
  if (digits.empty() || digits.size() > 4) {
    return false;
  }
  unsigned value = 0;
  for (char c : digits) {
    if (c < '0' || c > '9') {
      return false;
    }
    value = value * 10 + static_cast<unsigned>(c - '0');
  }
  out = value;
  return true;
}

}  // namespace

std::optional<Decimal> Decimal::from_int(std::int64_t value) {
  return narrow(static_cast<Wide>(value) * kScale);
}

std::optional<Decimal> Decimal::parse(std::string_view text) {
  if (text.empty()) {
    return std::nullopt;
  }
  bool negative = false;
  std::size_t pos = 0;
  if (text[0] == '+' || text[0] == '-') {
    negative = text[0] == '-';
    pos = 1;
  }
  Wide integral = 0;
  std::size_t int_digits = 0;
  while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
    integral = integral * 10 + (text[pos] - '0');
    if (integral > std::numeric_limits<std::int64_t>::max()) {
      return std::nullopt;
    }
    ++pos;
    ++int_digits;
  }
  if (int_digits == 0) {
    return std::nullopt;
  }
  Wide fraction = 0;
  int frac_digits = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (frac_digits == kFractionDigits) {
        return std::nullopt;
      }
      fraction = fraction * 10 + (text[pos] - '0');
      ++frac_digits;
      ++pos;
    }
    if (frac_digits == 0) {
      return std::nullopt;
    }
  }
  if (pos != text.size()) {
    return std::nullopt;
  }
  for (int i = frac_digits; i < kFractionDigits; ++i) {
    fraction *= 10;
  }
  Wide units = integral * kScale + fraction;
  return narrow(negative ? -units : units);
}

std::string Decimal::to_string() const {
  Wide v = units_;
  const bool negative = v < 0;
  if (negative) {
    v = -v;
  }
  const auto integral = static_cast<unsigned long long>(v / kScale);
  auto fraction = static_cast<unsigned long long>(v % kScale);
  std::string out = negative ? "-" : "";
  out += std::to_string(integral);
  if (fraction != 0) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "%06llu", fraction);
    std::string frac(buf);
    while (!frac.empty() && frac.back() == '0') {
      frac.pop_back();
    }
    out += '.';
    out += frac;
  }
  return out;
}

std::optional<Decimal> Decimal::add(Decimal other) const {
  return narrow(static_cast<Wide>(units_) + other.units_);
}

std::optional<Decimal> Decimal::sub(Decimal other) const {
  return narrow(static_cast<Wide>(units_) - other.units_);
}

std::optional<Decimal> Decimal::mul(Decimal other) const {
  return narrow(div_round(static_cast<Wide>(units_) * other.units_, kScale));
}

std::optional<Decimal> Decimal::div(Decimal other) const {
  if (other.units_ == 0) {
    return std::nullopt;
  }
  return narrow(div_round(static_cast<Wide>(units_) * kScale, other.units_));
}

std::optional<Date> Date::make(int year, unsigned month, unsigned day) {
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                        std::chrono::day{day}};
  if (!ymd.ok() || year < 1 || year > 9999) {
    return std::nullopt;
  }
  return Date{year, month, day};
}

std::optional<Date> Date::parse_iso(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    return std::nullopt;
  }
  unsigned y = 0, m = 0, d = 0;
  if (!parse_uint(text.substr(0, 4), y) || !parse_uint(text.substr(5, 2), m) ||
      !parse_uint(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  return make(static_cast<int>(y), m, d);
}

std::optional<Date> Date::parse_dmy(std::string_view text) {
  if (text.size() != 10 || text[2] != '/' || text[5] != '/') {
    return std::nullopt;
  }
  unsigned y = 0, m = 0, d = 0;
  if (!parse_uint(text.substr(0, 2), d) || !parse_uint(text.substr(3, 2), m) ||
      !parse_uint(text.substr(6, 4), y)) {
    return std::nullopt;
  }
  return make(static_cast<int>(y), m, d);
}

std::optional<Date> Date::parse(std::string_view text) {
  if (auto d = parse_iso(text)) {
    return d;
  }
  return parse_dmy(text);
}

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year, month, day);
  return buf;
}

std::string Date::dmy() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02u/%02u/%04d", day, month, year);
  return buf;
}

std::string_view Date::month_name() const {
  static constexpr std::array<std::string_view, 12> kNames = {
      "January", "February", "March",     "April",   "May",      "June",
      "July",    "August",   "September", "October", "November", "December"};
  return kNames.at(month - 1);
}

std::strong_ordering compare_values(const Value& a, const Value& b) {
  if (a.index() != b.index()) {
    return a.index() <=> b.index();
  }
  return std::visit(
      [&](const auto& lhs) -> std::strong_ordering {
        using T = std::decay_t<decltype(lhs)>;
        const auto& rhs = std::get<T>(b);
        if constexpr (std::is_same_v<T, std::string>) {
          return lhs.compare(rhs) <=> 0;
        } else {
          return lhs <=> rhs;
        }
      },
      a);
}

std::string value_text(const Value& v) {
  struct Visitor {
    std::string operator()(const Decimal& d) const { return d.to_string(); }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(const Date& d) const { return d.iso(); }
    std::string operator()(const Null&) const { return {}; }
  };
  return std::visit(Visitor{}, v);
}

}  // namespace etlgen
