#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "etlgen/value.hpp"

namespace etlgen {

enum class CompareOp { Gt, Lt, Ge, Le, Eq, Ne, Like };
enum class LogicOp { And, Or };

std::string_view to_string(CompareOp op);

using Literal = std::variant<Decimal, std::string>;

struct Condition;

struct ConditionAtom {
  CompareOp op = CompareOp::Eq;
  Literal value;

  bool operator==(const ConditionAtom&) const = default;
};

struct ConditionBinary {
  LogicOp op = LogicOp::And;
  std::shared_ptr<const Condition> lhs;
  std::shared_ptr<const Condition> rhs;

  bool operator==(const ConditionBinary& other) const;
};

/// Decision-maker filter: `OP(value)` atoms combined with && and ||.
struct Condition {
  std::variant<ConditionAtom, ConditionBinary> node;

  static Condition atom(CompareOp op, Literal value);
  static Condition both(Condition lhs, Condition rhs);
  static Condition either(Condition lhs, Condition rhs);

  bool operator==(const Condition&) const = default;
};

/// Grammar:
///   expr := term ('||' term)*      term := atom ('&&' atom)*
///   atom := OP '(' value ')' | '(' expr ')'
///   OP   := > | < | >= | <= | = | <> | like
///   value := [+-]digits[.digits] | 'text' ('' escapes a quote)
/// && binds tighter than ||; both are left-associative.
/// Throws ConditionSyntaxError with the byte offset of the problem.
Condition parse_condition(std::string_view text);

/// Canonical text; parse_condition(print_condition(c)) == c.
std::string print_condition(const Condition& c);

std::string quote_string(std::string_view text);

/// Problems applying `c` to a column of `column_type`: numbers compare with
/// numerals, strings and dates with quoted literals (dates must parse), and
/// like only applies to strings.
std::vector<std::string> condition_type_errors(const Condition& c, DataType column_type);

}  // namespace etlgen
