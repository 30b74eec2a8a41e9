#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "etlgen/algebra.hpp"
#include "etlgen/schema_model.hpp"
#include "etlgen/value.hpp"

namespace etlgen {

using Row = std::vector<Value>;

struct Relation {
  PlanSchema schema;
  std::vector<Row> rows;
};

/// Source tables conforming to `schema`; relations keyed by folded table name.
struct Database {
  SourceSchema schema;
  std::map<std::string, Relation> tables;

  void add(const std::string& table, Relation relation);
  const Relation* find(std::string_view table) const;
};

/// Header names any permutation of the table's columns. An unquoted empty
/// cell is null (an error for non-nullable columns); `""` is an empty string.
/// Numbers parse as decimals, dates as YYYY-MM-DD or DD/MM/YYYY.
/// Throws CsvError(line, column, detail).
Relation load_table_csv(std::string_view text, const Table& table);

/// CSV with the given header; null cells are empty, empty strings are `""`.
std::string write_csv(const std::vector<std::string>& header, const Relation& relation);

/// Rows of `relation` in canonical order: lexicographic over all columns,
/// nulls last.
void sort_rows(Relation& relation);

/// Evaluates a validate_plan-clean plan. The result is canonically sorted.
Relation eval_plan(const EtlPlan& plan, const Database& db);

/// Null never satisfies a comparison.
bool eval_condition(const Condition& c, const Value& value);

Value eval_scalar(const ScalarExpr& e, const Row& row, const PlanSchema& schema);

/// SQL LIKE with `%` and `_` over code points; case-sensitive.
bool like_match(std::string_view text, std::string_view pattern);

/// String form used by Concat and number/date to string conversion.
std::string text_of(const Value& v);

}  // namespace etlgen
