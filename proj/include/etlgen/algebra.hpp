#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "etlgen/condition.hpp"
#include "etlgen/schema_model.hpp"
#include "etlgen/vocabulary.hpp"

namespace etlgen {

/// Column reference; `table` empty means "resolve by name".
struct ColumnRef {
  std::string table;
  std::string column;

  std::string text() const { return table.empty() ? column : table + "." + column; }
  bool operator==(const ColumnRef&) const = default;
};

struct ScalarExpr;

struct LiteralExpr {
  Literal value;
  bool operator==(const LiteralExpr&) const = default;
};

struct ArithExpr {
  ArithOp op = ArithOp::Add;
  std::shared_ptr<const ScalarExpr> lhs;
  std::shared_ptr<const ScalarExpr> rhs;

  bool operator==(const ArithExpr& other) const;
};

struct DatePartExpr {
  DatePartKind part = DatePartKind::Day;
  ColumnRef column;
  bool operator==(const DatePartExpr&) const = default;
};

struct ScalarExpr {
  std::variant<ColumnRef, LiteralExpr, ArithExpr, DatePartExpr> node;

  static ScalarExpr column(std::string table, std::string name);
  static ScalarExpr column(ColumnRef ref);
  static ScalarExpr literal(Literal value);
  static ScalarExpr arith(ArithOp op, ScalarExpr lhs, ScalarExpr rhs);
  static ScalarExpr date_part(DatePartKind part, ColumnRef column);

  const ColumnRef* as_column() const { return std::get_if<ColumnRef>(&node); }
  bool operator==(const ScalarExpr&) const = default;
};

/// Projection item. An empty alias is only valid for plain column
/// references and keeps the input column (including its table qualifier).
struct ProjectItem {
  ScalarExpr expr;
  std::string alias;
  bool operator==(const ProjectItem&) const = default;
};

struct Aggregation {
  AggregateFn function = AggregateFn::Sum;
  ScalarExpr argument;
  std::string alias;
  bool operator==(const Aggregation&) const = default;
};

struct JoinPredicate {
  ColumnRef left;
  ColumnRef right;
  bool operator==(const JoinPredicate&) const = default;
};

struct SplitOutput {
  std::string name;
  std::size_t index = 0;
  bool operator==(const SplitOutput&) const = default;
};

struct PlanNode;
using EtlPlan = std::shared_ptr<const PlanNode>;

struct ScanOp {
  std::string table;
};
struct ProjectOp {
  EtlPlan input;
  std::vector<ProjectItem> items;
};
struct SelectOp {
  EtlPlan input;
  ColumnRef column;
  Condition condition;
};
// Concat, Split and FormatConvert append their outputs to the input columns.
struct ConcatOp {
  EtlPlan input;
  std::vector<ColumnRef> parts;
  std::string separator;
  std::string output;
};
struct SplitOp {
  EtlPlan input;
  ColumnRef column;
  std::string delimiter;
  std::vector<SplitOutput> outputs;
};
struct FormatConvertOp {
  EtlPlan input;
  ColumnRef column;
  Format from = Format::String;
  Format to = Format::String;
  std::string output;
};
/// Output = group_by columns, then one column per aggregation.
struct AggregateOp {
  EtlPlan input;
  std::vector<ColumnRef> group_by;
  std::vector<Aggregation> aggregations;
};
struct NotNullOp {
  EtlPlan input;
  std::vector<ColumnRef> columns;
};
struct JoinOp {
  EtlPlan left;
  EtlPlan right;
  std::vector<JoinPredicate> predicate;
};

struct PlanNode {
  std::variant<ScanOp, ProjectOp, SelectOp, ConcatOp, SplitOp, FormatConvertOp, AggregateOp, NotNullOp, JoinOp> op;
};

namespace plan {
EtlPlan scan(std::string table);
EtlPlan project(EtlPlan input, std::vector<ProjectItem> items);
EtlPlan select(EtlPlan input, ColumnRef column, Condition condition);
EtlPlan concat(EtlPlan input, std::vector<ColumnRef> parts, std::string separator, std::string output);
EtlPlan split(EtlPlan input, ColumnRef column, std::string delimiter, std::vector<SplitOutput> outputs);
EtlPlan format_convert(EtlPlan input, ColumnRef column, Format from, Format to, std::string output);
EtlPlan aggregate(EtlPlan input, std::vector<ColumnRef> group_by, std::vector<Aggregation> aggregations);
EtlPlan not_null(EtlPlan input, std::vector<ColumnRef> columns);
EtlPlan join(EtlPlan left, EtlPlan right, std::vector<JoinPredicate> predicate);
}  // namespace plan

struct PlanColumn {
  std::string table;  // originating source table; empty for derived columns
  std::string name;
  DataType data_type = DataType::String;
  bool nullable = false;

  bool operator==(const PlanColumn&) const = default;
};

struct PlanSchema {
  std::vector<PlanColumn> columns;

  std::size_t size() const { return columns.size(); }
  /// Index of the column `ref` denotes; nullopt if unknown, and sets
  /// `ambiguous` when several columns match.
  std::optional<std::size_t> resolve(const ColumnRef& ref, bool* ambiguous = nullptr) const;
  std::vector<std::string> names() const;
  bool operator==(const PlanSchema&) const = default;
};

struct ExprType {
  DataType data_type;
  bool nullable;
};

/// Type of `expr` over `schema`; throws PlanTypeError(path, ...) when ill-typed.
ExprType scalar_type(const ScalarExpr& expr, const PlanSchema& schema, const std::string& path);

/// Throws PlanTypeError at the first ill-formed node.
PlanSchema plan_output_schema(const EtlPlan& plan, const SourceSchema& src);

/// Every node-level problem; empty iff plan_output_schema succeeds.
std::vector<Violation> validate_plan(const EtlPlan& plan, const SourceSchema& src);

/// Scanned tables, left to right.
std::vector<std::string> plan_tables(const EtlPlan& plan);

/// Counts nodes whose operator is `T`.
template <typename T>
std::size_t count_nodes(const EtlPlan& plan);

std::string render_expr(const ScalarExpr& expr);
/// One operator per line (π δ C S FC γ Nn JOIN Scan), children indented.
std::string render_plan(const EtlPlan& plan);

// ---------------------------------------------------------------------------

std::vector<EtlPlan> plan_children(const EtlPlan& plan);

template <typename T>
std::size_t count_nodes(const EtlPlan& plan) {
  std::size_t n = std::holds_alternative<T>(plan->op) ? 1 : 0;
  for (const auto& child : plan_children(plan)) {
    n += count_nodes<T>(child);
  }
  return n;
}

}  // namespace etlgen
