#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "etlgen/algebra.hpp"
#include "etlgen/rule_engine.hpp"
#include "etlgen/schema_model.hpp"

namespace etlgen {

/// `SELECT ... FROM ... [WHERE ...] [GROUP BY ...]` for a plan. Joins and
/// filters become WHERE terms, derived columns are inlined as expressions.
/// Throws EmitError for shapes without a flat SELECT form (filters above an
/// aggregation, nested aggregations).
std::string emit_select(const EtlPlan& plan, const SourceSchema& src);

/// `INSERT INTO target(c1,...)` followed by emit_select(plan).
std::string emit_insert(std::string_view target, const std::vector<std::string>& columns, const EtlPlan& plan,
                        const SourceSchema& src);

/// All load statements of a generation: dimensions in star order, then the
/// fact, separated by blank lines.
std::string emit_script(const Generation& generation, const SourceSchema& src);

/// `column op literal` terms for a condition, with AND / OR / LIKE.
std::string emit_condition(std::string_view column_sql, const Condition& condition);

/// Whitespace-insensitive tokens; `,`, `(` and `)` are tokens of their own.
std::vector<std::string> sql_tokens(std::string_view sql);
bool same_sql(std::string_view a, std::string_view b);

}  // namespace etlgen
