#include "etlgen/sql_emitter.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace etlgen {

namespace {

std::string literal_sql(const Literal& value) {
  if (const auto* d = std::get_if<Decimal>(&value)) return d->to_string();
  return quote_string(std::get<std::string>(value));
}

std::string_view compare_sql(CompareOp op) {
  return op == CompareOp::Like ? std::string_view("LIKE") : to_string(op);
}

std::string_view aggregate_sql(AggregateFn fn) {
  switch (fn) {
    case AggregateFn::Sum:
      return "SUM";
    case AggregateFn::Avg:
      return "AVG";
    case AggregateFn::Min:
      return "MIN";
    case AggregateFn::Max:
      return "MAX";
    case AggregateFn::Count:
      return "COUNT";
  }
  return "?";
}

std::string convert_sql(Format from, Format to, const std::string& x) {
  if (to == Format::Upper) return "UPPER(" + x + ")";
  if (to == Format::Lower) return "LOWER(" + x + ")";
  if (to == Format::Number) return "CONVERT(numeric, " + x + ")";
  if (to == Format::Date) return "CONVERT(date, " + x + ", 103)";
  if (from == Format::Date) return "CONVERT(varchar, " + x + ", 103)";
  return "CONVERT(varchar, " + x + ")";
}

std::string quote_sql(std::string_view text) { return quote_string(text); }

/// k-th delimited token of `x`.
std::string split_sql(const std::string& x, const std::string& delimiter, std::size_t index) {
  const std::string d = quote_sql(delimiter);
  const std::string length = std::to_string(delimiter.size());
  std::string rest = x;
  for (std::size_t i = 0; i < index; ++i) {
    rest = "SUBSTRING(" + rest + ", CHARINDEX(" + d + ", " + rest + " + " + d + ") + " + length + ", LEN(" + rest +
           "))";
  }
  return "SUBSTRING(" + rest + ", 1, CHARINDEX(" + d + ", " + rest + " + " + d + ") - 1)";
}

struct Flat {
  std::vector<std::string> from;
  std::vector<std::string> joins;
  std::vector<std::string> filters;
  std::vector<std::string> not_null;
  std::vector<std::string> group_by;
  bool aggregated = false;
  // Inlined SQL for derived (unqualified) columns, by folded name.
  std::map<std::string, std::string> derived;
};

class Emitter {
 public:
  Emitter(const EtlPlan& root, const SourceSchema& src) : src_(src) {
    std::map<std::string, int> seen;
    for (const auto& t : plan_tables(root)) {
      const Table* table = src.find_table(t);
      if (table == nullptr) continue;
      for (const auto& c : table->columns) ++seen[fold_identifier(c.name)];
    }
    for (const auto& [name, n] : seen) {
      if (n > 1) ambiguous_.insert(name);
    }
  }

  std::string select(const EtlPlan& plan) {
    std::vector<std::string> items;
    Flat flat;
    if (const auto* p = std::get_if<ProjectOp>(&plan->op)) {
      flat = flatten(p->input);
      const PlanSchema schema = plan_output_schema(p->input, src_);
      for (const auto& item : p->items) items.push_back(select_item(item, schema, flat));
    } else {
      flat = flatten(plan);
      const PlanSchema schema = plan_output_schema(plan, src_);
      for (const auto& column : schema.columns) {
        items.push_back(select_item({ScalarExpr::column(column.table, column.name), ""}, schema, flat));
      }
    }
    std::string out = "SELECT ";
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? " , " : "") + items[i];
    out += "\nFROM ";
    for (std::size_t i = 0; i < flat.from.size(); ++i) out += (i ? " , " : "") + flat.from[i];
    std::vector<std::string> where = flat.joins;
    where.insert(where.end(), flat.filters.begin(), flat.filters.end());
    where.insert(where.end(), flat.not_null.begin(), flat.not_null.end());
    for (std::size_t i = 0; i < where.size(); ++i) out += (i ? "\nAND " : "\nWHERE ") + where[i];
    if (!flat.group_by.empty()) {
      out += "\nGROUP BY ";
      for (std::size_t i = 0; i < flat.group_by.size(); ++i) out += (i ? " , " : "") + flat.group_by[i];
    }
    return out;
  }

 private:
  /// A plain column as a computed-expression operand: unqualified unless the
  /// name is ambiguous among the scanned tables.
  std::string column_sql(const ColumnRef& ref, const PlanSchema& schema, const Flat& flat, bool qualify) const {
    bool ambiguous = false;
    const auto index = schema.resolve(ref, &ambiguous);
    if (!index) throw EmitError("unresolved column " + ref.text());
    const PlanColumn& column = schema.columns[*index];
    if (column.table.empty()) {
      const auto it = flat.derived.find(fold_identifier(column.name));
      if (it == flat.derived.end()) throw EmitError("no expression for derived column " + column.name);
      return it->second;
    }
    if (qualify || ambiguous_.count(fold_identifier(column.name)) != 0) return column.table + "." + column.name;
    return column.name;
  }

  std::string expr_sql(const ScalarExpr& e, const PlanSchema& schema, const Flat& flat) const {
    if (const auto* ref = std::get_if<ColumnRef>(&e.node)) return column_sql(*ref, schema, flat, false);
    if (const auto* lit = std::get_if<LiteralExpr>(&e.node)) return literal_sql(lit->value);
    if (const auto* a = std::get_if<ArithExpr>(&e.node)) {
      return "(" + expr_sql(*a->lhs, schema, flat) + " " + std::string(to_string(a->op)) + " " +
             expr_sql(*a->rhs, schema, flat) + ")";
    }
    const auto& d = std::get<DatePartExpr>(e.node);
    const std::string x = column_sql(d.column, schema, flat, false);
    switch (d.part) {
      case DatePartKind::Day:
        return x;
      case DatePartKind::MonthNum:
        return "month(" + x + ")";
      case DatePartKind::MonthName:
        return "datename(m," + x + ")";
      case DatePartKind::Year:
        return "year(" + x + ")";
    }
    return x;
  }

  std::string select_item(const ProjectItem& item, const PlanSchema& schema, const Flat& flat) const {
    if (const auto* ref = item.expr.as_column()) {
      const auto index = schema.resolve(*ref);
      if (!index) throw EmitError("unresolved column " + ref->text());
      const PlanColumn& column = schema.columns[*index];
      if (!column.table.empty()) {
        const std::string qualified = column.table + "." + column.name;
        return item.alias.empty() ? qualified : "( " + qualified + " ) AS " + item.alias;
      }
      return column_sql(*ref, schema, flat, false) + " as " + (item.alias.empty() ? column.name : item.alias);
    }
    return expr_sql(item.expr, schema, flat) + " as " + item.alias;
  }

  Flat flatten(const EtlPlan& plan) {
    return std::visit([&](const auto& op) { return flatten_op(plan, op); }, plan->op);
  }

  Flat flatten_op(const EtlPlan&, const ScanOp& op) {
    Flat flat;
    const Table* table = src_.find_table(op.table);
    flat.from.push_back(table ? table->name : op.table);
    return flat;
  }

  Flat flatten_op(const EtlPlan&, const ProjectOp& op) {
    Flat flat = flatten(op.input);
    const PlanSchema schema = plan_output_schema(op.input, src_);
    std::map<std::string, std::string> derived;
    for (const auto& item : op.items) {
      if (item.alias.empty()) {
        const auto* ref = item.expr.as_column();
        const auto index = schema.resolve(*ref);
        if (index && schema.columns[*index].table.empty()) {
          const std::string key = fold_identifier(schema.columns[*index].name);
          derived[key] = flat.derived.at(key);
        }
        continue;
      }
      const auto* ref = item.expr.as_column();
      derived[fold_identifier(item.alias)] =
          ref ? column_sql(*ref, schema, flat, true) : expr_sql(item.expr, schema, flat);
    }
    flat.derived = std::move(derived);
    return flat;
  }

  void require_unaggregated(const Flat& flat, std::string_view what) const {
    if (flat.aggregated) throw EmitError(std::string(what) + " above an aggregation has no flat SELECT form");
  }

  Flat flatten_op(const EtlPlan&, const SelectOp& op) {
    Flat flat = flatten(op.input);
    require_unaggregated(flat, "a filter");
    const PlanSchema schema = plan_output_schema(op.input, src_);
    std::string term = emit_condition(column_sql(op.column, schema, flat, true), op.condition);
    if (std::holds_alternative<ConditionBinary>(op.condition.node)) term = "(" + term + ")";
    flat.filters.push_back(std::move(term));
    return flat;
  }

  Flat flatten_op(const EtlPlan&, const ConcatOp& op) {
    Flat flat = flatten(op.input);
    require_unaggregated(flat, "a concatenation");
    const PlanSchema schema = plan_output_schema(op.input, src_);
    std::string sql;
    for (std::size_t i = 0; i < op.parts.size(); ++i) {
      if (i > 0) sql += op.separator.empty() ? " + " : " + " + quote_sql(op.separator) + " + ";
      std::string part = column_sql(op.parts[i], schema, flat, false);
      const auto index = schema.resolve(op.parts[i]);
      if (index && schema.columns[*index].data_type == DataType::Date) {
        part = "CONVERT(varchar, " + part + ", 103)";
      } else if (index && schema.columns[*index].data_type != DataType::String) {
        part = "CONVERT(varchar, " + part + ")";
      }
      sql += part;
    }
    flat.derived[fold_identifier(op.output)] = sql;
    return flat;
  }

  Flat flatten_op(const EtlPlan&, const SplitOp& op) {
    Flat flat = flatten(op.input);
    require_unaggregated(flat, "a split");
    const PlanSchema schema = plan_output_schema(op.input, src_);
    const std::string x = column_sql(op.column, schema, flat, false);
    for (const auto& out : op.outputs) flat.derived[fold_identifier(out.name)] = split_sql(x, op.delimiter, out.index);
    return flat;
  }

  Flat flatten_op(const EtlPlan&, const FormatConvertOp& op) {
    Flat flat = flatten(op.input);
    require_unaggregated(flat, "a conversion");
    const PlanSchema schema = plan_output_schema(op.input, src_);
    flat.derived[fold_identifier(op.output)] = convert_sql(op.from, op.to, column_sql(op.column, schema, flat, false));
    return flat;
  }

  Flat flatten_op(const EtlPlan&, const AggregateOp& op) {
    Flat flat = flatten(op.input);
    require_unaggregated(flat, "an aggregation");
    const PlanSchema schema = plan_output_schema(op.input, src_);
    std::map<std::string, std::string> derived;
    for (const auto& ref : op.group_by) {
      flat.group_by.push_back(column_sql(ref, schema, flat, true));
      const auto index = schema.resolve(ref);
      if (index && schema.columns[*index].table.empty()) {
        const std::string key = fold_identifier(schema.columns[*index].name);
        derived[key] = flat.derived.at(key);
      }
    }
    for (const auto& a : op.aggregations) {
      derived[fold_identifier(a.alias)] =
          std::string(aggregate_sql(a.function)) + "(" + expr_sql(a.argument, schema, flat) + ")";
    }
    flat.derived = std::move(derived);
    flat.aggregated = true;
    return flat;
  }

  Flat flatten_op(const EtlPlan&, const NotNullOp& op) {
    Flat flat = flatten(op.input);
    require_unaggregated(flat, "a not-null filter");
    const PlanSchema schema = plan_output_schema(op.input, src_);
    for (const auto& ref : op.columns) flat.not_null.push_back(column_sql(ref, schema, flat, true) + " IS NOT NULL");
    return flat;
  }

  Flat flatten_op(const EtlPlan&, const JoinOp& op) {
    Flat left = flatten(op.left);
    Flat right = flatten(op.right);
    if (left.aggregated || right.aggregated) throw EmitError("a join over an aggregation has no flat SELECT form");
    const PlanSchema ls = plan_output_schema(op.left, src_);
    const PlanSchema rs = plan_output_schema(op.right, src_);
    Flat flat = std::move(left);
    flat.from.insert(flat.from.end(), right.from.begin(), right.from.end());
    for (const auto& p : op.predicate) {
      flat.joins.push_back(column_sql(p.left, ls, flat, true) + " = " + column_sql(p.right, rs, right, true));
    }
    flat.joins.insert(flat.joins.end(), right.joins.begin(), right.joins.end());
    flat.filters.insert(flat.filters.end(), right.filters.begin(), right.filters.end());
    flat.not_null.insert(flat.not_null.end(), right.not_null.begin(), right.not_null.end());
    for (auto& [k, v] : right.derived) flat.derived.emplace(k, v);
    return flat;
  }

  const SourceSchema& src_;
  std::set<std::string> ambiguous_;
};

std::string condition_sql(std::string_view column, const Condition& c, bool nested_in_and) {
  if (const auto* atom = std::get_if<ConditionAtom>(&c.node)) {
    return std::string(column) + " " + std::string(compare_sql(atom->op)) + " " + literal_sql(atom->value);
  }
  const auto& b = std::get<ConditionBinary>(c.node);
  const bool is_and = b.op == LogicOp::And;
  std::string out = condition_sql(column, *b.lhs, is_and) + (is_and ? " AND " : " OR ") +
                    condition_sql(column, *b.rhs, is_and);
  return nested_in_and && !is_and ? "(" + out + ")" : out;
}

}  // namespace

std::string emit_condition(std::string_view column_sql, const Condition& condition) {
  return condition_sql(column_sql, condition, false);
}

std::string emit_select(const EtlPlan& plan, const SourceSchema& src) {
  try {
    return Emitter(plan, src).select(plan);
  } catch (const PlanTypeError& e) {
    throw EmitError(e.what());
  }
}

std::string emit_insert(std::string_view target, const std::vector<std::string>& columns, const EtlPlan& plan,
                        const SourceSchema& src) {
  std::string out = "INSERT INTO " + std::string(target) + "(";
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  return out + ")\n" + emit_select(plan, src);
}

std::string emit_script(const Generation& generation, const SourceSchema& src) {
  std::vector<std::string> statements;
  for (const auto& d : generation.dimensions) statements.push_back(emit_insert(d.dimension, d.columns, d.plan, src));
  if (generation.fact) {
    statements.push_back(emit_insert(generation.fact->fact, generation.fact->columns(), generation.fact->plan, src));
  }
  std::string out;
  for (std::size_t i = 0; i < statements.size(); ++i) out += (i ? "\n\n" : "") + statements[i];
  return statements.empty() ? out : out + "\n";
}

std::vector<std::string> sql_tokens(std::string_view sql) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  bool quoted = false;
  for (std::size_t i = 0; i < sql.size(); ++i) {
    const char ch = sql[i];
    if (quoted) {
      current += ch;
      if (ch == '\'') {
        if (i + 1 < sql.size() && sql[i + 1] == '\'') {
          current += sql[++i];
        } else {
          quoted = false;
        }
      }
    } else if (ch == '\'') {
      current += ch;
      quoted = true;
    } else if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
      flush();
    } else if (ch == ',' || ch == '(' || ch == ')') {
      flush();
      tokens.emplace_back(1, ch);
    } else {
      current += ch;
    }
  }
  flush();
  return tokens;
}

bool same_sql(std::string_view a, std::string_view b) { return sql_tokens(a) == sql_tokens(b); }

}  // namespace etlgen
