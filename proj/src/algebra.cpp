#include "etlgen/algebra.hpp"

#include <set>
#include <sstream>

namespace etlgen {

bool ArithExpr::operator==(const ArithExpr& other) const {
  return op == other.op && *lhs == *other.lhs && *rhs == *other.rhs;
}

ScalarExpr ScalarExpr::column(std::string table, std::string name) {
  return ScalarExpr{ColumnRef{std::move(table), std::move(name)}};
}
ScalarExpr ScalarExpr::column(ColumnRef ref) { return ScalarExpr{std::move(ref)}; }
ScalarExpr ScalarExpr::literal(Literal value) { return ScalarExpr{LiteralExpr{std::move(value)}}; }
ScalarExpr ScalarExpr::arith(ArithOp op, ScalarExpr lhs, ScalarExpr rhs) {
  return ScalarExpr{ArithExpr{op, std::make_shared<const ScalarExpr>(std::move(lhs)),
                              std::make_shared<const ScalarExpr>(std::move(rhs))}};
}
ScalarExpr ScalarExpr::date_part(DatePartKind part, ColumnRef column) {
  return ScalarExpr{DatePartExpr{part, std::move(column)}};
}

namespace plan {

namespace {
EtlPlan make(auto op) { return std::make_shared<const PlanNode>(PlanNode{std::move(op)}); }
}  // namespace

EtlPlan scan(std::string table) { return make(ScanOp{std::move(table)}); }
EtlPlan project(EtlPlan input, std::vector<ProjectItem> items) {
  return make(ProjectOp{std::move(input), std::move(items)});
}
EtlPlan select(EtlPlan input, ColumnRef column, Condition condition) {
  return make(SelectOp{std::move(input), std::move(column), std::move(condition)});
}
EtlPlan concat(EtlPlan input, std::vector<ColumnRef> parts, std::string separator, std::string output) {
  return make(ConcatOp{std::move(input), std::move(parts), std::move(separator), std::move(output)});
}
EtlPlan split(EtlPlan input, ColumnRef column, std::string delimiter, std::vector<SplitOutput> outputs) {
  return make(SplitOp{std::move(input), std::move(column), std::move(delimiter), std::move(outputs)});
}
EtlPlan format_convert(EtlPlan input, ColumnRef column, Format from, Format to, std::string output) {
  return make(FormatConvertOp{std::move(input), std::move(column), from, to, std::move(output)});
}
EtlPlan aggregate(EtlPlan input, std::vector<ColumnRef> group_by, std::vector<Aggregation> aggregations) {
  return make(AggregateOp{std::move(input), std::move(group_by), std::move(aggregations)});
}
EtlPlan not_null(EtlPlan input, std::vector<ColumnRef> columns) {
  return make(NotNullOp{std::move(input), std::move(columns)});
}
EtlPlan join(EtlPlan left, EtlPlan right, std::vector<JoinPredicate> predicate) {
  return make(JoinOp{std::move(left), std::move(right), std::move(predicate)});
}

}  // namespace plan

std::optional<std::size_t> PlanSchema::resolve(const ColumnRef& ref, bool* ambiguous) const {
  if (ambiguous != nullptr) *ambiguous = false;
  const std::string name = fold_identifier(ref.column);
  std::vector<std::size_t> matches;
  std::vector<std::size_t> derived;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    const auto& c = columns[i];
    if (fold_identifier(c.name) != name) continue;
    if (!ref.table.empty()) {
      if (same_identifier(c.table, ref.table)) matches.push_back(i);
      continue;
    }
    matches.push_back(i);
    if (c.table.empty()) derived.push_back(i);
  }
  if (matches.size() == 1) return matches.front();
  // An unqualified name prefers the single derived column of that name.
  if (matches.size() > 1 && derived.size() == 1) return derived.front();
  if (matches.size() > 1 && ambiguous != nullptr) *ambiguous = true;
  return std::nullopt;
}

std::vector<std::string> PlanSchema::names() const {
  std::vector<std::string> out;
  for (const auto& c : columns) out.push_back(c.name);
  return out;
}

std::vector<EtlPlan> plan_children(const EtlPlan& plan) {
  return std::visit(
      [](const auto& op) -> std::vector<EtlPlan> {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, ScanOp>) {
          return {};
        } else if constexpr (std::is_same_v<T, JoinOp>) {
          return {op.left, op.right};
        } else {
          return {op.input};
        }
      },
      plan->op);
}

std::vector<std::string> plan_tables(const EtlPlan& plan) {
  if (const auto* scan = std::get_if<ScanOp>(&plan->op)) return {scan->table};
  std::vector<std::string> out;
  for (const auto& child : plan_children(plan)) {
    auto sub = plan_tables(child);
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Typing

namespace {

std::string symbol(const PlanNode& node) {
  return std::visit(
      [](const auto& op) -> std::string {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, ScanOp>) return "Scan(" + op.table + ")";
        if constexpr (std::is_same_v<T, ProjectOp>) return "π";
        if constexpr (std::is_same_v<T, SelectOp>) return "δ";
        if constexpr (std::is_same_v<T, ConcatOp>) return "C";
        if constexpr (std::is_same_v<T, SplitOp>) return "S";
        if constexpr (std::is_same_v<T, FormatConvertOp>) return "FC";
        if constexpr (std::is_same_v<T, AggregateOp>) return "γ";
        if constexpr (std::is_same_v<T, NotNullOp>) return "Nn";
        if constexpr (std::is_same_v<T, JoinOp>) return "JOIN";
      },
      node.op);
}

class Typer {
 public:
  Typer(const SourceSchema& src, std::vector<Violation>& out) : src_(src), out_(out) {}

  std::optional<PlanSchema> infer(const EtlPlan& plan, const std::string& parent) {
    const std::string path = parent.empty() ? symbol(*plan) : parent + "/" + symbol(*plan);
    const std::size_t before = out_.size();
    std::optional<PlanSchema> result = std::visit([&](const auto& op) { return node(op, path); }, plan->op);
    if (result && out_.size() == before) {
      check_unique(*result, path);
    }
    if (out_.size() != before) return std::nullopt;
    return result;
  }

 private:
  void fail(const std::string& path, const std::string& detail) { out_.push_back({path, detail}); }

  std::optional<PlanColumn> column(const PlanSchema& schema, const ColumnRef& ref, const std::string& path) {
    bool ambiguous = false;
    auto index = schema.resolve(ref, &ambiguous);
    if (!index) {
      fail(path, (ambiguous ? "ambiguous column " : "unknown column ") + ref.text());
      return std::nullopt;
    }
    return schema.columns[*index];
  }

  void check_unique(const PlanSchema& schema, const std::string& path) {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& c : schema.columns) {
      if (!seen.emplace(fold_identifier(c.table), fold_identifier(c.name)).second) {
        fail(path, "duplicate output column " + (c.table.empty() ? c.name : c.table + "." + c.name));
      }
    }
  }

  std::optional<PlanSchema> node(const ScanOp& op, const std::string& path) {
    const Table* table = src_.find_table(op.table);
    if (table == nullptr) {
      fail(path, "unknown table " + op.table);
      return std::nullopt;
    }
    PlanSchema schema;
    for (const auto& c : table->columns) {
      schema.columns.push_back({table->name, c.name, c.data_type, c.nullable});
    }
    return schema;
  }

  std::optional<PlanSchema> node(const ProjectOp& op, const std::string& path) {
    auto input = infer(op.input, path);
    if (!input) return std::nullopt;
    PlanSchema schema;
    for (const auto& item : op.items) {
      if (item.alias.empty()) {
        const ColumnRef* ref = item.expr.as_column();
        if (ref == nullptr) {
          fail(path, "computed projection item needs an output name");
          continue;
        }
        if (auto c = column(*input, *ref, path)) schema.columns.push_back(*c);
        continue;
      }
      try {
        const ExprType t = scalar_type(item.expr, *input, path);
        schema.columns.push_back({"", item.alias, t.data_type, t.nullable});
      } catch (const PlanTypeError& e) {
        fail(path, e.detail());
      }
    }
    return schema;
  }

  std::optional<PlanSchema> node(const SelectOp& op, const std::string& path) {
    auto input = infer(op.input, path);
    if (!input) return std::nullopt;
    if (auto c = column(*input, op.column, path)) {
      for (const auto& problem : condition_type_errors(op.condition, c->data_type)) {
        fail(path, "condition on " + op.column.text() + ": " + problem);
      }
    }
    return input;
  }

  std::optional<PlanSchema> node(const ConcatOp& op, const std::string& path) {
    auto input = infer(op.input, path);
    if (!input) return std::nullopt;
    if (op.parts.empty()) fail(path, "concat needs at least one part");
    bool nullable = false;
    for (const auto& part : op.parts) {
      if (auto c = column(*input, part, path)) nullable = nullable || c->nullable;
    }
    input->columns.push_back({"", op.output, DataType::String, nullable});
    return input;
  }

  std::optional<PlanSchema> node(const SplitOp& op, const std::string& path) {
    auto input = infer(op.input, path);
    if (!input) return std::nullopt;
    if (auto c = column(*input, op.column, path); c && c->data_type != DataType::String) {
      fail(path, "split needs a string column, " + op.column.text() + " is " + std::string(to_string(c->data_type)));
    }
    if (op.delimiter.empty()) fail(path, "split delimiter is empty");
    for (const auto& out : op.outputs) {
      input->columns.push_back({"", out.name, DataType::String, true});
    }
    return input;
  }

  std::optional<PlanSchema> node(const FormatConvertOp& op, const std::string& path) {
    auto input = infer(op.input, path);
    if (!input) return std::nullopt;
    if (!is_supported_conversion(op.from, op.to)) {
      fail(path, "unsupported conversion " + std::string(to_string(op.from)) + " -> " + std::string(to_string(op.to)));
      return std::nullopt;
    }
    auto c = column(*input, op.column, path);
    if (!c) return std::nullopt;
    if (c->data_type != conversion_input_type(op.from)) {
      fail(path, "conversion from " + std::string(to_string(op.from)) + " applied to " +
                     std::string(to_string(c->data_type)) + " column " + op.column.text());
      return std::nullopt;
    }
    const bool may_fail = op.to == Format::Number || op.to == Format::Date;
    input->columns.push_back({"", op.output, conversion_output_type(op.to), c->nullable || may_fail});
    return input;
  }

  std::optional<PlanSchema> node(const AggregateOp& op, const std::string& path) {
    auto input = infer(op.input, path);
    if (!input) return std::nullopt;
    PlanSchema schema;
    for (const auto& key : op.group_by) {
      if (auto c = column(*input, key, path)) schema.columns.push_back(*c);
    }
    for (const auto& agg : op.aggregations) {
      try {
        const ExprType t = scalar_type(agg.argument, *input, path);
        if (agg.function == AggregateFn::Count) {
          schema.columns.push_back({"", agg.alias, DataType::Number, false});
        } else if (agg.function == AggregateFn::Sum || agg.function == AggregateFn::Avg) {
          if (t.data_type != DataType::Number) {
            fail(path, std::string(to_string(agg.function)) + " needs a number argument");
          }
          schema.columns.push_back({"", agg.alias, DataType::Number, true});
        } else {
          schema.columns.push_back({"", agg.alias, t.data_type, true});
        }
      } catch (const PlanTypeError& e) {
        fail(path, e.detail());
      }
    }
    return schema;
  }

  std::optional<PlanSchema> node(const NotNullOp& op, const std::string& path) {
    auto input = infer(op.input, path);
    if (!input) return std::nullopt;
    for (const auto& ref : op.columns) {
      if (auto index = input->resolve(ref)) {
        input->columns[*index].nullable = false;
      } else {
        fail(path, "unknown column " + ref.text());
      }
    }
    return input;
  }

  std::optional<PlanSchema> node(const JoinOp& op, const std::string& path) {
    auto left = infer(op.left, path + "[0]");
    auto right = infer(op.right, path + "[1]");
    if (!left || !right) return std::nullopt;
    for (const auto& p : op.predicate) {
      auto l = column(*left, p.left, path);
      auto r = column(*right, p.right, path);
      if (l && r && l->data_type != r->data_type) {
        fail(path, "join compares " + p.left.text() + " with " + p.right.text() + " of a different type");
      }
    }
    left->columns.insert(left->columns.end(), right->columns.begin(), right->columns.end());
    return left;
  }

  const SourceSchema& src_;
  std::vector<Violation>& out_;
};

}  // namespace

ExprType scalar_type(const ScalarExpr& expr, const PlanSchema& schema, const std::string& path) {
  struct Visitor {
    const PlanSchema& schema;
    const std::string& path;

    ExprType operator()(const ColumnRef& ref) const {
      bool ambiguous = false;
      auto index = schema.resolve(ref, &ambiguous);
      if (!index) throw PlanTypeError(path, (ambiguous ? "ambiguous column " : "unknown column ") + ref.text());
      return {schema.columns[*index].data_type, schema.columns[*index].nullable};
    }
    ExprType operator()(const LiteralExpr& lit) const {
      return {std::holds_alternative<Decimal>(lit.value) ? DataType::Number : DataType::String, false};
    }
    ExprType operator()(const ArithExpr& a) const {
      const ExprType l = std::visit(*this, a.lhs->node);
      const ExprType r = std::visit(*this, a.rhs->node);
      if (l.data_type != DataType::Number || r.data_type != DataType::Number) {
        throw PlanTypeError(path, "arithmetic " + std::string(to_string(a.op)) + " needs number operands");
      }
      // Overflow and division by zero yield null.
      return {DataType::Number, true};
    }
    ExprType operator()(const DatePartExpr& d) const {
      const ExprType c = (*this)(d.column);
      if (c.data_type != DataType::Date) {
        throw PlanTypeError(path, "date part " + std::string(to_string(d.part)) + " needs a date column");
      }
      switch (d.part) {
        case DatePartKind::Day:
          return {DataType::Date, c.nullable};
        case DatePartKind::MonthName:
          return {DataType::String, c.nullable};
        default:
          return {DataType::Number, c.nullable};
      }
    }
  };
  return std::visit(Visitor{schema, path}, expr.node);
}

std::vector<Violation> validate_plan(const EtlPlan& plan, const SourceSchema& src) {
  std::vector<Violation> out;
  Typer(src, out).infer(plan, "");
  return out;
}

PlanSchema plan_output_schema(const EtlPlan& plan, const SourceSchema& src) {
  std::vector<Violation> out;
  auto schema = Typer(src, out).infer(plan, "");
  if (!out.empty()) {
    throw PlanTypeError(out.front().path, out.front().message);
  }
  return *schema;
}

// ---------------------------------------------------------------------------
// Rendering

std::string render_expr(const ScalarExpr& expr) {
  struct Visitor {
    std::string operator()(const ColumnRef& ref) const { return ref.text(); }
    std::string operator()(const LiteralExpr& lit) const {
      if (const auto* d = std::get_if<Decimal>(&lit.value)) return d->to_string();
      return quote_string(std::get<std::string>(lit.value));
    }
    std::string operator()(const ArithExpr& a) const {
      return "(" + std::visit(*this, a.lhs->node) + " " + std::string(to_string(a.op)) + " " +
             std::visit(*this, a.rhs->node) + ")";
    }
    std::string operator()(const DatePartExpr& d) const {
      return std::string(to_string(d.part)) + "(" + d.column.text() + ")";
    }
  };
  return std::visit(Visitor{}, expr.node);
}

namespace {

template <typename T, typename F>
std::string join_list(const std::vector<T>& items, F&& render) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i != 0) out += ", ";
    out += render(items[i]);
  }
  return out;
}

std::string ref_text(const ColumnRef& r) { return r.text(); }

void render_into(const EtlPlan& plan, int depth, std::ostringstream& out) {
  out << std::string(static_cast<std::size_t>(depth) * 2, ' ');
  std::visit(
      [&](const auto& op) {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, ScanOp>) {
          out << "Scan(" << op.table << ")";
        } else if constexpr (std::is_same_v<T, ProjectOp>) {
          out << "π(" << join_list(op.items, [](const ProjectItem& item) {
            std::string s = render_expr(item.expr);
            if (!item.alias.empty()) s += " AS " + item.alias;
            return s;
          }) << ")";
        } else if constexpr (std::is_same_v<T, SelectOp>) {
          out << "δ(" << op.column.text() << ": " << print_condition(op.condition) << ")";
        } else if constexpr (std::is_same_v<T, ConcatOp>) {
          out << "C(" << join_list(op.parts, ref_text) << "; sep=" << quote_string(op.separator) << " -> "
              << op.output << ")";
        } else if constexpr (std::is_same_v<T, SplitOp>) {
          out << "S(" << op.column.text() << "; delim=" << quote_string(op.delimiter) << " -> "
              << join_list(op.outputs, [](const SplitOutput& o) { return o.name + ":" + std::to_string(o.index); })
              << ")";
        } else if constexpr (std::is_same_v<T, FormatConvertOp>) {
          out << "FC(" << op.column.text() << ", " << to_string(op.from) << ", " << to_string(op.to) << " -> "
              << op.output << ")";
        } else if constexpr (std::is_same_v<T, AggregateOp>) {
          out << "γ(group=[" << join_list(op.group_by, ref_text) << "]; "
              << join_list(op.aggregations, [](const Aggregation& a) {
                   return std::string(to_string(a.function)) + "(" + render_expr(a.argument) + ") AS " + a.alias;
                 })
              << ")";
        } else if constexpr (std::is_same_v<T, NotNullOp>) {
          out << "Nn(" << join_list(op.columns, ref_text) << ")";
        } else {
          out << "JOIN(" << join_list(op.predicate, [](const JoinPredicate& p) {
            return p.left.text() + " = " + p.right.text();
          }) << ")";
        }
      },
      plan->op);
  out << '\n';
  for (const auto& child : plan_children(plan)) {
    render_into(child, depth + 1, out);
  }
}

}  // namespace

std::string render_plan(const EtlPlan& plan) {
  std::ostringstream out;
  render_into(plan, 0, out);
  return out.str();
}

}  // namespace etlgen
