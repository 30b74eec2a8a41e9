#include "etlgen/executor.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

namespace etlgen {

void Database::add(const std::string& table, Relation relation) {
  tables[fold_identifier(table)] = std::move(relation);
}

const Relation* Database::find(std::string_view table) const {
  const auto it = tables.find(fold_identifier(table));
  return it == tables.end() ? nullptr : &it->second;
}

namespace {

struct Cell {
  std::string text;
  bool quoted = false;
};

/// Splits CSV text into records; line numbers are those of each record's start.
std::vector<std::pair<std::size_t, std::vector<Cell>>> parse_csv(std::string_view text) {
  std::vector<std::pair<std::size_t, std::vector<Cell>>> records;
  std::size_t line = 1;
  std::size_t i = 0;
  if (text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;
  while (i < text.size()) {
    const std::size_t start_line = line;
    std::vector<Cell> cells;
    Cell cell;
    bool done = false;
    while (!done) {
      if (i < text.size() && text[i] == '"' && cell.text.empty() && !cell.quoted) {
        cell.quoted = true;
        ++i;
        while (true) {
          if (i >= text.size()) throw CsvError(start_line, cells.size() + 1, "unterminated quoted cell");
          if (text[i] == '"') {
            if (i + 1 < text.size() && text[i + 1] == '"') {
              cell.text += '"';
              i += 2;
              continue;
            }
            ++i;
            break;
          }
          if (text[i] == '\n') ++line;
          cell.text += text[i++];
        }
        if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
          throw CsvError(line, cells.size() + 1, "text after closing quote");
        }
      }
      if (i >= text.size() || text[i] == '\n' || (text[i] == '\r' && i + 1 < text.size() && text[i + 1] == '\n')) {
        cells.push_back(std::move(cell));
        if (i < text.size()) i += text[i] == '\r' ? 2 : 1;
        ++line;
        done = true;
      } else if (text[i] == ',') {
        cells.push_back(std::move(cell));
        cell = Cell{};
        ++i;
      } else if (text[i] == '"') {
        throw CsvError(line, cells.size() + 1, "quote inside an unquoted cell");
      } else {
        cell.text += text[i++];
      }
    }
    if (cells.size() == 1 && cells[0].text.empty() && !cells[0].quoted) continue;  // blank line
    records.emplace_back(start_line, std::move(cells));
  }
  return records;
}

struct RowLess {
  bool operator()(const Row& a, const Row& b) const {
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
      const auto c = compare_values(a[i], b[i]);
      if (c != 0) return c < 0;
    }
    return a.size() < b.size();
  }
};

std::size_t resolve_index(const PlanSchema& schema, const ColumnRef& ref) {
  const auto index = schema.resolve(ref);
  if (!index) throw PlanTypeError("eval", "unresolved column " + ref.text());
  return *index;
}

std::vector<std::uint32_t> code_points(std::string_view s) {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < s.size();) {
    const auto b = static_cast<unsigned char>(s[i]);
    std::size_t n = b < 0x80 ? 1 : (b >> 5) == 0x6 ? 2 : (b >> 4) == 0xE ? 3 : (b >> 3) == 0x1E ? 4 : 1;
    if (i + n > s.size()) n = 1;
    std::uint32_t cp = n == 1 ? b : b & (0x7F >> n);
    for (std::size_t k = 1; k < n; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    out.push_back(cp);
    i += n;
  }
  return out;
}

bool compare_holds(CompareOp op, std::strong_ordering c) {
  switch (op) {
    case CompareOp::Gt:
      return c > 0;
    case CompareOp::Lt:
      return c < 0;
    case CompareOp::Ge:
      return c >= 0;
    case CompareOp::Le:
      return c <= 0;
    case CompareOp::Eq:
      return c == 0;
    case CompareOp::Ne:
      return c != 0;
    case CompareOp::Like:
      return false;
  }
  return false;
}

bool atom_holds(const ConditionAtom& atom, const Value& value) {
  if (const auto* d = std::get_if<Decimal>(&value)) {
    const auto* lit = std::get_if<Decimal>(&atom.value);
    return lit != nullptr && compare_holds(atom.op, *d <=> *lit);
  }
  if (const auto* s = std::get_if<std::string>(&value)) {
    const auto* lit = std::get_if<std::string>(&atom.value);
    if (lit == nullptr) return false;
    if (atom.op == CompareOp::Like) return like_match(*s, *lit);
    return compare_holds(atom.op, s->compare(*lit) <=> 0);
  }
  if (const auto* date = std::get_if<Date>(&value)) {
    const auto* lit = std::get_if<std::string>(&atom.value);
    const auto parsed = lit ? Date::parse(*lit) : std::nullopt;
    return parsed && atom.op != CompareOp::Like && compare_holds(atom.op, *date <=> *parsed);
  }
  return false;
}

Value convert(const Value& v, Format from, Format to) {
  if (is_null(v)) return Null{};
  if (to == Format::Upper || to == Format::Lower) {
    std::string s = std::get<std::string>(v);
    for (auto& ch : s) {
      const auto u = static_cast<unsigned char>(ch);
      if (u < 0x80) ch = static_cast<char>(to == Format::Upper ? std::toupper(u) : std::tolower(u));
    }
    return s;
  }
  if (to == Format::Number) {
    const auto d = Decimal::parse(std::get<std::string>(v));
    return d ? Value(*d) : Value(Null{});
  }
  if (to == Format::Date) {
    const auto d = Date::parse_dmy(std::get<std::string>(v));
    return d ? Value(*d) : Value(Null{});
  }
  (void)from;
  return text_of(v);
}

std::vector<std::string> split_text(const std::string& s, const std::string& delimiter) {
  std::vector<std::string> parts;
  if (delimiter.empty()) return {s};
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(delimiter, start);
    if (pos == std::string::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + delimiter.size();
  }
}

Value fold(AggregateFn fn, const std::vector<Value>& values) {
  std::vector<const Value*> present;
  for (const auto& v : values) {
    if (!is_null(v)) present.push_back(&v);
  }
  if (fn == AggregateFn::Count) return *Decimal::from_int(static_cast<std::int64_t>(present.size()));
  if (present.empty()) return Null{};
  if (fn == AggregateFn::Min || fn == AggregateFn::Max) {
    const Value* best = present.front();
    for (const auto* v : present) {
      const auto c = compare_values(*v, *best);
      if (fn == AggregateFn::Min ? c < 0 : c > 0) best = v;
    }
    return *best;
  }
  std::optional<Decimal> sum = Decimal{};
  for (const auto* v : present) {
    sum = sum ? sum->add(std::get<Decimal>(*v)) : std::nullopt;
  }
  if (!sum) return Null{};
  if (fn == AggregateFn::Sum) return *sum;
  const auto avg = sum->div(*Decimal::from_int(static_cast<std::int64_t>(present.size())));
  return avg ? Value(*avg) : Value(Null{});
}

class Evaluator {
 public:
  explicit Evaluator(const Database& db) : db_(db) {}

  Relation eval(const EtlPlan& plan) {
    Relation out = std::visit([&](const auto& op) { return eval_op(op); }, plan->op);
    out.schema = plan_output_schema(plan, db_.schema);
    return out;
  }

 private:
  Relation eval_op(const ScanOp& op) {
    const Relation* r = db_.find(op.table);
    if (r == nullptr) throw PlanTypeError("Scan(" + op.table + ")", "no data for table");
    return *r;
  }

  Relation eval_op(const ProjectOp& op) {
    Relation in = eval(op.input);
    Relation out;
    for (const auto& row : in.rows) {
      Row r;
      for (const auto& item : op.items) r.push_back(eval_scalar(item.expr, row, in.schema));
      out.rows.push_back(std::move(r));
    }
    return out;
  }

  Relation eval_op(const SelectOp& op) {
    Relation in = eval(op.input);
    const std::size_t index = resolve_index(in.schema, op.column);
    std::erase_if(in.rows, [&](const Row& row) { return !eval_condition(op.condition, row[index]); });
    return in;
  }

  Relation eval_op(const ConcatOp& op) {
    Relation in = eval(op.input);
    std::vector<std::size_t> indexes;
    for (const auto& part : op.parts) indexes.push_back(resolve_index(in.schema, part));
    for (auto& row : in.rows) {
      std::string text;
      bool null = false;
      for (std::size_t i = 0; i < indexes.size() && !null; ++i) {
        null = is_null(row[indexes[i]]);
        if (i > 0) text += op.separator;
        text += text_of(row[indexes[i]]);
      }
      row.push_back(null ? Value(Null{}) : Value(std::move(text)));
    }
    return in;
  }

  Relation eval_op(const SplitOp& op) {
    Relation in = eval(op.input);
    const std::size_t index = resolve_index(in.schema, op.column);
    for (auto& row : in.rows) {
      const Value source = row[index];
      std::vector<std::string> parts;
      if (const auto* s = std::get_if<std::string>(&source)) parts = split_text(*s, op.delimiter);
      for (const auto& out : op.outputs) {
        row.push_back(out.index < parts.size() ? Value(parts[out.index]) : Value(Null{}));
      }
    }
    return in;
  }

  Relation eval_op(const FormatConvertOp& op) {
    Relation in = eval(op.input);
    const std::size_t index = resolve_index(in.schema, op.column);
    for (auto& row : in.rows) row.push_back(convert(row[index], op.from, op.to));
    return in;
  }

  Relation eval_op(const AggregateOp& op) {
    Relation in = eval(op.input);
    std::vector<std::size_t> keys;
    for (const auto& ref : op.group_by) keys.push_back(resolve_index(in.schema, ref));
    std::map<Row, std::vector<const Row*>, RowLess> groups;
    for (const auto& row : in.rows) {
      Row key;
      for (auto k : keys) key.push_back(row[k]);
      groups[std::move(key)].push_back(&row);
    }
    if (groups.empty() && keys.empty()) groups[Row{}];
    Relation out;
    for (const auto& [key, rows] : groups) {
      Row r = key;
      for (const auto& a : op.aggregations) {
        std::vector<Value> values;
        for (const auto* row : rows) values.push_back(eval_scalar(a.argument, *row, in.schema));
        r.push_back(fold(a.function, values));
      }
      out.rows.push_back(std::move(r));
    }
    return out;
  }

  Relation eval_op(const NotNullOp& op) {
    Relation in = eval(op.input);
    std::vector<std::size_t> indexes;
    for (const auto& ref : op.columns) indexes.push_back(resolve_index(in.schema, ref));
    std::erase_if(in.rows, [&](const Row& row) {
      return std::any_of(indexes.begin(), indexes.end(), [&](std::size_t i) { return is_null(row[i]); });
    });
    return in;
  }

  Relation eval_op(const JoinOp& op) {
    Relation left = eval(op.left);
    Relation right = eval(op.right);
    std::vector<std::size_t> lk;
    std::vector<std::size_t> rk;
    for (const auto& p : op.predicate) {
      lk.push_back(resolve_index(left.schema, p.left));
      rk.push_back(resolve_index(right.schema, p.right));
    }
    auto key_of = [](const Row& row, const std::vector<std::size_t>& idx) -> std::optional<Row> {
      Row key;
      for (auto i : idx) {
        if (is_null(row[i])) return std::nullopt;
        key.push_back(row[i]);
      }
      return key;
    };
    std::map<Row, std::vector<const Row*>, RowLess> index;
    for (const auto& row : right.rows) {
      if (auto key = key_of(row, rk)) index[std::move(*key)].push_back(&row);
    }
    Relation out;
    for (const auto& row : left.rows) {
      const auto key = key_of(row, lk);
      if (!key) continue;
      const auto it = index.find(*key);
      if (it == index.end()) continue;
      for (const auto* match : it->second) {
        Row r = row;
        r.insert(r.end(), match->begin(), match->end());
        out.rows.push_back(std::move(r));
      }
    }
    return out;
  }

  const Database& db_;
};

Value parse_cell(const Cell& cell, const Column& column, std::size_t line, std::size_t index) {
  if (cell.text.empty() && !cell.quoted) {
    if (!column.nullable) throw CsvError(line, index, "empty cell in non-nullable column " + column.name);
    return Null{};
  }
  switch (column.data_type) {
    case DataType::Number: {
      const auto d = Decimal::parse(cell.text);
      if (!d) throw CsvError(line, index, "not a number: " + cell.text);
      return *d;
    }
    case DataType::Date: {
      const auto d = Date::parse(cell.text);
      if (!d) throw CsvError(line, index, "not a date: " + cell.text);
      return *d;
    }
    case DataType::String:
      return cell.text;
  }
  return Null{};
}

std::string csv_cell(const Value& v) {
  if (is_null(v)) return "";
  std::string text = text_of(v);
  if (std::holds_alternative<Date>(v)) text = std::get<Date>(v).iso();
  const bool quote = text.empty() || text.find_first_of(",\"\r\n") != std::string::npos || text.front() == ' ' ||
                     text.back() == ' ';
  if (!quote) return text;
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

Relation load_table_csv(std::string_view text, const Table& table) {
  const auto records = parse_csv(text);
  if (records.empty()) throw CsvError(1, 0, "missing header row");
  const auto& header = records.front().second;
  if (header.size() != table.columns.size()) {
    throw CsvError(1, 0, "header has " + std::to_string(header.size()) + " columns, table " + table.name + " has " +
                             std::to_string(table.columns.size()));
  }
  // position in file -> column index in table
  std::vector<std::size_t> order;
  std::vector<bool> seen(table.columns.size(), false);
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::size_t found = table.columns.size();
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (same_identifier(table.columns[c].name, header[i].text)) found = c;
    }
    if (found == table.columns.size() || seen[found]) {
      throw CsvError(1, i + 1, "unexpected header column " + header[i].text);
    }
    seen[found] = true;
    order.push_back(found);
  }
  Relation out;
  for (const auto& c : table.columns) out.schema.columns.push_back({table.name, c.name, c.data_type, c.nullable});
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& [line, cells] = records[r];
    if (cells.size() != header.size()) {
      throw CsvError(line, 0, "expected " + std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
    }
    Row row(table.columns.size(), Null{});
    for (std::size_t i = 0; i < cells.size(); ++i) {
      row[order[i]] = parse_cell(cells[i], table.columns[order[i]], line, i + 1);
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::string write_csv(const std::vector<std::string>& header, const Relation& relation) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + csv_cell(Value(header[i]));
  out += '\n';
  for (const auto& row : relation.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_cell(row[i]);
    out += '\n';
  }
  return out;
}

void sort_rows(Relation& relation) { std::stable_sort(relation.rows.begin(), relation.rows.end(), RowLess{}); }

Relation eval_plan(const EtlPlan& plan, const Database& db) {
  Relation out = Evaluator(db).eval(plan);
  sort_rows(out);
  return out;
}

bool eval_condition(const Condition& c, const Value& value) {
  if (const auto* atom = std::get_if<ConditionAtom>(&c.node)) return atom_holds(*atom, value);
  const auto& b = std::get<ConditionBinary>(c.node);
  const bool lhs = eval_condition(*b.lhs, value);
  if (b.op == LogicOp::And) return lhs && eval_condition(*b.rhs, value);
  return lhs || eval_condition(*b.rhs, value);
}

Value eval_scalar(const ScalarExpr& e, const Row& row, const PlanSchema& schema) {
  if (const auto* ref = std::get_if<ColumnRef>(&e.node)) return row[resolve_index(schema, *ref)];
  if (const auto* lit = std::get_if<LiteralExpr>(&e.node)) {
    return std::visit([](const auto& v) { return Value(v); }, lit->value);
  }
  if (const auto* a = std::get_if<ArithExpr>(&e.node)) {
    const Value l = eval_scalar(*a->lhs, row, schema);
    const Value r = eval_scalar(*a->rhs, row, schema);
    const auto* x = std::get_if<Decimal>(&l);
    const auto* y = std::get_if<Decimal>(&r);
    if (x == nullptr || y == nullptr) return Null{};
    std::optional<Decimal> result;
    switch (a->op) {
      case ArithOp::Add:
        result = x->add(*y);
        break;
      case ArithOp::Sub:
        result = x->sub(*y);
        break;
      case ArithOp::Mul:
        result = x->mul(*y);
        break;
      case ArithOp::Div:
        result = x->div(*y);
        break;
    }
    return result ? Value(*result) : Value(Null{});
  }
  const auto& d = std::get<DatePartExpr>(e.node);
  const Value v = row[resolve_index(schema, d.column)];
  const auto* date = std::get_if<Date>(&v);
  if (date == nullptr) return Null{};
  switch (d.part) {
    case DatePartKind::Day:
      return *date;
    case DatePartKind::MonthNum:
      return *Decimal::from_int(date->month);
    case DatePartKind::MonthName:
      return std::string(date->month_name());
    case DatePartKind::Year:
      return *Decimal::from_int(date->year);
  }
  return Null{};
}

bool like_match(std::string_view text, std::string_view pattern) {
  const auto t = code_points(text);
  const auto p = code_points(pattern);
  // Greedy matcher with backtracking to the last '%'.
  std::size_t ti = 0, pi = 0;
  std::optional<std::size_t> star;
  std::size_t star_t = 0;
  while (ti < t.size()) {
    if (pi < p.size() && (p[pi] == '_' || (p[pi] != '%' && p[pi] == t[ti]))) {
      ++ti;
      ++pi;
    } else if (pi < p.size() && p[pi] == '%') {
      star = pi++;
      star_t = ti;
    } else if (star) {
      pi = *star + 1;
      ti = ++star_t;
    } else {
      return false;
    }
  }
  while (pi < p.size() && p[pi] == '%') ++pi;
  return pi == p.size();
}

std::string text_of(const Value& v) {
  if (const auto* d = std::get_if<Decimal>(&v)) return d->to_string();
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  if (const auto* date = std::get_if<Date>(&v)) return date->dmy();
  return "";
}

}  // namespace etlgen
