#include "etlgen/mapping_model.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "xml_document.hpp"

namespace etlgen {

std::string_view to_string(SemanticRelation relation) {
  switch (relation) {
    case SemanticRelation::Synonymie:
      return "synonymie";
    case SemanticRelation::Hyperonyme:
      return "hyperonyme";
    case SemanticRelation::Hyponyme:
      return "hyponyme";
    case SemanticRelation::Holonyme:
      return "holonyme";
    case SemanticRelation::Meronyme:
      return "meronyme";
  }
  return "?";
}

std::optional<SemanticRelation> parse_relation(std::string_view text) {
  const std::string key = fold_identifier(text);
  for (auto r : {SemanticRelation::Synonymie, SemanticRelation::Hyperonyme, SemanticRelation::Hyponyme,
                 SemanticRelation::Holonyme, SemanticRelation::Meronyme}) {
    if (key == to_string(r)) {
      return r;
    }
  }
  return std::nullopt;
}

bool FormulaBinary::operator==(const FormulaBinary& other) const {
  return op == other.op && *lhs == *other.lhs && *rhs == *other.rhs;
}

const DimensionMapping* MappingDoc::find_dimension(std::string_view dimension) const {
  for (const auto& d : dimension_entries) {
    if (same_identifier(d.dimension, dimension)) {
      return &d;
    }
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Formula

namespace {

bool is_name_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) != 0 || c == '_' || c == '-' || u >= 0x80;
}

class FormulaParser {
 public:
  explicit FormulaParser(std::string_view text) : text_(text) {}

  Formula parse() {
    Formula f = expr();
    skip();
    if (pos_ != text_.size()) {
      fail("unexpected trailing input");
    }
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& detail) const {
    throw MappingError("formula '" + std::string(text_) + "' at " + std::to_string(pos_) + ": " + detail);
  }
  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])) != 0) ++pos_;
  }
  bool peek_op(char c) {
    skip();
    return pos_ < text_.size() && text_[pos_] == c;
  }
  static Formula binary(ArithOp op, Formula lhs, Formula rhs) {
    return Formula{FormulaBinary{op, std::make_shared<const Formula>(std::move(lhs)),
                                 std::make_shared<const Formula>(std::move(rhs))}};
  }

  Formula expr() {
    Formula lhs = term();
    while (true) {
      if (peek_op('+')) {
        ++pos_;
        lhs = binary(ArithOp::Add, std::move(lhs), term());
      } else if (peek_op('-')) {
        ++pos_;
        lhs = binary(ArithOp::Sub, std::move(lhs), term());
      } else {
        return lhs;
      }
    }
  }

  Formula term() {
    Formula lhs = factor();
    while (true) {
      if (peek_op('*')) {
        ++pos_;
        lhs = binary(ArithOp::Mul, std::move(lhs), factor());
      } else if (peek_op('/')) {
        ++pos_;
        lhs = binary(ArithOp::Div, std::move(lhs), factor());
      } else {
        return lhs;
      }
    }
  }

  Formula factor() {
    skip();
    if (pos_ >= text_.size()) {
      fail("unexpected end of formula");
    }
    if (text_[pos_] == '(') {
      ++pos_;
      Formula inner = expr();
      if (!peek_op(')')) {
        fail("expected ')'");
      }
      ++pos_;
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(text_[pos_])) != 0) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[pos_])) != 0 || text_[pos_] == '.')) {
        ++pos_;
      }
      auto number = Decimal::parse(text_.substr(start, pos_ - start));
      if (!number) {
        fail("malformed number");
      }
      return Formula{*number};
    }
    std::string first = name();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      std::string second = name();
      return Formula{AttributeRef{std::move(first), std::move(second)}};
    }
    return Formula{AttributeRef{"", std::move(first)}};
  }

  std::string name() {
    const std::size_t start = pos_;
    // '-' is both an identifier character and an operator; inside formulas it
    // is only an operator.
    while (pos_ < text_.size() && is_name_char(text_[pos_]) && text_[pos_] != '-') ++pos_;
    if (pos_ == start) {
      fail("expected an attribute name");
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

int precedence(ArithOp op) { return op == ArithOp::Add || op == ArithOp::Sub ? 1 : 2; }

void print_formula_into(const Formula& f, std::string& out, int parent_prec, bool right) {
  if (const auto* ref = std::get_if<AttributeRef>(&f.node)) {
    if (!ref->table.empty()) {
      out += ref->table + ".";
    }
    out += ref->attribute;
  } else if (const auto* number = std::get_if<Decimal>(&f.node)) {
    out += number->to_string();
  } else {
    const auto& b = std::get<FormulaBinary>(f.node);
    const int prec = precedence(b.op);
    const bool parens = prec < parent_prec || (right && prec == parent_prec);
    if (parens) out += '(';
    print_formula_into(*b.lhs, out, prec, false);
    out += ' ';
    out += to_string(b.op);
    out += ' ';
    print_formula_into(*b.rhs, out, prec, true);
    if (parens) out += ')';
  }
}

void collect_operands(const Formula& f, std::vector<AttributeRef>& out) {
  if (const auto* ref = std::get_if<AttributeRef>(&f.node)) {
    out.push_back(*ref);
  } else if (const auto* b = std::get_if<FormulaBinary>(&f.node)) {
    collect_operands(*b->lhs, out);
    collect_operands(*b->rhs, out);
  }
}

}  // namespace

Formula parse_formula(std::string_view text) { return FormulaParser(text).parse(); }

std::string print_formula(const Formula& f) {
  std::string out;
  print_formula_into(f, out, 0, false);
  return out;
}

std::vector<AttributeRef> formula_operands(const Formula& f) {
  std::vector<AttributeRef> out;
  collect_operands(f, out);
  return out;
}

// ---------------------------------------------------------------------------
// Document parsing

namespace {

[[noreturn]] void mapping_error(const std::string& message) { throw MappingError(message); }

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string current;
  for (char c : text) {
    if (c == ',') {
      out.push_back(current);
      current.clear();
    } else if (std::isspace(static_cast<unsigned char>(c)) == 0) {
      current += c;
    }
  }
  out.push_back(current);
  return out;
}

std::pair<std::string, std::string> split_pair(const std::string& item, const std::string& path) {
  const auto colon = item.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == item.size()) {
    mapping_error(path + ": expected name:value, found '" + item + "'");
  }
  return {item.substr(0, colon), item.substr(colon + 1)};
}

ConvertSpec parse_convert(const std::string& from, const std::string& to, const std::string& path) {
  auto f = parse_format(from);
  auto t = parse_format(to);
  if (!f || !t) {
    mapping_error(path + ": unknown format in conversion " + from + " -> " + to);
  }
  if (!is_supported_conversion(*f, *t)) {
    mapping_error(path + ": unsupported conversion " + from + " -> " + to);
  }
  return ConvertSpec{*f, *t};
}

TransformSpec parse_transform(const xml::Element& el) {
  const auto raise = [](const std::string& m) -> void { mapping_error(m); };
  if (el.tag == "concat") {
    xml::check_shape(el, {"order"}, {"separator"}, {}, raise);
    ConcatSpec spec;
    spec.order = split_list(xml::attr(el, "order"));
    if (const std::string* sep = el.find("separator")) {
      spec.separator = *sep;
    }
    for (const auto& item : spec.order) {
      if (item.empty()) mapping_error(el.path + ": empty entry in concat order");
    }
    return spec;
  }
  if (el.tag == "split") {
    xml::check_shape(el, {"delimiter", "parts"}, {}, {}, raise);
    SplitSpec spec;
    spec.delimiter = xml::attr(el, "delimiter");
    std::set<std::size_t> indices;
    for (const auto& item : split_list(xml::attr(el, "parts"))) {
      auto [name, index_text] = split_pair(item, el.path);
      auto index = Decimal::parse(index_text);
      if (!index || index->units() < 0 || index->units() % Decimal::kScale != 0) {
        mapping_error(el.path + ": part index must be a non-negative integer, found '" + index_text + "'");
      }
      const auto i = static_cast<std::size_t>(index->units() / Decimal::kScale);
      if (!indices.insert(i).second) {
        mapping_error(el.path + ": duplicate part index " + index_text);
      }
      spec.parts.push_back({name, i});
    }
    if (*indices.rbegin() + 1 != indices.size()) {
      mapping_error(el.path + ": part indices must be contiguous from 0");
    }
    return spec;
  }
  if (el.tag == "convert") {
    xml::check_shape(el, {"from", "to"}, {}, {}, raise);
    return parse_convert(xml::attr(el, "from"), xml::attr(el, "to"), el.path);
  }
  if (el.tag == "aggregate") {
    xml::check_shape(el, {"fn"}, {"formula", "convert-from", "convert-to"}, {}, raise);
    AggregateSpec spec;
    auto fn = parse_aggregate_fn(xml::attr(el, "fn"));
    if (!fn) {
      mapping_error(el.path + ": unknown aggregate function '" + xml::attr(el, "fn") + "'");
    }
    spec.function = *fn;
    if (const std::string* formula = el.find("formula")) {
      spec.formula = parse_formula(*formula);
    }
    const std::string* from = el.find("convert-from");
    const std::string* to = el.find("convert-to");
    if ((from == nullptr) != (to == nullptr)) {
      mapping_error(el.path + ": convert-from and convert-to must be given together");
    }
    if (from != nullptr) {
      spec.convert = parse_convert(*from, *to, el.path);
    }
    return spec;
  }
  // dateparts
  xml::check_shape(el, {"spec"}, {}, {}, raise);
  DatePartsSpec spec;
  for (const auto& item : split_list(xml::attr(el, "spec"))) {
    auto [name, part_text] = split_pair(item, el.path);
    auto part = parse_date_part(part_text);
    if (!part) {
      mapping_error(el.path + ": unknown date part '" + part_text + "'");
    }
    spec.parts.push_back({name, *part});
  }
  return spec;
}

AttributeMapping parse_entry(const xml::Element& el, const std::string& owner, TargetKind kind) {
  AttributeMapping entry;
  entry.owner = owner;
  entry.target = xml::attr(el, "name");
  entry.kind = kind;
  const auto raise = [](const std::string& m) -> void { mapping_error(m); };
  for (const auto& child : el.children) {
    if (child.tag == "corr") {
      xml::check_shape(child, {"table", "attribute", "relation"}, {"condition"}, {}, raise);
      Correspondence corr;
      corr.table = xml::attr(child, "table");
      corr.attribute = xml::attr(child, "attribute");
      auto relation = parse_relation(xml::attr(child, "relation"));
      if (!relation) {
        mapping_error(child.path + ": unknown semantic relation '" + xml::attr(child, "relation") + "'");
      }
      corr.relation = *relation;
      if (const std::string* text = child.find("condition")) {
        try {
          corr.condition = parse_condition(*text);
        } catch (const ConditionSyntaxError& e) {
          mapping_error(child.path + ": " + e.what());
        }
      }
      entry.correspondences.push_back(std::move(corr));
      continue;
    }
    if (entry.transform) {
      mapping_error(el.path + ": at most one transform element is allowed");
    }
    entry.transform = parse_transform(child);
  }
  if (entry.correspondences.empty()) {
    mapping_error(el.path + ": at least one <corr> is required");
  }
  return entry;
}

}  // namespace

MappingDoc parse_mapping(const std::string& document_text, std::string_view source_name) {
  const xml::Element root = xml::parse(document_text, source_name, "mapping");
  const auto raise = [](const std::string& m) -> void { mapping_error(m); };
  const auto entry_children = {std::string_view("corr"), std::string_view("concat"),
                               std::string_view("split"), std::string_view("convert"),
                               std::string_view("aggregate"), std::string_view("dateparts")};
  xml::check_shape(root, {}, {"fact"}, {"dimension", "fact"}, raise);

  MappingDoc doc;
  if (const std::string* fact = root.find("fact")) {
    doc.fact_name = *fact;
  }
  for (const auto& el : root.children) {
    if (el.tag == "dimension") {
      xml::check_shape(el, {"name", "source", "relation"}, {"hierarchy"}, {"target"}, raise);
      DimensionMapping dm;
      dm.dimension = xml::attr(el, "name");
      dm.primary_source_table = xml::attr(el, "source");
      auto relation = parse_relation(xml::attr(el, "relation"));
      if (!relation) {
        mapping_error(el.path + ": unknown semantic relation '" + xml::attr(el, "relation") + "'");
      }
      dm.relation = *relation;
      if (const std::string* h = el.find("hierarchy")) {
        dm.hierarchy = *h;
      }
      for (const auto& target : el.children) {
        xml::check_shape(target, {"name", "kind"}, {}, entry_children, raise);
        const std::string& kind = xml::attr(target, "kind");
        TargetKind tk = TargetKind::Parameter;
        if (kind == "weakattr") {
          tk = TargetKind::WeakAttribute;
        } else if (kind != "parameter") {
          mapping_error(target.path + ": kind must be parameter or weakattr");
        }
        dm.attribute_entries.push_back(parse_entry(target, dm.dimension, tk));
      }
      doc.dimension_entries.push_back(std::move(dm));
      continue;
    }
    if (doc.fact_entry) {
      mapping_error(el.path + ": only one <fact> is allowed");
    }
    xml::check_shape(el, {"name", "source"}, {}, {"measure"}, raise);
    FactMapping fm;
    fm.fact = xml::attr(el, "name");
    fm.primary_source_table = xml::attr(el, "source");
    for (const auto& measure : el.children) {
      xml::check_shape(measure, {"name"}, {}, entry_children, raise);
      fm.measure_entries.push_back(parse_entry(measure, fm.fact, TargetKind::Measure));
    }
    doc.fact_entry = std::move(fm);
  }
  return doc;
}

std::vector<std::string> output_names(const AttributeMapping& entry) {
  std::vector<std::string> out;
  if (entry.transform) {
    if (const auto* split = std::get_if<SplitSpec>(&*entry.transform)) {
      for (const auto& p : split->parts) out.push_back(p.name);
      return out;
    }
    if (const auto* dates = std::get_if<DatePartsSpec>(&*entry.transform)) {
      for (const auto& p : dates->parts) out.push_back(p.name);
      return out;
    }
  }
  out.push_back(entry.target);
  return out;
}

std::vector<std::string> loaded_attributes(const AttributeMapping& entry, const Dimension& dim) {
  std::vector<std::string> out;
  for (const auto& name : output_names(entry)) {
    const DimAttribute* attribute = dim.find_attribute(name);
    out.push_back(attribute != nullptr ? attribute->name : entry.target);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

void check_condition(const Condition& c, const Column& column, const std::string& path,
                     std::vector<Violation>& out) {
  for (const auto& problem : condition_type_errors(c, column.data_type)) {
    out.push_back({path, "condition on " + column.name + ": " + problem});
  }
}

void check_entry(const AttributeMapping& entry, const SourceSchema& src, std::vector<Violation>& out) {
  const std::string path = entry.path();
  std::vector<const Column*> columns;
  for (const auto& corr : entry.correspondences) {
    const std::string cpath = path + "/corr[" + corr.table + "." + corr.attribute + "]";
    const Column* column = src.find_column(corr.table, corr.attribute);
    columns.push_back(column);
    if (src.find_table(corr.table) == nullptr) {
      out.push_back({cpath, "source table " + corr.table + " does not exist"});
    } else if (column == nullptr) {
      out.push_back({cpath, "source attribute " + corr.table + "." + corr.attribute + " does not exist"});
    } else if (corr.condition) {
      check_condition(*corr.condition, *column, cpath, out);
    }
  }
  if (!entry.transform) {
    if (entry.cardinality() != 1) {
      out.push_back({path, "several correspondences require a concat transform"});
    }
    return;
  }
  const std::size_t card = entry.cardinality();
  const Column* first = columns.front();
  std::visit(
      [&](const auto& spec) {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, ConcatSpec>) {
          if (card < 2) {
            out.push_back({path, "concat requires at least two correspondences"});
          }
          std::vector<bool> used(card, false);
          for (const auto& item : spec.order) {
            const auto dot = item.find('.');
            const std::string table = dot == std::string::npos ? "" : item.substr(0, dot);
            const std::string attribute = dot == std::string::npos ? item : item.substr(dot + 1);
            std::size_t matches = 0;
            for (std::size_t i = 0; i < card; ++i) {
              const auto& corr = entry.correspondences[i];
              if (same_identifier(corr.attribute, attribute) && (table.empty() || same_identifier(corr.table, table))) {
                ++matches;
                if (used[i]) out.push_back({path, "concat order lists " + item + " twice"});
                used[i] = true;
              }
            }
            if (matches != 1) {
              out.push_back({path, "concat order item " + item + " must match exactly one correspondence"});
            }
          }
          if (std::find(used.begin(), used.end(), false) != used.end()) {
            out.push_back({path, "concat order must list every correspondence"});
          }
        } else if constexpr (std::is_same_v<T, SplitSpec>) {
          if (card != 1) out.push_back({path, "split requires exactly one correspondence"});
          if (first != nullptr && first->data_type != DataType::String) {
            out.push_back({path, "split requires a string source attribute"});
          }
        } else if constexpr (std::is_same_v<T, ConvertSpec>) {
          if (card != 1) out.push_back({path, "convert requires exactly one correspondence"});
          if (first != nullptr && first->data_type != conversion_input_type(spec.from)) {
            out.push_back({path, "conversion source format does not match the attribute type"});
          }
        } else if constexpr (std::is_same_v<T, AggregateSpec>) {
          if (card != 1) out.push_back({path, "aggregate requires exactly one correspondence"});
          if (spec.formula) {
            for (const auto& ref : formula_operands(*spec.formula)) {
              const std::string table = ref.table.empty() ? entry.correspondences.front().table : ref.table;
              const Column* column = src.find_column(table, ref.attribute);
              if (column == nullptr) {
                out.push_back({path, "formula operand " + table + "." + ref.attribute + " does not exist"});
              } else if (column->data_type != DataType::Number) {
                out.push_back({path, "formula operand " + table + "." + ref.attribute + " is not a number"});
              }
            }
          } else if (spec.convert && first != nullptr &&
                     first->data_type != conversion_input_type(spec.convert->from)) {
            out.push_back({path, "conversion source format does not match the attribute type"});
          }
        } else {
          if (card != 1) out.push_back({path, "dateparts requires exactly one correspondence"});
          if (spec.parts.empty()) out.push_back({path, "dateparts lists no parts"});
        }
      },
      *entry.transform);

  std::set<std::string> names;
  for (const auto& name : output_names(entry)) {
    if (!names.insert(fold_identifier(name)).second) {
      out.push_back({path, "output name " + name + " produced twice"});
    }
  }
}

}  // namespace

std::vector<Violation> validate_mapping(const MappingDoc& m, const SourceSchema& src, const StarSchema& star) {
  std::vector<Violation> out;
  if (!m.fact_name.empty() && !same_identifier(m.fact_name, star.fact.name)) {
    out.push_back({"mapping", "mapping fact " + m.fact_name + " is not the star fact " + star.fact.name});
  }

  std::set<std::string> mapped_dims;
  for (const auto& dm : m.dimension_entries) {
    const std::string dpath = dm.dimension;
    if (!mapped_dims.insert(fold_identifier(dm.dimension)).second) {
      out.push_back({dpath, "dimension mapped twice"});
      continue;
    }
    const Dimension* dim = star.find_dimension(dm.dimension);
    if (dim == nullptr) {
      out.push_back({dpath, "dimension does not exist in the star schema"});
      continue;
    }
    if (src.find_table(dm.primary_source_table) == nullptr) {
      out.push_back({dpath, "source table " + dm.primary_source_table + " does not exist"});
    }
    if (!dm.hierarchy.empty() && dim->find_hierarchy(dm.hierarchy) == nullptr) {
      out.push_back({dpath, "hierarchy " + dm.hierarchy + " does not exist"});
    }
    std::map<std::string, int> coverage;
    for (const auto& entry : dm.attribute_entries) {
      const DimAttribute* attribute = dim->find_attribute(entry.target);
      if (attribute == nullptr) {
        out.push_back({entry.path(), "target attribute does not exist in dimension " + dim->name});
        continue;
      }
      const bool is_param = entry.kind == TargetKind::Parameter;
      if (is_param != (attribute->kind == AttributeKind::Parameter)) {
        out.push_back({entry.path(), "target kind does not match the star schema"});
      }
      const auto names = output_names(entry);
      const auto loaded = loaded_attributes(entry, *dim);
      int aliases = 0;
      for (std::size_t i = 0; i < names.size(); ++i) {
        if (names.size() > 1 && dim->find_attribute(names[i]) == nullptr) ++aliases;
        ++coverage[fold_identifier(loaded[i])];
      }
      if (aliases > 1) {
        out.push_back({entry.path(), "at most one part may be an alias for the target attribute"});
      }
      check_entry(entry, src, out);
    }
    for (const auto& attribute : dim->attributes) {
      const int n = coverage[fold_identifier(attribute.name)];
      if (n == 0) {
        out.push_back({dim->name + "." + attribute.name, "attribute has no mapping entry"});
      } else if (n > 1) {
        out.push_back({dim->name + "." + attribute.name, "attribute is loaded by more than one entry"});
      }
    }
  }

  if (m.fact_entry) {
    const FactMapping& fm = *m.fact_entry;
    if (!same_identifier(fm.fact, star.fact.name)) {
      out.push_back({fm.fact, "fact does not exist in the star schema"});
    } else {
      if (src.find_table(fm.primary_source_table) == nullptr) {
        out.push_back({fm.fact, "source table " + fm.primary_source_table + " does not exist"});
      }
      std::map<std::string, int> coverage;
      for (const auto& entry : fm.measure_entries) {
        if (star.fact.find_measure(entry.target) == nullptr) {
          out.push_back({entry.path(), "measure does not exist in fact " + star.fact.name});
          continue;
        }
        ++coverage[fold_identifier(entry.target)];
        check_entry(entry, src, out);
      }
      for (const auto& measure : star.fact.measures) {
        const int n = coverage[fold_identifier(measure.name)];
        if (n == 0) {
          out.push_back({star.fact.name + "." + measure.name, "measure has no mapping entry"});
        } else if (n > 1) {
          out.push_back({star.fact.name + "." + measure.name, "measure is mapped more than once"});
        }
      }
      for (const auto& ref : star.fact.dimension_refs) {
        if (m.find_dimension(ref) == nullptr) {
          out.push_back({fm.fact, "referenced dimension " + ref + " has no mapping entry"});
        }
      }
    }
  }
  sort_violations(out);
  return out;
}

}  // namespace etlgen
