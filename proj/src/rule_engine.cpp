#include "etlgen/rule_engine.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace etlgen {

std::string_view to_string(RuleId rule) {
  switch (rule) {
    case RuleId::R1_concat_select:
      return "R1_concat_select";
    case RuleId::R2_split_select:
      return "R2_split_select";
    case RuleId::R3_convert_select:
      return "R3_convert_select";
    case RuleId::R4_agg_convert_project:
      return "R4_agg_convert_project";
    case RuleId::R5_agg_select_join:
      return "R5_agg_select_join";
    case RuleId::B_project:
      return "B_project";
    case RuleId::B_dateparts:
      return "B_dateparts";
  }
  return "?";
}

bool GenerationReport::has_skipped() const {
  return std::any_of(lines.begin(), lines.end(), [](const ReportLine& l) { return !l.rule; });
}

std::string GenerationReport::text() const {
  std::vector<ReportLine> sorted = lines;
  std::stable_sort(sorted.begin(), sorted.end(), [](const ReportLine& a, const ReportLine& b) { return a.path < b.path; });
  std::string out;
  for (const auto& line : sorted) {
    out += line.path + ": ";
    out += line.rule ? std::string(to_string(*line.rule)) : "SKIPPED(" + line.error + ")";
    out += '\n';
  }
  return out;
}

std::vector<std::string> FactLoadPlan::columns() const {
  std::vector<std::string> out = key_columns;
  out.insert(out.end(), measure_columns.begin(), measure_columns.end());
  return out;
}

namespace {

template <typename T>
const T* spec_of(const AttributeMapping& entry) {
  return entry.transform ? std::get_if<T>(&*entry.transform) : nullptr;
}

ColumnRef canonical_ref(const SourceSchema& src, std::string_view table, std::string_view column) {
  const Table* t = src.find_table(table);
  const Column* c = t ? t->find_column(column) : nullptr;
  if (c == nullptr) {
    throw PlanBuildError("unknown source attribute " + std::string(table) + "." + std::string(column));
  }
  return ColumnRef{t->name, c->name};
}

ColumnRef corr_ref(const SourceSchema& src, const Correspondence& corr) {
  return canonical_ref(src, corr.table, corr.attribute);
}

std::string canonical_table(const SourceSchema& src, std::string_view table) {
  const Table* t = src.find_table(table);
  if (t == nullptr) throw PlanBuildError("unknown source table " + std::string(table));
  return t->name;
}

std::set<std::string> formula_tables(const AttributeMapping& entry, const SourceSchema& src) {
  std::set<std::string> out;
  if (const auto* agg = spec_of<AggregateSpec>(entry); agg && agg->formula) {
    for (const auto& ref : formula_operands(*agg->formula)) {
      out.insert(canonical_table(src, ref.table.empty() ? entry.correspondences.front().table : ref.table));
    }
  }
  return out;
}

std::set<std::string> entry_tables(const AttributeMapping& entry, const SourceSchema& src) {
  std::set<std::string> out = formula_tables(entry, src);
  for (const auto& corr : entry.correspondences) {
    out.insert(canonical_table(src, corr.table));
  }
  return out;
}

ScalarExpr formula_expr(const Formula& f, const std::string& default_table, const SourceSchema& src) {
  if (const auto* ref = std::get_if<AttributeRef>(&f.node)) {
    return ScalarExpr::column(canonical_ref(src, ref->table.empty() ? default_table : ref->table, ref->attribute));
  }
  if (const auto* number = std::get_if<Decimal>(&f.node)) {
    return ScalarExpr::literal(*number);
  }
  const auto& b = std::get<FormulaBinary>(f.node);
  return ScalarExpr::arith(b.op, formula_expr(*b.lhs, default_table, src), formula_expr(*b.rhs, default_table, src));
}

EtlPlan apply_selects(EtlPlan chain, const AttributeMapping& entry, const SourceSchema& src) {
  for (const auto& corr : entry.correspondences) {
    if (corr.condition) {
      chain = plan::select(std::move(chain), corr_ref(src, corr), *corr.condition);
    }
  }
  return chain;
}

EtlPlan join_steps(EtlPlan chain, const JoinPath& path, std::set<std::string>& present) {
  for (const auto& step : path.steps) {
    if (!present.insert(fold_identifier(step.right_table)).second) continue;
    chain = plan::join(std::move(chain), plan::scan(step.right_table),
                       {JoinPredicate{{step.left_table, step.left_column}, {step.right_table, step.right_column}}});
  }
  return chain;
}

EtlPlan join_base(const SourceSchema& src, const std::string& root, const std::set<std::string>& tables) {
  std::set<std::string> targets;
  for (const auto& t : tables) {
    if (!same_identifier(t, root)) targets.insert(t);
  }
  std::set<std::string> present = {fold_identifier(root)};
  return join_steps(plan::scan(root), fk_join_path(src, root, targets), present);
}

/// Adds joins for tables the chain does not scan yet.
EtlPlan join_extend(EtlPlan chain, const SourceSchema& src, const std::set<std::string>& tables) {
  const auto scanned = plan_tables(chain);
  std::set<std::string> present;
  for (const auto& t : scanned) present.insert(fold_identifier(t));
  std::set<std::string> missing;
  for (const auto& t : tables) {
    if (present.count(fold_identifier(t)) == 0) missing.insert(t);
  }
  if (missing.empty()) return chain;
  return join_steps(std::move(chain), fk_join_path(src, scanned.front(), missing), present);
}

struct Item {
  std::string attribute;  // dimension attribute, measure or key loaded by this item
  std::string alias;      // empty keeps the column name
  std::optional<ScalarExpr> expr;
  std::optional<Aggregation> aggregation;
};

struct Contribution {
  EtlPlan chain;
  std::vector<Item> items;
};

/// Applies the entry's operators to a shared chain; the entry's outputs are
/// returned as items for the final projection or aggregation.
Contribution extend(const AttributeMapping& entry, RuleId rule, const SourceSchema& src, EtlPlan chain,
                    const Dimension* dim) {
  const Correspondence& first = entry.correspondences.front();
  const ColumnRef source = corr_ref(src, first);
  const std::vector<std::string> loaded =
      dim != nullptr ? loaded_attributes(entry, *dim) : output_names(entry);
  const ScalarExpr derived = ScalarExpr::column("", entry.target);
  Contribution c;

  switch (rule) {
    case RuleId::R1_concat_select: {
      const auto& spec = *spec_of<ConcatSpec>(entry);
      chain = apply_selects(std::move(chain), entry, src);
      std::vector<ColumnRef> parts;
      for (const auto& item : spec.order) {
        const auto dot = item.find('.');
        const std::string attribute = dot == std::string::npos ? item : item.substr(dot + 1);
        const std::string table = dot == std::string::npos ? "" : item.substr(0, dot);
        const auto it = std::find_if(entry.correspondences.begin(), entry.correspondences.end(), [&](const auto& corr) {
          return same_identifier(corr.attribute, attribute) && (table.empty() || same_identifier(corr.table, table));
        });
        if (it == entry.correspondences.end()) {
          throw PlanBuildError("concat part " + item + " matches no correspondence");
        }
        parts.push_back(corr_ref(src, *it));
      }
      c.chain = plan::concat(std::move(chain), std::move(parts), spec.separator, entry.target);
      c.items.push_back({loaded.front(), entry.target, derived, std::nullopt});
      break;
    }
    case RuleId::R2_split_select: {
      const auto& spec = *spec_of<SplitSpec>(entry);
      std::vector<SplitOutput> outputs;
      for (const auto& part : spec.parts) outputs.push_back({part.name, part.index});
      c.chain = plan::split(apply_selects(std::move(chain), entry, src), source, spec.delimiter, outputs);
      for (std::size_t i = 0; i < spec.parts.size(); ++i) {
        c.items.push_back({loaded.at(i), spec.parts[i].name, ScalarExpr::column("", spec.parts[i].name), std::nullopt});
      }
      break;
    }
    case RuleId::R3_convert_select: {
      const auto& spec = *spec_of<ConvertSpec>(entry);
      c.chain = plan::format_convert(apply_selects(std::move(chain), entry, src), source, spec.from, spec.to,
                                     entry.target);
      c.items.push_back({loaded.front(), entry.target, derived, std::nullopt});
      break;
    }
    case RuleId::R4_agg_convert_project:
    case RuleId::R5_agg_select_join: {
      const auto& spec = *spec_of<AggregateSpec>(entry);
      if (rule == RuleId::R5_agg_select_join) {
        chain = join_extend(std::move(chain), src, entry_tables(entry, src));
      }
      chain = apply_selects(std::move(chain), entry, src);
      ScalarExpr argument = ScalarExpr::column(source);
      if (spec.formula) {
        if (spec.convert) throw PlanBuildError("a conversion cannot be combined with a formula");
        argument = formula_expr(*spec.formula, first.table, src);
      } else if (spec.convert) {
        chain = plan::format_convert(std::move(chain), source, spec.convert->from, spec.convert->to, entry.target);
        argument = derived;
      }
      c.chain = std::move(chain);
      c.items.push_back({loaded.front(), entry.target, std::nullopt, Aggregation{spec.function, argument, entry.target}});
      break;
    }
    case RuleId::B_project: {
      c.chain = apply_selects(std::move(chain), entry, src);
      const std::string alias = same_identifier(entry.target, source.column) ? "" : entry.target;
      c.items.push_back({loaded.front(), alias, ScalarExpr::column(source), std::nullopt});
      break;
    }
    case RuleId::B_dateparts: {
      const auto& spec = *spec_of<DatePartsSpec>(entry);
      c.chain = apply_selects(std::move(chain), entry, src);
      for (std::size_t i = 0; i < spec.parts.size(); ++i) {
        c.items.push_back({loaded.at(i), spec.parts[i].name, ScalarExpr::date_part(spec.parts[i].part, source),
                           std::nullopt});
      }
      break;
    }
  }

  // Fail here, per entry, instead of in the assembled plan.
  PlanSchema schema;
  try {
    schema = plan_output_schema(c.chain, src);
    for (const auto& item : c.items) {
      const ScalarExpr& e = item.expr ? *item.expr : item.aggregation->argument;
      scalar_type(e, schema, "item " + item.attribute);
    }
  } catch (const PlanTypeError& e) {
    throw PlanBuildError(e.what());
  }
  for (const auto& item : c.items) {
    if (!item.aggregation) continue;
    const ExprType t = scalar_type(item.aggregation->argument, schema, "");
    const auto fn = item.aggregation->function;
    if ((fn == AggregateFn::Sum || fn == AggregateFn::Avg) && t.data_type != DataType::Number) {
      throw PlanBuildError(std::string(to_string(fn)) + " over a non-number argument for " + entry.path());
    }
  }
  return c;
}

void collect_refs(const ScalarExpr& e, std::vector<ColumnRef>& out) {
  if (const auto* ref = std::get_if<ColumnRef>(&e.node)) {
    out.push_back(*ref);
  } else if (const auto* d = std::get_if<DatePartExpr>(&e.node)) {
    out.push_back(d->column);
  } else if (const auto* a = std::get_if<ArithExpr>(&e.node)) {
    collect_refs(*a->lhs, out);
    collect_refs(*a->rhs, out);
  }
}

/// Final projection, preceded by γ when any item aggregates. Non-aggregated
/// items become the grouping keys.
EtlPlan finish(EtlPlan chain, const std::vector<Item>& items) {
  const bool aggregated = std::any_of(items.begin(), items.end(), [](const Item& i) { return i.aggregation.has_value(); });
  std::vector<ProjectItem> projection;
  if (!aggregated) {
    for (const auto& item : items) projection.push_back({*item.expr, item.alias});
    return plan::project(std::move(chain), std::move(projection));
  }
  std::vector<ColumnRef> group_by;
  std::vector<Aggregation> aggregations;
  for (const auto& item : items) {
    if (item.aggregation) {
      aggregations.push_back(*item.aggregation);
      projection.push_back({ScalarExpr::column("", item.aggregation->alias), ""});
      continue;
    }
    std::vector<ColumnRef> refs;
    collect_refs(*item.expr, refs);
    for (const auto& ref : refs) {
      if (std::find(group_by.begin(), group_by.end(), ref) == group_by.end()) group_by.push_back(ref);
    }
    projection.push_back({*item.expr, item.alias});
  }
  return plan::project(plan::aggregate(std::move(chain), std::move(group_by), std::move(aggregations)),
                       std::move(projection));
}

std::string skip_reason(const std::exception& e) {
  if (dynamic_cast<const NoApplicableRule*>(&e) != nullptr) return "NoApplicableRule";
  if (dynamic_cast<const NoJoinPath*>(&e) != nullptr) return e.what();
  return std::string("PlanBuildError: ") + e.what();
}

struct Prepared {
  const AttributeMapping* entry;
  RuleId rule;
  std::set<std::string> tables;
};

/// Classifies entries and checks that their tables are reachable from root.
std::vector<Prepared> prepare(const std::vector<AttributeMapping>& entries, const SourceSchema& src,
                              const std::string& root, GenerationReport& report) {
  std::vector<Prepared> out;
  for (const auto& entry : entries) {
    try {
      const RuleId rule = classify_entry(entry, src, root);
      auto tables = entry_tables(entry, src);
      std::set<std::string> targets;
      for (const auto& t : tables) {
        if (!same_identifier(t, root)) targets.insert(t);
      }
      fk_join_path(src, root, targets);
      out.push_back({&entry, rule, std::move(tables)});
    } catch (const EtlError& e) {
      report.lines.push_back({entry.path(), std::nullopt, skip_reason(e)});
    }
  }
  return out;
}

struct Assembly {
  EtlPlan chain;
  std::vector<Item> items;
  std::vector<std::pair<const Prepared*, std::string>> failures;
};

/// Joins the tables of `prepared` (plus `extra_tables`) and extends the chain
/// entry by entry, dropping entries whose operators do not fit and
/// rebuilding until no entry fails.
Assembly assemble(std::vector<Prepared>& prepared, const std::set<std::string>& extra_tables,
                  const SourceSchema& src, const std::string& root, const Dimension* dim) {
  Assembly result;
  std::vector<const Prepared*> active;
  for (const auto& p : prepared) active.push_back(&p);
  while (true) {
    std::set<std::string> tables = extra_tables;
    for (const auto* p : active) tables.insert(p->tables.begin(), p->tables.end());
    EtlPlan chain = join_base(src, root, tables);
    std::vector<Item> items;
    const Prepared* failed = nullptr;
    std::string reason;
    for (const auto* p : active) {
      try {
        Contribution c = extend(*p->entry, p->rule, src, chain, dim);
        chain = std::move(c.chain);
        items.insert(items.end(), c.items.begin(), c.items.end());
      } catch (const EtlError& e) {
        failed = p;
        reason = skip_reason(e);
        break;
      }
    }
    if (failed == nullptr) {
      result.chain = std::move(chain);
      result.items = std::move(items);
      return result;
    }
    result.failures.emplace_back(failed, reason);
    active.erase(std::find(active.begin(), active.end(), failed));
  }
}

}  // namespace

RuleId classify_entry(const AttributeMapping& entry, const SourceSchema& src, std::string_view primary_source) {
  const std::size_t card = entry.cardinality();
  const auto all_are = [&](SemanticRelation r) {
    return std::all_of(entry.correspondences.begin(), entry.correspondences.end(),
                       [&](const Correspondence& c) { return c.relation == r; });
  };
  if (card >= 2 && all_are(SemanticRelation::Hyponyme) && spec_of<ConcatSpec>(entry)) {
    return RuleId::R1_concat_select;
  }
  if (card == 1) {
    const Correspondence& corr = entry.correspondences.front();
    const SemanticRelation r = corr.relation;
    if (r == SemanticRelation::Hyponyme && spec_of<SplitSpec>(entry)) {
      return RuleId::R2_split_select;
    }
    if (r == SemanticRelation::Synonymie) {
      if (spec_of<AggregateSpec>(entry)) {
        if (formula_tables(entry, src).size() >= 2 || !same_identifier(corr.table, primary_source)) {
          return RuleId::R5_agg_select_join;
        }
        return RuleId::R4_agg_convert_project;
      }
      if (spec_of<ConvertSpec>(entry)) {
        return RuleId::R3_convert_select;
      }
    }
    if (r == SemanticRelation::Hyperonyme && spec_of<DatePartsSpec>(entry)) {
      const Column* column = src.find_column(corr.table, corr.attribute);
      if (column != nullptr && column->data_type == DataType::Date) {
        return RuleId::B_dateparts;
      }
    }
    if (r == SemanticRelation::Synonymie && !entry.transform) {
      return RuleId::B_project;
    }
  }
  throw NoApplicableRule(entry.path());
}

EtlPlan build_attribute_plan(const AttributeMapping& entry, RuleId rule, const SourceSchema& src,
                             const EtlPlan& base) {
  if (rule == RuleId::R4_agg_convert_project) {
    // γ(FC(π(δ*(base)))): narrow to the attribute before converting.
    const ColumnRef source = corr_ref(src, entry.correspondences.front());
    EtlPlan narrowed =
        plan::project(apply_selects(base, entry, src), {ProjectItem{ScalarExpr::column(source), ""}});
    Contribution c = extend(entry, rule, src, narrowed, nullptr);
    return plan::aggregate(c.chain, {}, {*c.items.front().aggregation});
  }
  Contribution c = extend(entry, rule, src, base, nullptr);
  switch (rule) {
    case RuleId::R1_concat_select:
    case RuleId::R2_split_select:
    case RuleId::R3_convert_select:
      return c.chain;
    case RuleId::R5_agg_select_join:
      return plan::aggregate(c.chain, {}, {*c.items.front().aggregation});
    default:
      return finish(c.chain, c.items);
  }
}

std::optional<DimensionLoadPlan> build_dimension_plan(const DimensionMapping& dm, const StarSchema& star,
                                                      const SourceSchema& src, GenerationReport& report) {
  const Dimension* dim = star.find_dimension(dm.dimension);
  if (dim == nullptr) {
    throw PlanBuildError("unknown dimension " + dm.dimension);
  }
  const std::string root = canonical_table(src, dm.primary_source_table);
  std::vector<Prepared> prepared = prepare(dm.attribute_entries, src, root, report);
  if (prepared.empty()) return std::nullopt;

  Assembly assembly = assemble(prepared, {}, src, root, dim);
  for (const auto& [p, reason] : assembly.failures) {
    report.lines.push_back({p->entry->path(), std::nullopt, reason});
  }
  for (const auto& p : prepared) {
    const bool failed = std::any_of(assembly.failures.begin(), assembly.failures.end(),
                                    [&](const auto& f) { return f.first == &p; });
    if (!failed) report.lines.push_back({p.entry->path(), p.rule, ""});
  }
  if (assembly.items.empty()) return std::nullopt;

  std::stable_sort(assembly.items.begin(), assembly.items.end(), [&](const Item& a, const Item& b) {
    return dim->attribute_index(a.attribute) < dim->attribute_index(b.attribute);
  });

  // Nn for not-null attributes whose value can be null.
  const PlanSchema schema = plan_output_schema(assembly.chain, src);
  std::vector<ColumnRef> not_null;
  for (const auto& item : assembly.items) {
    const DimAttribute* attribute = dim->find_attribute(item.attribute);
    if (attribute == nullptr || !attribute->not_null || !item.expr) continue;
    std::vector<ColumnRef> refs;
    collect_refs(*item.expr, refs);
    for (const auto& ref : refs) {
      auto index = schema.resolve(ref);
      if (index && schema.columns[*index].nullable &&
          std::find(not_null.begin(), not_null.end(), ref) == not_null.end()) {
        not_null.push_back(ref);
      }
    }
  }
  EtlPlan chain = assembly.chain;
  if (!not_null.empty()) {
    chain = plan::not_null(std::move(chain), std::move(not_null));
  }

  DimensionLoadPlan out;
  out.dimension = dim->name;
  out.plan = finish(std::move(chain), assembly.items);
  for (const auto& item : assembly.items) {
    out.columns.push_back(dim->attributes[dim->attribute_index(item.attribute)].name);
  }
  return out;
}

namespace {

struct FactKey {
  std::string name;
  ColumnRef source;
};

/// Natural key of `dim`: the plain column behind its finest level.
FactKey dimension_key(const Dimension& dim, const DimensionMapping& dm, const SourceSchema& src) {
  const DimAttribute* finest = dim.finest_level();
  if (finest == nullptr) throw PlanBuildError("dimension " + dim.name + " has no attributes");
  for (const auto& entry : dm.attribute_entries) {
    const auto loaded = loaded_attributes(entry, dim);
    for (std::size_t i = 0; i < loaded.size(); ++i) {
      if (!same_identifier(loaded[i], finest->name)) continue;
      if (entry.cardinality() == 1) {
        if (!entry.transform) {
          return {finest->name, corr_ref(src, entry.correspondences.front())};
        }
        if (const auto* dates = spec_of<DatePartsSpec>(entry); dates && dates->parts.at(i).part == DatePartKind::Day) {
          return {finest->name, corr_ref(src, entry.correspondences.front())};
        }
      }
      throw PlanBuildError("key " + finest->name + " of dimension " + dim.name + " is not a plain source column");
    }
  }
  throw PlanBuildError("key " + finest->name + " of dimension " + dim.name + " has no mapping entry");
}

}  // namespace

std::optional<FactLoadPlan> build_fact_plan(const FactMapping& fm, const MappingDoc& mapping, const StarSchema& star,
                                            const SourceSchema& src, GenerationReport& report) {
  const std::string root = canonical_table(src, fm.primary_source_table);

  std::vector<FactKey> keys;
  std::set<std::string> key_tables;
  for (const auto& ref : star.fact.dimension_refs) {
    const Dimension* dim = star.find_dimension(ref);
    const DimensionMapping* dm = mapping.find_dimension(ref);
    const DimAttribute* finest = dim ? dim->finest_level() : nullptr;
    const std::string path = star.fact.name + "." + (finest ? finest->name : ref);
    try {
      if (dim == nullptr || dm == nullptr) throw PlanBuildError("dimension " + ref + " is not mapped");
      FactKey key = dimension_key(*dim, *dm, src);
      if (!same_identifier(key.source.table, root)) {
        fk_join_path(src, root, {key.source.table});
      }
      key_tables.insert(key.source.table);
      keys.push_back(std::move(key));
    } catch (const EtlError& e) {
      report.lines.push_back({path, std::nullopt, skip_reason(e)});
    }
  }

  std::vector<Prepared> prepared = prepare(fm.measure_entries, src, root, report);
  Assembly assembly = assemble(prepared, key_tables, src, root, nullptr);
  for (const auto& [p, reason] : assembly.failures) {
    report.lines.push_back({p->entry->path(), std::nullopt, reason});
  }
  for (const auto& p : prepared) {
    const bool failed = std::any_of(assembly.failures.begin(), assembly.failures.end(),
                                    [&](const auto& f) { return f.first == &p; });
    if (!failed) report.lines.push_back({p.entry->path(), p.rule, ""});
  }
  if (assembly.items.empty() && keys.empty()) return std::nullopt;

  std::stable_sort(assembly.items.begin(), assembly.items.end(), [&](const Item& a, const Item& b) {
    auto index = [&](const std::string& name) {
      for (std::size_t i = 0; i < star.fact.measures.size(); ++i) {
        if (same_identifier(star.fact.measures[i].name, name)) return i;
      }
      return star.fact.measures.size();
    };
    return index(a.attribute) < index(b.attribute);
  });

  FactLoadPlan out;
  out.fact = star.fact.name;
  std::vector<Item> items;
  for (const auto& key : keys) {
    const std::string alias = same_identifier(key.name, key.source.column) ? "" : key.name;
    items.push_back({key.name, alias, ScalarExpr::column(key.source), std::nullopt});
    out.key_columns.push_back(key.name);
  }
  for (const auto& item : assembly.items) {
    items.push_back(item);
    out.measure_columns.push_back(star.fact.find_measure(item.attribute)->name);
  }
  out.plan = finish(assembly.chain, items);
  return out;
}

Generation generate(const MappingDoc& mapping, const StarSchema& star, const SourceSchema& src) {
  Generation g;
  for (const auto& dim : star.dimensions) {
    const DimensionMapping* dm = mapping.find_dimension(dim.name);
    if (dm == nullptr) continue;
    if (auto plan = build_dimension_plan(*dm, star, src, g.report)) {
      g.dimensions.push_back(std::move(*plan));
    }
  }
  if (mapping.fact_entry) {
    g.fact = build_fact_plan(*mapping.fact_entry, mapping, star, src, g.report);
  }
  return g;
}

}  // namespace etlgen
