#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "etlgen/algebra.hpp"
#include "etlgen/mapping_model.hpp"
#include "etlgen/schema_model.hpp"
#include "etlgen/star_model.hpp"

namespace etlgen {

enum class RuleId {
  R1_concat_select,
  R2_split_select,
  R3_convert_select,
  R4_agg_convert_project,
  R5_agg_select_join,
  B_project,
  B_dateparts,
};

std::string_view to_string(RuleId rule);

/// Picks the generation rule for a validated entry; first match wins:
///   R1  card >= 2, all hyponyme, concat
///   R2  card = 1, hyponyme, split
///   R5  card = 1, synonymie, aggregate whose formula spans >= 2 tables or
///       whose correspondence table is not the primary source
///   R4  card = 1, synonymie, aggregate
///   R3  card = 1, synonymie, convert
///   B_dateparts  card = 1, hyperonyme, date column, dateparts
///   B_project    card = 1, synonymie, no transform
/// Throws NoApplicableRule otherwise (holonyme and meronyme always land here).
RuleId classify_entry(const AttributeMapping& entry, const SourceSchema& src, std::string_view primary_source);

/// Composes the entry's operators over `base`:
///   R1 C(δ*(base))            R2 S(δ(base))         R3 FC(δ(base))
///   R4 γ(FC(π(δ*(base))))     R5 γ(δ(JOIN(base, formula tables)))
///   B_project π(δ*(base))     B_dateparts π(base) of date parts
/// δ* is one Select per correspondence that carries a condition.
/// Throws PlanBuildError when the entry does not fit `base`.
EtlPlan build_attribute_plan(const AttributeMapping& entry, RuleId rule, const SourceSchema& src,
                             const EtlPlan& base);

/// One line per mapping entry: `<owner>.<target>: <RuleId>` or
/// `<owner>.<target>: SKIPPED(<error>)`.
struct ReportLine {
  std::string path;
  std::optional<RuleId> rule;
  std::string error;

  bool operator==(const ReportLine&) const = default;
};

struct GenerationReport {
  std::vector<ReportLine> lines;

  bool has_skipped() const;
  /// Lines stably sorted by element path, newline-terminated.
  std::string text() const;
};

/// Output column i of `plan` loads `columns[i]` (INSERT ... SELECT is
/// positional; plan output names may be SQL aliases).
struct DimensionLoadPlan {
  std::string dimension;
  EtlPlan plan;
  std::vector<std::string> columns;
};

struct FactLoadPlan {
  std::string fact;
  EtlPlan plan;
  std::vector<std::string> key_columns;
  std::vector<std::string> measure_columns;

  /// Keys first, then measures.
  std::vector<std::string> columns() const;
};

/// Builds the joined base plus every classifiable entry of one dimension.
/// Entries that fail are recorded in `report` and left out of the plan.
/// Returns nullopt when no attribute could be built.
std::optional<DimensionLoadPlan> build_dimension_plan(const DimensionMapping& dim, const StarSchema& star,
                                                      const SourceSchema& src, GenerationReport& report);

/// Keys come from the mapping entry of each referenced dimension's finest
/// level; measures are grouped by those keys when any of them aggregates.
std::optional<FactLoadPlan> build_fact_plan(const FactMapping& fact, const MappingDoc& mapping,
                                            const StarSchema& star, const SourceSchema& src,
                                            GenerationReport& report);

struct Generation {
  std::vector<DimensionLoadPlan> dimensions;  // star declaration order
  std::optional<FactLoadPlan> fact;
  GenerationReport report;
};

/// Whole-mapping generation. Inputs must already pass validate_mapping.
Generation generate(const MappingDoc& mapping, const StarSchema& star, const SourceSchema& src);

}  // namespace etlgen
