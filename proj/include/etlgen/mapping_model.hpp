#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "etlgen/condition.hpp"
#include "etlgen/schema_model.hpp"
#include "etlgen/star_model.hpp"
#include "etlgen/vocabulary.hpp"

namespace etlgen {

enum class SemanticRelation { Synonymie, Hyperonyme, Hyponyme, Holonyme, Meronyme };

std::string_view to_string(SemanticRelation relation);
/// Case-insensitive; nullopt for names outside the closed set.
std::optional<SemanticRelation> parse_relation(std::string_view text);

/// Source attribute reference; `table` may be empty inside formulas.
struct AttributeRef {
  std::string table;
  std::string attribute;

  bool operator==(const AttributeRef&) const = default;
};

struct Formula;

struct FormulaBinary {
  ArithOp op = ArithOp::Add;
  std::shared_ptr<const Formula> lhs;
  std::shared_ptr<const Formula> rhs;

  bool operator==(const FormulaBinary& other) const;
};

/// Arithmetic over source attributes and numeric literals.
struct Formula {
  std::variant<AttributeRef, Decimal, FormulaBinary> node;

  bool operator==(const Formula&) const = default;
};

/// Grammar: expr := term (('+'|'-') term)*; term := factor (('*'|'/') factor)*;
/// factor := number | name ['.' name] | '(' expr ')'. Throws MappingError.
Formula parse_formula(std::string_view text);
std::string print_formula(const Formula& f);
/// Operand references in left-to-right order.
std::vector<AttributeRef> formula_operands(const Formula& f);

struct Correspondence {
  std::string table;
  std::string attribute;
  SemanticRelation relation = SemanticRelation::Synonymie;
  std::optional<Condition> condition;

  bool operator==(const Correspondence&) const = default;
};

struct ConcatSpec {
  std::vector<std::string> order;  // source attribute names, possibly table-qualified
  std::string separator;

  bool operator==(const ConcatSpec&) const = default;
};

struct SplitPart {
  std::string name;
  std::size_t index = 0;

  bool operator==(const SplitPart&) const = default;
};

struct SplitSpec {
  std::vector<SplitPart> parts;
  std::string delimiter;

  bool operator==(const SplitSpec&) const = default;
};

struct ConvertSpec {
  Format from = Format::String;
  Format to = Format::String;

  bool operator==(const ConvertSpec&) const = default;
};

struct AggregateSpec {
  AggregateFn function = AggregateFn::Sum;
  std::optional<ConvertSpec> convert;
  std::optional<Formula> formula;

  bool operator==(const AggregateSpec&) const = default;
};

struct DatePartSpec {
  std::string name;
  DatePartKind part = DatePartKind::Day;

  bool operator==(const DatePartSpec&) const = default;
};

struct DatePartsSpec {
  std::vector<DatePartSpec> parts;

  bool operator==(const DatePartsSpec&) const = default;
};

using TransformSpec = std::variant<ConcatSpec, SplitSpec, ConvertSpec, AggregateSpec, DatePartsSpec>;

enum class TargetKind { Parameter, WeakAttribute, Measure };

struct AttributeMapping {
  std::string owner;  // dimension or fact name
  std::string target;
  TargetKind kind = TargetKind::Parameter;
  std::vector<Correspondence> correspondences;
  std::optional<TransformSpec> transform;

  std::string path() const { return owner + "." + target; }
  std::size_t cardinality() const { return correspondences.size(); }
  bool operator==(const AttributeMapping&) const = default;
};

struct DimensionMapping {
  std::string dimension;
  std::string primary_source_table;
  SemanticRelation relation = SemanticRelation::Synonymie;
  std::string hierarchy;
  std::vector<AttributeMapping> attribute_entries;

  bool operator==(const DimensionMapping&) const = default;
};

struct FactMapping {
  std::string fact;
  std::string primary_source_table;
  std::vector<AttributeMapping> measure_entries;

  bool operator==(const FactMapping&) const = default;
};

struct MappingDoc {
  std::string fact_name;
  std::optional<FactMapping> fact_entry;
  std::vector<DimensionMapping> dimension_entries;

  const DimensionMapping* find_dimension(std::string_view dimension) const;
  bool operator==(const MappingDoc&) const = default;
};

/// Parses a `<mapping>` document, checking local invariants only.
/// Throws SyntaxError or MappingError.
MappingDoc parse_mapping(const std::string& document_text, std::string_view source_name = "<mapping>");

/// Output column names produced by a Split or DateParts entry, in part
/// order; {entry.target} for every other entry.
std::vector<std::string> output_names(const AttributeMapping& entry);

/// Dimension attributes loaded by each output of `entry`, aligned with
/// output_names(). A part named after a dimension attribute loads it; a part
/// with any other name is an alias for the entry's own target.
std::vector<std::string> loaded_attributes(const AttributeMapping& entry, const Dimension& dim);

/// Cross-document checks against the source and star schemas. Sorted by path.
std::vector<Violation> validate_mapping(const MappingDoc& m, const SourceSchema& src, const StarSchema& star);

}  // namespace etlgen
