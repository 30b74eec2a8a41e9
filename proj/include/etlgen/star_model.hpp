#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "etlgen/common.hpp"

namespace etlgen {

struct Measure {
  std::string name;
  DataType data_type = DataType::Number;

  bool operator==(const Measure&) const = default;
};

struct Fact {
  std::string name;
  std::vector<Measure> measures;
  std::vector<std::string> dimension_refs;

  const Measure* find_measure(std::string_view measure) const;
  bool operator==(const Fact&) const = default;
};

enum class AttributeKind { Parameter, WeakAttribute };

struct DimAttribute {
  std::string name;
  AttributeKind kind = AttributeKind::Parameter;
  DataType data_type = DataType::String;
  bool not_null = false;

  bool operator==(const DimAttribute&) const = default;
};

/// Levels are stored finest first.
struct Hierarchy {
  std::string name;
  std::vector<std::string> levels;

  bool operator==(const Hierarchy&) const = default;
};

struct Dimension {
  std::string name;
  std::vector<Hierarchy> hierarchies;
  std::vector<DimAttribute> attributes;

  const DimAttribute* find_attribute(std::string_view attribute) const;
  /// Index into `attributes`, or npos.
  std::size_t attribute_index(std::string_view attribute) const;
  const Hierarchy* find_hierarchy(std::string_view hierarchy) const;
  /// Finest level of the first hierarchy, falling back to the first attribute.
  const DimAttribute* finest_level() const;
  bool operator==(const Dimension&) const = default;
};

struct StarSchema {
  std::string name;
  Fact fact;
  std::vector<Dimension> dimensions;

  const Dimension* find_dimension(std::string_view dimension) const;
  bool operator==(const StarSchema&) const = default;
};

std::string_view to_string(AttributeKind kind);

std::vector<Violation> validate_star(const StarSchema& star);

/// Parses a `<star>` document. Throws SyntaxError or StarSchemaError.
StarSchema parse_star_schema(const std::string& document_text,
                             std::string_view source_name = "<star>");

std::string serialize_star_schema(const StarSchema& star);

}  // namespace etlgen
