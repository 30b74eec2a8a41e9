#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "etlgen/common.hpp"

namespace etlgen {

struct ForeignKey {
  std::string table;
  std::string column;

  bool operator==(const ForeignKey&) const = default;
};

struct Column {
  std::string name;
  DataType data_type = DataType::String;
  bool nullable = false;
  std::optional<ForeignKey> foreign_key;

  bool operator==(const Column&) const = default;
};

struct Table {
  std::string name;
  std::vector<Column> columns;
  std::vector<std::string> primary_key;

  const Column* find_column(std::string_view column) const;
  bool operator==(const Table&) const = default;
};

/// Relational source schema: tables in document order with their keys.
struct SourceSchema {
  std::string name;
  std::vector<Table> tables;

  const Table* find_table(std::string_view table) const;
  const Column* find_column(std::string_view table, std::string_view column) const;
  bool operator==(const SourceSchema&) const = default;
};

/// One equi-join hop. `left_table` is the side already connected to the root.
struct JoinStep {
  std::string left_table;
  std::string left_column;
  std::string right_table;
  std::string right_column;

  bool operator==(const JoinStep&) const = default;
};

struct JoinPath {
  std::vector<JoinStep> steps;

  bool empty() const { return steps.empty(); }
  bool operator==(const JoinPath&) const = default;
};

/// Checks the schema invariants; empty when the schema is consistent.
std::vector<Violation> validate_source_schema(const SourceSchema& schema);

/// Parses a `<schema>` document. Throws SyntaxError or SchemaError.
SourceSchema parse_source_schema(const std::string& document_text,
                                 std::string_view source_name = "<schema>");

std::string serialize_source_schema(const SourceSchema& schema);

/// Breadth-first search over the undirected FK graph. The returned steps are
/// the union of the shortest root-to-target chains, in discovery order, so
/// every step's left table is connected by the preceding steps. Ties are
/// broken by (table name, column name). Throws NoJoinPath.
JoinPath fk_join_path(const SourceSchema& schema, std::string_view root,
                      const std::set<std::string>& targets);

}  // namespace etlgen
