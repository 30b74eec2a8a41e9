#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace etlgen {

enum class DataType { Number, String, Date };

std::string_view to_string(DataType type);
/// Parses "number" / "string" / "date"; returns false on anything else.
bool parse_data_type(std::string_view text, DataType& out);

/// Case-insensitive, accent-insensitive identifier key. Storage keeps the
/// original spelling; this is only used for comparisons and lookups.
std::string fold_identifier(std::string_view name);
bool same_identifier(std::string_view a, std::string_view b);

/// A single validation finding. Lists of these are returned sorted by path.
struct Violation {
  std::string path;
  std::string message;

  bool operator==(const Violation&) const = default;
  auto operator<=>(const Violation&) const = default;
};

void sort_violations(std::vector<Violation>& violations);
std::string format_violations(const std::vector<Violation>& violations);

class EtlError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed document text. `location` is a 1-based line number, 0 if unknown.
class SyntaxError : public EtlError {
 public:
  SyntaxError(std::string source, std::size_t line, const std::string& detail);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class SchemaError : public EtlError {
 public:
  using EtlError::EtlError;
};

class StarSchemaError : public EtlError {
 public:
  using EtlError::EtlError;
};

class MappingError : public EtlError {
 public:
  using EtlError::EtlError;
};

class ConditionSyntaxError : public EtlError {
 public:
  ConditionSyntaxError(std::size_t position, const std::string& detail);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class NoJoinPath : public EtlError {
 public:
  explicit NoJoinPath(std::string table);
  const std::string& table() const { return table_; }

 private:
  std::string table_;
};

class PlanTypeError : public EtlError {
 public:
  PlanTypeError(std::string node_path, const std::string& detail);
  const std::string& node_path() const { return node_path_; }
  const std::string& detail() const { return detail_; }

 private:
  std::string node_path_;
  std::string detail_;
};

class NoApplicableRule : public EtlError {
 public:
  explicit NoApplicableRule(const std::string& entry_path);
};

class PlanBuildError : public EtlError {
 public:
  using EtlError::EtlError;
};

class EmitError : public EtlError {
 public:
  using EtlError::EtlError;
};

class CsvError : public EtlError {
 public:
  CsvError(std::size_t line, std::size_t column, const std::string& detail);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace etlgen
