#include "etlgen/common.hpp"

#include <algorithm>
#include <cctype>

namespace etlgen {

std::string_view to_string(DataType type) {
  switch (type) {
    case DataType::Number:
      return "number";
    case DataType::String:
      return "string";
    case DataType::Date:
      return "date";
  }
  return "?";
}

bool parse_data_type(std::string_view text, DataType& out) {
  if (text == "number") {
    out = DataType::Number;
  } else if (text == "string") {
    out = DataType::String;
  } else if (text == "date") {
    out = DataType::Date;
  } else {
    return false;
  }
  return true;
}

namespace {

// Latin-1 supplement (U+00C0..U+00FF) folded to an unaccented lowercase ASCII
// letter; 0 means "keep as is".
constexpr char kLatin1Fold[64] = {
    'a', 'a', 'a', 'a', 'a', 'a', 0,   'c', 'e', 'e', 'e', 'e', 'i', 'i', 'i', 'i',
    0,   'n', 'o', 'o', 'o', 'o', 'o', 0,   0,   'u', 'u', 'u', 'u', 'y', 0,   0,
    'a', 'a', 'a', 'a', 'a', 'a', 0,   'c', 'e', 'e', 'e', 'e', 'i', 'i', 'i', 'i',
    0,   'n', 'o', 'o', 'o', 'o', 'o', 0,   0,   'u', 'u', 'u', 'u', 'y', 0,   'y',
};

}  // namespace

std::string fold_identifier(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  for (std::size_t i = 0; i < name.size(); ++i) {
    const auto c = static_cast<unsigned char>(name[i]);
    if (c < 0x80) {
      out.push_back(static_cast<char>(std::tolower(c)));
      continue;
    }
    // Two-byte UTF-8 sequence for U+00C0..U+00FF.
    if ((c == 0xC3) && i + 1 < name.size()) {
      const auto next = static_cast<unsigned char>(name[i + 1]);
      const unsigned code = 0xC0u + (next & 0x3Fu);
      if ((next & 0xC0u) == 0x80u && code >= 0xC0u && code <= 0xFFu) {
        if (char folded = kLatin1Fold[code - 0xC0u]; folded != 0) {
          out.push_back(folded);
          ++i;
          continue;
        }
      }
    }
    out.push_back(static_cast<char>(c));
  }
  return out;
}

bool same_identifier(std::string_view a, std::string_view b) {
  return fold_identifier(a) == fold_identifier(b);
}

void sort_violations(std::vector<Violation>& violations) {
  std::stable_sort(violations.begin(), violations.end(),
                   [](const Violation& a, const Violation& b) { return a.path < b.path; });
}

std::string format_violations(const std::vector<Violation>& violations) {
  std::string out;
  for (const auto& v : violations) {
    out += v.path;
    out += ": ";
    out += v.message;
    out += '\n';
  }
  return out;
}

SyntaxError::SyntaxError(std::string source, std::size_t line, const std::string& detail)
    : EtlError(source + ":" + std::to_string(line) + ": " + detail), line_(line) {}

ConditionSyntaxError::ConditionSyntaxError(std::size_t position, const std::string& detail)
    : EtlError("condition syntax error at " + std::to_string(position) + ": " + detail),
      position_(position) {}

NoJoinPath::NoJoinPath(std::string table)
    : EtlError("NoJoinPath(" + table + ")"), table_(std::move(table)) {}

PlanTypeError::PlanTypeError(std::string node_path, const std::string& detail)
    : EtlError(node_path + ": " + detail), node_path_(std::move(node_path)), detail_(detail) {}

NoApplicableRule::NoApplicableRule(const std::string& entry_path)
    : EtlError("NoApplicableRule(" + entry_path + ")") {}

CsvError::CsvError(std::size_t line, std::size_t column, const std::string& detail)
    : EtlError("csv line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
               detail),
      line_(line),
      column_(column) {}

}  // namespace etlgen
