#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "etlgen/mapping_model.hpp"
#include "etlgen/schema_model.hpp"
#include "etlgen/star_model.hpp"

namespace etlgen::testing {

inline std::filesystem::path fixture_path(const std::string& relative) {
  return std::filesystem::path(ETLGEN_FIXTURE_DIR) / relative;
}

inline std::string read_fixture(const std::string& relative) {
  std::ifstream in(fixture_path(relative), std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct Inputs {
  SourceSchema src;
  StarSchema star;
  MappingDoc mapping;
};

/// `name` is a fixture directory holding schema.xml, star.xml, mapping.xml.
inline Inputs load_inputs(const std::string& name) {
  return {parse_source_schema(read_fixture(name + "/schema.xml")), parse_star_schema(read_fixture(name + "/star.xml")),
          parse_mapping(read_fixture(name + "/mapping.xml"))};
}

}  // namespace etlgen::testing
