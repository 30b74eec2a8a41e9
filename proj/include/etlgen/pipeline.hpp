#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace etlgen {

enum class Mode { Validate, Generate, Execute };

struct RunConfig {
  std::filesystem::path schema_path;
  std::filesystem::path star_path;
  std::filesystem::path mapping_path;
  std::optional<std::filesystem::path> data_dir;  // required iff mode == Execute
  std::filesystem::path out_dir;
  Mode mode = Mode::Generate;
  bool emit_plan = false;
};

/// Writes into out_dir:
///   violations.txt       always (empty when the inputs are consistent)
///   report.txt           once the mapping validates
///   load.sql, plan.txt   generate and execute (plan.txt only with emit_plan)
///   <target>.out.csv     execute; source data is read from <table>.csv
/// Returns 0 on full success, 2 when some entry was skipped, 1 on fatal
/// errors (diagnostic written to `err` as one line).
int run(const RunConfig& config, std::ostream& err);

}  // namespace etlgen
