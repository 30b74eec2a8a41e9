#include "etlgen/pipeline.hpp"

#include <fstream>
#include <sstream>

#include "etlgen/executor.hpp"
#include "etlgen/mapping_model.hpp"
#include "etlgen/rule_engine.hpp"
#include "etlgen/schema_model.hpp"
#include "etlgen/sql_emitter.hpp"
#include "etlgen/star_model.hpp"

namespace etlgen {

namespace fs = std::filesystem;

namespace {

struct Fatal : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Fatal("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << content) || !out.flush()) throw Fatal("cannot write " + path.string());
}

fs::path find_csv(const fs::path& dir, const std::string& table) {
  const fs::path exact = dir / (table + ".csv");
  if (fs::exists(exact)) return exact;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.path().extension() == ".csv" && same_identifier(entry.path().stem().string(), table)) {
      return entry.path();
    }
  }
  return {};
}

Database load_database(const SourceSchema& src, const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Fatal("data directory not found: " + dir.string());
  Database db;
  db.schema = src;
  for (const auto& table : src.tables) {
    const fs::path path = find_csv(dir, table.name);
    if (path.empty()) continue;
    try {
      db.add(table.name, load_table_csv(read_file(path), table));
    } catch (const CsvError& e) {
      throw Fatal(path.filename().string() + ": " + e.what());
    }
  }
  return db;
}

void require_tables(const EtlPlan& plan, const Database& db) {
  for (const auto& t : plan_tables(plan)) {
    if (db.find(t) == nullptr) throw Fatal("no data file for source table " + t);
  }
}

std::string oneline(std::string text) {
  for (auto& ch : text) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  return text;
}

int run_checked(const RunConfig& config) {
  if ((config.mode == Mode::Execute) != config.data_dir.has_value()) {
    throw Fatal(config.mode == Mode::Execute ? "execute mode requires --data"
                                             : "--data is only accepted in execute mode");
  }
  const SourceSchema src = parse_source_schema(read_file(config.schema_path), config.schema_path.filename().string());
  const StarSchema star = parse_star_schema(read_file(config.star_path), config.star_path.filename().string());
  const MappingDoc mapping = parse_mapping(read_file(config.mapping_path), config.mapping_path.filename().string());

  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (!fs::is_directory(config.out_dir)) throw Fatal("cannot create output directory " + config.out_dir.string());

  const auto violations = validate_mapping(mapping, src, star);
  write_file(config.out_dir / "violations.txt", format_violations(violations));
  if (!violations.empty()) {
    if (config.mode == Mode::Validate) return 1;
    throw Fatal("mapping has " + std::to_string(violations.size()) + " violation(s), see violations.txt");
  }

  const Generation generation = generate(mapping, star, src);
  write_file(config.out_dir / "report.txt", generation.report.text());
  const int status = generation.report.has_skipped() ? 2 : 0;
  if (config.mode == Mode::Validate) return status;

  write_file(config.out_dir / "load.sql", emit_script(generation, src));
  if (config.emit_plan) {
    std::string text;
    for (const auto& d : generation.dimensions) text += "-- " + d.dimension + "\n" + render_plan(d.plan) + "\n";
    if (generation.fact) text += "-- " + generation.fact->fact + "\n" + render_plan(generation.fact->plan) + "\n";
    write_file(config.out_dir / "plan.txt", text);
  }
  if (config.mode == Mode::Generate) return status;

  const Database db = load_database(src, *config.data_dir);
  for (const auto& d : generation.dimensions) {
    require_tables(d.plan, db);
    write_file(config.out_dir / (d.dimension + ".out.csv"), write_csv(d.columns, eval_plan(d.plan, db)));
  }
  if (generation.fact) {
    const auto& f = *generation.fact;
    require_tables(f.plan, db);
    write_file(config.out_dir / (f.fact + ".out.csv"), write_csv(f.columns(), eval_plan(f.plan, db)));
  }
  return status;
}

}  // namespace

int run(const RunConfig& config, std::ostream& err) {
  try {
    return run_checked(config);
  } catch (const std::exception& e) {
    err << "etlgen: error: " << oneline(e.what()) << '\n';
    return 1;
  }
}

}  // namespace etlgen
