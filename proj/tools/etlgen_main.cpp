#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "etlgen/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"etlgen: generate ETL plans and SQL load scripts from a source-to-star mapping"};
  etlgen::RunConfig config;
  std::string data_dir;
  app.add_option("--schema", config.schema_path, "source schema XML")->required();
  app.add_option("--star", config.star_path, "star schema XML")->required();
  app.add_option("--mapping", config.mapping_path, "mapping XML")->required();
  app.add_option("--data", data_dir, "directory of <table>.csv source files (execute mode)");
  app.add_option("--out", config.out_dir, "output directory")->required();
  const std::map<std::string, etlgen::Mode> modes = {
      {"validate", etlgen::Mode::Validate}, {"generate", etlgen::Mode::Generate}, {"execute", etlgen::Mode::Execute}};
  app.add_option("--mode", config.mode, "validate | generate | execute")
      ->transform(CLI::CheckedTransformer(modes, CLI::ignore_case));
  app.add_flag("--emit-plan", config.emit_plan, "also write plan.txt");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "etlgen: error: " << e.what() << '\n';
    return 1;
  }
  if (!data_dir.empty()) config.data_dir = data_dir;
  return etlgen::run(config, std::cerr);
}
