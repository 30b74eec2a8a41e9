#include <doctest.h>

#include <cstdlib>
#include <sstream>
#include <unistd.h>

#include "etlgen/pipeline.hpp"
#include "etlgen/sql_emitter.hpp"
#include "fixtures.hpp"

using namespace etlgen;
using namespace etlgen::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("etlgen_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  return dir;
}

RunConfig config_for(const std::string& fixture, Mode mode, const fs::path& out) {
  RunConfig c;
  c.schema_path = fixture_path(fixture + "/schema.xml");
  c.star_path = fixture_path(fixture + "/star.xml");
  c.mapping_path = fixture_path(fixture + "/mapping.xml");
  c.out_dir = out;
  c.mode = mode;
  if (mode == Mode::Execute) c.data_dir = fixture_path(fixture + "/data");
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int shell(const std::string& args) {
  const std::string cmd = std::string(ETLGEN_BINARY) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("generate writes the script and the report") {
  const fs::path out = scratch("generate");
  std::ostringstream err;
  RunConfig c = config_for("sales", Mode::Generate, out);
  c.emit_plan = true;
  CHECK(run(c, err) == 0);
  CHECK(err.str().empty());
  CHECK(fs::exists(out / "load.sql"));
  CHECK(fs::exists(out / "plan.txt"));
  CHECK(slurp(out / "violations.txt").empty());
  CHECK(slurp(out / "report.txt").find("Dim_client.adresse: R1_concat_select\n") != std::string::npos);
  const std::string sql = slurp(out / "load.sql");
  CHECK(sql.find("INSERT INTO Dim_Produit") != std::string::npos);
  CHECK_FALSE(fs::exists(out / "Dim_client.out.csv"));
}

TEST_CASE("execute writes one csv per target") {
  const fs::path out = scratch("execute");
  std::ostringstream err;
  CHECK(run(config_for("sales", Mode::Execute, out), err) == 0);
  const std::string client = slurp(out / "Dim_client.out.csv");
  CHECK(client.rfind("codeC,nom,prenom,adresse\n", 0) == 0);
  CHECK(client.find("\n5,BBB,BBB,5000 SOUSSE\n") != std::string::npos);
  for (const char* f : {"Dim_Produit.out.csv", "temps.out.csv", "vente.out.csv"}) CHECK(fs::exists(out / f));
  CHECK_FALSE(fs::exists(out / "plan.txt"));
}

TEST_CASE("validate and partial generation exit with 2") {
  std::ostringstream err;
  const fs::path out = scratch("validate");
  CHECK(run(config_for("coverage", Mode::Validate, out), err) == 2);
  CHECK(slurp(out / "report.txt").find("Dim_contact.nom: SKIPPED(NoApplicableRule)") != std::string::npos);
  CHECK_FALSE(fs::exists(out / "load.sql"));
  CHECK(run(config_for("coverage", Mode::Execute, scratch("partial")), err) == 2);
  CHECK(run(config_for("sales", Mode::Validate, scratch("clean")), err) == 0);
}

TEST_CASE("mapping violations") {
  const fs::path dir = scratch("bad_mapping");
  fs::create_directories(dir);
  std::string text = read_fixture("sales/mapping.xml");
  text.replace(text.find("attribute=\"prenom\""), 18, "attribute=\"surnom\"");
  std::ofstream(dir / "mapping.xml") << text;
  RunConfig c = config_for("sales", Mode::Validate, dir / "out");
  c.mapping_path = dir / "mapping.xml";
  std::ostringstream err;
  CHECK(run(c, err) == 1);
  CHECK(slurp(dir / "out" / "violations.txt").find("Dim_client.prenom") != std::string::npos);
  c.mode = Mode::Generate;
  CHECK(run(c, err) == 1);
  CHECK(err.str().find("violation") != std::string::npos);
}

TEST_CASE("fatal errors are one diagnostic line") {
  std::ostringstream err;
  RunConfig c = config_for("sales", Mode::Generate, scratch("fatal"));
  c.schema_path = fixture_path("sales/missing.xml");
  CHECK(run(c, err) == 1);
  CHECK(err.str().rfind("etlgen: error: ", 0) == 0);
  const std::string line = err.str();
  CHECK(std::count(line.begin(), line.end(), '\n') == 1);

  std::ostringstream err2;
  c = config_for("sales", Mode::Generate, scratch("fatal2"));
  c.star_path = fixture_path("sales/mapping.xml");
  CHECK(run(c, err2) == 1);
  const std::string line2 = err2.str();
  CHECK(std::count(line2.begin(), line2.end(), '\n') == 1);

  std::ostringstream err3;
  c = config_for("sales", Mode::Generate, scratch("fatal3"));
  c.data_dir = fixture_path("sales/data");
  CHECK(run(c, err3) == 1);
  std::ostringstream err4;
  c = config_for("sales", Mode::Execute, scratch("fatal4"));
  c.data_dir.reset();
  CHECK(run(c, err4) == 1);
  std::ostringstream err5;
  c = config_for("sales", Mode::Execute, scratch("fatal5"));
  c.data_dir = fixture_path("coverage/data");
  CHECK(run(c, err5) == 1);
  CHECK(err5.str().find("etlgen: error: ") == 0);
}

TEST_CASE("command line flags") {
  const std::string base = "--schema " + fixture_path("sales/schema.xml").string() + " --star " +
                           fixture_path("sales/star.xml").string() + " --mapping " +
                           fixture_path("sales/mapping.xml").string();
  const fs::path out = scratch("binary");
  CHECK(shell(base + " --out " + out.string() + " --mode generate --emit-plan") == 0);
  CHECK(fs::exists(out / "plan.txt"));
  CHECK(shell(base + " --out " + out.string() + " --mode execute --data " + fixture_path("sales/data").string()) == 0);
  CHECK(fs::exists(out / "vente.out.csv"));
  CHECK(shell(base + " --out " + out.string() + " --mode transform") == 1);
  CHECK(shell(base + " --mode generate") == 1);
  CHECK(shell(base + " --out " + out.string() + " --mode execute") == 1);
  CHECK(shell(base + " --out " + out.string() + " --mode validate") == 0);
}
