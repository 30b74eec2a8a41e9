// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <unistd.h>

#include "etlgen/executor.hpp"
#include "etlgen/pipeline.hpp"
#include "etlgen/rule_engine.hpp"
#include "etlgen/sql_emitter.hpp"
#include "fixtures.hpp"
#include "random_gen.hpp"
#include "reference_eval.hpp"

using namespace etlgen;
using namespace etlgen::testing;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kGoldenBudgetMs = 1000.0;
constexpr double kOracleBudgetMs = 60000.0;
constexpr int kOracleInstances = 200;
constexpr int kOracleMaxDepth = 4;
constexpr int kOracleMaxTables = 5;
constexpr int kOracleMaxRows = 20;
constexpr int kConditionTrees = 1000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("etlgen_acceptance_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig config_for(const std::string& fixture, Mode mode, const fs::path& out) {
  RunConfig c;
  c.schema_path = fixture_path(fixture + "/schema.xml");
  c.star_path = fixture_path(fixture + "/star.xml");
  c.mapping_path = fixture_path(fixture + "/mapping.xml");
  c.out_dir = out;
  c.mode = mode;
  if (mode == Mode::Execute) c.data_dir = fixture_path(fixture + "/data");
  c.emit_plan = true;
  return c;
}

/// Statement of load.sql that inserts into `target`.
std::string statement_for(const std::string& script, const std::string& target) {
  std::size_t start = 0;
  while (start < script.size()) {
    std::size_t end = script.find("\n\n", start);
    if (end == std::string::npos) end = script.size();
    const std::string block = script.substr(start, end - start);
    if (block.rfind("INSERT INTO " + target + "(", 0) == 0) return block;
    start = end + 2;
  }
  return "";
}

std::string trim_newline(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

Outcome golden_produit() {
  const auto start = Clock::now();
  std::ostringstream err;
  const fs::path out = scratch("c1");
  const int status = run(config_for("sales", Mode::Generate, out), err);
  const double elapsed = ms_since(start);
  const std::string got = statement_for(slurp(out / "load.sql"), "Dim_Produit");
  const bool same = same_sql(got, slurp(fixture_path("golden/dim_produit.sql")));
  std::ostringstream d;
  d << "exit " << status << ", token-equal " << (same ? "yes" : "no") << ", " << elapsed << " ms (< "
    << kGoldenBudgetMs << ")";
  return {status == 0 && same && elapsed < kGoldenBudgetMs, d.str()};
}

Outcome golden_temps() {
  std::ostringstream err;
  const fs::path out = scratch("c2");
  run(config_for("sales", Mode::Generate, out), err);
  const std::string stmt = statement_for(slurp(out / "load.sql"), "temps");
  const auto select = stmt.find("\nSELECT ");
  const auto from = stmt.find("\nFROM", select == std::string::npos ? 0 : select);
  if (select == std::string::npos || from == std::string::npos) return {false, "no temps SELECT list in load.sql"};
  const std::string list = stmt.substr(select + 8, from - select - 8);
  const bool same = same_sql(list, trim_newline(slurp(fixture_path("golden/temps_select.txt"))));
  const bool header = stmt.rfind("INSERT INTO temps(codeT,num_mois,lib_mois,annee)\n", 0) == 0;
  return {same && header, "select list token-equal " + std::string(same ? "yes" : "no") + ", header " +
                              (header ? "ok" : "mismatch")};
}

Outcome load_reproduction() {
  std::ostringstream err;
  const fs::path out = scratch("c3");
  const int status = run(config_for("sales", Mode::Execute, out), err);
  const Table layout{"Dim_client",
                     {{"codeC", DataType::Number, false, std::nullopt},
                      {"nom", DataType::String, true, std::nullopt},
                      {"prenom", DataType::String, true, std::nullopt},
                      {"adresse", DataType::String, true, std::nullopt}},
                     {"codeC"}};
  Relation rows;
  try {
    rows = load_table_csv(slurp(out / "Dim_client.out.csv"), layout);
  } catch (const std::exception& e) {
    return {false, std::string("cannot read Dim_client.out.csv: ") + e.what()};
  }
  auto adresse_of = [&](int key) -> std::string {
    for (const auto& r : rows.rows) {
      if (r[0] == Value(*Decimal::from_int(key))) return is_null(r[3]) ? "<null>" : std::get<std::string>(r[3]);
    }
    return "<missing>";
  };
  const std::string a5 = adresse_of(5);
  const std::string a1 = adresse_of(1);
  const bool ok = status == 0 && rows.rows.size() == 10 && a5 == "5000 SOUSSE" && a1 == "3000 sfax";
  return {ok, std::to_string(rows.rows.size()) + " rows, key 5 -> \"" + a5 + "\", key 1 -> \"" + a1 + "\""};
}

Outcome rule_coverage() {
  std::ostringstream err;
  const fs::path out = scratch("c4");
  const int status = run(config_for("coverage", Mode::Generate, out), err);
  const std::string got = slurp(out / "report.txt");
  const std::string expected = slurp(fixture_path("coverage/expected_report.txt"));
  std::string missing;
  for (const char* rule : {"R1_concat_select", "R2_split_select", "R3_convert_select", "R4_agg_convert_project",
                           "R5_agg_select_join", "B_project", "B_dateparts"}) {
    if (got.find(std::string(": ") + rule + "\n") == std::string::npos) missing += std::string(" ") + rule;
  }
  const bool same = got == expected;
  return {same && missing.empty() && status != 1,
          "report " + std::string(same ? "matches" : "differs from") + " golden" +
              (missing.empty() ? ", all 7 rules present" : ", missing:" + missing)};
}

Outcome split_concat_duality() {
  const auto in = load_inputs("sales");
  Database db;
  db.schema = in.src;
  const Table& client = *in.src.find_table("client");
  db.add("client", load_table_csv(read_fixture("sales/data/client.csv"), client));
  const auto& entry = in.mapping.find_dimension("Dim_client")->attribute_entries[3];
  const EtlPlan concat = build_attribute_plan(entry, RuleId::R1_concat_select, in.src, plan::scan("client"));
  const EtlPlan split = plan::split(concat, {"", entry.target}, " ", {{"cp_back", 0}, {"ville_back", 1}});
  const Relation r = eval_plan(split, db);
  const auto cp = *r.schema.resolve({"client", "codepostale"});
  const auto ville = *r.schema.resolve({"client", "ville"});
  const auto cp_back = *r.schema.resolve({"", "cp_back"});
  const auto ville_back = *r.schema.resolve({"", "ville_back"});
  int recovered = 0;
  for (const auto& row : r.rows) {
    if (row[cp] == row[cp_back] && row[ville] == row[ville_back]) ++recovered;
  }
  return {r.rows.size() == 10 && recovered == 10,
          std::to_string(recovered) + "/" + std::to_string(r.rows.size()) + " rows recovered"};
}

Outcome oracle_equivalence() {
  const auto start = Clock::now();
  int failures = 0, nonempty = 0;
  std::size_t rows = 0;
  std::map<std::string, int> ops;
  for (int seed = 1; seed <= kOracleInstances; ++seed) {
    Rng rng(static_cast<std::uint64_t>(seed));
    const auto src = random_schema(rng, kOracleMaxTables);
    const auto db = random_database(rng, src, kOracleMaxRows);
    const auto p = random_plan(rng, src, kOracleMaxDepth);
    if (plan_depth(p) > kOracleMaxDepth) ++failures;
    const Relation got = eval_plan(p, db);
    if (bag_of(got) != bag_of(reference_eval(p, db))) {
      ++failures;
      if (failures <= 3) std::cerr << "oracle mismatch, seed " << seed << ":\n" << render_plan(p);
    }
    rows += got.rows.size();
    if (!got.rows.empty()) ++nonempty;
    std::function<void(const EtlPlan&)> tally = [&](const EtlPlan& n) {
      static const char* names[] = {"Scan", "π", "δ", "C", "S", "FC", "γ", "Nn", "JOIN"};
      ++ops[names[n->op.index()]];
      for (const auto& c : plan_children(n)) tally(c);
    };
    tally(p);
  }
  const double elapsed = ms_since(start);
  std::ostringstream d;
  d << kOracleInstances << " instances, " << failures << " mismatches, " << nonempty << " non-empty results, " << rows
    << " rows, operators";
  for (const auto& [name, n] : ops) d << " " << name << ":" << n;
  d << ", " << elapsed << " ms (< " << kOracleBudgetMs << ")";
  return {failures == 0 && elapsed < kOracleBudgetMs && ops.size() == 9, d.str()};
}

/// Fully parenthesised printer with an optional operator substitution for
/// the atom numbered `bad_atom`.
std::string print_with(const Condition& c, int& counter, int bad_atom, const std::string& bad_op) {
  if (const auto* b = std::get_if<ConditionBinary>(&c.node)) {
    const std::string l = print_with(*b->lhs, counter, bad_atom, bad_op);
    const std::string r = print_with(*b->rhs, counter, bad_atom, bad_op);
    return "(" + l + (b->op == LogicOp::And ? " && " : " || ") + r + ")";
  }
  const auto& a = std::get<ConditionAtom>(c.node);
  std::string op(to_string(a.op));
  if (counter++ == bad_atom) op = bad_op;
  const std::string value = std::holds_alternative<Decimal>(a.value) ? std::get<Decimal>(a.value).to_string()
                                                                     : quote_string(std::get<std::string>(a.value));
  return op + "(" + value + ")";
}

int atom_count(const Condition& c) {
  if (const auto* b = std::get_if<ConditionBinary>(&c.node)) return atom_count(*b->lhs) + atom_count(*b->rhs);
  return 1;
}

Outcome condition_round_trip() {
  static const std::vector<std::string> bad_ops = {"!=", "==", "=>", "=<", "><", ">>", "<<", "~", "LIKE", "Like",
                                                   "ilike", "in", "<=>", "!", "%", "<>=", "=~", "is", "between", "likes"};
  Rng rng(20240601);
  int round_trips = 0, rejected = 0, accepted_bad = 0;
  for (int i = 0; i < kConditionTrees; ++i) {
    const Condition c = random_condition(rng, 5);
    bool ok = false;
    try {
      ok = parse_condition(print_condition(c)) == c;
      int counter = 0;
      ok = ok && parse_condition(print_with(c, counter, -1, "")) == c;
    } catch (const ConditionSyntaxError&) {
    }
    if (ok) ++round_trips;

    int counter = 0;
    const int atom = static_cast<int>(rng() % static_cast<std::uint64_t>(atom_count(c)));
    const std::string bad = print_with(c, counter, atom, bad_ops[rng() % bad_ops.size()]);
    try {
      parse_condition(bad);
      ++accepted_bad;
      if (accepted_bad <= 3) std::cerr << "accepted: " << bad << "\n";
    } catch (const ConditionSyntaxError&) {
      ++rejected;
    }
  }
  return {round_trips == kConditionTrees && accepted_bad == 0,
          std::to_string(round_trips) + "/" + std::to_string(kConditionTrees) + " round-trips, " +
              std::to_string(rejected) + "/" + std::to_string(kConditionTrees) + " bad-operator texts rejected"};
}

Outcome determinism() {
  std::ostringstream err;
  const fs::path a = scratch("c8a");
  const fs::path b = scratch("c8b");
  const int sa = run(config_for("sales", Mode::Execute, a), err);
  const int sb = run(config_for("sales", Mode::Execute, b), err);
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  std::string differing;
  int csvs = 0;
  for (const auto& n : names) {
    if (n.size() > 8 && n.substr(n.size() - 8) == ".out.csv") ++csvs;
    if (!fs::exists(b / n) || slurp(a / n) != slurp(b / n)) differing += " " + n;
  }
  const bool core = fs::exists(a / "load.sql") && fs::exists(a / "report.txt") && csvs == 4;
  return {sa == 0 && sb == 0 && core && differing.empty(),
          std::to_string(names.size()) + " artifacts compared" +
              (differing.empty() ? ", all byte-identical" : ", differing:" + differing)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 golden Dim_Produit statement", golden_produit},
      {"2 golden temps select list", golden_temps},
      {"3 Dim_client load reproduction", load_reproduction},
      {"4 rule coverage report", rule_coverage},
      {"5 concat/split duality", split_concat_duality},
      {"6 executor oracle equivalence", oracle_equivalence},
      {"7 condition grammar round-trip", condition_round_trip},
      {"8 determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << name << ": " << o.detail << std::endl;
  }
  fs::remove_all(fs::temp_directory_path() / ("etlgen_acceptance_" + std::to_string(::getpid())));
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
