#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "bgsol/io.hpp"
#include "bgsol/partition.hpp"

using namespace bgsol;

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int code = -1;
  std::string out;
};

// Runs the built CLI binary, capturing stdout; BGSOL_CLI_PATH comes from the
// build system.
RunResult run_cli(const std::string& args) {
  const fs::path tmp = fs::temp_directory_path() / "bgsol_cli_out.txt";
  const std::string cmd =
      std::string(BGSOL_CLI_PATH) + " " + args + " > " + tmp.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(tmp);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("json writer", "[cli]") {
  JsonWriter w;
  w.begin_object();
  w.field("name", "a \"quoted\" string\n");
  w.field("count", i64{42});
  w.field("flag", true);
  w.key("xs").begin_array();
  w.value(1.5);
  w.value(i64{2});
  w.end_array();
  w.key("nested").begin_object();
  w.field("inner", 0.1);
  w.end_object();
  w.end_object();
  CHECK(w.str() ==
        "{\"name\":\"a \\\"quoted\\\" string\\n\",\"count\":42,\"flag\":true,"
        "\"xs\":[1.5,2],\"nested\":{\"inner\":0.10000000000000001}}");
}

TEST_CASE("doubles round-trip through their text form", "[cli]") {
  RngStream rng(4242);
  for (int rep = 0; rep < 2000; ++rep) {
    double v;
    if (rep % 3 == 0) {
      v = static_cast<double>(rng.next_u64()) / 1e3;
    } else {
      v = rng.next_double();
    }
    const std::string text = fmt_double(v);
    CHECK(std::strtod(text.c_str(), nullptr) == v);
    CHECK(text.find(',') == std::string::npos);  // locale-independent
  }
}

TEST_CASE("csv quoting", "[cli]") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("5,3,2,1") == "\"5,3,2,1\"");
  CHECK(csv_field("with \"quote\"") == "\"with \"\"quote\"\"\"");
  CHECK(csv_row({"a", "b,c", "d"}) == "a,\"b,c\",d\n");
}

TEST_CASE("cycle subcommand reports the reference orbit", "[cli]") {
  const RunResult r = run_cli("cycle --start 2,2,1,1");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("\"transient_length\":6") != std::string::npos);
  CHECK(r.out.find("\"cycle_length\":1") != std::string::npos);
  CHECK(r.out.find("\"cycle_states\":[\"3,2,1\"]") != std::string::npos);
  CHECK(r.out.find("\"reached_stable\":true") != std::string::npos);
}

TEST_CASE("exact subcommand emits the three-card law", "[cli]") {
  const RunResult r = run_cli("exact --n 3 --p 0.5");
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("# bgsol exact", 0) == 0);
  std::getline(in, line);
  CHECK(line == "partition,probability");
  double p3 = 0, p21 = 0, p111 = 0;
  while (std::getline(in, line)) {
    const auto comma = line.rfind(',');
    const std::string state = line.substr(0, comma);
    const double prob = std::strtod(line.c_str() + comma + 1, nullptr);
    if (state == "3") p3 = prob;
    if (state == "\"2,1\"") p21 = prob;
    if (state == "\"1,1,1\"") p111 = prob;
  }
  CHECK_THAT(p3, Catch::Matchers::WithinAbs(1.0 / 13.0, 1e-10));
  CHECK_THAT(p21, Catch::Matchers::WithinAbs(8.0 / 13.0, 1e-10));
  CHECK_THAT(p111, Catch::Matchers::WithinAbs(4.0 / 13.0, 1e-10));
}

TEST_CASE("det-run on a fixed point repeats the state", "[cli]") {
  const RunResult r = run_cli("det-run --start 3,2,1 --moves 5");
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  int rows = 0;
  while (std::getline(in, line))
    if (line.find("\"3,2,1\"") != std::string::npos) ++rows;
  CHECK(rows == 5);
}

TEST_CASE("diagram dumps", "[cli]") {
  const fs::path grid = fs::temp_directory_path() / "bgsol_grid.txt";
  const fs::path svg = fs::temp_directory_path() / "bgsol_fig.svg";
  const RunResult r = run_cli("det-run --start 2,2,2 --moves 0 -o - --dump-grid " +
                              grid.string() + " --dump-svg " + svg.string());
  REQUIRE(r.code == 0);
  const std::string g = slurp(grid);
  CHECK(g == ".#..\n##.\n##\n#\n");
  const std::string s = slurp(svg);
  CHECK(s.find("<svg") == 0);
  CHECK(s.find("<rect") != std::string::npos);
}

TEST_CASE("seeded runs are byte-identical", "[cli]") {
  const fs::path a = fs::temp_directory_path() / "bgsol_est_a.json";
  const fs::path b = fs::temp_directory_path() / "bgsol_est_b.json";
  const std::string args = "estimate --n 60 --p 0.5 --eps 0.4 --chains 4 --moves 3000 --seed 7 -o ";
  REQUIRE(run_cli(args + a.string()).code == 0);
  REQUIRE(run_cli(args + b.string()).code == 0);
  const std::string ja = slurp(a);
  CHECK(!ja.empty());
  CHECK(ja == slurp(b));
  CHECK(ja.find("\"seed\":7") != std::string::npos);
}

TEST_CASE("environment seed is picked up as a fallback", "[cli]") {
  const fs::path a = fs::temp_directory_path() / "bgsol_env_a.json";
  const fs::path b = fs::temp_directory_path() / "bgsol_env_b.json";
  const std::string base = "estimate --n 40 --p 0.5 --chains 2 --moves 2000 -o ";
  const std::string env_cmd = "BGSOL_SEED=123 " + std::string(BGSOL_CLI_PATH) + " " + base;
  REQUIRE(std::system((env_cmd + a.string()).c_str()) == 0);
  REQUIRE(run_cli(base + b.string() + " --seed 123").code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a).find("\"seed\":123") != std::string::npos);
}

TEST_CASE("sweep rows are deterministic per cell", "[cli]") {
  const RunResult r =
      run_cli("sweep --n-grid 30,30 --p-grid 0.5 --eps-grid 0.3 --chains 2 --moves 1500 --seed 9");
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::vector<std::string> data_rows;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#' && line.rfind("n,", 0) != 0) data_rows.push_back(line);
  REQUIRE(data_rows.size() == 2);
  CHECK(data_rows[0] == data_rows[1]);  // duplicate cells, equal seeds, equal rows
  CHECK(data_rows[0].find("ok") != std::string::npos);
}

TEST_CASE("a sweep cell is reproducible as a single estimate", "[cli]") {
  // The row's cell_seed fed back into `estimate` must reproduce its value.
  const RunResult sweep =
      run_cli("sweep --n-grid 50 --p-grid 0.5 --eps-grid 0.3 --chains 3 --moves 2500 --seed 4");
  REQUIRE(sweep.code == 0);
  std::istringstream in(sweep.out);
  std::string line, row;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#' && line.rfind("n,", 0) != 0) row = line;
  REQUIRE(!row.empty());
  std::vector<std::string> fields;
  std::istringstream rs(row);
  std::string f;
  while (std::getline(rs, f, ',')) fields.push_back(f);
  REQUIRE(fields.size() >= 13);
  const std::string value = fields[3];
  const std::string cell_seed = fields[11];
  const RunResult est = run_cli("estimate --n 50 --p 0.5 --eps 0.3 --chains 3 --moves 2500 --seed " +
                                cell_seed);
  REQUIRE(est.code == 0);
  CHECK(est.out.find("\"value\":" + value) != std::string::npos);
}

TEST_CASE("swept estimates grow with the deck size", "[cli]") {
  const RunResult r = run_cli(
      "sweep --n-grid 500,2000 --p-grid 0.5 --eps-grid 0.25 --chains 4 --seed 12");
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("n,", 0) == 0) continue;
    std::istringstream rs(line);
    std::string f;
    std::vector<std::string> fields;
    while (std::getline(rs, f, ',')) fields.push_back(f);
    REQUIRE(fields.back() == "ok");
    values.push_back(std::strtod(fields[3].c_str(), nullptr));
  }
  REQUIRE(values.size() == 2);
  CHECK(values[1] >= values[0]);  // mass concentrates as the deck grows
}

TEST_CASE("sweep records per-cell failures without aborting", "[cli]") {
  const RunResult r = run_cli(
      "sweep --n-grid 30 --p-grid 0.5,1.5 --eps-grid 0.3 --chains 2 --moves 1500 --seed 9");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("ok") != std::string::npos);
  CHECK(r.out.find("error") != std::string::npos);
}

TEST_CASE("exit codes distinguish usage errors from guards", "[cli]") {
  CHECK(run_cli("nonsense").code == 2);
  CHECK(run_cli("estimate --n 50 --p 1.5 --moves 100").code == 2);
  CHECK(run_cli("cycle --start 0,3").code == 2);
  CHECK(run_cli("exact --n 30").code == 3);
  CHECK(run_cli("cycle --start 2,2,1,1 --max-moves 2").code == 3);
  CHECK(run_cli("det-run --start 3,2,1 --moves 2 -o /nonexistent-dir/x.csv").code == 2);
}

TEST_CASE("dominate and deviation subcommands run end to end", "[cli]") {
  const RunResult dom = run_cli("dominate --n 200 --p 0.5 --trials 10 --seed 3");
  REQUIRE(dom.code == 0);
  CHECK(dom.out.find("\"fraction\":") != std::string::npos);
  CHECK(dom.out.find("\"kappa\":") != std::string::npos);

  const RunResult dev =
      run_cli("deviation --n-grid 100,200 --p 0.5 --chains 2 --burn-in 500 --moves 4000 --seed 3");
  REQUIRE(dev.code == 0);
  CHECK(dev.out.find("# loglog_slope=") != std::string::npos);
  CHECK(dev.out.find("n,p,n_samples,mean") != std::string::npos);
}

TEST_CASE("hit subcommand emits a report and optional trace", "[cli]") {
  const fs::path trace = fs::temp_directory_path() / "bgsol_trace.csv";
  const RunResult r =
      run_cli("hit --start 10,9,1,1,1,1,1,1 --eps 0.9 --budget 50 --trace-csv " + trace.string());
  REQUIRE(r.code == 0);
  CHECK(r.out.find("\"hit_time\":") != std::string::npos);
  CHECK(r.out.find("\"stayed\":") != std::string::npos);
  const std::string t = slurp(trace);
  CHECK(t.find("move_index,E2x,E_tilde,h_minus,h_plus,V_minus,V_plus") != std::string::npos);
}

TEST_CASE("config file values are overridden by flags", "[cli]") {
  const fs::path cfg = fs::temp_directory_path() / "bgsol_cfg.ini";
  {
    std::ofstream out(cfg);
    out << "[cycle]\nstart=\"2,2,1,1\"\n";  // quoted: bare commas would split into a list
  }
  const RunResult a = run_cli("--config " + cfg.string() + " cycle");
  REQUIRE(a.code == 0);
  CHECK(a.out.find("\"transient_length\":6") != std::string::npos);
  const RunResult b = run_cli("--config " + cfg.string() + " cycle --start 3,2,1");
  REQUIRE(b.code == 0);
  CHECK(b.out.find("\"transient_length\":0") != std::string::npos);
}
