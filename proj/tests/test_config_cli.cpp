#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "perfectsim/config.hpp"
#include "perfectsim/kernels.hpp"
#include "perfectsim/samplers.hpp"

using namespace perfectsim;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

CliResult run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd =
      (env.empty() ? std::string() : env + " ") + PERFECTSIM_CLI_PATH + " " + args + " 2>&1";
  std::array<char, 4096> buf{};
  CliResult res;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe)) res.output += buf.data();
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

fs::path write_config(const std::string& name, const json& doc) {
  const fs::path dir = fs::temp_directory_path() / "perfectsim_cli_test";
  fs::create_directories(dir);
  const fs::path path = dir / name;
  std::ofstream out(path);
  out << doc.dump(2);
  return path;
}

json ar_config() {
  return json{{"kernel", {{"type", "alternating_renewal"}, {"survival", {0.3}}, {"survival_limit", 0.6}}},
              {"algorithm", "cff"},
              {"seed", 1},
              {"window", {0, 1}}};
}

}  // namespace

TEST_CASE("kernel factory builds the bundled kernels") {
  auto ar = make_kernel(json{{"type", "alternating_renewal"}, {"survival", {0.3}}, {"survival_limit", 0.6}});
  CHECK(ar->alphabet().size() == 2);
  CHECK(ar->ak_inf(0) == doctest::Approx(0.6));

  auto slow = make_kernel(json{{"type", "alternating_renewal"}, {"rule", "slow_sqrt"}});
  CHECK(slow->ak_inf(5) == doctest::Approx(1.0 - 0.5 / std::sqrt(6.0)));

  auto cp = make_kernel(
      json{{"type", "changepoint_binary"}, {"p1", 0.5}, {"c", 0.1}, {"sigma", 0.2}, {"alpha", 1.5}});
  CHECK(cp->supports_pinned());

  auto walk = make_kernel(json{{"type", "generalized_walk"},
                               {"size", 3},
                               {"arcs", {{0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}}},
                               {"p_low", {{0.0, 0.7, 0.3}, {0.7, 0.0, 0.3}, {0.7, 0.3, 0.0}}},
                               {"p_high", {{0.0, 0.3, 0.7}, {0.3, 0.0, 0.7}, {0.3, 0.7, 0.0}}},
                               {"omega", 0.5}});
  CHECK(walk->alphabet().size() == 3);
  CHECK(walk->ak_inf(0) == doctest::Approx(0.0));
}

TEST_CASE("config parsing is strict") {
  CHECK_THROWS_AS((void)make_kernel(json{{"type", "unknown"}}), ConfigError);
  CHECK_THROWS_AS((void)make_kernel(json{{"type", "alternating_renewal"},
                                         {"survival", {0.3}},
                                         {"survival_limit", 0.6},
                                         {"extra", 1}}),
                  ConfigError);
  json doc = ar_config();
  doc["mystery"] = true;
  CHECK_THROWS_AS((void)parse_run_config(doc), ConfigError);

  json bad_window = ar_config();
  bad_window["window"] = {3, 1};
  try {
    (void)parse_run_config(bad_window);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.code() == "window.invalid");
  }

  json both = ar_config();
  both["seeds"] = {1, 5};
  CHECK_THROWS_AS((void)parse_run_config(both), ConfigError);

  json replicates = ar_config();
  replicates.erase("seed");
  replicates["replicates"] = 7;
  const auto cfg = parse_run_config(replicates);
  CHECK(cfg.seed_lo == 1);
  CHECK(cfg.seed_hi == 7);
}

TEST_CASE("environment overrides the backward cap") {
  setenv("PERFECTSIM_MAX_BACK", "12345", 1);
  const auto cfg = parse_run_config(ar_config());
  CHECK(cfg.sampler.max_back == 12345);
  unsetenv("PERFECTSIM_MAX_BACK");
  const auto cfg2 = parse_run_config(ar_config());
  CHECK(cfg2.sampler.max_back == 10000000);
}

TEST_CASE("cli: sample emits one row per replicate, deterministically") {
  json doc = ar_config();
  doc.erase("seed");
  doc["seeds"] = {1, 10};
  const auto path = write_config("sample.json", doc);
  const auto res = run_cli("sample --config " + path.string());
  REQUIRE(res.exit_code == 0);
  int rows = 0;
  for (char c : res.output) rows += c == '\n';
  CHECK(rows == 12);  // comment + header + 10 rows
  CHECK(res.output.find("# perfectsim sample v1") == 0);
  CHECK(res.output.find("seed,m,n,tau,uniforms,letters") != std::string::npos);

  const auto res2 = run_cli("sample --config " + path.string());
  CHECK(res2.output == res.output);  // byte-identical

  const auto resj = run_cli("sample --config " + path.string() + " --format json");
  REQUIRE(resj.exit_code == 0);
  const auto arr = json::parse(resj.output);
  REQUIRE(arr.is_array());
  REQUIRE(arr.size() == 10);
  CHECK(arr[0]["letters"].size() == 2);
  CHECK(arr[0]["algorithm"] == "cff");

  // flag overrides narrow the seed range
  const auto res3 = run_cli("sample --config " + path.string() + " --seeds 2..4");
  REQUIRE(res3.exit_code == 0);
  int rows3 = 0;
  for (char c : res3.output) rows3 += c == '\n';
  CHECK(rows3 == 5);
  const auto res4 = run_cli("sample --config " + path.string() + " --seed 9");
  CHECK(res4.output.find("\n9,0,1,") != std::string::npos);
}

TEST_CASE("cli: window errors exit 1 with a machine code") {
  json doc = ar_config();
  doc["window"] = {2, -2};
  const auto path = write_config("bad_window.json", doc);
  const auto res = run_cli("sample --config " + path.string());
  CHECK(res.exit_code == 1);
  CHECK(res.output.find("window.invalid") != std::string::npos);
}

TEST_CASE("cli: exhausted scan budget exits 2 with cap.exceeded") {
  // find a seed whose tau is below -10 by direct runs
  auto kernel = AlternatingRenewalKernel::table_symmetric({0.3}, 0.6);
  AkSequence a_seq(kernel);
  std::uint64_t slow_seed = 0;
  for (std::uint64_t seed = 1; seed <= 5000 && !slow_seed; ++seed) {
    SeededSource src(seed);
    if (tau0_cff(kernel, a_seq, src, 0).tau < -10) slow_seed = seed;
  }
  REQUIRE(slow_seed != 0);
  json doc = ar_config();
  doc["window"] = {0, 0};
  doc["max_back"] = 10;
  doc["seed"] = slow_seed;
  const auto path = write_config("capped.json", doc);
  const auto res = run_cli("sample --config " + path.string());
  CHECK(res.exit_code == 2);
  CHECK(res.output.find("cap.exceeded") != std::string::npos);

  // the environment variable tightens the budget the same way
  json roomy = doc;
  roomy.erase("max_back");
  const auto rpath = write_config("capped_env.json", roomy);
  const auto ok = run_cli("sample --config " + rpath.string());
  CHECK(ok.exit_code == 0);
  const auto env = run_cli("sample --config " + rpath.string(), "PERFECTSIM_MAX_BACK=10");
  CHECK(env.exit_code == 2);
}

TEST_CASE("cli: replicate output is identical across thread counts") {
  json doc = ar_config();
  doc.erase("seed");
  doc["seeds"] = {1, 200};
  doc["threads"] = 1;
  const auto p1 = write_config("threads1.json", doc);
  doc["threads"] = 4;
  const auto p4 = write_config("threads4.json", doc);
  const auto r1 = run_cli("sample --config " + p1.string());
  const auto r4 = run_cli("sample --config " + p4.string());
  REQUIRE(r1.exit_code == 0);
  REQUIRE(r4.exit_code == 0);
  CHECK(r1.output == r4.output);
}

TEST_CASE("cli: tau-stats emits the documented columns") {
  json doc = ar_config();
  doc.erase("window");
  doc.erase("seed");
  doc["seeds"] = {1, 50};
  const auto path = write_config("tau.json", doc);
  const auto res = run_cli("tau-stats --config " + path.string());
  REQUIRE(res.exit_code == 0);
  CHECK(res.output.find("seed,anchor,tau,status,uniforms_consumed") != std::string::npos);
  CHECK(res.output.find("coalesced") != std::string::npos);
}

TEST_CASE("cli: tau-stats at scale on the hybrid digraph sampler") {
  json doc = {{"kernel",
               {{"type", "generalized_walk"},
                {"size", 3},
                {"arcs", {{0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}}},
                {"p_low", {{0.0, 0.7, 0.3}, {0.7, 0.0, 0.3}, {0.7, 0.3, 0.0}}},
                {"p_high", {{0.0, 0.3, 0.7}, {0.3, 0.0, 0.7}, {0.3, 0.7, 0.0}}},
                {"omega", 0.5}}},
              {"algorithm", "hybrid"},
              {"seeds", {1, 10000}}};
  const auto path = write_config("tau_walk.json", doc);
  const auto res = run_cli("tau-stats --config " + path.string());
  REQUIRE(res.exit_code == 0);
  int rows = 0, coalesced = 0;
  std::size_t pos = 0;
  while ((pos = res.output.find('\n', pos)) != std::string::npos) {
    ++pos;
    ++rows;
  }
  pos = 0;
  while ((pos = res.output.find("coalesced", pos)) != std::string::npos) {
    ++pos;
    ++coalesced;
  }
  CHECK(rows == 10002);  // comment + header + one row per seed
  CHECK(coalesced == 10000);
}

TEST_CASE("cli: check calls a degenerate-depth kernel divergent") {
  json doc = {{"kernel", {{"type", "alternating_renewal"}, {"survival", {0.5}}, {"survival_limit", 0.5}}},
              {"check_n_max", 2000},
              {"diag_seeds", 500},
              {"diag_n", 10}};
  const auto path = write_config("check_iid.json", doc);
  const auto res = run_cli("check --config " + path.string());
  REQUIRE(res.exit_code == 0);
  const auto rep = json::parse(res.output);
  CHECK(rep["conditions"]["condition_a_diverges"] == true);
  CHECK(rep["conditions"]["partial_sum"].get<double>() == doctest::Approx(2001.0));
  CHECK(rep["regeneration"]["q_last"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("cli: check reports conditions and regeneration") {
  json doc = ar_config();
  doc["check_n_max"] = 2000;
  doc["diag_seeds"] = 2000;
  doc["diag_n"] = 20;
  const auto path = write_config("check.json", doc);
  const auto res = run_cli("check --config " + path.string());
  REQUIRE(res.exit_code == 0);
  const auto rep = json::parse(res.output);
  CHECK(rep["conditions"]["condition_a_diverges"] == true);
  CHECK(rep["conditions"]["condition_b_positive"] == true);
  CHECK(rep["conditions"]["heuristic"] == true);
  CHECK(rep["graph"]["single_class"] == true);
  CHECK(rep["regeneration"]["q_last"].get<double>() > 0.0);

  // the slow rule: condition (a) numerically non-divergent
  json slow = ar_config();
  slow["kernel"] = {{"type", "alternating_renewal"}, {"rule", "slow_sqrt"}};
  slow["check_n_max"] = 20000;
  slow["diag_seeds"] = 100;
  slow["diag_n"] = 10;
  const auto spath = write_config("check_slow.json", slow);
  const auto sres = run_cli("check --config " + spath.string());
  REQUIRE(sres.exit_code == 0);
  const auto srep = json::parse(sres.output);
  CHECK(srep["conditions"]["condition_a_diverges"] == false);
}

TEST_CASE("cli: verify passes on the symmetric renewal kernel") {
  json doc = ar_config();
  doc["diag_seeds"] = 20000;
  doc["audit_depth"] = 20;
  doc["audit_histories"] = 200;
  doc["threads"] = 2;
  const auto path = write_config("verify.json", doc);
  const auto res = run_cli("verify --config " + path.string());
  REQUIRE(res.exit_code == 0);
  const auto rep = json::parse(res.output);
  CHECK(rep["pass"] == true);
  bool saw_audit = false, saw_tv = false;
  for (const auto& row : rep["checks"]) {
    if (row["test"] == "measure_audit.max_discrepancy") {
      saw_audit = true;
      CHECK(row["pass"] == true);
    }
    if (row["test"] == "oracle.window2_tv") {
      saw_tv = true;
      CHECK(row["pass"] == true);
    }
  }
  CHECK(saw_audit);
  CHECK(saw_tv);
}

TEST_CASE("cli: --out writes the file instead of stdout") {
  const auto path = write_config("outfile.json", ar_config());
  const fs::path out = fs::temp_directory_path() / "perfectsim_cli_test" / "rows.csv";
  fs::remove(out);
  const auto res = run_cli("sample --config " + path.string() + " --out " + out.string());
  REQUIRE(res.exit_code == 0);
  CHECK(res.output.empty());
  std::ifstream in(out);
  std::string first;
  std::getline(in, first);
  CHECK(first == "# perfectsim sample v1");
}
