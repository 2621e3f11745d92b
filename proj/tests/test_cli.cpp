#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "flipflow/errors.hpp"
#include "flipflow/scenario.hpp"

using namespace flipflow;
namespace fs = std::filesystem;

namespace {

const char* kFlip = R"({"model":{"p":3,"q":1},"class":{"a0":2,"b0":9}})";
const char* kCollapse = R"({"model":{"p":3,"q":1},"class":{"a0":4,"b0":3}})";
const char* kExtinction = R"({"model":{"p":3,"q":1},"class":{"a0":2,"b0":3}})";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "flipflow_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

ScenarioConfig flip_config(const fs::path& out) {
  ScenarioConfig c = parse_config(kFlip);
  c.output = out.string();
  return c;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FLIPFLOW_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& body) {
  const fs::path p = dir / name;
  std::ofstream(p) << body;
  return p;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("minimal config gets defaults") {
    const ScenarioConfig c = parse_config(kFlip);
    CHECK(c.model == BundleModel{3, 1});
    CHECK(c.a0 == 2.0);
    CHECK(c.b0 == 9.0);
    CHECK(c.R == 20.0);
    CHECK(c.N == 2001);
    CHECK(c.t_post == 0.2);
    CHECK(c.profile.kind == ProfileKind::canonical);
    CHECK_FALSE(c.paper_literal_rates);
    CHECK(c.solver.dt_max == SolverConfig{}.dt_max);
  }

  TEST_CASE("full config round-trips through JSON") {
    const char* text = R"({
      "model": {"p": 4, "q": 2}, "class": {"a0": 1.5, "b0": 7},
      "grid": {"R": 15, "N": 1501},
      "solver": {"dt_max": 0.005, "cfl_sigma": 0.25, "eps_stop": 1e-4, "eps_floor": 1e-9,
                 "output_stride": 2, "integrator": "rk4"},
      "t_post": 0.1, "profile": {"kind": "perturbed", "amplitude": 0.2, "seed": 42},
      "flags": {"paper_literal_rates": true, "emit_snapshots": false}, "output": "x"})";
    const ScenarioConfig c = parse_config(text);
    CHECK(c.N == 1501);
    CHECK(c.solver.integrator == Integrator::rk4);
    CHECK(c.profile.seed == 42);
    CHECK(c.convention() == RateConvention::paper_literal);
    const ScenarioConfig again = config_from_json(to_json(c));
    CHECK(to_json(again) == to_json(c));
  }

  TEST_CASE("validation names the field") {
    CHECK_THROWS_WITH_AS(parse_config(R"({"model":{"p":3,"q":1},"class":{"a0":2,"b0":-9}})"),
                         doctest::Contains("class.b0"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"model":{"p":3,"q":1},"class":{"a0":2,"b0":9},"grid":{"N":2000}})"),
        doctest::Contains("grid.N"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"model":{"p":3,"q":1},"class":{"a0":2,"b0":9},"solver":{"dt_max":0}})"),
        doctest::Contains("solver.dt_max"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"model":{"p":3,"q":1},"class":{"a0":"2","b0":9}})"),
                         doctest::Contains("class.a0"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"model":{"p":3},"class":{"a0":2,"b0":9}})"),
                         doctest::Contains("model.q"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"model":{"p":3,"q":1},"class":{"a0":2,"b0":9},"t_post":-1})"),
        doctest::Contains("t_post"), ConfigError);
  }

  TEST_CASE("unknown keys are rejected") {
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"model":{"p":3,"q":1},"class":{"a0":2,"b0":9},"foo":1})"),
        doctest::Contains("foo"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"model":{"p":3,"q":1},"class":{"a0":2,"b0":9},"grid":{"M":3}})"),
        doctest::Contains("grid.M"), ConfigError);
  }

  TEST_CASE("syntax errors carry line and column") {
    CHECK_THROWS_WITH_AS(parse_config("{\"model\": {\"p\": 3,\n  \"q\": 1,}}"),
                         doctest::Contains("line 2, column"), ConfigError);
  }

  TEST_CASE("cone profiles cannot start a run") {
    ScenarioConfig c =
        parse_config(R"({"model":{"p":3,"q":1},"class":{"a0":2,"b0":9},"profile":{"kind":"cone"}})");
    std::ostringstream out;
    CHECK(cmd_classify(c, out) == kExitOk);
    CHECK_THROWS_AS(run_simulation(c), ConfigError);
    CHECK_THROWS_AS(run_flip_scenario(c), ConfigError);
  }

  TEST_CASE("classify: worked examples") {
    auto check = [](const char* text, const char* kind) {
      std::ostringstream out;
      CHECK(cmd_classify(parse_config(text), out) == kExitOk);
      const nlohmann::json j = nlohmann::json::parse(out.str());
      CHECK(j["kind"] == kind);
      CHECK(j["T"].get<double>() == 1.0);
    };
    check(kFlip, "Flip");
    check(kCollapse, "Collapse");
    check(kExtinction, "Extinction");
  }

  TEST_CASE("flip-run of the default scenario") {
    const fs::path dir = scratch("flip_default");
    std::ostringstream out, err;
    CHECK(cmd_flip_run(flip_config(dir), out, err) == kExitOk);
    const nlohmann::json s = nlohmann::json::parse(slurp(dir / "summary.json"));
    for (const char* name : {"volume_identity", "gauge", "max_principle", "rate_b",
                             "exc_diam_decay", "post_flip_positivity"}) {
      INFO(name);
      CHECK(s["verdicts"][name]["pass"] == true);
    }
    CHECK(s["verdicts"].size() == 6);
    CHECK(s["exit_code"] == 0);

    const std::string csv = slurp(dir / "trajectory.csv");
    CHECK(csv.rfind("t,a,b,V_poly,V_profile,ratio,up_max,upp_over_up_max,exc_diam,fiber_len\n", 0) ==
          0);
    CHECK(fs::exists(dir / "snapshots" / "pre_0000.csv"));
    CHECK(fs::exists(dir / "snapshots" / "post_0000.csv"));

    // Same config, same bytes.
    std::ostringstream out2, err2;
    const std::string summary = slurp(dir / "summary.json");
    CHECK(cmd_flip_run(flip_config(dir), out2, err2) == kExitOk);
    CHECK(slurp(dir / "trajectory.csv") == csv);
    CHECK(slurp(dir / "summary.json") == summary);
  }

  TEST_CASE("paper-literal rates fail the rate verdict") {
    ScenarioConfig c = flip_config(scratch("flip_literal"));
    c.paper_literal_rates = true;
    c.emit_snapshots = false;
    const ScenarioResult r = run_flip_scenario(c);
    CHECK(r.exit_code == kExitVerdictFailed);
    const auto it = std::find_if(r.verdicts.begin(), r.verdicts.end(),
                                 [](const Verdict& v) { return v.name == "rate_b"; });
    REQUIRE(it != r.verdicts.end());
    CHECK_FALSE(it->pass);
    CHECK(r.failure.find("rate_b") != std::string::npos);
    CHECK(r.measurements["rate_b_pre"]["measured"].get<double>() ==
          doctest::Approx(-3.0).epsilon(0.05));
    CHECK(r.measurements["rate_b_pre"]["expected"].get<double>() == -5.0);
  }

  TEST_CASE("flip-run refuses a collapse") {
    ScenarioConfig c = parse_config(kCollapse);
    CHECK_THROWS_AS(run_flip_scenario(c), ConfigError);
  }

  TEST_CASE("simulate along collapse and extinction") {
    for (const char* text : {kCollapse, kExtinction}) {
      ScenarioConfig c = parse_config(text);
      c.emit_snapshots = false;
      const ScenarioResult r = run_simulation(c);
      CHECK(r.exit_code == kExitOk);
      CHECK(r.verdicts.size() == 4);
      CHECK(r.run.pre.event.T_num == doctest::Approx(1.0).epsilon(5e-3));
      CHECK_FALSE(r.run.post.has_value());
      CHECK(std::any_of(r.advisory.begin(), r.advisory.end(),
                        [](const Verdict& v) { return v.name == "ratio_signature"; }));
    }
  }

  TEST_CASE("sweep expansion") {
    const nlohmann::json base = nlohmann::json::parse(kFlip);
    const auto cs = expand_sweep(base, "class.a0=1,2;class.b0=9,12,15");
    REQUIRE(cs.size() == 6);
    CHECK(cs[0].a0 == 1.0);
    CHECK(cs[0].b0 == 9.0);
    CHECK(cs[2].b0 == 15.0);
    CHECK(cs[3].a0 == 2.0);
    CHECK(cs[5].output == (fs::path(ScenarioConfig{}.output) / "sweep_005").string());
    CHECK_THROWS_AS(expand_sweep(base, "class.a0"), ConfigError);
    CHECK_THROWS_AS(expand_sweep(base, "class.b0=-1"), ConfigError);
    CHECK_THROWS_AS(expand_sweep(base, "class.c0=1"), ConfigError);
  }

  TEST_CASE("verify self-checks pass") {
    std::ostringstream out;
    CHECK(cmd_verify(out) == kExitOk);
    CHECK(out.str().find("FAIL") == std::string::npos);
  }

  TEST_CASE("command-line exit codes") {
    const fs::path dir = scratch("cli_codes");
    const fs::path flip = write_config(dir, "flip.json", kFlip);
    const fs::path col = write_config(dir, "collapse.json", kCollapse);
    const fs::path bad = write_config(dir, "bad.json", "{\"model\": {\"p\": 3,}");
    const fs::path neg =
        write_config(dir, "neg.json", R"({"model":{"p":3,"q":1},"class":{"a0":2,"b0":-9}})");

    CHECK(run_cli("classify --config " + flip.string()) == 0);
    CHECK(run_cli("classify --config " + bad.string()) == 2);
    CHECK(run_cli("classify --config " + neg.string()) == 2);
    CHECK(run_cli("classify --config " + (dir / "missing.json").string()) == 2);
    CHECK(run_cli("flip-run --config " + col.string() + " --out " + (dir / "c").string()) == 2);
    CHECK(run_cli("quotient '2,1;1,1'") == 0);
    CHECK(run_cli("quotient '2,4;2,2'") == 2);
    CHECK(run_cli("bogus") == 2);
    CHECK(run_cli("verify") == 0);
    CHECK(run_cli("flip-run --paper-literal-rates --config " + flip.string() + " --out " +
                  (dir / "lit").string()) == 1);
  }

  TEST_CASE("FLIPFLOW_OUT overrides --out") {
    const fs::path dir = scratch("cli_env");
    const fs::path ext = write_config(dir, "ext.json", kExtinction);
    const std::string env = "FLIPFLOW_OUT=" + (dir / "env").string() + " ";
    const std::string cmd = env + FLIPFLOW_CLI_PATH + " simulate --config " + ext.string() +
                            " --out " + (dir / "flag").string() + " >/dev/null 2>&1";
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(dir / "env" / "summary.json"));
    CHECK_FALSE(fs::exists(dir / "flag"));
  }
}
