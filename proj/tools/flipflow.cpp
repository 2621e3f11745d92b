#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "flipflow/errors.hpp"
#include "flipflow/scenario.hpp"

namespace {

using flipflow::ScenarioConfig;
using nlohmann::json;

struct Options {
  std::string config_path;
  std::string out;
  std::string sweep;
  bool paper_literal = false;
  std::optional<std::uint64_t> seed;
};

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw flipflow::ConfigError("cannot read config file \"" + path + "\"");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Command-line flags and FLIPFLOW_OUT are folded into the document before
// validation, so they go through the same checks as file values.
json load_document(const Options& opt) {
  if (opt.config_path.empty()) throw flipflow::ConfigError("--config is required");
  json doc = flipflow::parse_config_document(read_file(opt.config_path));
  if (!doc.is_object()) throw flipflow::ConfigError("configuration must be a JSON object");
  if (opt.paper_literal) doc["flags"]["paper_literal_rates"] = true;
  if (opt.seed) doc["profile"]["seed"] = *opt.seed;
  if (!opt.out.empty()) doc["output"] = opt.out;
  if (const char* env = std::getenv("FLIPFLOW_OUT"); env != nullptr && *env != '\0') {
    doc["output"] = env;
  }
  return doc;
}

using Runner = int (*)(const ScenarioConfig&, std::ostream&, std::ostream&);

int run_one(Runner runner, const ScenarioConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    return runner(cfg, out, err);
  } catch (const flipflow::ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return flipflow::kExitConfigError;
  } catch (const flipflow::Error& e) {
    err << "solver failure: " << e.what() << "\n";
    return flipflow::kExitSolverFailure;
  }
}

int run_scenarios(Runner runner, const Options& opt) {
  const json doc = load_document(opt);
  if (opt.sweep.empty()) {
    return run_one(runner, flipflow::config_from_json(doc), std::cout, std::cerr);
  }
  const std::vector<ScenarioConfig> configs = flipflow::expand_sweep(doc, opt.sweep);
  struct Outcome {
    int code = 0;
    std::string out, err;
  };
  std::vector<Outcome> outcomes(configs.size());
  const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t begin = 0; begin < configs.size(); begin += workers) {
    std::vector<std::future<void>> batch;
    for (std::size_t k = begin; k < std::min(configs.size(), begin + workers); ++k) {
      batch.push_back(std::async(std::launch::async, [&, k] {
        std::ostringstream out, err;
        outcomes[k].code = run_one(runner, configs[k], out, err);
        outcomes[k].out = out.str();
        outcomes[k].err = err.str();
      }));
    }
    for (auto& f : batch) f.get();
  }
  int code = 0;
  for (std::size_t k = 0; k < configs.size(); ++k) {
    std::cout << "# " << configs[k].output << " exit " << outcomes[k].code << "\n"
              << outcomes[k].out;
    std::cerr << outcomes[k].err;
    code = std::max(code, outcomes[k].code);
  }
  return code;
}

int classify_runner(const ScenarioConfig& cfg, std::ostream& out, std::ostream&) {
  return flipflow::cmd_classify(cfg, out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kähler-Ricci flow through flips on Calabi-symmetric bundles"};
  app.require_subcommand(1);
  Options opt;

  auto add_scenario_flags = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "Scenario JSON file")->required();
    sub->add_option("--out", opt.out, "Output directory");
    sub->add_option("--sweep", opt.sweep, "Parameter sweep, e.g. class.a0=1,2;class.b0=9,12");
    sub->add_flag("--paper-literal-rates", opt.paper_literal,
                  "Use the literal (p - q, p + 2) class rates");
    sub->add_option("--seed", opt.seed, "Seed for profile perturbations");
  };

  CLI::App* classify = app.add_subcommand("classify", "Class line, singular time and kind");
  add_scenario_flags(classify);
  CLI::App* simulate = app.add_subcommand("simulate", "Run the flow up to its singular time");
  add_scenario_flags(simulate);
  CLI::App* flip = app.add_subcommand("flip-run", "Run the flow through a flip");
  add_scenario_flags(flip);

  std::string weights;
  CLI::App* quotient = app.add_subcommand("quotient", "Classify a C*-quotient local model");
  quotient->add_option("weights", weights, "Weights \"a0,a1,...;b0,b1,...\"")->required();

  app.add_subcommand("verify", "Closed-form self-checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return flipflow::kExitConfigError;
  }

  try {
    if (*classify) return run_scenarios(classify_runner, opt);
    if (*simulate) return run_scenarios(flipflow::cmd_simulate, opt);
    if (*flip) return run_scenarios(flipflow::cmd_flip_run, opt);
    if (*quotient) return flipflow::cmd_quotient(weights, std::cout, std::cerr);
    return flipflow::cmd_verify(std::cout);
  } catch (const flipflow::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return flipflow::kExitConfigError;
  } catch (const flipflow::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return flipflow::kExitSolverFailure;
  }
}
