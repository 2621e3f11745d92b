#pragma once

// Scenario runs behind the command-line tool: simulate one class line, or run
// a flip through its singular time and onto the flipped bundle, then score
// the trajectory against the expected estimates.
//
// Exit codes: 0 all mandatory verdicts pass, 1 a mandatory verdict fails,
// 2 configuration error, 3 solver failure before the singular time.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "flipflow/config.hpp"
#include "flipflow/diagnostics.hpp"
#include "flipflow/quotients.hpp"

namespace flipflow {

enum ExitCode : int {
  kExitOk = 0,
  kExitVerdictFailed = 1,
  kExitConfigError = 2,
  kExitSolverFailure = 3,
};

struct ScenarioResult {
  ScenarioConfig config;
  ClassPath path;
  SingularityClass singularity;
  FlipRun run;                     // simulate fills only run.pre
  std::vector<Verdict> verdicts;   // mandatory
  std::vector<Verdict> advisory;   // reported, never affect the exit code
  nlohmann::json measurements = nlohmann::json::object();
  int exit_code = kExitOk;
  std::string failure;  // failing verdict names or the solver message
};

nlohmann::json classify_report(const ScenarioConfig& config);

// Integrates the configured class line up to its singular time.
ScenarioResult run_simulation(const ScenarioConfig& config);
// Pre-flip run, restart on the flipped model, post-flip run to T + t_post.
// Throws ConfigError when the class line does not end in a flip.
ScenarioResult run_flip_scenario(const ScenarioConfig& config);

// Columns t,a,b,V_poly,V_profile,ratio,up_max,upp_over_up_max,exc_diam,fiber_len.
std::string trajectory_csv(const ScenarioResult& result);
nlohmann::json summary_json(const ScenarioResult& result);
// trajectory.csv, summary.json and, when enabled, snapshots/{pre,post}_NNNN.csv.
void write_artifacts(const ScenarioResult& result, const std::filesystem::path& dir);

nlohmann::json quotient_json(const QuotientReport& report);

// Subcommand bodies. Each returns an exit code; config errors are the
// caller's to map to kExitConfigError.
int cmd_classify(const ScenarioConfig& config, std::ostream& out);
int cmd_simulate(const ScenarioConfig& config, std::ostream& out, std::ostream& err);
int cmd_flip_run(const ScenarioConfig& config, std::ostream& out, std::ostream& err);
int cmd_quotient(const std::string& weights, std::ostream& out, std::ostream& err);
int cmd_verify(std::ostream& out);

// "--sweep class.a0=1,2;class.b0=9,12": the cartesian product of the listed
// values applied to the base document. Each variant writes to <output>/sweep_NNN.
std::vector<ScenarioConfig> expand_sweep(const nlohmann::json& base, const std::string& plan);

}  // namespace flipflow
