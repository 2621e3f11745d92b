#pragma once

// Scenario configuration: a JSON document such as
//
//   {"model": {"p": 3, "q": 1}, "class": {"a0": 2, "b0": 9},
//    "grid": {"R": 20, "N": 2001}, "t_post": 0.2,
//    "profile": {"kind": "perturbed", "amplitude": 0.1, "seed": 7}}
//
// Only "model" and "class" are required. Unknown keys are errors.

#include <cstdint>
#include <string>

#include <json.hpp>

#include "flipflow/cohomology.hpp"
#include "flipflow/flow.hpp"
#include "flipflow/profile.hpp"

namespace flipflow {

enum class ProfileKind { canonical, perturbed, cone };

std::string to_string(ProfileKind k);

struct ProfileChoice {
  ProfileKind kind = ProfileKind::canonical;
  double amplitude = 0.1;  // perturbed
  std::uint64_t seed = 0;  // perturbed
  double gamma = 0.5;      // cone
};

struct ScenarioConfig {
  BundleModel model;
  double a0 = 0.0;
  double b0 = 0.0;
  double R = 20.0;
  int N = 2001;
  SolverConfig solver;
  double t_post = 0.2;
  ProfileChoice profile;
  bool paper_literal_rates = false;
  bool emit_snapshots = true;
  std::string output = "flipflow_out";

  RateConvention convention() const {
    return paper_literal_rates ? RateConvention::paper_literal : RateConvention::adjunction;
  }
  Grid grid() const { return Grid::make(R, N); }
  ClassPath path() const { return singular_time(a0, b0, model, convention()); }
};

// Throws ConfigError with "line L, column C" for syntax errors and the dotted
// field name ("class.b0") for validation errors.
ScenarioConfig parse_config(const std::string& text);
// Syntax check only; the document can then be edited before validation.
nlohmann::json parse_config_document(const std::string& text);
ScenarioConfig config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ScenarioConfig& config);

// Re-checks a config after programmatic edits.
void validate(const ScenarioConfig& config);
// Compact runs cannot start from non-compact data.
void require_compact_profile(const ScenarioConfig& config);

// Initial profile named by the config.
Profile initial_profile(const ScenarioConfig& config);

}  // namespace flipflow
