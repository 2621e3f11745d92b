#include "flipflow/config.hpp"

#include <cmath>
#include <set>

#include "flipflow/errors.hpp"

namespace flipflow {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where,
                    const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      const std::string name = where.empty() ? it.key() : where + "." + it.key();
      throw ConfigError("unknown key \"" + name + "\"");
    }
  }
}

const json& section(const json& doc, const std::string& key, bool required) {
  static const json empty = json::object();
  if (!doc.contains(key)) {
    if (required) throw ConfigError("missing required section \"" + key + "\"");
    return empty;
  }
  const json& s = doc.at(key);
  if (!s.is_object()) throw ConfigError(key + " must be an object");
  return s;
}

double number(const json& obj, const std::string& where, const std::string& key,
              double fallback, bool required = false) {
  const std::string name = where + "." + key;
  if (!obj.contains(key)) {
    if (required) throw ConfigError("missing required field \"" + name + "\"");
    return fallback;
  }
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(name + " must be a number");
  return v.get<double>();
}

int integer(const json& obj, const std::string& where, const std::string& key, int fallback,
            bool required = false) {
  const std::string name = where + "." + key;
  if (!obj.contains(key)) {
    if (required) throw ConfigError("missing required field \"" + name + "\"");
    return fallback;
  }
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(name + " must be an integer");
  return v.get<int>();
}

bool boolean(const json& obj, const std::string& where, const std::string& key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(where + "." + key + " must be true or false");
  return v.get<bool>();
}

std::string text(const json& obj, const std::string& where, const std::string& key,
                 const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(where + "." + key + " must be a string");
  return v.get<std::string>();
}

void positive(double v, const std::string& name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(name + " must be positive");
}

// Line and column (1-based) of a byte offset.
std::string locate(const std::string& src, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < src.size(); ++i) {
    if (src[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

std::string to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::canonical:
      return "canonical";
    case ProfileKind::perturbed:
      return "perturbed";
    case ProfileKind::cone:
      return "cone";
  }
  return "?";
}

void validate(const ScenarioConfig& c) {
  if (c.model.p < 1) throw ConfigError("model.p must be positive");
  if (c.model.q < 0) throw ConfigError("model.q must be non-negative");
  positive(c.a0, "class.a0");
  positive(c.b0, "class.b0");
  if (!(c.R >= 10.0)) throw ConfigError("grid.R must be at least 10");
  if (c.N < 101 || c.N % 2 == 0) throw ConfigError("grid.N must be odd and at least 101");
  try {
    c.solver.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  positive(c.t_post, "t_post");
  if (c.profile.kind == ProfileKind::perturbed &&
      !(c.profile.amplitude > 0.0 && c.profile.amplitude <= 0.5)) {
    throw ConfigError("profile.amplitude must lie in (0, 0.5]");
  }
  if (c.profile.kind == ProfileKind::cone &&
      !(c.profile.gamma > 0.0 && c.profile.gamma <= 1.0)) {
    throw ConfigError("profile.gamma must lie in (0, 1]");
  }
  if (c.output.empty()) throw ConfigError("output must be a nonempty path");
}

void require_compact_profile(const ScenarioConfig& c) {
  if (c.profile.kind == ProfileKind::cone) {
    throw ConfigError("profile.kind: a cone profile is non-compact data and cannot start a run");
  }
}

ScenarioConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  reject_unknown(doc, "",
                 {"model", "class", "grid", "solver", "t_post", "profile", "flags", "output"});

  ScenarioConfig c;
  const json& model = section(doc, "model", true);
  reject_unknown(model, "model", {"p", "q"});
  c.model.p = integer(model, "model", "p", 0, true);
  c.model.q = integer(model, "model", "q", 0, true);

  const json& klass = section(doc, "class", true);
  reject_unknown(klass, "class", {"a0", "b0"});
  c.a0 = number(klass, "class", "a0", 0.0, true);
  c.b0 = number(klass, "class", "b0", 0.0, true);

  const json& grid = section(doc, "grid", false);
  reject_unknown(grid, "grid", {"R", "N"});
  c.R = number(grid, "grid", "R", c.R);
  c.N = integer(grid, "grid", "N", c.N);

  const json& solver = section(doc, "solver", false);
  reject_unknown(solver, "solver",
                 {"dt_max", "cfl_sigma", "eps_stop", "eps_floor", "output_stride", "integrator",
                  "dt_initial_post", "right_closure", "max_halvings"});
  SolverConfig& s = c.solver;
  s.dt_max = number(solver, "solver", "dt_max", s.dt_max);
  s.cfl_sigma = number(solver, "solver", "cfl_sigma", s.cfl_sigma);
  s.eps_stop = number(solver, "solver", "eps_stop", s.eps_stop);
  s.eps_floor = number(solver, "solver", "eps_floor", s.eps_floor);
  s.output_stride = integer(solver, "solver", "output_stride", s.output_stride);
  s.dt_initial_post = number(solver, "solver", "dt_initial_post", s.dt_initial_post);
  s.max_halvings = integer(solver, "solver", "max_halvings", s.max_halvings);
  const std::string integ = text(solver, "solver", "integrator", to_string(s.integrator));
  if (integ == "sdirk4") {
    s.integrator = Integrator::sdirk4;
  } else if (integ == "rk4") {
    s.integrator = Integrator::rk4;
  } else {
    throw ConfigError("solver.integrator must be \"sdirk4\" or \"rk4\"");
  }
  const std::string closure = text(solver, "solver", "right_closure", "exponential_tail");
  if (closure == "exponential_tail") {
    s.right_closure = RightClosure::exponential_tail;
  } else if (closure == "robin") {
    s.right_closure = RightClosure::robin;
  } else {
    throw ConfigError("solver.right_closure must be \"exponential_tail\" or \"robin\"");
  }

  if (doc.contains("t_post")) {
    if (!doc.at("t_post").is_number()) throw ConfigError("t_post must be a number");
    c.t_post = doc.at("t_post").get<double>();
  }

  const json& prof = section(doc, "profile", false);
  reject_unknown(prof, "profile", {"kind", "amplitude", "seed", "gamma"});
  const std::string kind = text(prof, "profile", "kind", "canonical");
  if (kind == "canonical") {
    c.profile.kind = ProfileKind::canonical;
  } else if (kind == "perturbed") {
    c.profile.kind = ProfileKind::perturbed;
  } else if (kind == "cone") {
    c.profile.kind = ProfileKind::cone;
  } else {
    throw ConfigError("profile.kind must be canonical, perturbed or cone");
  }
  c.profile.amplitude = number(prof, "profile", "amplitude", c.profile.amplitude);
  c.profile.gamma = number(prof, "profile", "gamma", c.profile.gamma);
  if (prof.contains("seed")) {
    const json& v = prof.at("seed");
    if (!v.is_number_unsigned()) throw ConfigError("profile.seed must be a non-negative integer");
    c.profile.seed = v.get<std::uint64_t>();
  }

  const json& flags = section(doc, "flags", false);
  reject_unknown(flags, "flags", {"paper_literal_rates", "emit_snapshots"});
  c.paper_literal_rates = boolean(flags, "flags", "paper_literal_rates", c.paper_literal_rates);
  c.emit_snapshots = boolean(flags, "flags", "emit_snapshots", c.emit_snapshots);

  if (doc.contains("output")) {
    if (!doc.at("output").is_string()) throw ConfigError("output must be a string");
    c.output = doc.at("output").get<std::string>();
  }

  validate(c);
  return c;
}

ScenarioConfig parse_config(const std::string& src) {
  return config_from_json(parse_config_document(src));
}

json parse_config_document(const std::string& src) {
  json doc;
  try {
    doc = json::parse(src);
  } catch (const json::parse_error& e) {
    std::string what = e.what();
    const auto colon = what.rfind(": ");
    if (colon != std::string::npos) what = what.substr(colon + 2);
    throw ConfigError("JSON syntax error at " + locate(src, e.byte) + ": " + what);
  }
  return doc;
}

json to_json(const ScenarioConfig& c) {
  json j;
  j["model"] = {{"p", c.model.p}, {"q", c.model.q}};
  j["class"] = {{"a0", c.a0}, {"b0", c.b0}};
  j["grid"] = {{"R", c.R}, {"N", c.N}};
  j["solver"] = {{"dt_max", c.solver.dt_max},
                 {"cfl_sigma", c.solver.cfl_sigma},
                 {"eps_stop", c.solver.eps_stop},
                 {"eps_floor", c.solver.eps_floor},
                 {"output_stride", c.solver.output_stride},
                 {"integrator", to_string(c.solver.integrator)},
                 {"dt_initial_post", c.solver.dt_initial_post},
                 {"right_closure", c.solver.right_closure == RightClosure::robin
                                       ? "robin"
                                       : "exponential_tail"},
                 {"max_halvings", c.solver.max_halvings}};
  j["t_post"] = c.t_post;
  json prof = {{"kind", to_string(c.profile.kind)}};
  if (c.profile.kind == ProfileKind::perturbed) {
    prof["amplitude"] = c.profile.amplitude;
    prof["seed"] = c.profile.seed;
  }
  if (c.profile.kind == ProfileKind::cone) prof["gamma"] = c.profile.gamma;
  j["profile"] = prof;
  j["flags"] = {{"paper_literal_rates", c.paper_literal_rates},
                {"emit_snapshots", c.emit_snapshots}};
  j["output"] = c.output;
  return j;
}

Profile initial_profile(const ScenarioConfig& c) {
  const Grid g = c.grid();
  switch (c.profile.kind) {
    case ProfileKind::canonical:
      return canonical_profile(c.b0, g);
    case ProfileKind::perturbed:
      return perturbed_profile(c.b0, g, c.profile.amplitude, c.profile.seed);
    case ProfileKind::cone:
      break;
  }
  require_compact_profile(c);
  return {};
}

}  // namespace flipflow
