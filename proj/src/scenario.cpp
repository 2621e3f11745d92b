#include "flipflow/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>

#include "flipflow/errors.hpp"

namespace flipflow {

namespace {

using nlohmann::json;

constexpr double kVolumeTol = 1e-3;
constexpr double kVolumeTolInitial = 1e-6;
constexpr double kGaugeTol = 1e-9;
constexpr double kMargin = 1.05;
constexpr double kRateTol = 0.05;
constexpr double kDecayFactor = 0.2;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Verdict at_most(const std::string& name, double measured, double bound) {
  return Verdict{name, measured <= bound, measured, bound};
}

Verdict at_least(const std::string& name, double measured, double bound) {
  return Verdict{name, measured >= bound, measured, bound};
}

json verdict_json(const Verdict& v) {
  return {{"pass", v.pass}, {"measured", v.measured}, {"bound", v.bound}};
}

std::string convention_name(RateConvention c) {
  return c == RateConvention::paper_literal ? "paper_literal" : "adjunction";
}

double relative_volume_error(const FlowState& s) {
  const double exact = VolumePolynomial(s.model())(s.path.a_at(s.t), s.path.b_at(s.t));
  return std::abs(volume_integral(s.model(), s.path.a_at(s.t), s.profile) - exact) / exact;
}

// Least-squares slope of u'(R) against t.
double edge_rate(const std::vector<FlowState>& states) {
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  const double n = static_cast<double>(states.size());
  const double t_ref = states.front().t;
  for (const FlowState& s : states) {
    const double t = s.t - t_ref;
    const double y = s.profile.up().back();
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
  }
  const double den = n * stt - st * st;
  if (!(den > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return (n * sty - st * sy) / den;
}

double min_upp(const Profile& p) { return *std::min_element(p.upp().begin(), p.upp().end()); }

std::vector<const FlowState*> all_states(const ScenarioResult& r) {
  std::vector<const FlowState*> out;
  for (const FlowState& s : r.run.pre.trajectory) out.push_back(&s);
  if (r.run.post) {
    for (const FlowState& s : r.run.post->trajectory) out.push_back(&s);
  }
  return out;
}

void score_common(ScenarioResult& r) {
  const auto& pre = r.run.pre.trajectory;
  const FlowState& first = pre.front();
  const ClassPath& path = first.path;
  const double t_cut = path.t0 + 0.95 * (path.T - path.t0);

  double vol = 0.0;
  for (const FlowState& s : pre) {
    if (s.t <= t_cut) vol = std::max(vol, relative_volume_error(s));
  }
  if (r.run.post) {
    for (const FlowState& s : r.run.post->trajectory) vol = std::max(vol, relative_volume_error(s));
  }
  const double vol0 = relative_volume_error(first);
  Verdict v = at_most("volume_identity", vol, kVolumeTol);
  v.pass = v.pass && vol0 <= kVolumeTolInitial;
  r.verdicts.push_back(v);
  r.measurements["volume_error_initial"] = vol0;

  const int c = first.profile.grid().center();
  const double u0 = first.profile.u()[static_cast<std::size_t>(c)];
  double drift = 0.0;
  for (const FlowState* s : all_states(r)) {
    drift = std::max(drift, std::abs(s->profile.u()[static_cast<std::size_t>(c)] - u0));
  }
  r.verdicts.push_back(at_most("gauge", drift / std::max(1.0, std::abs(u0)), kGaugeTol));

  const double cap = std::max(1.0, max_ratio(first.profile));
  double worst = 0.0;
  for (const FlowState* s : all_states(r)) worst = std::max(worst, max_ratio(s->profile));
  r.verdicts.push_back(at_most("max_principle", worst, kMargin * cap));
  r.measurements["max_ratio_initial"] = max_ratio(first.profile);

  double dev = std::numeric_limits<double>::quiet_NaN();
  if (pre.size() >= 2) {
    const double slope = edge_rate(pre);
    dev = std::abs(slope + path.rate_b) / std::abs(path.rate_b);
    r.measurements["rate_b_pre"] = {{"measured", slope}, {"expected", -path.rate_b}};
  }
  if (r.run.post && r.run.post->trajectory.size() >= 2) {
    const auto& post = r.run.post->trajectory;
    const double slope = edge_rate(post);
    const double rb = post.front().path.rate_b;
    dev = std::max(dev, std::abs(slope + rb) / std::abs(rb));
    r.measurements["rate_b_post"] = {{"measured", slope}, {"expected", -rb}};
  }
  Verdict rv = at_most("rate_b", dev, kRateTol);
  rv.pass = rv.pass && std::isfinite(dev);
  r.verdicts.push_back(rv);

  // Estimates against constants frozen at the start.
  EstimateReference ref = reference_at_start(first);
  std::vector<Verdict> worst_est;
  auto merge = [&](const std::vector<Verdict>& vs) {
    for (const Verdict& e : vs) {
      auto it = std::find_if(worst_est.begin(), worst_est.end(),
                             [&](const Verdict& w) { return w.name == e.name; });
      if (it == worst_est.end()) {
        worst_est.push_back(e);
      } else if (e.measured - e.bound > it->measured - it->bound) {
        *it = e;
      }
    }
  };
  for (const FlowState& s : pre) merge(estimate_suite(s, ref));
  if (r.run.post && r.run.restart) {
    ref.density_const = density_constant(*r.run.restart);
    r.measurements["density_constant"] = *ref.density_const;
    for (const FlowState& s : r.run.post->trajectory) merge(estimate_suite(s, ref));
  }
  for (Verdict& e : worst_est) {
    e.pass = e.measured <= e.bound;
    r.advisory.push_back(e);
  }
}

// V_profile(t) / (T - t)^{p-q} between the first sample and T - 1e-3.
void score_ratio_signature(ScenarioResult& r) {
  const auto& pre = r.run.pre.trajectory;
  const ClassPath& path = pre.front().path;
  const BundleModel m = path.model;
  auto ratio = [&](const FlowState& s) {
    return volume_integral(m, path.a_at(s.t), s.profile) / std::pow(path.T - s.t, m.p - m.q);
  };
  const FlowState* last = nullptr;
  for (const FlowState& s : pre) {
    if (s.t <= path.T - 1e-3) last = &s;
  }
  if (last == nullptr || last == &pre.front()) return;
  const double growth = ratio(*last) / ratio(pre.front());
  switch (r.singularity.kind) {
    case SingularityKind::flip:
      r.advisory.push_back(at_least("ratio_signature", growth, 1e3));
      break;
    case SingularityKind::extinction:
      r.advisory.push_back(at_most("ratio_signature", growth, 1e-2));
      break;
    case SingularityKind::collapse: {
      // The ratio stays bounded only when p = 2q + 1, so this is advisory.
      Verdict v{"ratio_signature", growth >= 1e-2 && growth <= 1e2, growth, 1e2};
      r.advisory.push_back(v);
      break;
    }
  }
  r.measurements["ratio_growth"] = growth;
}

void score_flip(ScenarioResult& r) {
  const auto& pre = r.run.pre.trajectory;
  const ClassPath& path = pre.front().path;
  const double T = path.T;
  const double t80 = path.t0 + 0.8 * (T - path.t0);

  const double ref = exceptional_diameter(path.a_at(t80)) / std::cbrt(T - t80);
  double prev = ref;
  bool monotone = true;
  double final_value = ref;
  for (const FlowState& s : pre) {
    if (s.t < t80) continue;
    const double v = exceptional_diameter(s) / std::cbrt(T - s.t);
    if (s.t > t80 && !(v < prev)) monotone = false;
    prev = v;
    final_value = v;
  }
  Verdict ed = at_most("exc_diam_decay", final_value / ref, kDecayFactor);
  ed.pass = ed.pass && monotone;
  r.verdicts.push_back(ed);
  r.measurements["exc_diam_monotone"] = monotone;

  const BundleModel m = path.model;
  const double exponent_bound = static_cast<double>(m.q + 1) / m.n() - 0.05;
  bool smooth = r.run.post.has_value() && r.run.post->trajectory.size() >= 2;
  double lowest_upp = std::numeric_limits<double>::infinity();
  double lowest_exp = std::numeric_limits<double>::infinity();
  if (r.run.post) {
    const auto& post = r.run.post->trajectory;
    const std::size_t early = std::min<std::size_t>(3, post.size() - 1);
    for (std::size_t k = 1; k <= early; ++k) {
      const FlowState& s = post[k];
      lowest_upp = std::min(lowest_upp, min_upp(s.profile));
      smooth = smooth && validate_calabi(s.profile, s.path.b_at(s.t), 1e-3).ok();
    }
    for (const FlowState& s : post) {
      try {
        lowest_exp = std::min(lowest_exp, fit_left_exponent(s.profile));
      } catch (const DegenerateWindow&) {
        lowest_exp = -std::numeric_limits<double>::infinity();
      }
    }
  }
  Verdict pf = at_least("post_flip_positivity", lowest_exp, exponent_bound);
  pf.pass = pf.pass && smooth && lowest_upp > 0.0;
  r.verdicts.push_back(pf);
  r.measurements["post_flip_min_upp"] = lowest_upp;
  r.measurements["post_flip_calabi_ok"] = smooth;

  if (r.run.restart) {
    const FlowState& fin = r.run.pre.event.final_state;
    const FlowState& rs = *r.run.restart;
    const double v_pre = volume_poly(fin.model(), fin.klass());
    const double v_post = volume_poly(rs.model(), rs.klass());
    const double v_T = volume_poly(m, {0.0, path.b_at(T)});
    r.advisory.push_back(at_most("volume_continuity", std::abs(v_post - v_pre) / v_T, 1e-3));

    const RicciModification small = ricci_modify(fin, 1e-3);
    const RicciModification large = ricci_modify(fin, 10.0);
    r.advisory.push_back(Verdict{"ricci_modification", small.convex, small.min_upp, 0.0});
    r.measurements["ricci_modification"] = {
        {"eps_small", {{"eps", 1e-3}, {"convex", small.convex}, {"min_upp", small.min_upp}}},
        {"eps_large", {{"eps", 10.0}, {"convex", large.convex}, {"min_upp", large.min_upp}}}};
  }
}

void finish(ScenarioResult& r) {
  if (r.exit_code == kExitSolverFailure) return;
  r.exit_code = kExitOk;
  for (const Verdict& v : r.verdicts) {
    if (v.pass) continue;
    r.exit_code = kExitVerdictFailed;
    r.failure += (r.failure.empty() ? "" : ", ") + v.name;
  }
}

bool solver_failed(const SingularEvent& ev) {
  return ev.cause == EventCause::convexity_loss || ev.cause == EventCause::step_failure;
}

json event_json(const RunResult& run) {
  const SingularEvent& ev = run.event;
  return {{"T_num", ev.T_num},
          {"cause", to_string(ev.cause)},
          {"vanishing", to_string(ev.vanishing)},
          {"message", ev.message},
          {"steps", run.steps},
          {"samples", run.trajectory.size()}};
}

void append_rows(std::string& out, const std::vector<FlowState>& states) {
  for (const FlowState& s : states) {
    const double a = s.path.a_at(s.t);
    const double b = s.path.b_at(s.t);
    double ratio = std::numeric_limits<double>::quiet_NaN();
    if (s.t < s.path.T) ratio = volume_ratio(s.path, s.t);
    const double fields[] = {s.t,
                             a,
                             b,
                             VolumePolynomial(s.model())(a, b),
                             volume_integral(s.model(), a, s.profile),
                             ratio,
                             s.profile.up().back(),
                             max_ratio(s.profile),
                             exceptional_diameter(a),
                             fiber_length(s.profile)};
    for (std::size_t k = 0; k < std::size(fields); ++k) {
      if (k) out += ",";
      out += num(fields[k]);
    }
    out += "\n";
  }
}

void write_text(const std::filesystem::path& file, const std::string& body) {
  std::ofstream f(file, std::ios::binary);
  if (!f) throw Error("cannot write " + file.string());
  f << body;
}

void write_snapshots(const std::vector<FlowState>& states, const std::filesystem::path& dir,
                     const std::string& stem) {
  for (std::size_t k = 0; k < states.size(); ++k) {
    char name[64];
    std::snprintf(name, sizeof name, "%s_%04zu.csv", stem.c_str(), k);
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw Error("cannot write snapshot " + (dir / name).string());
    write_profile_csv(f, states[k].profile);
  }
}

}  // namespace

json classify_report(const ScenarioConfig& config) {
  const ClassPath path = config.path();
  const SingularityClass sc = classify_singularity(path);
  return {{"model", {{"p", config.model.p}, {"q", config.model.q}}},
          {"class", {{"a0", config.a0}, {"b0", config.b0}}},
          {"convention", convention_name(path.convention)},
          {"rates", {{"a", path.rate_a}, {"b", path.rate_b}}},
          {"T", path.T},
          {"vanishing", to_string(path.vanishing)},
          {"kind", to_string(sc.kind)},
          {"ratio_exponent", sc.ratio_exponent},
          {"admits_flip", config.model.admits_flip()}};
}

ScenarioResult run_simulation(const ScenarioConfig& config) {
  validate(config);
  require_compact_profile(config);
  ScenarioResult r;
  r.config = config;
  r.path = config.path();
  r.singularity = classify_singularity(r.path);
  const FlowState init = make_state(r.path, initial_profile(config));
  r.run.pre = run_until_singular(init, config.solver);
  if (solver_failed(r.run.pre.event)) {
    r.exit_code = kExitSolverFailure;
    r.failure = r.run.pre.event.message;
  }
  score_common(r);
  score_ratio_signature(r);
  finish(r);
  return r;
}

ScenarioResult run_flip_scenario(const ScenarioConfig& config) {
  validate(config);
  require_compact_profile(config);
  ScenarioResult r;
  r.config = config;
  r.path = config.path();
  r.singularity = classify_singularity(r.path);
  if (r.singularity.kind != SingularityKind::flip || !config.model.admits_flip()) {
    throw ConfigError("flip-run needs a class line that ends in a flip; this one ends in " +
                      to_string(r.singularity.kind) +
                      (config.model.admits_flip() ? "" : " on a model without a flip"));
  }
  const FlowState init = make_state(r.path, initial_profile(config));
  r.run = run_flip(init, config.solver, config.t_post);
  if (solver_failed(r.run.pre.event) || !r.run.post) {
    r.exit_code = kExitSolverFailure;
    r.failure = "pre-flip: " + r.run.pre.event.message;
  } else if (r.run.post->event.cause != EventCause::reached_end) {
    r.exit_code = kExitSolverFailure;
    r.failure = "post-flip: " + r.run.post->event.message;
  }
  score_common(r);
  score_ratio_signature(r);
  score_flip(r);
  finish(r);
  return r;
}

std::string trajectory_csv(const ScenarioResult& r) {
  std::string out = "t,a,b,V_poly,V_profile,ratio,up_max,upp_over_up_max,exc_diam,fiber_len\n";
  append_rows(out, r.run.pre.trajectory);
  if (r.run.post) append_rows(out, r.run.post->trajectory);
  return out;
}

json summary_json(const ScenarioResult& r) {
  json j;
  j["config"] = to_json(r.config);
  j["classification"] = classify_report(r.config);
  j["pre_flip"] = event_json(r.run.pre);
  if (r.run.post) {
    j["post_flip"] = event_json(*r.run.post);
    j["post_flip"]["t_restart"] = r.run.restart->t;
    j["post_flip"]["model"] = {{"p", r.run.restart->model().p}, {"q", r.run.restart->model().q}};
  } else {
    j["post_flip"] = nullptr;
  }
  json verdicts = json::object();
  for (const Verdict& v : r.verdicts) verdicts[v.name] = verdict_json(v);
  json advisory = json::object();
  for (const Verdict& v : r.advisory) advisory[v.name] = verdict_json(v);
  j["verdicts"] = verdicts;
  j["advisory"] = advisory;
  j["measurements"] = r.measurements;
  j["exit_code"] = r.exit_code;
  j["failure"] = r.failure;
  return j;
}

void write_artifacts(const ScenarioResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "trajectory.csv", trajectory_csv(r));
  write_text(dir / "summary.json", summary_json(r).dump(2) + "\n");
  if (r.config.emit_snapshots) {
    const auto snap = dir / "snapshots";
    std::filesystem::create_directories(snap);
    write_snapshots(r.run.pre.trajectory, snap, "pre");
    if (r.run.post) write_snapshots(r.run.post->trajectory, snap, "post");
  }
}

json quotient_json(const QuotientReport& q) {
  auto chart_list = [](const std::vector<Chart>& cs, const std::string& var) {
    json arr = json::array();
    for (const Chart& c : cs) {
      const std::size_t dim = c.residual_weights.size();
      std::string label = "C^" + std::to_string(dim);
      if (!c.smooth) {
        std::string w;
        for (std::size_t k = 0; k < dim; ++k) {
          if (k) w += ",";
          w += std::to_string(c.residual_weights[k]);
        }
        label += "/Z_" + std::to_string(c.group_order) + "(" + w + ")";
      }
      arr.push_back({{"chart", var + "_" + std::to_string(c.index) + " != 0"},
                     {"group_order", c.group_order},
                     {"residual_weights", c.residual_weights},
                     {"smooth", c.smooth},
                     {"label", label}});
    }
    return arr;
  };
  json j;
  j["weights"] = q.weights.to_string();
  j["a"] = q.weights.a;
  j["b"] = q.weights.b;
  j["m"] = q.weights.m();
  j["l"] = q.weights.l();
  j["gcd"] = q.admissibility.gcd;
  j["admissible"] = q.admissibility.admissible;
  j["strongly_admissible"] = q.admissibility.strongly_admissible;
  j["offending_index"] =
      q.admissibility.offending_index ? json(*q.admissibility.offending_index) : json(nullptr);
  j["kind"] = to_string(q.kind);
  j["fixed_minus"] = weighted_projective_label(q.fixed_minus);
  j["fixed_plus"] = weighted_projective_label(q.fixed_plus);
  j["charts_minus"] = chart_list(q.charts_minus, "x");
  j["charts_plus"] = chart_list(q.charts_plus, "y");
  j["smooth_minus"] = q.smooth_minus;
  j["smooth_plus"] = q.smooth_plus;
  j["bundle_minus"] = q.bundle_minus ? json(q.bundle_minus->label()) : json(nullptr);
  j["bundle_plus"] = q.bundle_plus ? json(q.bundle_plus->label()) : json(nullptr);
  return j;
}

int cmd_classify(const ScenarioConfig& config, std::ostream& out) {
  validate(config);
  out << classify_report(config).dump(2) << "\n";
  return kExitOk;
}

int cmd_simulate(const ScenarioConfig& config, std::ostream& out, std::ostream& err) {
  const ScenarioResult r = run_simulation(config);
  write_artifacts(r, config.output);
  out << summary_json(r).dump(2) << "\n";
  if (r.exit_code == kExitVerdictFailed) err << "verdict failed: " << r.failure << "\n";
  if (r.exit_code == kExitSolverFailure) err << "solver failure: " << r.failure << "\n";
  return r.exit_code;
}

int cmd_flip_run(const ScenarioConfig& config, std::ostream& out, std::ostream& err) {
  const ScenarioResult r = run_flip_scenario(config);
  write_artifacts(r, config.output);
  out << summary_json(r).dump(2) << "\n";
  if (r.exit_code == kExitVerdictFailed) err << "verdict failed: " << r.failure << "\n";
  if (r.exit_code == kExitSolverFailure) err << "solver failure: " << r.failure << "\n";
  return r.exit_code;
}

int cmd_quotient(const std::string& weights, std::ostream& out, std::ostream& err) {
  try {
    const QuotientReport q = classify(QuotientWeights::parse(weights));
    out << quotient_json(q).dump(2) << "\n";
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

int cmd_verify(std::ostream& out) {
  using boost::math::constants::pi;
  std::vector<Verdict> checks;

  // FS diameter as the length of a fiber ray of the canonical b0 = 1 profile.
  boost::math::quadrature::sinh_sinh<double> ss;
  const double ray =
      ss.integrate([](double x) { return 0.5 / std::cosh(0.5 * x); }) / std::sqrt(2.0);
  checks.push_back(at_most("fs_diameter", std::abs(fs_diameter() - ray), 1e-6));

  const Grid grid = Grid::make(20.0, 2001);
  double worst_len = 0.0;
  for (double b0 : {1.0, 4.0, 9.0}) {
    const double exact = pi<double>() * std::sqrt(b0 / 2.0);
    worst_len = std::max(worst_len, std::abs(fiber_length(canonical_profile(b0, grid)) - exact));
  }
  checks.push_back(at_most("canonical_fiber_length", worst_len, 1e-4));

  const ValidationReport vr = validate_calabi(canonical_profile(9.0, grid), 9.0);
  checks.push_back(Verdict{"canonical_calabi", vr.ok(), 0.0, 0.0});

  double worst_cone = 0.0;
  for (double g : {0.3, 0.5, 0.7}) {
    const ConeProfile cone = cone_profile(g, grid);
    for (double s : {2.0, std::exp(1.0)}) worst_cone = std::max(worst_cone, cone_scaling_check(cone, s));
  }
  checks.push_back(at_most("cone_scaling", worst_cone, 1e-9));

  const ConeProfile flat = cone_profile(1.0, grid);
  const BundleModel m{3, 1};
  const std::vector<double> u_t = rhs(m, 0.0, flat.profile, 0.0);
  double worst_rhs = 0.0;
  for (int i = 1; i + 1 < grid.N; ++i) {
    worst_rhs = std::max(worst_rhs, std::abs(u_t[static_cast<std::size_t>(i)] - m.p * grid.rho(i)));
  }
  checks.push_back(at_most("cone_rhs", worst_rhs, 1e-10));

  // V̂ against adaptive quadrature at a sample class.
  const VolumePolynomial vp(m);
  const double quad = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      [](double s) { return std::pow(2.0 + s, 3) * s; }, 0.0, 9.0);
  checks.push_back(at_most("volume_polynomial", std::abs(vp(2.0, 9.0) - quad) / quad, 1e-12));

  const std::pair<const char*, BirationalKind> examples[] = {
      {"1,1,1,1;1,1", BirationalKind::flip},
      {"2,1;1,1", BirationalKind::flip},
      {"1,1;1,1", BirationalKind::flop},
      {"1,1,1;1", BirationalKind::divisorial_contraction}};
  bool kinds = true;
  for (const auto& [w, k] : examples) kinds = kinds && classify(QuotientWeights::parse(w)).kind == k;
  checks.push_back(Verdict{"quotient_examples", kinds, 0.0, 0.0});

  bool all = true;
  for (const Verdict& v : checks) {
    char line[160];
    std::snprintf(line, sizeof line, "%s %-24s measured=%.3e bound=%.3e", v.pass ? "PASS" : "FAIL",
                  v.name.c_str(), v.measured, v.bound);
    out << line << "\n";
    all = all && v.pass;
  }
  return all ? kExitOk : kExitVerdictFailed;
}

std::vector<ScenarioConfig> expand_sweep(const json& base, const std::string& plan) {
  struct Axis {
    json::json_pointer ptr;
    std::vector<json> values;
  };
  std::vector<Axis> axes;
  std::stringstream ss(plan);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("sweep entry \"" + item + "\" must look like key.path=v1,v2");
    }
    std::string key = item.substr(0, eq);
    std::replace(key.begin(), key.end(), '.', '/');
    Axis ax{json::json_pointer("/" + key), {}};
    std::stringstream vs(item.substr(eq + 1));
    std::string v;
    while (std::getline(vs, v, ',')) {
      const json parsed = json::parse(v, nullptr, false);
      ax.values.push_back(parsed.is_discarded() ? json(v) : parsed);
    }
    if (ax.values.empty()) throw ConfigError("sweep entry \"" + item + "\" lists no values");
    axes.push_back(std::move(ax));
  }
  if (axes.empty()) throw ConfigError("empty sweep specification");

  const std::string root = base.contains("output") && base.at("output").is_string()
                               ? base.at("output").get<std::string>()
                               : ScenarioConfig{}.output;
  std::vector<ScenarioConfig> out;
  std::vector<std::size_t> pick(axes.size(), 0);
  for (;;) {
    json doc = base;
    for (std::size_t k = 0; k < axes.size(); ++k) doc[axes[k].ptr] = axes[k].values[pick[k]];
    char dir[32];
    std::snprintf(dir, sizeof dir, "sweep_%03zu", out.size());
    doc["output"] = (std::filesystem::path(root) / dir).string();
    out.push_back(config_from_json(doc));

    std::size_t k = axes.size();
    while (k > 0) {
      --k;
      if (++pick[k] < axes[k].values.size()) break;
      pick[k] = 0;
      if (k == 0) return out;
    }
  }
}

}  // namespace flipflow
