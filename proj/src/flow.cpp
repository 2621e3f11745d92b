#include "flipflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "flipflow/errors.hpp"

namespace flipflow {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

// Slope vector held as an unevaluated sum hi + lo.
struct Slope {
  std::vector<double> hi;
  std::vector<double> lo;

  std::size_t size() const { return hi.size(); }

  // this += x, elementwise, with error-free accumulation into lo.
  void add(std::span<const double> x) {
    for (std::size_t i = 0; i < hi.size(); ++i) {
      const double s = hi[i] + x[i];
      const double bb = s - hi[i];
      double e = (hi[i] - (s - bb)) + (x[i] - bb);
      e += lo[i];
      hi[i] = s + e;
      lo[i] = e - (hi[i] - s);
    }
  }

  double minus(const Slope& o, std::size_t i) const {
    return (hi[i] - o.hi[i]) + (lo[i] - o.lo[i]);
  }
};

struct Tridiagonal {
  std::vector<double> lower, diag, upper;

  explicit Tridiagonal(std::size_t n) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}

  void add(int i, int j, double v) {
    if (j == i) {
      diag[idx(i)] += v;
    } else if (j == i - 1) {
      lower[idx(i)] += v;
    } else if (j == i + 1) {
      upper[idx(i)] += v;
    }
  }

  // Thomas algorithm; rhs is overwritten with the solution.
  bool solve(std::vector<double>& rhs) const {
    const std::size_t n = diag.size();
    std::vector<double> c(n);
    double denom = diag[0];
    if (denom == 0.0) return false;
    c[0] = upper[0] / denom;
    rhs[0] /= denom;
    for (std::size_t i = 1; i < n; ++i) {
      denom = diag[i] - lower[i] * c[i - 1];
      if (denom == 0.0 || !std::isfinite(denom)) return false;
      c[i] = upper[i] / denom;
      rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
    return true;
  }
};

// Discrete slope operator at fixed a. Cell k in [0, N] sits between nodes
// k-1 and k; cells 0 and N straddle the ghost nodes.
class SlopeOperator {
 public:
  SlopeOperator(const Grid& grid, BundleModel model, double a, BoundaryClosure closure)
      : grid_(grid), model_(model), a_(a), closure_(closure) {}

  // Fills increments D_k and midpoints m_k; false if outside the domain.
  bool cells(const Slope& s, std::vector<double>& D, std::vector<double>& m) const {
    const int N = grid_.N;
    D.assign(idx(N + 1), 0.0);
    m.assign(idx(N + 1), 0.0);
    for (int k = 1; k < N; ++k) {
      D[idx(k)] = (s.hi[idx(k)] - s.hi[idx(k - 1)]) + (s.lo[idx(k)] - s.lo[idx(k - 1)]);
    }
    const SlopeEnds ends{s.hi[0],           D[1],       D[2], s.hi[idx(N - 1)],
                         D[idx(N - 1)], D[idx(N - 2)]};
    const GhostIncrements g = ghost_increments(grid_, ends, closure_);
    D[0] = g.left;
    D[idx(N)] = g.right;
    for (int k = 0; k < N; ++k) m[idx(k)] = s.hi[idx(k)] - 0.5 * D[idx(k)];
    m[idx(N)] = s.hi[idx(N - 1)] + 0.5 * D[idx(N)];
    for (int k = 0; k <= N; ++k) {
      if (!(D[idx(k)] > 0.0) || !(m[idx(k)] > 0.0) || !(a_ + m[idx(k)] > 0.0)) return false;
    }
    for (int i = 0; i < N; ++i) {
      if (!(s.hi[idx(i)] > 0.0)) return false;
    }
    return true;
  }

  double flux(double D, double m) const {
    return model_.p * std::log(a_ + m) + model_.q * std::log(m) + std::log(D / grid_.h);
  }

  // f_i = (F_{i+1} - F_i)/h - (q+1); optional Jacobian.
  void apply(const std::vector<double>& D, const std::vector<double>& m, std::vector<double>& f,
             Tridiagonal* J) const {
    const int N = grid_.N;
    const double h = grid_.h;
    std::vector<double> F(idx(N + 1));
    for (int k = 0; k <= N; ++k) F[idx(k)] = flux(D[idx(k)], m[idx(k)]);
    f.resize(idx(N));
    for (int i = 0; i < N; ++i) f[idx(i)] = (F[idx(i + 1)] - F[idx(i)]) / h - (model_.q + 1);
    if (J == nullptr) return;

    // Each flux depends on at most two nodes: (node, dF/ds_node).
    const double e = std::exp(-h);
    for (int k = 0; k <= N; ++k) {
      const double A = model_.p / (a_ + m[idx(k)]) + model_.q / m[idx(k)];
      const double Fx = 0.5 * A - 1.0 / D[idx(k)];  // left endpoint of the cell
      const double Fy = 0.5 * A + 1.0 / D[idx(k)];  // right endpoint
      int j1 = 0, j2 = 0;
      double d1 = 0.0, d2 = 0.0;
      if (k == 0) {
        // left = s_1 - 2h s_0 (robin) or 3s_0 - 3s_1 + s_2 (not used by the solver)
        j1 = 0;
        d1 = Fx * (-2.0 * h) + Fy;
        j2 = 1;
        d2 = Fx;
      } else if (k == N) {
        j1 = N - 1;
        j2 = N - 2;
        if (closure_.right == RightClosure::exponential_tail) {
          d1 = Fx + Fy * (1.0 + e);
          d2 = -e * Fy;
        } else if (closure_.right == RightClosure::robin) {
          d1 = Fx - 2.0 * h * Fy;
          d2 = Fy;
        } else {
          d1 = Fx + 3.0 * Fy;
          d2 = -3.0 * Fy;  // drops the s_{N-3} term
        }
      } else {
        j1 = k - 1;
        d1 = Fx;
        j2 = k;
        d2 = Fy;
      }
      // F_k enters f_{k-1} with + and f_k with -.
      if (k - 1 >= 0) {
        J->add(k - 1, j1, d1 / h);
        J->add(k - 1, j2, d2 / h);
      }
      if (k < N) {
        J->add(k, j1, -d1 / h);
        J->add(k, j2, -d2 / h);
      }
    }
  }

  // Node values of log[(a+s)^p s^q u''] with u'' from the adjacent cells.
  std::vector<double> log_density(const Slope& s, const std::vector<double>& D) const {
    const int N = grid_.N;
    std::vector<double> L(idx(N));
    for (int i = 0; i < N; ++i) {
      const double si = s.hi[idx(i)];
      const double upp = (D[idx(i)] + D[idx(i + 1)]) / (2.0 * grid_.h);
      L[idx(i)] = model_.p * std::log(a_ + si) + model_.q * std::log(si) + std::log(upp);
    }
    return L;
  }

 private:
  Grid grid_;
  BundleModel model_;
  double a_;
  BoundaryClosure closure_;
};

BoundaryClosure solver_closure(const SolverConfig& config, double b) {
  return BoundaryClosure::flow(config.right_closure, b);
}

Slope slope_of(const Profile& p) {
  Slope s;
  s.hi.assign(p.up().begin(), p.up().end());
  if (p.up_lo().empty()) {
    s.lo.assign(s.hi.size(), 0.0);
  } else {
    s.lo.assign(p.up_lo().begin(), p.up_lo().end());
  }
  return s;
}

// u_t at the nodes for slope stage s: L - (q+1)ρ + c with c = -L(0).
std::vector<double> potential_rate(const Grid& grid, const BundleModel& model,
                                   const std::vector<double>& L) {
  const int c = grid.center();
  const double gauge = -L[idx(c)];
  std::vector<double> r(L.size());
  for (int i = 0; i < grid.N; ++i) {
    r[idx(i)] = L[idx(i)] - (model.q + 1) * grid.rho(i) + gauge;
  }
  r[idx(c)] = 0.0;
  return r;
}

// Five-stage, L-stable, stiffly accurate SDIRK of order 4 (γ = 1/4).
constexpr double kGamma = 0.25;
constexpr int kStages = 5;
constexpr double kC[kStages] = {0.25, 0.75, 11.0 / 20.0, 0.5, 1.0};
constexpr double kA[kStages][kStages] = {
    {0.25, 0, 0, 0, 0},
    {0.5, 0.25, 0, 0, 0},
    {17.0 / 50.0, -1.0 / 25.0, 0.25, 0, 0},
    {371.0 / 1360.0, -137.0 / 2720.0, 15.0 / 544.0, 0.25, 0},
    {25.0 / 24.0, -49.0 / 48.0, 125.0 / 16.0, -85.0 / 12.0, 0.25},
};

constexpr int kNewtonIterations = 25;
constexpr double kNewtonTolerance = 1e-10;

struct StageResult {
  Slope S;
  std::vector<double> K;
  std::vector<double> D;
};

StageResult solve_stage(const SlopeOperator& op, const Slope& r, const std::vector<double>& guess,
                        double gdt) {
  const std::size_t n = r.size();
  StageResult out;
  out.S = r;
  out.S.add(guess);
  std::vector<double> m, f;
  if (!op.cells(out.S, out.D, m)) {
    out.S = r;  // fall back to the explicit predictor
    if (!op.cells(out.S, out.D, m)) throw StepRejected("stage start outside the admissible set");
  }

  std::vector<double> delta(n), trial_step(n), Dt, mt;
  for (int it = 0; it < kNewtonIterations; ++it) {
    Tridiagonal J(n);
    op.apply(out.D, m, f, &J);
    for (std::size_t i = 0; i < n; ++i) {
      delta[i] = -(out.S.minus(r, i) - gdt * f[i]);
      J.lower[i] *= -gdt;
      J.diag[i] = 1.0 - gdt * J.diag[i];
      J.upper[i] *= -gdt;
    }
    if (!J.solve(delta)) throw StepRejected("singular Newton matrix");

    double lambda = 1.0;
    Slope trial;
    bool ok = false;
    for (int damp = 0; damp < 40; ++damp) {
      trial = out.S;
      for (std::size_t i = 0; i < n; ++i) trial_step[i] = lambda * delta[i];
      trial.add(trial_step);
      if (op.cells(trial, Dt, mt)) {
        ok = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!ok) throw StepRejected("Newton update left the admissible set");

    // Rigid shifts of a tail leave u'' alone, so convergence is judged on the
    // increments relative to themselves and on the values relative to max s.
    double worst = 0.0;
    double smax = 0.0;
    for (std::size_t i = 0; i < n; ++i) smax = std::max(smax, std::abs(out.S.hi[i]));
    for (std::size_t i = 0; i < n; ++i) {
      worst = std::max(worst, std::abs(delta[i]) / (1e-2 * smax));
      if (i > 0) worst = std::max(worst, std::abs(delta[i] - delta[i - 1]) / out.D[i]);
    }
    out.S = std::move(trial);
    out.D = std::move(Dt);
    m = std::move(mt);
    if (lambda == 1.0 && worst <= kNewtonTolerance) {
      out.K.resize(n);
      for (std::size_t i = 0; i < n; ++i) out.K[i] = out.S.minus(r, i) / gdt;
      return out;
    }
  }
  throw StepRejected("Newton iteration did not converge");
}

// Admissible profiles have u'' ~ e^{-|ρ|} in both tails, so the floor is
// applied to u'' e^{|ρ|} relative to its peak.
void check_convexity(const Profile& p, double eps_floor) {
  const auto upp = p.upp();
  const Grid& g = p.grid();
  const double peak = *std::max_element(upp.begin(), upp.end());
  for (int i = 0; i < g.N; ++i) {
    const double v = upp[idx(i)];
    if (!(v > 0.0) || !(v * std::exp(std::abs(g.rho(i))) > eps_floor * peak)) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "u'' fell to %.3g at rho = %.4g", v, g.rho(i));
      throw ConvexityLoss(buf);
    }
  }
}

FlowState finish_step(const FlowState& state, double dt, std::vector<double> u, Slope s,
                      const SolverConfig& config) {
  FlowState next;
  next.t = state.t + dt;
  next.path = state.path;
  next.phase = state.phase;
  const double b = next.path.b_at(next.t);
  next.profile = Profile::from_slope(state.profile.grid(), std::move(u), std::move(s.hi),
                                     std::move(s.lo), solver_closure(config, b));
  check_convexity(next.profile, config.eps_floor);
  next.c = gauge_constant(next.model(), next.path.a_at(next.t), next.profile);
  return next;
}

FlowState step_sdirk(const FlowState& state, double dt, const SolverConfig& config) {
  const Grid& grid = state.profile.grid();
  const std::size_t n = idx(grid.N);
  const Slope s0 = slope_of(state.profile);
  const double gdt = kGamma * dt;

  std::vector<std::vector<double>> K(kStages);
  std::vector<std::vector<double>> U(kStages);
  Slope last;
  std::vector<double> guess(n, 0.0);
  for (int i = 0; i < kStages; ++i) {
    const double ti = state.t + kC[i] * dt;
    const double b = state.path.b_at(ti);
    const SlopeOperator op(grid, state.model(), state.path.a_at(ti), solver_closure(config, b));

    Slope r = s0;
    std::vector<double> incr(n, 0.0);
    for (int j = 0; j < i; ++j) {
      for (std::size_t k = 0; k < n; ++k) incr[k] += dt * kA[i][j] * K[idx(j)][k];
    }
    r.add(incr);

    StageResult st = solve_stage(op, r, guess, gdt);
    U[idx(i)] = potential_rate(grid, state.model(), op.log_density(st.S, st.D));
    K[idx(i)] = std::move(st.K);
    for (std::size_t k = 0; k < n; ++k) guess[k] = gdt * K[idx(i)][k];
    last = std::move(st.S);
  }

  std::vector<double> u(state.profile.u().begin(), state.profile.u().end());
  for (std::size_t k = 0; k < n; ++k) {
    double du = 0.0;
    for (int j = 0; j < kStages; ++j) du += kA[kStages - 1][j] * U[idx(j)][k];
    u[k] += dt * du;
  }
  return finish_step(state, dt, std::move(u), std::move(last), config);
}

FlowState step_rk4(const FlowState& state, double dt, const SolverConfig& config) {
  const double limit = cfl_limit(state, config);
  if (dt > limit) {
    throw StepRejected("dt = " + std::to_string(dt) + " exceeds the CFL bound " +
                       std::to_string(limit));
  }
  const Grid& grid = state.profile.grid();
  const std::size_t n = idx(grid.N);
  const Slope s0 = slope_of(state.profile);
  static constexpr double c[4] = {0.0, 0.5, 0.5, 1.0};
  static constexpr double w[4] = {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0};

  std::vector<double> K, D, m, incr(n);
  Slope acc = s0;
  std::vector<double> total(n, 0.0);
  std::vector<double> du(n, 0.0);
  std::vector<double> prev;
  for (int i = 0; i < 4; ++i) {
    const double ti = state.t + c[i] * dt;
    const SlopeOperator op(grid, state.model(), state.path.a_at(ti),
                           solver_closure(config, state.path.b_at(ti)));
    Slope S = s0;
    if (i > 0) {
      for (std::size_t k = 0; k < n; ++k) incr[k] = c[i] * dt * prev[k];
      S.add(incr);
    }
    if (!op.cells(S, D, m)) throw StepRejected("explicit stage left the admissible set");
    op.apply(D, m, K, nullptr);
    const auto U = potential_rate(grid, state.model(), op.log_density(S, D));
    for (std::size_t k = 0; k < n; ++k) {
      total[k] += dt * w[i] * K[k];
      du[k] += dt * w[i] * U[k];
    }
    prev = K;
  }
  acc.add(total);
  std::vector<double> u(state.profile.u().begin(), state.profile.u().end());
  for (std::size_t k = 0; k < n; ++k) u[k] += du[k];
  return finish_step(state, dt, std::move(u), std::move(acc), config);
}

bool exhausted(const FlowState& s, double eps) {
  const double a = s.path.a_at(s.t);
  const double b = s.path.b_at(s.t);
  if (b < eps) return true;
  return s.path.rate_a > 0 && a < eps;
}

double choose_dt(const FlowState& s, const SolverConfig& config, double t_end) {
  double dt = config.dt_max;
  dt = std::min(dt, 0.1 * (s.path.T - s.t));
  if (s.phase == Phase::post_flip) {
    dt = std::min(dt, std::max(config.dt_initial_post, 0.1 * (s.t - s.path.t0)));
  }
  if (t_end > 0.0) dt = std::min(dt, t_end - s.t);
  return dt;
}

}  // namespace

std::string to_string(Phase p) { return p == Phase::pre_flip ? "PreFlip" : "PostFlip"; }

std::string to_string(Integrator i) { return i == Integrator::sdirk4 ? "sdirk4" : "rk4"; }

std::string to_string(EventCause c) {
  switch (c) {
    case EventCause::class_exhausted:
      return "ClassExhausted";
    case EventCause::convexity_loss:
      return "ConvexityLoss";
    case EventCause::step_failure:
      return "StepFailure";
    case EventCause::reached_end:
      return "ReachedEnd";
  }
  return "?";
}

void SolverConfig::validate() const {
  if (!(dt_max > 0.0)) throw InvalidArgument("solver.dt_max must be positive");
  if (!(cfl_sigma > 0.0 && cfl_sigma <= 0.5)) {
    throw InvalidArgument("solver.cfl_sigma must lie in (0, 0.5]");
  }
  if (!(eps_stop > 0.0)) throw InvalidArgument("solver.eps_stop must be positive");
  if (!(eps_floor > 0.0)) throw InvalidArgument("solver.eps_floor must be positive");
  if (output_stride < 1) throw InvalidArgument("solver.output_stride must be positive");
  if (!(dt_initial_post > 0.0)) throw InvalidArgument("solver.dt_initial_post must be positive");
  if (max_halvings < 0) throw InvalidArgument("solver.max_halvings must be >= 0");
}

FlowState make_state(const ClassPath& path, Profile profile, Phase phase) {
  FlowState s;
  s.t = path.t0;
  s.path = path;
  s.profile = std::move(profile);
  s.phase = phase;
  s.c = gauge_constant(s);
  return s;
}

double gauge_constant(const BundleModel& model, double a, const Profile& profile) {
  const int c = profile.grid().center();
  const double up = profile.up()[idx(c)];
  const double upp = profile.upp()[idx(c)];
  if (!(upp > 0.0) || !(up > 0.0) || !(a + up > 0.0)) {
    throw NonPositiveDensity("gauge constant needs u', u'', a + u' > 0 at rho = 0");
  }
  return -std::log(upp) - model.q * std::log(up) - model.p * std::log(a + up);
}

double gauge_constant(const FlowState& state) {
  return gauge_constant(state.model(), state.path.a_at(state.t), state.profile);
}

std::vector<double> rhs(const BundleModel& model, double a, const Profile& profile, double c,
                        double floor) {
  const Grid& g = profile.grid();
  const auto up = profile.up();
  const auto upp = profile.upp();
  std::vector<double> r(idx(g.N));
  for (int i = 0; i < g.N; ++i) {
    const double base = a + up[idx(i)];
    if (!(base > floor) || !(up[idx(i)] > floor) || !(upp[idx(i)] > floor)) {
      throw NonPositiveDensity("density factor <= floor at rho = " + std::to_string(g.rho(i)));
    }
    // log of a product, summed in a fixed order
    r[idx(i)] = model.p * std::log(base) + model.q * std::log(up[idx(i)]) +
                std::log(upp[idx(i)]) - (model.q + 1) * g.rho(i) + c;
  }
  return r;
}

std::vector<double> rhs(const FlowState& state, double floor) {
  return rhs(state.model(), state.path.a_at(state.t), state.profile, state.c, floor);
}

double cfl_limit(const FlowState& state, const SolverConfig& config) {
  const auto upp = state.profile.upp();
  const double mn = *std::min_element(upp.begin(), upp.end());
  const double h = state.profile.grid().h;
  return config.cfl_sigma * h * h * mn;
}

FlowState step(const FlowState& state, double dt, const SolverConfig& config) {
  if (!(dt > 0.0)) throw InvalidArgument("step: dt must be positive");
  if (state.t + dt > state.path.T) {
    throw TimeOutOfRange("step would pass the singular time");
  }
  if (config.integrator == Integrator::rk4) return step_rk4(state, dt, config);
  return step_sdirk(state, dt, config);
}

FlowState step_adaptive(const FlowState& state, double& dt, const SolverConfig& config) {
  for (int attempt = 0;; ++attempt) {
    try {
      return step(state, dt, config);
    } catch (const StepRejected&) {
      if (attempt >= config.max_halvings) throw;
      dt *= 0.5;
    }
  }
}

RunResult run_until_singular(const FlowState& initial, const SolverConfig& config, double t_end,
                             int record_first) {
  RunResult out;
  FlowState state = initial;
  out.trajectory.push_back(state);
  bool last_recorded = true;

  auto finish = [&](EventCause cause, std::string msg) {
    out.event.T_num = state.t;
    out.event.cause = cause;
    out.event.vanishing = state.path.vanishing;
    out.event.message = std::move(msg);
    if (!last_recorded) out.trajectory.push_back(state);
    out.event.final_state = state;
  };

  for (;;) {
    if (exhausted(state, config.eps_stop)) {
      finish(EventCause::class_exhausted, "class reached the stopping threshold");
      break;
    }
    if (t_end > 0.0 && state.t >= t_end * (1.0 - 1e-15)) {
      finish(EventCause::reached_end, "reached the requested end time");
      break;
    }
    double dt = choose_dt(state, config, t_end);
    try {
      state = step_adaptive(state, dt, config);
    } catch (const ConvexityLoss& e) {
      finish(EventCause::convexity_loss, e.what());
      break;
    } catch (const Error& e) {
      finish(EventCause::step_failure, e.what());
      break;
    }
    ++out.steps;
    last_recorded = out.steps % config.output_stride == 0 || out.steps <= record_first;
    if (last_recorded) out.trajectory.push_back(state);
  }
  return out;
}

FlowState flip_continue(const SingularEvent& event, const SolverConfig& config) {
  const FlowState& last = event.final_state;
  if (event.cause != EventCause::class_exhausted || event.vanishing != Vanishing::a) {
    throw NotAFlip("flip continuation needs an event where a alone is exhausted");
  }
  if (!last.model().admits_flip()) {
    throw NotAFlip("flip continuation needs 1 <= q < p");
  }
  const double T = last.path.T;
  const ClassPath next =
      singular_time(0.0, last.path.b_at(T), last.model().flipped(), last.path.convention, T);
  FlowState s;
  s.path = next;
  s.t = T + config.restart_offset();
  s.profile = last.profile;
  s.phase = Phase::post_flip;
  s.c = gauge_constant(s);
  return s;
}

FlipRun run_flip(const FlowState& initial, const SolverConfig& config, double t_post) {
  FlipRun run;
  run.pre = run_until_singular(initial, config);
  const SingularEvent& ev = run.pre.event;
  if (ev.cause != EventCause::class_exhausted || ev.vanishing != Vanishing::a ||
      !ev.final_state.model().admits_flip()) {
    return run;
  }
  run.restart = flip_continue(ev, config);
  run.post = run_until_singular(*run.restart, config, ev.final_state.path.T + t_post, 3);
  return run;
}

}  // namespace flipflow
