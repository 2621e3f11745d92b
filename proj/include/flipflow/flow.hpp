#pragma once

// Reduced Kähler-Ricci flow on X_{p,q}:
//
//   u_t = log[(a + u')^p (u')^q u''] - (q+1) ρ + c,
//
// with a = a(t) from the class line and c chosen so that u_t(0) = 0. The
// solver advances the slope s = u' in conservative form,
//
//   s_t = ∂_ρ log[(a + s)^p s^q s'] - (q+1),
//
// and integrates u alongside it, so the gauge is exact at the center node.

#include <optional>
#include <string>
#include <vector>

#include "flipflow/cohomology.hpp"
#include "flipflow/profile.hpp"

namespace flipflow {

enum class Phase { pre_flip, post_flip };
enum class Integrator { sdirk4, rk4 };

std::string to_string(Phase p);
std::string to_string(Integrator i);

struct SolverConfig {
  double dt_max = 1e-2;
  double cfl_sigma = 0.2;      // explicit mode only
  double eps_stop = 1e-5;      // halt when min(a, b) drops below this
  double eps_floor = 1e-10;    // floor for u'' e^{|ρ|} / max u''
  int output_stride = 5;
  Integrator integrator = Integrator::sdirk4;
  double dt_initial_post = 1e-6;
  RightClosure right_closure = RightClosure::exponential_tail;
  int max_halvings = 40;

  void validate() const;  // throws InvalidArgument naming the field
  double restart_offset() const { return 10.0 * dt_initial_post; }
};

struct FlowState {
  double t = 0.0;
  ClassPath path;
  Profile profile;
  double c = 0.0;
  Phase phase = Phase::pre_flip;

  const BundleModel& model() const { return path.model; }
  KahlerClass klass() const { return class_at(path, t); }
};

// Builds the t = path.t0 state with the gauge constant filled in.
FlowState make_state(const ClassPath& path, Profile profile, Phase phase = Phase::pre_flip);

// Pointwise u_t from the profile caches. Throws NonPositiveDensity when a
// factor inside the logarithm is <= floor.
std::vector<double> rhs(const FlowState& state, double floor = 0.0);
std::vector<double> rhs(const BundleModel& model, double a, const Profile& profile, double c,
                        double floor = 0.0);

double gauge_constant(const BundleModel& model, double a, const Profile& profile);
double gauge_constant(const FlowState& state);

// Explicit stability bound σ h² min(u'').
double cfl_limit(const FlowState& state, const SolverConfig& config);

// One step of size dt (t + dt must not pass path.T). Explicit mode throws
// StepRejected when dt exceeds the CFL bound; implicit mode throws
// StepRejected when the Newton iteration fails. Throws ConvexityLoss when the
// result has u'' e^{|ρ|} <= eps_floor max(u'') somewhere.
FlowState step(const FlowState& state, double dt, const SolverConfig& config);

// Like step(), halving dt on StepRejected up to config.max_halvings times.
// Returns the accepted state; `dt` is updated to the size actually taken.
FlowState step_adaptive(const FlowState& state, double& dt, const SolverConfig& config);

enum class EventCause { class_exhausted, convexity_loss, step_failure, reached_end };

std::string to_string(EventCause c);

struct SingularEvent {
  double T_num = 0.0;
  EventCause cause = EventCause::class_exhausted;
  Vanishing vanishing = Vanishing::a;  // meaningful for class_exhausted
  std::string message;
  FlowState final_state;
};

struct RunResult {
  std::vector<FlowState> trajectory;  // sampled states, first and last included
  SingularEvent event;
  int steps = 0;
};

// Integrates until min(a, b) < eps_stop, a step error, or t_end.
RunResult run_until_singular(const FlowState& initial, const SolverConfig& config,
                             double t_end = -1.0, int record_first = 0);

// Restarts on X_{q,p} at t = T + δ with the final profile reused unchanged.
// Throws NotAFlip unless the event exhausted a on a model with q >= 1.
FlowState flip_continue(const SingularEvent& event, const SolverConfig& config);

struct FlipRun {
  RunResult pre;
  std::optional<FlowState> restart;
  std::optional<RunResult> post;
};

// Pre-flip run, hand-off, post-flip run to T + t_post. The post phase is
// skipped when the pre-flip run does not end with a exhausted.
FlipRun run_flip(const FlowState& initial, const SolverConfig& config, double t_post);

}  // namespace flipflow
