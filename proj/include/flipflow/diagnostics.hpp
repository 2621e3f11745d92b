#pragma once

// Geometric read-outs of a Calabi-symmetric state and the estimate checks run
// along a trajectory. Lengths use ds² = 2 (Kähler coefficients) throughout.

#include <optional>
#include <string>
#include <vector>

#include "flipflow/flow.hpp"

namespace flipflow {

// Diameter of (P^p, θ); realized on a projective line, so independent of p.
double fs_diameter();

struct MetricEigenvalues {
  std::vector<double> base;    // a + u'
  std::vector<double> sphere;  // u'
  std::vector<double> radial;  // u''
};

MetricEigenvalues eigenvalues(const Profile& profile, double a);

// ∫ (a+u')^p (u')^q u'' dρ by the trapezoid rule on the grid.
double volume_integral(const BundleModel& model, double a, const Profile& profile);
// Relative mismatch against V̂(a, u'(R)).
double volume_mismatch(const BundleModel& model, double a, const Profile& profile);

// (1/√2) ∫ √u'' dρ over [ρ1, ρ2], integrating the piecewise-linear
// interpolant of √u'' exactly, which makes it additive in the endpoints.
double radial_length(const Profile& profile, double rho1, double rho2);
// Full fiber ray including the exponential tails beyond ±R.
double fiber_length(const Profile& profile);

// √(a + u'(-∞)) D_FS with u'(-∞) = 0: the slice ρ = -∞ is the exceptional set.
double exceptional_diameter(double a);
double exceptional_diameter(const FlowState& state);
// The same read-out taken at the truncation edge, √(a + u'(-R)) D_FS.
double edge_slice_diameter(const FlowState& state);

// radial_length(-R, ρ1) + √(a+u'(ρ1)) D_FS + √(u'(ρ1)) D_FS.
double neck_diameter(const FlowState& state, double rho1);

// Least-squares slope of log u' against ρ on [lo, hi]; default [-R, -R/2].
double fit_left_exponent(const Profile& profile);
double fit_left_exponent(const Profile& profile, double lo, double hi);

double max_ratio(const Profile& profile);  // max u''/u'

struct Verdict {
  std::string name;
  bool pass = true;
  double measured = 0.0;
  double bound = 0.0;
};

// Constants frozen at a reference time.
struct EstimateReference {
  double ratio_cap = 1.0;               // max(1, initial max u''/u')
  double base_cap = 0.0;                // a0 + b0
  std::optional<double> density_const;  // post-flip density constant, set at restart
};

EstimateReference reference_at_start(const FlowState& initial);
// Density constant of the post-flip bound, measured on the restart state.
double density_constant(const FlowState& restart);
// max over ρ <= 0 of (κ+u')^{p'} (u')^{q'} u'' / ((1+e^ρ)^{p'} e^{(p'+1)ρ}).
double density_ratio(const FlowState& state);

// Verdicts: ratio_bound, base_bound, and density_bound when a density
// constant is set. A 5% margin is allowed on the frozen constants.
std::vector<Verdict> estimate_suite(const FlowState& state, const EstimateReference& ref);

struct RicciModification {
  KahlerClass klass;         // (a - ε rate_a, b - ε rate_b); a may turn negative near T
  Profile profile;           // u + ε ψ, ψ = log[(a+u')^p (u')^q u''] - (q+1) ρ
  ValidationReport validation;
  double min_upp = 0.0;
  bool convex = false;
  bool base_positive = false;  // a_mod + u'_mod > 0 everywhere
};

// Throws NonPositiveDensity when the density is not positive.
RicciModification ricci_modify(const FlowState& state, double eps, double eps_bc = 1e-3);

}  // namespace flipflow
