#pragma once

// Calabi-symmetric potentials u(ρ) on the truncated grid ρ ∈ [-R, R].
//
// A Profile is immutable: node values u plus eager caches u' and u''. Profiles
// built from closed forms carry exact derivative caches; profiles built from
// node data get centered second-order differences with ghost nodes supplied by
// a BoundaryClosure.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace flipflow {

struct Grid {
  double R = 20.0;
  int N = 2001;
  double h = 0.02;

  // Requires odd N >= 101 and R >= 10.
  static Grid make(double R, int N);
  // No size restrictions beyond N >= 5; used by convergence studies.
  static Grid make_unchecked(double R, int N);

  // Symmetric formula so the center node is exactly ρ = 0.
  double rho(int i) const { return R * (2.0 * i - (N - 1)) / (N - 1); }
  int center() const { return (N - 1) / 2; }
  std::vector<double> nodes() const;
};

// Ghost-node rules at the two ends.
//   left robin:        u'' = u'              (smooth extension over the zero section)
//   right robin:       u'' = b - u'          (asymptote u' -> b at D_∞)
//   right exp_tail:    u'' ∝ e^{-ρ}          (same asymptotics, b left free)
//   extrapolate:       polynomial ghost, exact on cubics
enum class LeftClosure { robin, extrapolate };
enum class RightClosure { exponential_tail, robin, extrapolate };

struct BoundaryClosure {
  LeftClosure left = LeftClosure::extrapolate;
  RightClosure right = RightClosure::extrapolate;
  double b = 0.0;  // only read by RightClosure::robin

  static BoundaryClosure polynomial() { return {}; }
  static BoundaryClosure flow(RightClosure right, double b) {
    return {LeftClosure::robin, right, b};
  }
};

struct Derivatives {
  std::vector<double> up;
  std::vector<double> upp;
};

// Centered stencils on u with ghost nodes from `closure`.
Derivatives differentiate(const Grid& grid, std::span<const double> u,
                          const BoundaryClosure& closure = BoundaryClosure::polynomial());

// Increments of a slope array s = u' across the ghost cells, left = s_0 - s_{-1}
// and right = s_N - s_{N-1}. Inputs are the end values and the two interior
// increments nearest each end (d1 = s_1 - s_0, d2 = s_2 - s_1, mirrored on the right).
struct GhostIncrements {
  double left = 0.0;
  double right = 0.0;
};

struct SlopeEnds {
  double s_first = 0.0;
  double d_first = 0.0;
  double d_first2 = 0.0;
  double s_last = 0.0;
  double d_last = 0.0;
  double d_last2 = 0.0;
};

GhostIncrements ghost_increments(const Grid& grid, const SlopeEnds& ends,
                                 const BoundaryClosure& closure);

// 4-point Lagrange interpolation of nodal data; clamps to [-R, R].
double cubic_interpolate(const Grid& grid, std::span<const double> values, double rho);

class Profile {
 public:
  Profile() = default;

  static Profile from_values(const Grid& grid, std::vector<double> u,
                             const BoundaryClosure& closure = BoundaryClosure::polynomial());
  static Profile from_derivatives(const Grid& grid, std::vector<double> u,
                                  std::vector<double> up, std::vector<double> upp);
  // Slope-first construction used by the solver: u' = s_hi + s_lo held as an
  // unevaluated sum so that differences stay accurate where u' is close to b,
  // and u'' by centered differences of that sum. s_lo may be empty.
  static Profile from_slope(const Grid& grid, std::vector<double> u, std::vector<double> s_hi,
                            std::vector<double> s_lo, const BoundaryClosure& closure);

  const Grid& grid() const { return grid_; }
  std::span<const double> u() const { return u_; }
  std::span<const double> up() const { return up_; }
  std::span<const double> upp() const { return upp_; }
  // Low-order part of u' (empty unless built by from_slope).
  std::span<const double> up_lo() const { return up_lo_; }

  double u_at(double rho) const { return cubic_interpolate(grid_, u_, rho); }
  double up_at(double rho) const { return cubic_interpolate(grid_, up_, rho); }

 private:
  friend Profile canonical_profile(double b0, const Grid& grid);

  Profile(const Grid& grid, std::vector<double> u, std::vector<double> up,
          std::vector<double> upp);

  Grid grid_;
  std::vector<double> u_;
  std::vector<double> up_;
  std::vector<double> upp_;
  std::vector<double> up_lo_;
};

// u = b0 log(1 + e^ρ); satisfies all four Calabi conditions in closed form.
Profile canonical_profile(double b0, const Grid& grid);

// Logistic profile with a seeded smooth reparametrization of ρ on [-4, 4]:
// u' = b0 σ(ρ + A Σ c_k g_k(ρ)). Tails are untouched, so admissibility holds
// for |amplitude| <= 0.5.
Profile perturbed_profile(double b0, const Grid& grid, double amplitude, std::uint64_t seed);

// Homogeneous potential e^{γρ} (non-compact model data).
struct ConeProfile {
  double gamma = 1.0;
  Profile profile;
};

ConeProfile cone_profile(double gamma, const Grid& grid);

struct ConditionCheck {
  bool pass = true;
  double violation = 0.0;  // 0 when passing
};

struct ValidationReport {
  ConditionCheck positive_slope;   // u' > 0
  ConditionCheck convex;           // u'' > 0
  ConditionCheck monotone_slope;   // u' strictly increasing
  ConditionCheck slope_range;      // u' < b_ref (1 + eps_bc)
  ConditionCheck left_residual;    // |u'' - u'| <= eps_bc u'        at -R
  ConditionCheck right_residual;   // |u'' - (b_ref - u')| <= eps_bc b_ref at R

  bool ok() const {
    return positive_slope.pass && convex.pass && monotone_slope.pass && slope_range.pass &&
           left_residual.pass && right_residual.pass;
  }
};

ValidationReport validate_calabi(const Profile& profile, double b_ref, double eps_bc = 1e-6);

// Dilation z -> s z shifts ρ by 2 log s and scales e^{γρ} by s^{2γ}. Returns
// the largest relative deviation |u(ρ + 2 log s) - s^{2γ} u(ρ)| / (s^{2γ} |u(ρ)|)
// over nodes whose shifted point stays on the grid. Off-node points use
// quintic Hermite interpolation of the u, u', u'' caches.
double cone_scaling_check(const ConeProfile& cone, double s);
// Same check for an arbitrary profile tested against a claimed exponent.
double scaling_deviation(const Profile& profile, double gamma, double s);

// CSV snapshot: rho,u,up,upp.
void write_profile_csv(std::ostream& out, const Profile& profile);

}  // namespace flipflow
