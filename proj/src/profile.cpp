#include "flipflow/profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "flipflow/errors.hpp"

namespace flipflow {

namespace {

// log(1 + e^x) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

}  // namespace

Grid Grid::make(double R, int N) {
  if (!(R >= 10.0)) throw InvalidArgument("grid.R must be >= 10");
  if (N < 101) throw InvalidArgument("grid.N must be >= 101");
  if (N % 2 == 0) throw InvalidArgument("grid.N must be odd");
  return make_unchecked(R, N);
}

Grid Grid::make_unchecked(double R, int N) {
  if (!(R > 0.0)) throw InvalidArgument("grid.R must be positive");
  if (N < 5) throw InvalidArgument("grid.N must be >= 5");
  Grid g;
  g.R = R;
  g.N = N;
  g.h = 2.0 * R / (N - 1);
  return g;
}

std::vector<double> Grid::nodes() const {
  std::vector<double> r(idx(N));
  for (int i = 0; i < N; ++i) r[idx(i)] = rho(i);
  return r;
}

Derivatives differentiate(const Grid& grid, std::span<const double> u,
                          const BoundaryClosure& closure) {
  const int N = grid.N;
  const double h = grid.h;
  if (N < 5) throw InvalidArgument("differentiate: grid too small");
  if (u.size() != idx(N)) throw DimensionMismatch("differentiate: size mismatch");

  double left = 0.0;
  switch (closure.left) {
    case LeftClosure::robin:
      // (u_1 - u_g)/2h = (u_1 - 2u_0 + u_g)/h^2
      left = (2.0 * u[0] - u[1] * (1.0 - h / 2.0)) / (1.0 + h / 2.0);
      break;
    case LeftClosure::extrapolate:
      left = 4.0 * u[0] - 6.0 * u[1] + 4.0 * u[2] - u[3];
      break;
  }

  const std::size_t n1 = idx(N - 1);
  double right = 0.0;
  switch (closure.right) {
    case RightClosure::robin:
      // (u_g - 2u_{N-1} + u_{N-2})/h^2 = b - (u_g - u_{N-2})/2h
      right = (closure.b * h * h + 2.0 * u[n1] - u[n1 - 1] * (1.0 - h / 2.0)) / (1.0 + h / 2.0);
      break;
    case RightClosure::exponential_tail: {
      // second differences decay by e^{-h} per node
      const double d2 = u[n1] - 2.0 * u[n1 - 1] + u[n1 - 2];
      right = 2.0 * u[n1] - u[n1 - 1] + std::exp(-h) * d2;
      break;
    }
    case RightClosure::extrapolate:
      right = 4.0 * u[n1] - 6.0 * u[n1 - 1] + 4.0 * u[n1 - 2] - u[n1 - 3];
      break;
  }

  Derivatives d;
  d.up.resize(idx(N));
  d.upp.resize(idx(N));
  auto at = [&](int i) {
    if (i < 0) return left;
    if (i >= N) return right;
    return u[idx(i)];
  };
  for (int i = 0; i < N; ++i) {
    const double um = at(i - 1);
    const double u0 = at(i);
    const double up = at(i + 1);
    d.up[idx(i)] = (up - um) / (2.0 * h);
    d.upp[idx(i)] = (up - 2.0 * u0 + um) / (h * h);
  }
  return d;
}

GhostIncrements ghost_increments(const Grid& grid, const SlopeEnds& e,
                                 const BoundaryClosure& closure) {
  const double h = grid.h;
  GhostIncrements g;
  switch (closure.left) {
    case LeftClosure::robin:
      // s_{-1} = s_1 - 2h s_0, so the centered difference at node 0 equals s_0
      g.left = 2.0 * h * e.s_first - e.d_first;
      break;
    case LeftClosure::extrapolate:
      g.left = 2.0 * e.d_first - e.d_first2;
      break;
  }
  switch (closure.right) {
    case RightClosure::robin:
      // s_N = s_{N-2} + 2h (b - s_{N-1})
      g.right = 2.0 * h * (closure.b - e.s_last) - e.d_last;
      break;
    case RightClosure::exponential_tail:
      g.right = std::exp(-h) * e.d_last;
      break;
    case RightClosure::extrapolate:
      g.right = 2.0 * e.d_last - e.d_last2;
      break;
  }
  return g;
}

double cubic_interpolate(const Grid& grid, std::span<const double> values, double rho) {
  const double x = (std::clamp(rho, -grid.R, grid.R) + grid.R) / grid.h;
  int i0 = static_cast<int>(std::floor(x)) - 1;
  i0 = std::clamp(i0, 0, grid.N - 4);
  const double t = x - i0;  // position relative to node i0
  double result = 0.0;
  for (int j = 0; j < 4; ++j) {
    double w = 1.0;
    for (int k = 0; k < 4; ++k) {
      if (k != j) w *= (t - k) / static_cast<double>(j - k);
    }
    result += w * values[idx(i0 + j)];
  }
  return result;
}

Profile::Profile(const Grid& grid, std::vector<double> u, std::vector<double> up,
                 std::vector<double> upp)
    : grid_(grid), u_(std::move(u)), up_(std::move(up)), upp_(std::move(upp)) {
  if (u_.size() != idx(grid_.N) || up_.size() != u_.size() || upp_.size() != u_.size()) {
    throw DimensionMismatch("profile arrays must match the grid size");
  }
}

Profile Profile::from_values(const Grid& grid, std::vector<double> u,
                             const BoundaryClosure& closure) {
  Derivatives d = differentiate(grid, u, closure);
  return Profile(grid, std::move(u), std::move(d.up), std::move(d.upp));
}

Profile Profile::from_derivatives(const Grid& grid, std::vector<double> u,
                                  std::vector<double> up, std::vector<double> upp) {
  return Profile(grid, std::move(u), std::move(up), std::move(upp));
}

Profile Profile::from_slope(const Grid& grid, std::vector<double> u, std::vector<double> s_hi,
                            std::vector<double> s_lo, const BoundaryClosure& closure) {
  const int N = grid.N;
  if (s_hi.size() != idx(N) || u.size() != idx(N)) {
    throw DimensionMismatch("slope array must match the grid size");
  }
  if (!s_lo.empty() && s_lo.size() != idx(N)) throw DimensionMismatch("slope residue size mismatch");

  // d[k] = s_{k+1} - s_k for k = 0..N-2, from the split representation
  std::vector<double> d(idx(N - 1));
  for (int k = 0; k + 1 < N; ++k) {
    double dk = s_hi[idx(k + 1)] - s_hi[idx(k)];
    if (!s_lo.empty()) dk += s_lo[idx(k + 1)] - s_lo[idx(k)];
    d[idx(k)] = dk;
  }
  SlopeEnds ends{s_hi[0], d[0], d[1], s_hi[idx(N - 1)], d[idx(N - 2)], d[idx(N - 3)]};
  const GhostIncrements g = ghost_increments(grid, ends, closure);

  std::vector<double> upp(idx(N));
  for (int i = 0; i < N; ++i) {
    const double dl = i == 0 ? g.left : d[idx(i - 1)];
    const double dr = i == N - 1 ? g.right : d[idx(i)];
    upp[idx(i)] = (dl + dr) / (2.0 * grid.h);
  }
  Profile p(grid, std::move(u), std::move(s_hi), std::move(upp));
  p.up_lo_ = std::move(s_lo);
  return p;
}

Profile canonical_profile(double b0, const Grid& grid) {
  if (!(b0 > 0.0)) throw InvalidArgument("canonical_profile: b0 must be positive");
  const int N = grid.N;
  std::vector<double> u(idx(N)), up(idx(N)), upp(idx(N)), lo(idx(N));
  for (int i = 0; i < N; ++i) {
    const double r = grid.rho(i);
    const double sig = logistic(r);
    const double tail = b0 * logistic(-r);
    u[idx(i)] = b0 * softplus(r);
    upp[idx(i)] = b0 * sig * logistic(-r);
    if (r > 0.0) {
      // u' = b0 - b0 σ(-ρ), keeping the rounding residue of the subtraction
      up[idx(i)] = b0 - tail;
      lo[idx(i)] = (b0 - up[idx(i)]) - tail;
    } else {
      up[idx(i)] = b0 * sig;
    }
  }
  Profile p(grid, std::move(u), std::move(up), std::move(upp));
  p.up_lo_ = std::move(lo);
  return p;
}

Profile perturbed_profile(double b0, const Grid& grid, double amplitude, std::uint64_t seed) {
  if (!(b0 > 0.0)) throw InvalidArgument("perturbed_profile: b0 must be positive");
  if (!(std::abs(amplitude) <= 0.5)) {
    throw InvalidArgument("perturbed_profile: |amplitude| must be <= 0.5");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const double centers[3] = {-2.0, 0.0, 2.0};
  double c[3];
  for (double& ck : c) ck = coef(rng);

  // ρ~ = ρ + A Σ c_k exp(-(ρ-μ_k)^2/2); dρ~/dρ >= 1 - 3 e^{-1/2}/2 > 0.
  auto warp = [&](double r, double& dr) {
    double w = r;
    dr = 1.0;
    for (int k = 0; k < 3; ++k) {
      const double z = r - centers[k];
      const double g = std::exp(-0.5 * z * z);
      w += amplitude * c[k] * g;
      dr -= amplitude * c[k] * z * g;
    }
    return w;
  };

  const int N = grid.N;
  std::vector<double> u(idx(N)), up(idx(N)), upp(idx(N));
  for (int i = 0; i < N; ++i) {
    double dr = 1.0;
    const double w = warp(grid.rho(i), dr);
    up[idx(i)] = b0 * logistic(w);
    upp[idx(i)] = b0 * logistic(w) * logistic(-w) * dr;
  }

  // u = b0 softplus(ρ) + ∫_{-R}^ρ (u' - b0 σ(ρ)) dρ; the integrand is
  // supported near the bumps, integrated with 16 sub-panels per cell.
  constexpr int kSub = 16;
  double acc = 0.0;
  auto defect = [&](double r) {
    double dr = 1.0;
    return b0 * (logistic(warp(r, dr)) - logistic(r));
  };
  u[0] = b0 * softplus(grid.rho(0));
  for (int i = 1; i < N; ++i) {
    const double r0 = grid.rho(i - 1);
    const double hs = grid.h / kSub;
    double cell = 0.5 * (defect(r0) + defect(r0 + grid.h));
    for (int k = 1; k < kSub; ++k) cell += defect(r0 + k * hs);
    acc += cell * hs;
    u[idx(i)] = b0 * softplus(grid.rho(i)) + acc;
  }
  return Profile::from_derivatives(grid, std::move(u), std::move(up), std::move(upp));
}

ConeProfile cone_profile(double gamma, const Grid& grid) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidArgument("cone gamma must lie in (0, 1]");
  const int N = grid.N;
  std::vector<double> u(idx(N)), up(idx(N)), upp(idx(N));
  for (int i = 0; i < N; ++i) {
    const double e = std::exp(gamma * grid.rho(i));
    u[idx(i)] = e;
    up[idx(i)] = gamma * e;
    upp[idx(i)] = gamma * gamma * e;
  }
  return ConeProfile{gamma,
                     Profile::from_derivatives(grid, std::move(u), std::move(up), std::move(upp))};
}

ValidationReport validate_calabi(const Profile& profile, double b_ref, double eps_bc) {
  ValidationReport rep;
  const auto up = profile.up();
  const auto upp = profile.upp();
  const std::size_t n = up.size();

  auto fail = [](ConditionCheck& c, double v) {
    if (v > c.violation) c.violation = v;
    c.pass = false;
  };

  for (std::size_t i = 0; i < n; ++i) {
    if (!(up[i] > 0.0)) fail(rep.positive_slope, -up[i]);
    if (!(upp[i] > 0.0)) fail(rep.convex, -upp[i]);
    if (!(up[i] < b_ref * (1.0 + eps_bc))) fail(rep.slope_range, up[i] - b_ref);
    if (i + 1 < n && !(up[i + 1] > up[i])) fail(rep.monotone_slope, up[i] - up[i + 1]);
  }

  const double left = std::abs(upp[0] - up[0]);
  if (!(left <= eps_bc * up[0])) fail(rep.left_residual, up[0] > 0.0 ? left / up[0] : left);

  const double right = std::abs(upp[n - 1] - (b_ref - up[n - 1]));
  if (!(right <= eps_bc * b_ref)) fail(rep.right_residual, right / b_ref);
  return rep;
}

namespace {

// Quintic Hermite interpolation from u, u', u'' at the two ends of the cell.
double hermite5(const Profile& p, double x) {
  const Grid& g = p.grid();
  const int i = std::clamp(static_cast<int>(std::floor((x + g.R) / g.h)), 0, g.N - 2);
  const double t = (x - g.rho(i)) / g.h;
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double h = g.h;
  const auto u = p.u();
  const auto d1 = p.up();
  const auto d2 = p.upp();
  return u[idx(i)] * (1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5) +
         h * d1[idx(i)] * (t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5) +
         h * h * d2[idx(i)] * 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5) +
         u[idx(i + 1)] * (10.0 * t3 - 15.0 * t4 + 6.0 * t5) +
         h * d1[idx(i + 1)] * (-4.0 * t3 + 7.0 * t4 - 3.0 * t5) +
         h * h * d2[idx(i + 1)] * 0.5 * (t3 - 2.0 * t4 + t5);
}

}  // namespace

double scaling_deviation(const Profile& profile, double gamma, double s) {
  if (!(s > 0.0)) throw InvalidArgument("scaling factor must be positive");
  const Grid& g = profile.grid();
  const auto u = profile.u();
  const double shift = 2.0 * std::log(s);
  const double factor = std::pow(s, 2.0 * gamma);
  // Snap shifts that land on a node up to rounding, so aligned dilations are exact.
  const double cells = shift / g.h;
  const double rounded = std::round(cells);
  const bool aligned = std::abs(cells - rounded) < 1e-9;

  double worst = 0.0;
  for (int i = 0; i < g.N; ++i) {
    const double target = g.rho(i) + shift;
    if (target < -g.R - 1e-12 || target > g.R + 1e-12) continue;
    double moved = 0.0;
    if (aligned) {
      moved = u[idx(i + static_cast<int>(rounded))];
    } else {
      moved = hermite5(profile, target);
    }
    const double expect = factor * u[idx(i)];
    const double scale = std::max(std::abs(expect), 1e-300);
    worst = std::max(worst, std::abs(moved - expect) / scale);
  }
  return worst;
}

double cone_scaling_check(const ConeProfile& cone, double s) {
  return scaling_deviation(cone.profile, cone.gamma, s);
}

void write_profile_csv(std::ostream& out, const Profile& profile) {
  out << "rho,u,up,upp\n";
  const Grid& g = profile.grid();
  char buf[128];
  for (int i = 0; i < g.N; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", g.rho(i), profile.u()[idx(i)],
                  profile.up()[idx(i)], profile.upp()[idx(i)]);
    out << buf;
  }
}

}  // namespace flipflow
