#include "flipflow/diagnostics.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>

#include <boost/math/constants/constants.hpp>

#include "flipflow/errors.hpp"

namespace flipflow {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

// Integral of the linear interpolant of f over [x1, x2] inside cell i.
double cell_piece(const Grid& g, const std::vector<double>& f, int i, double x1, double x2) {
  const double r0 = g.rho(i);
  auto value = [&](double x) {
    const double w = (x - r0) / g.h;
    return f[idx(i)] * (1.0 - w) + f[idx(i + 1)] * w;
  };
  return 0.5 * (value(x1) + value(x2)) * (x2 - x1);
}

}  // namespace

double fs_diameter() { return boost::math::constants::pi<double>() / std::sqrt(2.0); }

MetricEigenvalues eigenvalues(const Profile& profile, double a) {
  MetricEigenvalues e;
  e.sphere.assign(profile.up().begin(), profile.up().end());
  e.radial.assign(profile.upp().begin(), profile.upp().end());
  e.base = e.sphere;
  for (double& v : e.base) v += a;
  return e;
}

double volume_integral(const BundleModel& model, double a, const Profile& profile) {
  const auto up = profile.up();
  const auto upp = profile.upp();
  const std::size_t n = up.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = std::pow(a + up[i], model.p) * std::pow(up[i], model.q) * upp[i];
    sum += (i == 0 || i + 1 == n) ? 0.5 * f : f;
  }
  return sum * profile.grid().h;
}

double volume_mismatch(const BundleModel& model, double a, const Profile& profile) {
  const double exact = VolumePolynomial(model)(a, profile.up().back());
  return std::abs(volume_integral(model, a, profile) - exact) / exact;
}

double radial_length(const Profile& profile, double rho1, double rho2) {
  const Grid& g = profile.grid();
  if (rho1 > rho2) throw InvalidArgument("radial_length needs rho1 <= rho2");
  if (rho1 < -g.R - 1e-12 || rho2 > g.R + 1e-12) {
    throw InvalidArgument("radial_length endpoints must lie in [-R, R]");
  }
  rho1 = std::clamp(rho1, -g.R, g.R);
  rho2 = std::clamp(rho2, -g.R, g.R);
  if (rho1 == rho2) return 0.0;

  std::vector<double> f(profile.upp().size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::sqrt(std::max(profile.upp()[i], 0.0));

  auto cell_of = [&](double x) {
    return std::clamp(static_cast<int>(std::floor((x + g.R) / g.h)), 0, g.N - 2);
  };
  const int c1 = cell_of(rho1);
  const int c2 = cell_of(rho2);
  double total = 0.0;
  if (c1 == c2) {
    total = cell_piece(g, f, c1, rho1, rho2);
  } else {
    total += cell_piece(g, f, c1, rho1, g.rho(c1 + 1));
    for (int i = c1 + 1; i < c2; ++i) total += 0.5 * (f[idx(i)] + f[idx(i + 1)]) * g.h;
    total += cell_piece(g, f, c2, g.rho(c2), rho2);
  }
  return total / std::sqrt(2.0);
}

double fiber_length(const Profile& profile) {
  const Grid& g = profile.grid();
  // √u'' ~ e^{∓ρ/2} beyond the ends integrates to 2√u''(±R).
  const double tails = 2.0 * (std::sqrt(profile.upp().front()) + std::sqrt(profile.upp().back()));
  return radial_length(profile, -g.R, g.R) + tails / std::sqrt(2.0);
}

double exceptional_diameter(double a) { return std::sqrt(std::max(a, 0.0)) * fs_diameter(); }

double exceptional_diameter(const FlowState& state) {
  return exceptional_diameter(state.path.a_at(state.t));
}

double edge_slice_diameter(const FlowState& state) {
  return std::sqrt(std::max(state.path.a_at(state.t) + state.profile.up().front(), 0.0)) *
         fs_diameter();
}

double neck_diameter(const FlowState& state, double rho1) {
  const Profile& p = state.profile;
  const double a = state.path.a_at(state.t);
  const double up = p.up_at(rho1);
  return radial_length(p, -p.grid().R, rho1) +
         std::sqrt(std::max(a + up, 0.0)) * fs_diameter() +
         std::sqrt(std::max(up, 0.0)) * fs_diameter();
}

double fit_left_exponent(const Profile& profile) {
  const double R = profile.grid().R;
  return fit_left_exponent(profile, -R, -R / 2.0);
}

double fit_left_exponent(const Profile& profile, double lo, double hi) {
  const Grid& g = profile.grid();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (int i = 0; i < g.N; ++i) {
    const double r = g.rho(i);
    if (r < lo - 1e-12 || r > hi + 1e-12) continue;
    const double v = profile.up()[idx(i)];
    if (!(v > DBL_MIN)) throw DegenerateWindow("u' underflows inside the fit window");
    const double y = std::log(v);
    sx += r;
    sy += y;
    sxx += r * r;
    sxy += r * y;
    ++n;
  }
  if (n < 2) throw DegenerateWindow("fit window holds fewer than two nodes");
  const double den = n * sxx - sx * sx;
  if (!(den > 0.0)) throw DegenerateWindow("fit window has no spread");
  return (n * sxy - sx * sy) / den;
}

double max_ratio(const Profile& profile) {
  double m = 0.0;
  for (std::size_t i = 0; i < profile.up().size(); ++i) {
    m = std::max(m, profile.upp()[i] / profile.up()[i]);
  }
  return m;
}

EstimateReference reference_at_start(const FlowState& initial) {
  EstimateReference ref;
  ref.ratio_cap = std::max(1.0, max_ratio(initial.profile));
  ref.base_cap = initial.path.a_at(initial.t) + initial.path.b_at(initial.t);
  return ref;
}

double density_ratio(const FlowState& state) {
  const Profile& p = state.profile;
  const Grid& g = p.grid();
  const BundleModel m = state.model();
  const double kappa = state.path.a_at(state.t);
  double worst = 0.0;
  for (int i = 0; i < g.N; ++i) {
    const double r = g.rho(i);
    if (r > 0.0) break;
    const double up = p.up()[idx(i)];
    const double dens = std::pow(kappa + up, m.p) * std::pow(up, m.q) * p.upp()[idx(i)];
    const double env = std::pow(1.0 + std::exp(r), m.p) * std::exp((m.p + 1) * r);
    worst = std::max(worst, dens / env);
  }
  return worst;
}

double density_constant(const FlowState& restart) { return density_ratio(restart); }

std::vector<Verdict> estimate_suite(const FlowState& state, const EstimateReference& ref) {
  std::vector<Verdict> out;
  constexpr double kMargin = 1.05;

  Verdict ratio{"ratio_bound", true, max_ratio(state.profile), kMargin * ref.ratio_cap};
  ratio.pass = ratio.measured <= ratio.bound;
  out.push_back(ratio);

  const double a = state.path.a_at(state.t);
  double base = 0.0;
  for (double v : state.profile.up()) base = std::max(base, a + v);
  Verdict bv{"base_bound", true, base, ref.base_cap};
  bv.pass = base <= ref.base_cap;
  out.push_back(bv);

  if (ref.density_const) {
    Verdict dv{"density_bound", true, density_ratio(state), kMargin * *ref.density_const};
    dv.pass = dv.measured <= dv.bound;
    out.push_back(dv);
  }
  return out;
}

RicciModification ricci_modify(const FlowState& state, double eps, double eps_bc) {
  if (!(eps >= 0.0)) throw InvalidArgument("ricci_modify needs eps >= 0");
  const Profile& p = state.profile;
  const Grid& g = p.grid();
  const BundleModel m = state.model();
  const double a = state.path.a_at(state.t);
  const double b = state.path.b_at(state.t);

  // ψ = u_t - c, so rhs with c = 0.
  const std::vector<double> psi = rhs(m, a, p, 0.0, 0.0);
  const Derivatives d = differentiate(g, psi);

  std::vector<double> u(p.u().begin(), p.u().end());
  std::vector<double> up(p.up().begin(), p.up().end());
  std::vector<double> upp(p.upp().begin(), p.upp().end());
  if (eps > 0.0) {
    for (std::size_t i = 0; i < u.size(); ++i) {
      u[i] += eps * psi[i];
      up[i] += eps * d.up[i];
      upp[i] += eps * d.upp[i];
    }
  }

  RicciModification r;
  r.klass = {a - eps * state.path.rate_a, b - eps * state.path.rate_b};
  r.profile = Profile::from_derivatives(g, std::move(u), std::move(up), std::move(upp));
  r.validation = validate_calabi(r.profile, r.klass.b, eps_bc);
  r.min_upp = *std::min_element(r.profile.upp().begin(), r.profile.upp().end());
  r.convex = r.min_upp > 0.0;
  r.base_positive = true;
  for (double v : r.profile.up()) r.base_positive = r.base_positive && (r.klass.a + v > 0.0);
  return r;
}

}  // namespace flipflow
