#include "flipflow/cohomology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "flipflow/errors.hpp"

namespace flipflow {

namespace {

std::int64_t binomial(int n, int k) {
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Coefficients of (x0 + x1 τ)^k in τ.
std::vector<double> binomial_expand(double x0, double x1, int k) {
  std::vector<double> c(static_cast<std::size_t>(k) + 1, 0.0);
  for (int j = 0; j <= k; ++j) {
    c[static_cast<std::size_t>(j)] = static_cast<double>(binomial(k, j)) *
                                     std::pow(x0, k - j) * std::pow(x1, j);
  }
  return c;
}

}  // namespace

BundleModel BundleModel::make(int p, int q) {
  if (p < 1) throw InvalidArgument("model.p must be >= 1");
  if (q < 0) throw InvalidArgument("model.q must be >= 0");
  return BundleModel{p, q};
}

CanonicalRates canonical_rates(BundleModel model, RateConvention convention) {
  CanonicalRates r;
  r.a = model.p - model.q;
  r.b = convention == RateConvention::adjunction ? model.q + 2 : model.p + 2;
  return r;
}

std::string to_string(Vanishing v) {
  switch (v) {
    case Vanishing::a:
      return "a";
    case Vanishing::b:
      return "b";
    case Vanishing::both:
      return "both";
  }
  return "?";
}

ClassPath singular_time(double a0, double b0, BundleModel model,
                        RateConvention convention, double t0) {
  const CanonicalRates rates = canonical_rates(model, convention);
  if (!(b0 > 0.0)) throw InvalidArgument("b0 must be positive");
  if (!(a0 > 0.0) && !(a0 == 0.0 && rates.a < 0)) {
    throw InvalidArgument("a0 must be positive");
  }
  if (rates.b <= 0) throw InvalidArgument("b-rate must be positive");

  ClassPath path;
  path.model = model;
  path.convention = convention;
  path.a0 = a0;
  path.b0 = b0;
  path.rate_a = rates.a;
  path.rate_b = rates.b;
  path.t0 = t0;

  const double tb = b0 / rates.b;
  if (rates.a > 0) {
    const double ta = a0 / rates.a;
    if (std::abs(ta - tb) <= kVanishingTieTolerance * std::max(ta, tb)) {
      path.vanishing = Vanishing::both;
      path.T = t0 + std::min(ta, tb);
    } else if (ta < tb) {
      path.vanishing = Vanishing::a;
      path.T = t0 + ta;
    } else {
      path.vanishing = Vanishing::b;
      path.T = t0 + tb;
    }
  } else {
    path.vanishing = Vanishing::b;
    path.T = t0 + tb;
  }
  return path;
}

KahlerClass class_at(const ClassPath& path, double t) {
  if (t < path.t0 || t > path.T) {
    throw TimeOutOfRange("time " + std::to_string(t) + " outside class path [" +
                         std::to_string(path.t0) + ", " + std::to_string(path.T) + "]");
  }
  KahlerClass k{path.a_at(t), path.b_at(t)};
  // Clamp the rounding residue at the endpoint.
  if (t == path.T) {
    if (path.vanishing != Vanishing::b) k.a = 0.0;
    if (path.vanishing != Vanishing::a) k.b = 0.0;
  }
  k.a = std::max(k.a, 0.0);
  k.b = std::max(k.b, 0.0);
  return k;
}

VolumePolynomial::VolumePolynomial(BundleModel model) : model_(model) {
  // ∫_0^b (a+s)^p s^q ds = Σ_k C(p,k) a^{p-k} b^{k+q+1} / (k+q+1)
  for (int k = 0; k <= model.p; ++k) {
    Term t;
    t.deg_a = model.p - k;
    t.deg_b = k + model.q + 1;
    t.coeff = Rational(binomial(model.p, k), k + model.q + 1);
    terms_.push_back(t);
  }
}

int VolumePolynomial::total_degree() const {
  int d = 0;
  for (const auto& t : terms_) d = std::max(d, t.deg_a + t.deg_b);
  return d;
}

double VolumePolynomial::operator()(double a, double b) const {
  double v = 0.0;
  for (const auto& t : terms_) {
    v += boost::rational_cast<double>(t.coeff) * std::pow(a, t.deg_a) * std::pow(b, t.deg_b);
  }
  return v;
}

int VolumePolynomial::vanishing_order(double A, double alpha, double B, double beta) const {
  const int n = total_degree();
  std::vector<double> tau(static_cast<std::size_t>(n) + 1, 0.0);
  for (const auto& t : terms_) {
    const auto ca = binomial_expand(A, alpha, t.deg_a);
    const auto cb = binomial_expand(B, beta, t.deg_b);
    const double c = boost::rational_cast<double>(t.coeff);
    for (std::size_t i = 0; i < ca.size(); ++i) {
      for (std::size_t j = 0; j < cb.size(); ++j) tau[i + j] += c * ca[i] * cb[j];
    }
  }
  double scale = 0.0;
  for (double c : tau) scale = std::max(scale, std::abs(c));
  for (std::size_t k = 0; k < tau.size(); ++k) {
    if (std::abs(tau[k]) > 1e-12 * scale) return static_cast<int>(k);
  }
  return n;
}

double volume_poly(BundleModel model, KahlerClass k) {
  if (k.a < 0.0 || k.b < 0.0) throw InvalidArgument("volume_poly needs a, b >= 0");
  return VolumePolynomial(model)(k.a, k.b);
}

std::string to_string(SingularityKind k) {
  switch (k) {
    case SingularityKind::flip:
      return "Flip";
    case SingularityKind::collapse:
      return "Collapse";
    case SingularityKind::extinction:
      return "Extinction";
  }
  return "?";
}

SingularityClass classify_singularity(const ClassPath& path) {
  SingularityClass s;
  double A = path.a_at(path.T);
  double B = path.b_at(path.T);
  switch (path.vanishing) {
    case Vanishing::a:
      // With q = 0 the contraction is divisorial; the volume still survives,
      // so it shares the Flip signature here.
      s.kind = SingularityKind::flip;
      A = 0.0;
      break;
    case Vanishing::b:
      s.kind = SingularityKind::collapse;
      B = 0.0;
      break;
    case Vanishing::both:
      s.kind = SingularityKind::extinction;
      A = 0.0;
      B = 0.0;
      break;
  }
  // a(t) = a(T) + rate_a (T - t), likewise b.
  s.ratio_exponent =
      VolumePolynomial(path.model).vanishing_order(A, path.rate_a, B, path.rate_b);
  return s;
}

double volume_ratio(const ClassPath& path, double t) {
  if (t >= path.T) throw TimeOutOfRange("volume_ratio requires t < T");
  const KahlerClass k = class_at(path, t);
  return volume_poly(path.model, k) / std::pow(path.T - t, path.model.p - path.model.q);
}

}  // namespace flipflow
