#pragma once

// Kähler-class bookkeeping on the projective bundles
//   X_{p,q} = P(O ⊕ O(-1)^{q+1}) over P^p,   n = p + q + 1,
// in the basis ([D_H], [D_∞]). Everything here is exact or closed-form; the
// PDE never feeds back into the class line.

#include <cstdint>
#include <string>
#include <vector>

#include <boost/rational.hpp>

namespace flipflow {

struct BundleModel {
  int p = 1;  // base P^p
  int q = 0;  // fiber P^{q+1}

  static BundleModel make(int p, int q);

  int n() const { return p + q + 1; }
  // 0 < q < p: X_{p,q} ⇢ X_{q,p} is a genuine flip.
  bool admits_flip() const { return 1 <= q && q < p; }
  BundleModel flipped() const { return BundleModel{q, p}; }

  friend bool operator==(const BundleModel&, const BundleModel&) = default;
};

enum class RateConvention {
  adjunction,     // (p - q, q + 2)
  paper_literal,  // (p - q, p + 2), kept for side-by-side reporting only
};

// Decay rates of (a, b) under the normalized flow, i.e. the negated
// coefficients of [K_X] in the ([D_H], [D_∞]) basis.
struct CanonicalRates {
  int a = 0;
  int b = 0;
};

CanonicalRates canonical_rates(BundleModel model,
                               RateConvention convention = RateConvention::adjunction);

struct KahlerClass {
  double a = 0.0;
  double b = 0.0;

  bool is_kahler() const { return a > 0.0 && b > 0.0; }
};

enum class Vanishing { a, b, both };

std::string to_string(Vanishing v);

// a(t) = a0 - rate_a (t - t0), b(t) = b0 - rate_b (t - t0) on [t0, T].
struct ClassPath {
  BundleModel model;
  RateConvention convention = RateConvention::adjunction;
  double a0 = 0.0;
  double b0 = 0.0;
  double rate_a = 0.0;
  double rate_b = 0.0;
  double t0 = 0.0;
  double T = 0.0;
  Vanishing vanishing = Vanishing::b;

  double a_at(double t) const { return a0 - rate_a * (t - t0); }
  double b_at(double t) const { return b0 - rate_b * (t - t0); }
};

// Relative tie tolerance deciding "both vanish simultaneously".
inline constexpr double kVanishingTieTolerance = 1e-12;

// First singular time of the class line starting at (a0, b0) at time t0.
// a0 may be zero when rate_a < 0 (the post-flip line starts on the boundary).
ClassPath singular_time(double a0, double b0, BundleModel model,
                        RateConvention convention = RateConvention::adjunction,
                        double t0 = 0.0);

// Throws TimeOutOfRange outside [t0, T].
KahlerClass class_at(const ClassPath& path, double t);

// V̂(a, b) = ∫_0^b (a + s)^p s^q ds, stored as Σ c_ij a^i b^j with exact
// rational coefficients.
class VolumePolynomial {
 public:
  using Rational = boost::rational<std::int64_t>;

  struct Term {
    int deg_a = 0;
    int deg_b = 0;
    Rational coeff;
  };

  explicit VolumePolynomial(BundleModel model);

  const std::vector<Term>& terms() const { return terms_; }
  int total_degree() const;
  double operator()(double a, double b) const;

  // Order of vanishing in τ of V̂(A + α τ, B + β τ) at τ = 0, from the exact
  // expansion; A or B must be exactly zero for a vanishing component.
  int vanishing_order(double A, double alpha, double B, double beta) const;

 private:
  BundleModel model_;
  std::vector<Term> terms_;
};

double volume_poly(BundleModel model, KahlerClass k);

enum class SingularityKind { flip, collapse, extinction };

std::string to_string(SingularityKind k);

struct SingularityClass {
  SingularityKind kind = SingularityKind::flip;
  int ratio_exponent = 0;
};

SingularityClass classify_singularity(const ClassPath& path);

// V̂(class_at(t)) / (T - t)^{p - q}. Throws TimeOutOfRange for t >= T.
double volume_ratio(const ClassPath& path, double t);

}  // namespace flipflow
