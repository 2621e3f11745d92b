#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include "flipflow/cohomology.hpp"
#include "flipflow/errors.hpp"

using namespace flipflow;

namespace {

// K = α D_H + β D_∞ from K·ℓ and K·f, with ℓ a line in the exceptional P^p
// and f a line in a fiber: D_H·ℓ = 1, D_∞·ℓ = 0, D_H·f = 0, D_∞·f = 1.
// K·f = -(q+2) by adjunction on the fiber P^{q+1}; K·ℓ from
// K_E = (K_X + det N)|_E with N = O(-1)^{q+1}, K_E·ℓ = -(p+1).
std::pair<int, int> intersection_oracle(int p, int q) {
  const int K_dot_f = -(q + 2);
  const int K_dot_l = -(p + 1) + (q + 1);
  const int M[2][2] = {{1, 0}, {0, 1}};  // rows ℓ, f; columns D_H, D_∞
  const int det = M[0][0] * M[1][1] - M[0][1] * M[1][0];
  const int alpha = (K_dot_l * M[1][1] - M[0][1] * K_dot_f) / det;
  const int beta = (M[0][0] * K_dot_f - M[1][0] * K_dot_l) / det;
  return {-alpha, -beta};
}

// X_{p,0} = Bl_pt P^{p+1}: K = -(p+2) H + p E, D_H = H - E, D_∞ = H.
std::pair<int, int> blowup_oracle(int p) {
  // a (H - E) + b H = -(p+2) H + p E  =>  a = -p, a + b = -(p+2).
  const int a = -p;
  const int b = -(p + 2) - a;
  return {-a, -b};
}

double quad_volume(int p, int q, double a, double b) {
  auto f = [&](double s) { return std::pow(a + s, p) * std::pow(s, q); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, b, 15, 1e-14);
}

}  // namespace

TEST_SUITE("cohomology") {
  TEST_CASE("canonical rates: worked examples") {
    CHECK(canonical_rates(BundleModel::make(3, 1)).a == 2);
    CHECK(canonical_rates(BundleModel::make(3, 1)).b == 3);
    CHECK(canonical_rates(BundleModel::make(2, 0)).a == 2);
    CHECK(canonical_rates(BundleModel::make(2, 0)).b == 2);
    CHECK(canonical_rates(BundleModel::make(1, 1)).a == 0);
    CHECK(canonical_rates(BundleModel::make(1, 1)).b == 3);
  }

  TEST_CASE("canonical rates agree with the intersection oracle") {
    for (int p = 2; p <= 6; ++p) {
      for (int q = 1; q < p; ++q) {
        const auto [ra, rb] = intersection_oracle(p, q);
        const CanonicalRates r = canonical_rates(BundleModel::make(p, q));
        CHECK(r.a == ra);
        CHECK(r.b == rb);
      }
    }
    for (int p = 1; p <= 6; ++p) {
      const auto [ra, rb] = blowup_oracle(p);
      const CanonicalRates r = canonical_rates(BundleModel::make(p, 0));
      CHECK(r.a == ra);
      CHECK(r.b == rb);
    }
  }

  TEST_CASE("paper-literal rates differ only in b") {
    const CanonicalRates r = canonical_rates(BundleModel::make(3, 1), RateConvention::paper_literal);
    CHECK(r.a == 2);
    CHECK(r.b == 5);
  }

  TEST_CASE("bundle model") {
    CHECK(BundleModel::make(3, 1).n() == 5);
    CHECK(BundleModel::make(3, 1).admits_flip());
    CHECK_FALSE(BundleModel::make(3, 0).admits_flip());
    CHECK_FALSE(BundleModel::make(2, 2).admits_flip());
    CHECK(BundleModel::make(3, 1).flipped() == BundleModel{1, 3});
    CHECK_THROWS_AS(BundleModel::make(0, 1), InvalidArgument);
    CHECK_THROWS_AS(BundleModel::make(1, -1), InvalidArgument);
  }

  TEST_CASE("class_at: worked examples") {
    const ClassPath path = singular_time(2.0, 9.0, BundleModel::make(3, 1));
    KahlerClass k = class_at(path, 0.0);
    CHECK(k.a == 2.0);
    CHECK(k.b == 9.0);
    k = class_at(path, 1.0);
    CHECK(k.a == doctest::Approx(0.0));
    CHECK(k.b == doctest::Approx(6.0));
    k = class_at(path, 0.5);
    CHECK(k.a == 1.0);
    CHECK(k.b == 7.5);
    CHECK_THROWS_AS(class_at(path, 1.0 + 1e-9), TimeOutOfRange);
    CHECK_THROWS_AS(class_at(path, -1e-9), TimeOutOfRange);
  }

  TEST_CASE("class_at is affine") {
    const ClassPath path = singular_time(2.0, 9.0, BundleModel::make(3, 1));
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
      const double t1 = U(rng), t2 = U(rng);
      const KahlerClass c1 = class_at(path, t1), c2 = class_at(path, t2);
      const KahlerClass m = class_at(path, 0.5 * (t1 + t2));
      CHECK(std::abs(c1.a + c2.a - 2.0 * m.a) <= 4.0 * std::ldexp(1.0, -52) * 4.0);
      CHECK(std::abs(c1.b + c2.b - 2.0 * m.b) <= 4.0 * std::ldexp(1.0, -52) * 18.0);
    }
  }

  TEST_CASE("singular_time: worked examples") {
    const BundleModel m = BundleModel::make(3, 1);
    ClassPath p = singular_time(2.0, 9.0, m);
    CHECK(p.T == 1.0);
    CHECK(p.vanishing == Vanishing::a);
    p = singular_time(4.0, 3.0, m);
    CHECK(p.T == 1.0);
    CHECK(p.vanishing == Vanishing::b);
    p = singular_time(2.0, 3.0, m);
    CHECK(p.T == 1.0);
    CHECK(p.vanishing == Vanishing::both);
  }

  TEST_CASE("singular_time: only b can vanish when p <= q") {
    for (int q = 1; q <= 4; ++q) {
      for (int p = 1; p <= q; ++p) {
        const ClassPath path = singular_time(0.1, 7.0, BundleModel::make(p, q));
        CHECK(path.vanishing == Vanishing::b);
        CHECK(path.T == doctest::Approx(7.0 / (q + 2)));
      }
    }
  }

  TEST_CASE("singular_time: tie tolerance") {
    const BundleModel m = BundleModel::make(3, 1);
    CHECK(singular_time(2.0, 3.0 * (1.0 + 1e-13), m).vanishing == Vanishing::both);
    CHECK(singular_time(2.0, 3.0 * (1.0 + 1e-9), m).vanishing == Vanishing::a);
    CHECK(singular_time(2.0, 3.0 * (1.0 - 1e-9), m).vanishing == Vanishing::b);
  }

  TEST_CASE("singular_time rejects non-Kähler starts") {
    const BundleModel m = BundleModel::make(3, 1);
    CHECK_THROWS_AS(singular_time(0.0, 9.0, m), InvalidArgument);
    CHECK_THROWS_AS(singular_time(2.0, 0.0, m), InvalidArgument);
    CHECK_THROWS_AS(singular_time(-1.0, 9.0, m), InvalidArgument);
  }

  TEST_CASE("volume_poly: worked examples") {
    CHECK(volume_poly(BundleModel::make(2, 1), {0.0, 1.0}) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(volume_poly(BundleModel::make(1, 0), {1.0, 1.0}) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(volume_poly(BundleModel::make(3, 1), {1.0, 2.0}) == doctest::Approx(28.4).epsilon(1e-14));
    CHECK(volume_poly(BundleModel::make(3, 1), {1.0, 2.0}) ==
          doctest::Approx(quad_volume(3, 1, 1.0, 2.0)).epsilon(1e-14));
  }

  TEST_CASE("volume_poly matches quadrature at random classes") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> U(1e-6, 10.0);
    for (int p = 1; p <= 4; ++p) {
      for (int q = 0; q <= 3; ++q) {
        const BundleModel m = BundleModel::make(p, q);
        for (int k = 0; k < 100; ++k) {
          const double a = U(rng), b = U(rng);
          const double exact = quad_volume(p, q, a, b);
          CHECK(std::abs(volume_poly(m, {a, b}) - exact) <= 1e-10 * exact);
        }
      }
    }
  }

  TEST_CASE("volume polynomial degrees") {
    for (int p = 1; p <= 5; ++p) {
      for (int q = 0; q <= 4; ++q) {
        const VolumePolynomial vp(BundleModel::make(p, q));
        CHECK(vp.total_degree() == p + q + 1);
        for (const auto& t : vp.terms()) {
          CHECK(t.deg_a + t.deg_b == p + q + 1);
          CHECK(t.deg_a <= p);
          CHECK(t.deg_b >= q + 1);
          CHECK(t.coeff > 0);
        }
      }
    }
  }

  TEST_CASE("p/q symmetry of the volume at a = 0") {
    for (int p = 1; p <= 4; ++p) {
      for (int q = 0; q <= 4; ++q) {
        const double v1 = volume_poly(BundleModel::make(p, q), {0.0, 6.0});
        const double v2 = volume_poly(BundleModel{q, p}, {0.0, 6.0});
        CHECK(v1 == doctest::Approx(v2).epsilon(1e-14));
      }
    }
  }

  TEST_CASE("classify_singularity: worked examples") {
    const BundleModel m = BundleModel::make(3, 1);
    SingularityClass s = classify_singularity(singular_time(2.0, 9.0, m));
    CHECK(s.kind == SingularityKind::flip);
    CHECK(s.ratio_exponent == 0);
    s = classify_singularity(singular_time(2.0, 3.0, m));
    CHECK(s.kind == SingularityKind::extinction);
    CHECK(s.ratio_exponent == 5);
    s = classify_singularity(singular_time(4.0, 3.0, m));
    CHECK(s.kind == SingularityKind::collapse);
    CHECK(s.ratio_exponent == 2);
    CHECK(to_string(SingularityKind::flip) == "Flip");
    CHECK(to_string(SingularityKind::collapse) == "Collapse");
    CHECK(to_string(SingularityKind::extinction) == "Extinction");
  }

  TEST_CASE("ratio exponent matches a log-log fit of the closed form") {
    const BundleModel m = BundleModel::make(3, 1);
    for (auto [a0, b0] : {std::pair{2.0, 9.0}, {2.0, 3.0}, {4.0, 3.0}}) {
      const ClassPath path = singular_time(a0, b0, m);
      const double e1 = 1e-4, e2 = 1e-5;
      const double v1 = volume_poly(m, class_at(path, path.T - e1));
      const double v2 = volume_poly(m, class_at(path, path.T - e2));
      const double slope = std::log(v1 / v2) / std::log(e1 / e2);
      CHECK(slope == doctest::Approx(classify_singularity(path).ratio_exponent).epsilon(1e-3));
    }
  }

  TEST_CASE("volume_ratio signatures") {
    const BundleModel m = BundleModel::make(3, 1);
    const ClassPath flip = singular_time(2.0, 9.0, m);
    CHECK(volume_ratio(flip, 0.0) == doctest::Approx(volume_poly(m, {2.0, 9.0})));
    double prev = volume_ratio(flip, 0.5);
    bool monotone = true;
    for (double t = 0.55; t < 1.0 - 1e-4; t += 0.05) {
      const double r = volume_ratio(flip, t);
      monotone = monotone && r > prev;
      prev = r;
    }
    CHECK(monotone);
    CHECK(volume_ratio(flip, 1.0 - 1e-3) > 1e3 * volume_ratio(flip, 0.0));

    const ClassPath ext = singular_time(2.0, 3.0, m);
    CHECK(volume_ratio(ext, 1.0 - 1e-3) < 1e-3 * volume_ratio(ext, 0.0));
    CHECK_THROWS_AS(volume_ratio(flip, 1.0), TimeOutOfRange);
  }
}
