#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "bergman/domains.hpp"
#include "bergman/error.hpp"
#include "oracles.hpp"

using namespace bergman;

namespace {

constexpr double kPi = 3.14159265358979323846;

Point pt(std::initializer_list<cplx> v) {
  Point p(static_cast<int>(v.size()));
  int i = 0;
  for (auto c : v) p[i++] = c;
  return p;
}

Shadow ball_shadow(int n) { return {std::vector<double>(n, 1.0), std::vector<double>(n, 0.0)}; }
Shadow perturbed_shadow() { return {{1.0, 1.0}, {0.5, 0.5}}; }

// -1 + sqrt(1 + 2R): root of t + t²/2 = R
double perturbed_extent(double R) { return R <= 0 ? 0.0 : -1.0 + std::sqrt(1.0 + 2.0 * R); }

double perturbed_norm_oracle(int m1, int m2) {
  const double smax = perturbed_extent(1.0);
  auto f = [&](double s) {
    const double t = perturbed_extent(1.0 - s - 0.5 * s * s);
    return std::pow(s, m1) * std::pow(t, m2 + 1) / (m2 + 1);
  };
  const double rough = oracle::simpson(f, 0.0, smax, 0.0, 10);
  return kPi * kPi * oracle::simpson(f, 0.0, smax, 1e-14 * rough);
}

std::string temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("bergman_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

}  // namespace

TEST_CASE("kernel_ball examples against the exact-norm series oracle") {
  const Point z0 = pt({0.0, 0.0});
  CHECK(std::abs(kernel_ball(2, z0).value() - 2.0 / (kPi * kPi)) < 1e-15);
  CHECK(std::abs(kernel_ball(2, z0).value() - oracle::ball_series_value(z0, 40)) < 1e-15);
  const Point one = pt({0.0});
  CHECK(std::abs(kernel_ball(1, one).value() - oracle::ball_series_value(one, 40)) < 1e-15);
  CHECK(std::abs(kernel_ball(1, one).value() - 1.0 / kPi) < 1e-15);

  const Point z = pt({0.4, cplx(0.0, 0.3)});  // |z|² = 0.25
  const double expect = 2.0 / (kPi * kPi) * std::pow(0.75, -3);
  CHECK(std::abs(kernel_ball(2, z).value().real() - expect) < 1e-13 * expect);
  CHECK(std::abs(oracle::ball_series_value(z, 40) - expect) < 1e-12 * expect);

  CHECK_THROWS_AS(kernel_ball(2, pt({1.0, 0.0})), Error);
}

TEST_CASE("monomial norms on the ball match exact simplex integrals") {
  const NormTable t = monomial_norms(DomainSpec::reinhardt(ball_shadow(2), 40, 64));
  CHECK(std::abs(t.norm({0, 0}) - kPi * kPi / 2) < 1e-14);
  CHECK(std::abs(t.norm({1, 0}) - kPi * kPi / 6) < 1e-14);
  CHECK(t.norm({1, 0}) == doctest::Approx(t.norm({0, 1})).epsilon(1e-14));
  double worst = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const std::uint16_t* m = t.exponents(i);
    const double exact = 2 * std::log(kPi) + std::lgamma(m[0] + 1.0) + std::lgamma(m[1] + 1.0) -
                         std::lgamma(m[0] + m[1] + 3.0);
    worst = std::max(worst, std::abs(t.ln_norm(i) - exact));
  }
  CHECK(worst < 1e-12);

  const NormTable t3 = monomial_norms(DomainSpec::reinhardt(ball_shadow(3), 12, 16));
  CHECK(std::abs(t3.norm({2, 1, 3}) - std::pow(kPi, 3) * 2 * 1 * 6 / std::tgamma(10.0)) < 1e-13 * t3.norm({2, 1, 3}));
}

TEST_CASE("monomial norms on the perturbed shadow") {
  const NormTable t = monomial_norms(DomainSpec::reinhardt(perturbed_shadow(), 40, 64));
  CHECK(t.norm({1, 0}) == doctest::Approx(t.norm({0, 1})).epsilon(1e-13));
  CHECK(t.norm({7, 3}) == doctest::Approx(t.norm({3, 7})).epsilon(1e-12));
  for (auto m : {std::pair{0, 0}, {1, 0}, {3, 2}, {10, 7}, {25, 15}}) {
    const double c = t.norm({m.first, m.second});
    CHECK(std::abs(c - perturbed_norm_oracle(m.first, m.second)) < 1e-10 * c);
  }
  KernelModel model(DomainSpec::reinhardt(perturbed_shadow(), 40, 64));
  const double area = oracle::simpson([](double s) { return perturbed_extent(1.0 - s - 0.5 * s * s); }, 0.0,
                                      perturbed_extent(1.0), 1e-15);
  CHECK(std::abs(model.kernel_value(pt({0.0, 0.0})) - 1.0 / (kPi * kPi * area)) < 1e-12);
  CHECK(std::abs(model.kernel(pt({0.0, 0.0})).K.value() - 1.0 / t.norm({0, 0})) < 1e-15);
}

TEST_CASE("norm cache round trip") {
  const std::string dir = temp_dir("cache");
  DomainSpec spec = DomainSpec::reinhardt(perturbed_shadow(), 30, 32);
  const NormTable built = monomial_norms(spec, dir);
  const std::string path = norm_cache_path(spec, dir);
  REQUIRE(std::filesystem::exists(path));
  NormTable back;
  REQUIRE(read_norm_cache(spec, path, back));
  CHECK(back == built);
  CHECK(monomial_norms(spec, dir) == built);

  DomainSpec other = spec;
  other.quadrature_order = 33;
  CHECK(norm_cache_path(other, dir) != path);

  std::ofstream(path, std::ios::app) << "garbage\n";
  CHECK_THROWS_AS(monomial_norms(spec, dir), Error);
  {
    std::ofstream bad(path);
    bad << "# not a cache\n";
  }
  try {
    (void)monomial_norms(spec, dir);
    FAIL("expected CacheCorrupt");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CacheCorrupt);
  }
}

TEST_CASE("series kernel reproduces the ball") {
  KernelModel series(DomainSpec::reinhardt(ball_shadow(2), 40, 64));
  const Point z = pt({0.3, 0.2});
  const KernelJet s = series.kernel(z);
  const Jet b = kernel_ball(2, z);
  for (std::size_t i = 0; i < b.size(); ++i) {
    CHECK(std::abs(s.K.coefficients()[i] - b.coefficients()[i]) < 1e-8 * std::abs(b.coefficients()[i]));
  }
  CHECK(s.tail_estimate < 1e-9);
}

TEST_CASE("property: series kernel within |z| <= 0.8") {
  // Degree 40 cannot resolve |z| = 0.8 (the remainder of Σ C(k+2,2)|z|^{2k}
  // after k = 40 is ~1e-6 of the total); the tail check must say so.
  KernelModel low(DomainSpec::reinhardt(ball_shadow(2), 40, 64));
  try {
    (void)low.kernel(pt({0.8, 0.0}));
    FAIL("expected SeriesNotConverged");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SeriesNotConverged);
  }

  DomainSpec spec = DomainSpec::reinhardt(ball_shadow(2), 220, 128);
  spec.series_tol = 1e-10;
  KernelModel series(spec);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    const Point z = oracle::random_point(rng, 2, 0.8);
    const KernelJet s = series.kernel(z);
    const Jet b = kernel_ball(2, z);
    for (std::size_t i = 0; i < b.size(); ++i) {
      CHECK(std::abs(s.K.coefficients()[i] - b.coefficients()[i]) < 1e-8 * std::abs(b.coefficients()[i]) + 1e-300);
    }
  }
}

TEST_CASE("defining function") {
  const Point z0 = pt({0.0, 0.0});
  const double a = std::cbrt(kPi * kPi / 2);
  CHECK(std::abs(defining_function(kernel_ball(2, z0)).value() + a) < 1e-14);
  const Point z = pt({0.5, cplx(0.5, std::sqrt(0.25))});  // |z|² = 0.75
  CHECK(std::abs(defining_function(kernel_ball(2, z)).value() + 0.25 * a) < 1e-14);
  // φ = -a(1 - |z|²) as a jet: ∂_j∂̄_k φ = a δ_jk
  const Jet phi = defining_function(kernel_ball(2, z));
  CHECK(std::abs(phi.derivative(unit(0), unit(0)) - a) < 1e-12);
  CHECK(std::abs(phi.derivative(unit(0), unit(1))) < 1e-12);
  CHECK(std::abs(phi.derivative(unit(0) + unit(0), unit(1))) < 1e-11);
  double prev = -1e300;
  for (double t = 0.0; t < 1.0; t += 0.05) {
    const double v = defining_function(kernel_ball(2, pt({t, 0.0}))).value().real();
    CHECK(v < 0.0);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("closed-form log K and phi jets agree with the composed route") {
  std::mt19937_64 rng(17);
  Eigen::MatrixXcd F(2, 2);
  F << cplx(1.2, 0.1), cplx(0.3, -0.2), cplx(-0.1, 0.4), cplx(0.9, 0.0);
  const KernelModel ball(DomainSpec::ball(2));
  const KernelModel aff(DomainSpec::affine(F, pt({0.1, cplx(0.0, -0.2)})));
  for (int i = 0; i < 10; ++i) {
    for (const KernelModel* m : {&ball, &aff}) {
      Point z = oracle::random_point(rng, 2, 0.8);
      if (m == &aff) z = F * z + m->spec().affine_translation;
      const KernelJet kj = m->kernel(z);
      REQUIRE_FALSE(kj.phi.empty());
      const Jet phi = defining_function(kj.K), logK = log(kj.K);
      for (std::size_t k = 0; k < phi.size(); ++k) {
        CHECK(std::abs(kj.phi.coefficients()[k] - phi.coefficients()[k]) < 1e-10);
        CHECK(std::abs(kj.log_K.coefficients()[k] - logK.coefficients()[k]) < 1e-10 * (1.0 + std::abs(logK.coefficients()[k])));
      }
    }
  }
  // φ of the ball is quadratic: composed jets lose this near the boundary, direct ones keep it.
  const KernelJet near = ball.kernel(pt({std::sqrt(1.0 - 1e-4), 0.0}));
  double high = 0.0;
  for (std::size_t k = 15; k < near.phi.size(); ++k) high = std::max(high, std::abs(near.phi.coefficients()[k]));
  CHECK(high == 0.0);
}

TEST_CASE("affine pushforward") {
  Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(2, 2);
  const Point zero = pt({0.0, 0.0});
  const Point z = pt({0.2, cplx(0.1, -0.3)});
  const Jet a = affine_pushforward(DomainSpec::affine(I, zero), z);
  const Jet b = kernel_ball(2, z);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a.coefficients()[i] - b.coefficients()[i]) < 1e-13);

  Eigen::MatrixXcd F = Eigen::MatrixXcd::Identity(2, 2);
  F(0, 0) = 2.0;
  KernelModel m(DomainSpec::affine(F, zero));
  CHECK(std::abs(m.kernel(zero).K.value() - 2.0 / (kPi * kPi) / 4.0) < 1e-15);
  CHECK(m.inside(pt({1.9, 0.0})));
  CHECK_FALSE(m.inside(pt({0.0, 1.01})));
  CHECK(m.boundary_parameter(zero, pt({1.0, 0.0})) == doctest::Approx(2.0).epsilon(1e-14));

  Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(2, 2);
  CHECK_THROWS_AS(DomainSpec::affine(S, zero).validate(), Error);
}

TEST_CASE("boundary parameters and value path") {
  KernelModel ball(DomainSpec::ball(2));
  CHECK(ball.boundary_parameter(pt({0.5, 0.0}), pt({1.0, 0.0})) == doctest::Approx(0.5).epsilon(1e-14));
  KernelModel pert(DomainSpec::reinhardt(perturbed_shadow(), 40, 64));
  const double t = pert.boundary_parameter(pt({0.0, 0.0}), pt({1.0, 0.0}));
  CHECK(t * t == doctest::Approx(perturbed_extent(1.0)).epsilon(1e-12));

  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    const Point z = oracle::random_point(rng, 2, 0.5);
    if (!pert.inside(z)) continue;
    double tail = 1.0;
    const double v = pert.kernel_value(z, &tail);
    CHECK(v > 0.0);
    CHECK(tail <= 1e-3 * pert.spec().series_tol);
    // both paths stop summing once their own tail bound is met
    CHECK(std::abs(pert.kernel(z).K.value() - v) < 2e-3 * pert.spec().series_tol * v);
  }
  CHECK_THROWS_AS(pert.kernel_value(pt({0.9, 0.0})), Error);
  double tail = 0.0;
  CHECK(pert.kernel_value(pt({0.75, 0.0}), &tail) > 0.0);
  CHECK(tail > pert.spec().series_tol);
}

TEST_CASE("invalid shadows are rejected") {
  CHECK_THROWS_AS(DomainSpec::reinhardt({{1.0, -1.0}, {0.0, 0.0}}, 10, 10).validate(), Error);
  CHECK_THROWS_AS(DomainSpec::reinhardt({{1.0, 1.0}, {-0.5, 0.0}}, 10, 10).validate(), Error);
  CHECK_THROWS_AS(DomainSpec::reinhardt({{1.0}, {0.0, 0.0}}, 10, 10).validate(), Error);
}
