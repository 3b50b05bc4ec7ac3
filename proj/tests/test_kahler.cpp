#include <doctest.h>

#include <cmath>
#include <random>

#include "bergman/domains.hpp"
#include "bergman/error.hpp"
#include "bergman/kahler.hpp"
#include "oracles.hpp"

using namespace bergman;

namespace {

Point pt(std::initializer_list<cplx> v) {
  Point p(static_cast<int>(v.size()));
  int i = 0;
  for (auto c : v) p[i++] = c;
  return p;
}

// Smooth real test field with random quadratic coefficients.
Field random_field(std::mt19937_64& rng, const Point& z) {
  const int n = static_cast<int>(z.size());
  std::normal_distribution<double> g;
  auto c = seed_coordinates(z);
  std::vector<Jet> p;
  for (int j = 0; j < n; ++j) {
    Jet v = Jet::constant(n, z, cplx(g(rng), g(rng)));
    for (int k = 0; k < 2 * n; ++k) v += cplx(g(rng), g(rng)) * c[k];
    v += cplx(g(rng), g(rng)) * c[0] * c[n];
    v += cplx(g(rng), g(rng)) * c[n - 1] * c[n - 1];
    p.push_back(v);
  }
  return Field::real(p);
}

Field constant_real(const Point& x, const Point& z) {
  const int n = static_cast<int>(z.size());
  Vec v(2 * n);
  v << x, x.conjugate();
  return Field::constant(v, z);
}

}  // namespace

TEST_CASE("Bergman metric of the ball (closed-form Hessian of -(n+1) log(1-|z|²))") {
  for (int n = 1; n <= 3; ++n) {
    const MetricPoint m = bergman_metric(log(kernel_ball(n, Point::Zero(n))));
    CHECK((m.g - (n + 1.0) * Eigen::MatrixXcd::Identity(n, n)).norm() < 1e-13);
  }
  const MetricPoint m = bergman_metric(log(kernel_ball(2, pt({0.5, 0.0}))));
  CHECK(std::abs(m.g(0, 0) - 3.0 * (1 / 0.75 + 0.25 / (0.75 * 0.75))) < 1e-13);
  CHECK(std::abs(m.g(1, 1) - 3.0 / 0.75) < 1e-13);
  CHECK(std::abs(m.g(0, 1)) < 1e-14);
  CHECK((m.g_inv * m.g - Eigen::MatrixXcd::Identity(2, 2)).norm() < 1e-12);
  for (int r = 0; r < 2; ++r)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) CHECK(std::abs(m.dg[r](j, k) - m.dg[j](r, k)) < 1e-12);
}

TEST_CASE("curvature routes agree and carry the tensor symmetries") {
  for (const Point& z : {pt({0.0, 0.0}), pt({0.5, 0.3})}) {
    const Jet K = kernel_ball(2, z);
    const MetricPoint m = bergman_metric(log(K));
    const CurvaturePoint h = curvature_hessian(m);
    const CurvaturePoint k = curvature_kobayashi(K, m);
    CHECK(max_difference(h, k) < 1e-10 * (1 + h.max_abs()));
    CHECK(h.symmetry_defect() < 1e-12 * (1 + h.max_abs()));
    CHECK(k.symmetry_defect() < 1e-12 * (1 + k.max_abs()));
  }
  KernelModel pert(DomainSpec::reinhardt({{1.0, 1.0}, {0.5, 0.5}}, 40, 64));
  for (const Point& z : {pt({0.0, 0.0}), pt({0.3, cplx(0.1, 0.2)})}) {
    const Jet K = pert.kernel(z).K;
    const MetricPoint m = bergman_metric(log(K));
    const CurvaturePoint h = curvature_hessian(m);
    CHECK(max_difference(h, curvature_kobayashi(K, m)) < 1e-9 * (1 + h.max_abs()));
  }
}

TEST_CASE("flat weight gives zero curvature") {
  // log K = |z|² (K = exp|z|²): constant metric, every derivative cancels.
  const Point z = pt({0.3, -0.2});
  auto c = seed_coordinates(z);
  const Jet logK = c[0] * c[2] + c[1] * c[3];
  const MetricPoint m = bergman_metric(logK);
  CHECK(curvature_hessian(m).max_abs() < 1e-14);
  CHECK(curvature_kobayashi(exp(logK), m).max_abs() < 1e-12);
}

TEST_CASE("holomorphic sectional curvature of the ball is -4/(n+1)") {
  std::mt19937_64 rng(17);
  for (int n = 2; n <= 3; ++n) {
    for (int t = 0; t < 50; ++t) {
      const Point z = oracle::random_point(rng, n, 0.95);
      const Point Z = oracle::random_direction(rng, n);
      const Jet K = kernel_ball(n, z);
      const MetricPoint m = bergman_metric(log(K));
      CHECK(std::abs(hol_sectional(m, curvature_hessian(m), Z) + 4.0 / (n + 1)) < 1e-6);
      CHECK(std::abs(hol_sectional(m, curvature_kobayashi(K, m), Z) + 4.0 / (n + 1)) < 1e-6);
    }
  }
  const Point z = pt({0.1, 0.7});
  const MetricPoint m = bergman_metric(log(kernel_ball(2, z)));
  const CurvaturePoint R = curvature_hessian(m);
  const Point Z = pt({cplx(0.3, 0.1), -0.4});
  CHECK(hol_sectional(m, R, Z) == hol_sectional(m, R, Point(2.0 * Z)));
  CHECK(hol_sectional(m, R, Z) == doctest::Approx(hol_sectional(m, R, Point(cplx(-0.3, 1.7) * Z))).epsilon(1e-13));
  CHECK_THROWS_AS(hol_sectional(m, R, Point::Zero(2)), Error);
}

TEST_CASE("affine image of the ball keeps the holomorphic sectional curvature") {
  Eigen::MatrixXcd F = Eigen::MatrixXcd::Identity(2, 2);
  F(0, 0) = 2.0;
  KernelModel model(DomainSpec::affine(F, Point::Zero(2)));
  std::mt19937_64 rng(23);
  for (int t = 0; t < 10; ++t) {
    const Point z = F * oracle::random_point(rng, 2, 0.9);
    const MetricPoint m = bergman_metric(log(model.kernel(z).K));
    CHECK(std::abs(hol_sectional(m, curvature_hessian(m), oracle::random_direction(rng, 2)) + 4.0 / 3.0) < 1e-6);
  }
}

TEST_CASE("Levi-Civita connection on fields") {
  {
    const Point z0 = pt({0.0, 0.0});
    MetricField mf(log(kernel_ball(2, z0)));
    const Field X = constant_real(pt({1.0, cplx(0, 2)}), z0), Y = constant_real(pt({0.3, -1.0}), z0);
    CHECK(max_abs(mf.covariant_derivative(X, Y).value()) < 1e-14);
  }
  std::mt19937_64 rng(29);
  KernelModel pert(DomainSpec::reinhardt({{1.0, 1.0}, {0.5, 0.5}}, 40, 64));
  for (int t = 0; t < 8; ++t) {
    const Point z = oracle::random_point(rng, 2, 0.6);
    for (const Jet& logK : {log(kernel_ball(2, z)), pert.log_kernel(z)}) {
      MetricField mf(logK);
      const Field X = random_field(rng, z), Y = random_field(rng, z), Z = random_field(rng, z);
      const cplx lhs = apply(X, mf.inner(Y, Z)).value();
      const cplx rhs = mf.inner(mf.covariant_derivative(X, Y), Z).value() + mf.inner(Y, mf.covariant_derivative(X, Z)).value();
      CHECK(std::abs(lhs - rhs) < 1e-9 * (1 + std::abs(lhs)));
      const Vec tor = (mf.covariant_derivative(X, Y) - mf.covariant_derivative(Y, X) - bracket(X, Y)).value();
      CHECK(max_abs(tor) < 1e-8 * (1 + max_abs(bracket(X, Y).value())));
      // real fields stay real
      const Vec v = mf.covariant_derivative(X, Y).value();
      CHECK((v.head(2) - v.tail(2).conjugate()).norm() < 1e-10 * (1 + v.norm()));
    }
  }
}

TEST_CASE("field-level curvature matches the tensor route") {
  std::mt19937_64 rng(31);
  for (int n = 2; n <= 3; ++n) {
    const Point z = oracle::random_point(rng, n, 0.8);
    const Jet logK = log(kernel_ball(n, z));
    MetricField mf(logK);
    const Point x = oracle::random_direction(rng, n);
    const Field X = constant_real(x, z);
    CHECK(mf.sectional(X, X.J()) == doctest::Approx(-4.0 / (n + 1)).epsilon(1e-9));
  }
  KernelModel pert(DomainSpec::reinhardt({{1.0, 1.0}, {0.5, 0.5}}, 40, 64));
  for (int t = 0; t < 5; ++t) {
    const Point z = oracle::random_point(rng, 2, 0.6);
    const Jet logK = pert.log_kernel(z);
    MetricField mf(logK);
    const MetricPoint m = bergman_metric(logK);
    const Point x = oracle::random_direction(rng, 2);
    const Field X = random_field(rng, z);
    const Point xv = X.value().head(2);
    CHECK(mf.sectional(X, X.J()) == doctest::Approx(hol_sectional(m, curvature_hessian(m), xv)).epsilon(1e-9));
    (void)x;
  }
}
