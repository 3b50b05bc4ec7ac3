#include <doctest.h>

#include <cmath>

#include "bergman/asympt.hpp"
#include "bergman/error.hpp"

using namespace bergman;

namespace {

Point pt(std::initializer_list<cplx> v) {
  Point p(static_cast<int>(v.size()));
  int i = 0;
  for (auto c : v) p[i++] = c;
  return p;
}

RaySpec ball_ray(int n, PlaneChoice plane) {
  RaySpec ray;
  ray.anchor = Point::Zero(n);
  ray.direction = Point::Zero(n);
  ray.direction[0] = cplx(0.6, 0.2);
  ray.direction[n - 1] += cplx(-0.3, 0.5);
  ray.epsilons = geometric_epsilons(0.4, 1e-4, 0.5);
  ray.plane = plane;
  ray.seed = 42;
  return ray;
}

}  // namespace

TEST_CASE("level location on the ball") {
  const KernelModel ball(DomainSpec::ball(2));
  const double s = -ball.phi_value(Point::Zero(2));
  for (double eps : {0.01, 0.3, 1.0}) {
    const Point z = locate_level(ball, Point::Zero(2), pt({1.0, 0.0}), eps);
    CHECK(z[0].real() == doctest::Approx(std::sqrt(1.0 - eps / s)).epsilon(1e-11));
    CHECK(std::abs(z[1]) == 0.0);
  }
  const Point z0 = locate_level(ball, Point::Zero(2), pt({1.0, 0.0}), s);
  CHECK(z0.norm() == 0.0);
  CHECK_THROWS_AS(locate_level(ball, Point::Zero(2), pt({1.0, 0.0}), 1.5 * s), Error);
  try {
    locate_level(ball, Point::Zero(2), pt({1.0, 0.0}), 2.0 * s);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RootNotBracketed);
  }
}

TEST_CASE("level location on a series domain") {
  const KernelModel model(DomainSpec::reinhardt(Shadow{{1.0, 1.0}, {0.5, 0.5}}, 300, 200));
  for (double eps : {0.4, 0.2}) {
    const Point z = locate_level(model, Point::Zero(2), pt({0.8, cplx(0.2, 0.4)}), eps);
    CHECK(std::abs(model.phi_value(z) + eps) < 1e-10);
  }
}

TEST_CASE("extrapolation and order fitting") {
  const std::vector<double> eps = {0.4, 0.3, 0.2, 0.1, 0.05};
  std::vector<double> lin, quad, pw;
  for (double e : eps) {
    lin.push_back(-1.25 + 3.0 * e);
    quad.push_back(0.5 - e + 2.0 * e * e);
    pw.push_back(-1.0 + 2.0 * std::pow(e, 1.5));
  }
  const Extrapolation f = extrapolate(eps, lin, 3);
  CHECK(f.limit == doctest::Approx(-1.25).epsilon(1e-14));
  CHECK(f.slope == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(f.residual < 1e-14);
  CHECK(extrapolate(eps, quad, 5, true).limit == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(fit_order(eps, pw, -1.0, 5).value() == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(fit_order(eps, lin, -1.25, 5).value() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_FALSE(fit_order(eps, std::vector<double>(5, 2.0), 2.0, 5).has_value());
  CHECK_THROWS_AS(extrapolate(eps, lin, 1), Error);
  CHECK_THROWS_AS(extrapolate({0.1, 0.2}, {1.0, 2.0}, 3, true), Error);
}

TEST_CASE("ray validation") {
  RaySpec ray = ball_ray(2, PlaneChoice::Sigma0);
  ray.epsilons.clear();
  CHECK_THROWS_AS(ray.validate(2), Error);
  ray.epsilons = {0.1, 0.2};
  CHECK_THROWS_AS(ray.validate(2), Error);
  ray.epsilons = {0.2, 0.1};
  CHECK_NOTHROW(ray.validate(2));
  CHECK_THROWS_AS(ray.validate(3), Error);
  ray.plane = PlaneChoice::HorizontalFixed;
  CHECK_THROWS_AS(ray.validate(2), Error);
  CHECK(plane_choice_from_string("sigma0") == PlaneChoice::Sigma0);
  CHECK_THROWS_AS(plane_choice_from_string("vertical"), Error);
  const auto g = geometric_epsilons(0.4, 0.05, 0.7);
  CHECK(g.front() == 0.4);
  CHECK(g.back() == 0.05);
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] < g[i - 1]);
}

TEST_CASE("ball scans are constant and reach the Klembeck value") {
  for (int n = 2; n <= 3; ++n) {
    const KernelModel ball(DomainSpec::ball(n));
    for (PlaneChoice plane : {PlaneChoice::HorizontalRandom, PlaneChoice::Sigma0}) {
      const ScanReport rep = scan(ball, ball_ray(n, plane));
      CHECK(rep.target == doctest::Approx(-4.0 / (n + 1)));
      for (double k : rep.column) CHECK(std::abs(k - rep.target) < 1e-6);
      double mean = 0.0, var = 0.0;
      for (double k : rep.column) mean += k / rep.column.size();
      for (double k : rep.column) var += (k - mean) * (k - mean) / rep.column.size();
      CHECK(var < 1e-12 * mean * mean);
      CHECK(rep.pass);
      CHECK(std::abs(rep.extrapolated_limit - rep.target) < 1e-6);
      const CurvatureSample& last = rep.rows.back();
      CHECK(std::abs(last.phi_over_f - 1.0) < 10.0 * last.epsilon);
      CHECK(std::abs(last.f2_phi_h) < 10.0 * last.epsilon);
      CHECK(std::abs(rep.L1_limit - 8.0 / (n + 1)) < 1e-2);
      CHECK(std::abs(rep.L2_limit + 16.0 / (n + 1)) < 1e-2);
      for (const auto& r : rep.rows) CHECK(r.one_minus_r_phi > 0.0);
      CHECK(rep.warnings.empty());
    }
  }
}

TEST_CASE("scan rows do not depend on the worker count") {
  const KernelModel model(DomainSpec::reinhardt(Shadow{{1.0, 1.0}, {0.5, 0.5}}, 300, 200));
  RaySpec ray;
  ray.anchor = Point::Zero(2);
  ray.direction = pt({1.0, 0.2});
  ray.epsilons = {0.5, 0.4, 0.3, 0.25};
  ray.seed = 9;
  ScanOptions one, two;
  two.jobs = 2;
  const ScanReport a = scan(model, ray, one), b = scan(model, ray, two);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.column[i] == b.column[i]);
    CHECK(a.rows[i].L2 == b.rows[i].L2);
  }
  CHECK(a.extrapolated_limit == b.extrapolated_limit);
  const CurvatureSample& last = a.rows.back();
  CHECK(std::abs(last.phi_over_f - 1.0) < 10.0 * last.epsilon);
  CHECK(std::abs(last.f2_phi_h) < 10.0 * last.epsilon);
  // a genuinely curved domain: interior rows deviate from the ball value
  CHECK(std::abs(a.column.front() - a.target) > 1e-2);
}
