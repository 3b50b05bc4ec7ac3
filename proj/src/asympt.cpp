#include "bergman/asympt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "bergman/error.hpp"
#include "bergman/parallel.hpp"

namespace bergman {

const char* to_string(PlaneChoice p) {
  switch (p) {
    case PlaneChoice::HorizontalRandom: return "horizontal_random";
    case PlaneChoice::HorizontalFixed: return "horizontal_fixed";
    case PlaneChoice::Sigma0: return "sigma0";
  }
  return "unknown";
}

PlaneChoice plane_choice_from_string(const std::string& s) {
  if (s == "horizontal_random") return PlaneChoice::HorizontalRandom;
  if (s == "horizontal_fixed") return PlaneChoice::HorizontalFixed;
  if (s == "sigma0") return PlaneChoice::Sigma0;
  throw Error(ErrorKind::ConfigError, "unknown plane choice '" + s + "'");
}

std::vector<double> geometric_epsilons(double first, double last, double ratio) {
  if (!(first > 0.0 && last > 0.0 && last <= first && ratio > 0.0 && ratio < 1.0)) {
    throw Error(ErrorKind::ConfigError, "invalid geometric epsilon grid");
  }
  std::vector<double> out;
  for (double e = first; e > last * (1.0 + 1e-12); e *= ratio) out.push_back(e);
  out.push_back(last);
  return out;
}

void RaySpec::validate(int dim) const {
  if (anchor.size() != dim) throw Error(ErrorKind::ConfigError, "ray anchor has the wrong dimension");
  if (direction.size() != dim || !(direction.norm() > 0.0)) {
    throw Error(ErrorKind::ConfigError, "ray direction must be a nonzero vector of the domain dimension");
  }
  if (epsilons.empty()) throw Error(ErrorKind::ConfigError, "empty epsilon list");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0) || !std::isfinite(epsilons[i])) {
      throw Error(ErrorKind::ConfigError, "epsilons must be positive");
    }
    if (i > 0 && !(epsilons[i] < epsilons[i - 1])) {
      throw Error(ErrorKind::ConfigError, "epsilons must be strictly decreasing");
    }
  }
  if (plane == PlaneChoice::HorizontalFixed && (fixed_X.size() != dim || !(fixed_X.norm() > 0.0))) {
    throw Error(ErrorKind::ConfigError, "horizontal_fixed needs a nonzero plane vector");
  }
}

Point locate_level(const KernelModel& model, const Point& anchor, const Point& dir, double eps) {
  const double tol = 1e-12 * (1.0 + eps);
  double tail = 0.0;
  auto g = [&](double t) { return model.phi_value(anchor + t * dir, &tail) + eps; };
  double lo = 0.0;
  double glo = g(lo);
  if (std::abs(glo) < tol) return anchor;
  if (glo > 0.0) throw Error(ErrorKind::RootNotBracketed, "level set lies behind the anchor");
  double hi = model.boundary_parameter(anchor, dir);
  while (!model.inside(anchor + hi * dir)) hi = std::nextafter(hi, 0.0);
  if (!(g(hi) > 0.0)) throw Error(ErrorKind::RootNotBracketed, "no level crossing before the boundary");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (std::abs(gm) < tol) return anchor + mid * dir;
    (gm < 0.0 ? lo : hi) = mid;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
  }
  const double t = 0.5 * (lo + hi);
  if (!(std::abs(g(t)) < tol)) throw Error(ErrorKind::RootNotBracketed, "level solve did not reach tolerance");
  return anchor + t * dir;
}

Extrapolation extrapolate(const std::vector<double>& eps, const std::vector<double>& values, int m, bool quadratic) {
  const int params = quadratic ? 3 : 2;
  if (eps.size() != values.size()) throw Error(ErrorKind::InsufficientRows, "mismatched rows");
  if (m < params || static_cast<int>(eps.size()) < m) {
    throw Error(ErrorKind::InsufficientRows, "need at least " + std::to_string(std::max(m, params)) + " rows");
  }
  std::vector<std::size_t> order(eps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return eps[a] < eps[b]; });
  Eigen::MatrixXd A(m, params);
  Eigen::VectorXd y(m);
  for (int i = 0; i < m; ++i) {
    const double e = eps[order[i]];
    A(i, 0) = 1.0;
    A(i, 1) = e;
    if (quadratic) A(i, 2) = e * e;
    y[i] = values[order[i]];
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
  Extrapolation out;
  out.limit = c[0];
  out.slope = c[1];
  out.curvature = quadratic ? c[2] : 0.0;
  out.residual = std::sqrt((A * c - y).squaredNorm() / m);
  if (!std::isfinite(out.limit)) throw Error(ErrorKind::InsufficientRows, "degenerate extrapolation rows");
  return out;
}

std::optional<double> fit_order(const std::vector<double>& eps, const std::vector<double>& values, double limit,
                                int m) {
  std::vector<std::size_t> order(eps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return eps[a] < eps[b]; });
  const double floor = 1e-13 * std::max(1.0, std::abs(limit));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int k = 0;
  for (int i = 0; i < m && i < static_cast<int>(order.size()); ++i) {
    const double d = std::abs(values[order[i]] - limit);
    if (d <= floor) continue;
    const double x = std::log(eps[order[i]]), y = std::log(d);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++k;
  }
  if (k < 2) return std::nullopt;
  const double den = k * sxx - sx * sx;
  if (!(std::abs(den) > 0.0)) return std::nullopt;
  return (k * sxy - sx * sy) / den;
}

Field scan_plane_vector(const RaySpec& ray, const FoliationFrame& F, std::size_t row) {
  const auto hb = F.horizontal_basis();
  if (ray.plane == PlaneChoice::HorizontalFixed) {
    Vec v(2 * F.dim());
    v << ray.fixed_X, ray.fixed_X.conjugate();
    return F.pi_H(Field::constant(v, F.point()));
  }
  std::mt19937_64 rng(ray.seed + 0x9E3779B97F4A7C15ULL * (row + 1));
  std::normal_distribution<double> g;
  Field X = g(rng) * hb[0];
  for (std::size_t i = 1; i < hb.size(); ++i) X += g(rng) * hb[i];
  return X;
}

ScanReport scan(const KernelModel& model, const RaySpec& ray, const ScanOptions& opt) {
  ray.validate(model.dim());
  const std::size_t rows = ray.epsilons.size();
  ScanReport rep;
  rep.plane = ray.plane;
  rep.seed = ray.seed;
  rep.target = -4.0 / (model.dim() + 1.0);
  rep.rows.resize(rows);
  rep.column.resize(rows);
  parallel_for(rows, opt.jobs, [&](std::size_t i) {
    const Point z = locate_level(model, ray.anchor, ray.direction, ray.epsilons[i]);
    const CollarGeometry geo(model, z);
    rep.rows[i] = sample(geo, scan_plane_vector(ray, geo.frame(), i));
    rep.column[i] = ray.plane == PlaneChoice::Sigma0 ? rep.rows[i].k_g_sigma0 : rep.rows[i].k_g_H;
  });
  std::vector<double> L1, L2;
  for (const auto& r : rep.rows) {
    L1.push_back(r.L1);
    L2.push_back(r.L2);
  }
  const int m = std::min<int>(opt.fit_rows, static_cast<int>(rows));
  rep.fit = extrapolate(ray.epsilons, rep.column, m, opt.quadratic);
  rep.extrapolated_limit = rep.fit.limit;
  rep.fit_order = fit_order(ray.epsilons, rep.column, rep.fit.limit, m);
  rep.L1_limit = extrapolate(ray.epsilons, L1, m, opt.quadratic).limit;
  rep.L2_limit = extrapolate(ray.epsilons, L2, m, opt.quadratic).limit;
  rep.pass = std::abs(rep.extrapolated_limit - rep.target) < opt.tolerance;
  if (model.spec().kind == DomainKind::ReinhardtSeries && rows >= 3) {
    bool monotone = true;
    for (std::size_t i = rows - 2; i < rows; ++i) {
      monotone = monotone && std::abs(rep.column[i] - rep.fit.limit) <= std::abs(rep.column[i - 1] - rep.fit.limit);
    }
    if (!monotone) rep.warnings.push_back("deviation from the limit is not decreasing over the last three rows");
  }
  if (rep.fit.residual > 0.1 * opt.tolerance) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "fit residual %.3e is large for the %s model", rep.fit.residual,
                  opt.quadratic ? "quadratic" : "linear");
    rep.warnings.push_back(buf);
  }
  return rep;
}

}  // namespace bergman
