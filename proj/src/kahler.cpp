#include "bergman/kahler.hpp"

#include <algorithm>
#include <cmath>

#include "bergman/error.hpp"

namespace bergman {

cplx MetricPoint::hermitian(const Point& z, const Point& w) const { return z.transpose() * g * w.conjugate(); }

MetricPoint bergman_metric(const Jet& logK) {
  const int n = logK.dim();
  MetricPoint m;
  m.n = n;
  m.g.resize(n, n);
  m.dg.assign(n, Eigen::MatrixXcd(n, n));
  m.dgbar.assign(n, Eigen::MatrixXcd(n, n));
  m.ddg.assign(n, std::vector<Eigen::MatrixXcd>(n, Eigen::MatrixXcd(n, n)));
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      m.g(j, k) = logK.derivative(unit(j), unit(k));
      for (int r = 0; r < n; ++r) {
        m.dg[r](j, k) = logK.derivative(unit(j) + unit(r), unit(k));
        m.dgbar[r](j, k) = logK.derivative(unit(j), unit(k) + unit(r));
        for (int s = 0; s < n; ++s) m.ddg[r][s](j, k) = logK.derivative(unit(j) + unit(r), unit(k) + unit(s));
      }
    }
  }
  const Eigen::MatrixXcd herm = 0.5 * (m.g + m.g.adjoint());
  Eigen::LLT<Eigen::MatrixXcd> llt(herm);
  if (llt.info() != Eigen::Success || !m.g.allFinite()) {
    throw Error(ErrorKind::NotPositiveDefinite, "Bergman metric is not positive definite");
  }
  m.g_inv = llt.solve(Eigen::MatrixXcd::Identity(n, n));
  return m;
}

double CurvaturePoint::symmetry_defect() const {
  double worst = 0.0;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) {
          const cplx v = (*this)(j, k, r, s);
          worst = std::max(worst, std::abs(v - (*this)(r, k, j, s)));
          worst = std::max(worst, std::abs(v - (*this)(j, s, r, k)));
          worst = std::max(worst, std::abs(v - std::conj((*this)(k, j, s, r))));
        }
  return worst;
}

double CurvaturePoint::max_abs() const {
  double m = 0.0;
  for (const auto& v : R) m = std::max(m, std::abs(v));
  return m;
}

double max_difference(const CurvaturePoint& a, const CurvaturePoint& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.R.size(); ++i) m = std::max(m, std::abs(a.R[i] - b.R[i]));
  return m;
}

CurvaturePoint curvature_hessian(const MetricPoint& m) {
  const int n = m.n;
  CurvaturePoint c;
  c.n = n;
  c.source = CurvatureSource::HessianRoute;
  c.R.assign(static_cast<std::size_t>(n * n * n * n), 0.0);
  for (int r = 0; r < n; ++r) {
    for (int s = 0; s < n; ++s) {
      const Eigen::MatrixXcd block = 2.0 * (m.ddg[r][s] - m.dg[r] * m.g_inv * m.dgbar[s]);
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) c(j, k, r, s) = block(j, k);
    }
  }
  return c;
}

CurvaturePoint curvature_kobayashi(const Jet& K, const MetricPoint& m) {
  const int n = m.n;
  const cplx k0 = K.value();
  auto d = [&](std::initializer_list<int> hol, std::initializer_list<int> anti) {
    Exponents a{}, b{};
    for (int i : hol) a[i] += 1;
    for (int i : anti) b[i] += 1;
    return K.derivative(a, b);
  };
  CurvaturePoint c;
  c.n = n;
  c.source = CurvatureSource::KobayashiRoute;
  c.R.assign(static_cast<std::size_t>(n * n * n * n), 0.0);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) {
          cplx v = m.g(j, k) * m.g(r, s) + m.g(j, s) * m.g(r, k);
          v -= (k0 * d({j, r}, {k, s}) - d({j, r}, {}) * d({}, {k, s})) / (k0 * k0);
          cplx sum = 0.0;
          for (int l = 0; l < n; ++l) {
            const cplx A = k0 * d({j, r}, {l}) - d({j, r}, {}) * d({}, {l});
            for (int mm = 0; mm < n; ++mm) {
              const cplx B = k0 * d({mm}, {k, s}) - d({}, {k, s}) * d({mm}, {});
              sum += A * m.g_inv(l, mm) * B;
            }
          }
          v += sum / (k0 * k0 * k0 * k0);
          c(j, k, r, s) = -2.0 * v;
        }
  return c;
}

double hol_sectional(const MetricPoint& m, const CurvaturePoint& R, const Point& Z) {
  if (!(Z.norm() > 1e-150)) throw Error(ErrorKind::DegeneratePlane, "zero direction for holomorphic sectional curvature");
  const int n = m.n;
  cplx num = 0.0;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) num += R(j, k, r, s) * Z[j] * std::conj(Z[k]) * Z[r] * std::conj(Z[s]);
  const double h = m.hermitian(Z, Z).real();
  return -num.real() / (h * h);
}

MetricField::MetricField(const Jet& logK) : n_(logK.dim()) {
  G_.assign(n_, JetVector(n_));
  for (int j = 0; j < n_; ++j)
    for (int k = 0; k < n_; ++k) G_[j][k] = logK.dz(j).dzbar(k);
  Ginv_ = bergman::inverse(G_);
  // Γ^l_{jr} = Σ_k ∂_j g_{rk̄} g^{lk̄},  g^{lk̄} = (G^{-1})[k][l]
  gamma_.assign(static_cast<std::size_t>(n_ * n_ * n_), Jet());
  gamma_bar_.assign(gamma_.size(), Jet());
  for (int l = 0; l < n_; ++l)
    for (int j = 0; j < n_; ++j)
      for (int r = 0; r < n_; ++r) {
        Jet s = G_[r][0].dz(j) * Ginv_[0][l];
        for (int k = 1; k < n_; ++k) s += G_[r][k].dz(j) * Ginv_[k][l];
        gamma_bar_[(l * n_ + j) * n_ + r] = s.conj();
        gamma_[(l * n_ + j) * n_ + r] = std::move(s);
      }
}

Jet MetricField::inner(const Field& U, const Field& V) const {
  Jet out = Jet::constant(n_, U.base(), 0.0);
  for (int j = 0; j < n_; ++j)
    for (int k = 0; k < n_; ++k) out += G_[j][k] * (U.p[j] * V.q[k] + V.p[j] * U.q[k]);
  return 0.5 * out;
}

cplx MetricField::inner(const Vec& U, const Vec& V) const {
  cplx out = 0.0;
  for (int j = 0; j < n_; ++j)
    for (int k = 0; k < n_; ++k) out += G_[j][k].value() * (U[j] * V[n_ + k] + V[j] * U[n_ + k]);
  return 0.5 * out;
}

Field MetricField::covariant_derivative(const Field& X, const Field& Y) const {
  Field out;
  for (int l = 0; l < n_; ++l) {
    Jet p = apply(X, Y.p[l]);
    Jet q = apply(X, Y.q[l]);
    for (int j = 0; j < n_; ++j)
      for (int r = 0; r < n_; ++r) {
        p += gamma_[(l * n_ + j) * n_ + r] * X.p[j] * Y.p[r];
        q += gamma_bar_[(l * n_ + j) * n_ + r] * X.q[j] * Y.q[r];
      }
    out.p.push_back(std::move(p));
    out.q.push_back(std::move(q));
  }
  return out;
}

Field MetricField::curvature(const Field& X, const Field& Y, const Field& Z) const {
  return covariant_derivative(X, covariant_derivative(Y, Z)) - covariant_derivative(Y, covariant_derivative(X, Z)) -
         covariant_derivative(bracket(X, Y), Z);
}

double MetricField::sectional(const Field& X, const Field& Y) const {
  const Vec x = X.value(), y = Y.value();
  const Vec r = curvature(X, Y, Y).value();
  const double den = (inner(x, x) * inner(y, y) - inner(x, y) * inner(x, y)).real();
  if (!(std::abs(den) > 0.0)) throw Error(ErrorKind::DegeneratePlane, "degenerate 2-plane");
  return inner(r, x).real() / den;
}

}  // namespace bergman
