#include "bergman/fields.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bergman/error.hpp"

namespace bergman {

Field Field::zero(int dim, const Point& base, int order) {
  Field f;
  f.p.assign(dim, Jet(dim, base, order));
  f.q.assign(dim, Jet(dim, base, order));
  return f;
}

Field Field::real(const std::vector<Jet>& p) {
  Field f;
  f.p = p;
  f.q.reserve(p.size());
  for (const auto& c : p) f.q.push_back(c.conj());
  return f;
}

Field Field::constant(const Vec& value, const Point& base, int order) {
  const int n = static_cast<int>(base.size());
  if (value.size() != 2 * n) throw std::invalid_argument("field value has wrong size");
  Field f;
  for (int j = 0; j < n; ++j) {
    f.p.push_back(Jet::constant(n, base, value[j], order));
    f.q.push_back(Jet::constant(n, base, value[n + j], order));
  }
  return f;
}

int Field::order() const {
  int o = kJetOrder;
  for (const auto& c : p) o = std::min(o, c.order());
  for (const auto& c : q) o = std::min(o, c.order());
  return o;
}

Vec Field::value() const {
  const int n = dim();
  Vec v(2 * n);
  for (int j = 0; j < n; ++j) {
    v[j] = p[j].value();
    v[n + j] = q[j].value();
  }
  return v;
}

Field Field::conj() const {
  Field f;
  for (const auto& c : q) f.p.push_back(c.conj());
  for (const auto& c : p) f.q.push_back(c.conj());
  return f;
}

Field Field::J() const {
  Field f(*this);
  for (auto& c : f.p) c *= cplx(0, 1);
  for (auto& c : f.q) c *= cplx(0, -1);
  return f;
}

Field& Field::operator+=(const Field& o) {
  for (std::size_t j = 0; j < p.size(); ++j) {
    p[j] += o.p[j];
    q[j] += o.q[j];
  }
  return *this;
}

Field& Field::operator-=(const Field& o) {
  for (std::size_t j = 0; j < p.size(); ++j) {
    p[j] -= o.p[j];
    q[j] -= o.q[j];
  }
  return *this;
}

Field& Field::operator*=(cplx c) {
  for (auto& x : p) x *= c;
  for (auto& x : q) x *= c;
  return *this;
}

Field& Field::operator*=(const Jet& f) {
  for (auto& x : p) x = x * f;
  for (auto& x : q) x = x * f;
  return *this;
}

Field Field::operator-() const {
  Field f(*this);
  f *= cplx(-1.0);
  return f;
}

Jet apply(const Field& X, const Jet& f) {
  const int n = X.dim();
  Jet out = X.p[0] * f.dz(0);
  for (int j = 0; j < n; ++j) {
    if (j > 0) out += X.p[j] * f.dz(j);
    out += X.q[j] * f.dzbar(j);
  }
  return out;
}

Field bracket(const Field& X, const Field& Y) {
  Field out;
  const int n = X.dim();
  for (int j = 0; j < n; ++j) {
    out.p.push_back(apply(X, Y.p[j]) - apply(Y, X.p[j]));
    out.q.push_back(apply(X, Y.q[j]) - apply(Y, X.q[j]));
  }
  return out;
}

double max_abs(const Vec& v) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v[i]));
  return m;
}

JetVector solve(JetMatrix A, JetVector b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(A[r][c].value()) > std::abs(A[piv][c].value())) piv = r;
    }
    if (std::abs(A[piv][c].value()) == 0.0) throw Error(ErrorKind::SingularHessian, "singular jet matrix");
    std::swap(A[piv], A[c]);
    std::swap(b[piv], b[c]);
    const Jet inv = reciprocal(A[c][c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const Jet m = A[r][c] * inv;
      for (std::size_t k = c; k < n; ++k) A[r][k] -= m * A[c][k];
      b[r] -= m * b[c];
    }
  }
  JetVector x(n);
  for (std::size_t i = n; i-- > 0;) {
    Jet s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= A[i][k] * x[k];
    x[i] = s / A[i][i];
  }
  return x;
}

JetMatrix inverse(const JetMatrix& A) {
  const std::size_t n = A.size();
  const Point base = A[0][0].base();
  const int dim = A[0][0].dim();
  JetMatrix inv(n, JetVector(n));
  for (std::size_t c = 0; c < n; ++c) {
    JetVector e(n, Jet(dim, base));
    e[c] = Jet::constant(dim, base, 1.0);
    JetVector col = solve(A, e);
    for (std::size_t r = 0; r < n; ++r) inv[r][c] = col[r];
  }
  return inv;
}

Eigen::MatrixXcd values(const JetMatrix& A) {
  const Eigen::Index n = static_cast<Eigen::Index>(A.size());
  Eigen::MatrixXcd m(n, static_cast<Eigen::Index>(A[0].size()));
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = A[r][c].value();
  return m;
}

}  // namespace bergman
