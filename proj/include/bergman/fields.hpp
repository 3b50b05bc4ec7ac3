#pragma once

// Complexified tangent vector fields with jet coefficients.
//
// A field V = Σ p_j ∂/∂z_j + q_j ∂/∂z̄_j is stored as the two coefficient
// lists (p, q). Real fields have q = conj(p); the complex structure acts by
// J(p, q) = (i p, -i q). Pointwise values are flattened as [p; q] in C^{2n}.

#include <vector>

#include <Eigen/Dense>

#include "bergman/jet.hpp"

namespace bergman {

using Vec = Eigen::VectorXcd;

struct Field {
  std::vector<Jet> p;
  std::vector<Jet> q;

  static Field zero(int dim, const Point& base, int order = kJetOrder);
  /// Real field with (1,0) part p.
  static Field real(const std::vector<Jet>& p);
  /// Constant field with the given pointwise value [p; q].
  static Field constant(const Vec& value, const Point& base, int order = kJetOrder);

  int dim() const { return static_cast<int>(p.size()); }
  int order() const;
  Point base() const { return p.front().base(); }
  Vec value() const;

  Field conj() const;
  Field J() const;

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(cplx c);
  Field& operator*=(const Jet& f);
  Field operator-() const;

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(Field a, cplx c) { return a *= c; }
  friend Field operator*(cplx c, Field a) { return a *= c; }
  friend Field operator*(Field a, const Jet& f) { return a *= f; }
  friend Field operator*(const Jet& f, Field a) { return a *= f; }
};

/// Directional derivative X(f).
Jet apply(const Field& X, const Jet& f);
/// Lie bracket [X, Y].
Field bracket(const Field& X, const Field& Y);

/// Largest component modulus of a pointwise vector.
double max_abs(const Vec& v);

using JetVector = std::vector<Jet>;
using JetMatrix = std::vector<std::vector<Jet>>;

/// Solve A x = b by Gaussian elimination with partial pivoting on values.
JetVector solve(JetMatrix A, JetVector b);
JetMatrix inverse(const JetMatrix& A);
Eigen::MatrixXcd values(const JetMatrix& A);

}  // namespace bergman
