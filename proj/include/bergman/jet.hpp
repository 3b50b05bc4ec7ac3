#pragma once

// Truncated Taylor jets in the Wirtinger variables (z, z̄) of C^n.
//
// A Jet stores the Taylor coefficients of a function about a base point in
// the 2n independent variables (δz_1..δz_n, δz̄_1..δz̄_n), densely, for every
// bidegree (α, β) with |α| + |β| <= 4. Jets produced by differentiation carry
// a reduced valid order; coefficients above the valid order are kept at zero
// and never read.

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace bergman {

using cplx = std::complex<double>;
using Point = Eigen::VectorXcd;

inline constexpr int kMaxDim = 4;
inline constexpr int kJetOrder = 4;

/// Exponent vector for one group of variables (z or z̄); unused slots are 0.
using Exponents = std::array<int, kMaxDim>;

/// Unit exponent e_j.
Exponents unit(int j);
Exponents operator+(Exponents a, const Exponents& b);

inline constexpr double kDefaultDivisionFloor = 1e-300;

class Jet {
 public:
  Jet() = default;
  /// Zero jet of the given valid order at `base`.
  Jet(int dim, const Point& base, int order = kJetOrder);

  static Jet constant(int dim, const Point& base, cplx c, int order = kJetOrder);

  int dim() const { return dim_; }
  int order() const { return order_; }
  bool empty() const { return coeffs_.empty(); }
  std::size_t size() const { return coeffs_.size(); }
  Point base() const;

  cplx value() const { return coeffs_[0]; }

  /// Raw Taylor coefficient (coefficient of δz^α δz̄^β).
  cplx taylor(const Exponents& alpha, const Exponents& beta) const;
  void set_taylor(const Exponents& alpha, const Exponents& beta, cplx v);
  /// ∂^α ∂̄^β of the represented function at the base point.
  cplx derivative(const Exponents& alpha, const Exponents& beta) const;

  const std::vector<cplx>& coefficients() const { return coeffs_; }
  std::vector<cplx>& coefficients() { return coeffs_; }

  /// Derivative with respect to variable v in [0, 2n): v < n is ∂/∂z_v,
  /// v >= n is ∂/∂z̄_{v-n}. Valid order drops by one.
  Jet d(int var) const;
  Jet dz(int j) const { return d(j); }
  Jet dzbar(int j) const { return d(dim_ + j); }

  /// Jet of the complex conjugate function.
  Jet conj() const;
  Jet truncated(int order) const;

  /// Largest |coeff(α,β) - conj(coeff(β,α))|.
  double hermitian_defect() const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator+=(cplx c) { coeffs_[0] += c; return *this; }
  Jet& operator-=(cplx c) { coeffs_[0] -= c; return *this; }
  Jet& operator*=(cplx c);

  Jet operator-() const;

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator+(Jet a, cplx c) { return a += c; }
  friend Jet operator+(cplx c, Jet a) { return a += c; }
  friend Jet operator-(Jet a, cplx c) { return a -= c; }
  friend Jet operator-(cplx c, const Jet& a) { return (-a) += c; }
  friend Jet operator*(Jet a, cplx c) { return a *= c; }
  friend Jet operator*(cplx c, Jet a) { return a *= c; }
  friend Jet operator/(Jet a, cplx c) { return a *= (1.0 / c); }
  friend Jet operator/(cplx c, const Jet& a);

  /// Degree of a storage slot.
  int degree_of(std::size_t idx) const;
  /// Exponents (α, β) of a storage slot.
  void exponents_of(std::size_t idx, Exponents& alpha, Exponents& beta) const;
  /// Storage slot for (α, β).
  std::size_t index_of(const Exponents& alpha, const Exponents& beta) const;

 private:
  friend Jet compose(const Jet& a, const std::array<cplx, kJetOrder + 1>& taylor);
  void check_compatible(const Jet& o) const;

  int dim_ = 0;
  int order_ = 0;
  std::array<cplx, kMaxDim> base_{};
  std::vector<cplx> coeffs_;
};

/// a / b with an explicit floor on |b.value()|.
Jet divide(const Jet& a, const Jet& b, double floor = kDefaultDivisionFloor);
Jet reciprocal(const Jet& b, double floor = kDefaultDivisionFloor);

/// Composition with a univariate function given its Taylor coefficients
/// f(a0 + u) = Σ taylor[k] u^k.
Jet compose(const Jet& a, const std::array<cplx, kJetOrder + 1>& taylor);

/// Natural log and real powers; both require a positive real value.
Jet log(const Jet& a);
Jet pow(const Jet& a, double exponent);
Jet sqrt(const Jet& a);
Jet exp(const Jet& a);

/// Jets of z_1..z_n followed by z̄_1..z̄_n at z.
std::vector<Jet> seed_coordinates(const Point& z);

}  // namespace bergman
