#pragma once

// Bergman metric g_{jk̄} = ∂_j∂̄_k log K, its curvature by two independent
// routes, and Levi-Civita covariant differentiation of jet fields.
//
// Curvature convention: R_{jk̄rs̄} = 2[∂_r∂̄_s g - (∂_r g) g^{-1} (∂̄_s g)]_{jk},
// i.e. the tensor whose Kobayashi expression is -½R = g g + g g - ... . With
// it the holomorphic sectional curvature is -R(Z,Z̄,Z,Z̄)/g(Z,Z̄)², which is
// -4/(n+1) on the unit ball.

#include <vector>

#include <Eigen/Dense>

#include "bergman/fields.hpp"
#include "bergman/jet.hpp"

namespace bergman {

struct MetricPoint {
  int n = 0;
  Eigen::MatrixXcd g;      // g(j,k) = g_{jk̄}
  Eigen::MatrixXcd g_inv;  // inverse matrix
  std::vector<Eigen::MatrixXcd> dg;                  // dg[r](j,k) = ∂_r g_{jk̄}
  std::vector<Eigen::MatrixXcd> dgbar;               // dgbar[s](j,k) = ∂̄_s g_{jk̄}
  std::vector<std::vector<Eigen::MatrixXcd>> ddg;    // ddg[r][s](j,k) = ∂_r∂̄_s g_{jk̄}

  /// Hermitian form Σ g_{jk̄} z_j conj(w_k).
  cplx hermitian(const Point& z, const Point& w) const;
};

/// Throws NotPositiveDefinite.
MetricPoint bergman_metric(const Jet& logK);

enum class CurvatureSource { HessianRoute, KobayashiRoute };

struct CurvaturePoint {
  int n = 0;
  CurvatureSource source = CurvatureSource::HessianRoute;
  std::vector<cplx> R;

  cplx& operator()(int j, int k, int r, int s) { return R[((j * n + k) * n + r) * n + s]; }
  cplx operator()(int j, int k, int r, int s) const { return R[((j * n + k) * n + r) * n + s]; }
  /// Largest violation of the pair and conjugation symmetries.
  double symmetry_defect() const;
  double max_abs() const;
};

CurvaturePoint curvature_hessian(const MetricPoint& m);
/// Kobayashi's expression in derivatives of K itself.
CurvaturePoint curvature_kobayashi(const Jet& K, const MetricPoint& m);
double max_difference(const CurvaturePoint& a, const CurvaturePoint& b);

/// Holomorphic sectional curvature of the J-invariant plane through Z + Z̄.
double hol_sectional(const MetricPoint& m, const CurvaturePoint& R, const Point& Z);

/// Levi-Civita connection of the Bergman metric on jet fields.
class MetricField {
 public:
  explicit MetricField(const Jet& logK);

  int dim() const { return n_; }
  const JetMatrix& metric() const { return G_; }
  const JetMatrix& inverse() const { return Ginv_; }
  /// Γ^l_{jr} as a jet, holomorphic indices.
  const Jet& christoffel(int l, int j, int r) const { return gamma_[(l * n_ + j) * n_ + r]; }

  /// g(U, V), C-bilinear extension of the Riemannian metric.
  Jet inner(const Field& U, const Field& V) const;
  cplx inner(const Vec& U, const Vec& V) const;
  Field covariant_derivative(const Field& X, const Field& Y) const;
  /// R(X,Y)Z = ∇_X∇_Y Z - ∇_Y∇_X Z - ∇_[X,Y] Z.
  Field curvature(const Field& X, const Field& Y, const Field& Z) const;
  /// g(R(X,Y)Y, X) / (g(X,X) g(Y,Y) - g(X,Y)²) for real fields.
  double sectional(const Field& X, const Field& Y) const;

 private:
  int n_;
  JetMatrix G_, Ginv_;
  std::vector<Jet> gamma_, gamma_bar_;
};

}  // namespace bergman
