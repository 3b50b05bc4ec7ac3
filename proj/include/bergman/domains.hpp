#pragma once

// Test domains with computable Bergman kernels: the unit ball, affine images
// of it, and complete Reinhardt domains given by a separable shadow
// Σ (a_j s_j + b_j s_j²) < 1 in s_j = |z_j|², whose kernel is the series
// Σ_m |z^m|² / c_m.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bergman/jet.hpp"

namespace bergman {

enum class DomainKind { UnitBall, AffineImage, ReinhardtSeries };

const char* to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& s);

struct Shadow {
  std::vector<double> linear;
  std::vector<double> quadratic;

  /// Σ a_j s_j + b_j s_j² at s.
  double value(const std::vector<double>& s) const;
  /// Largest s_j ≥ 0 with a_j s_j + b_j s_j² ≤ budget.
  double axis_extent(int j, double budget) const;
};

struct DomainSpec {
  DomainKind kind = DomainKind::UnitBall;
  int dim = 2;
  Eigen::MatrixXcd affine_matrix;
  Point affine_translation;
  Shadow shadow;
  int truncation_degree = 40;
  int quadrature_order = 64;
  double series_tol = 1e-9;

  static DomainSpec ball(int n);
  static DomainSpec affine(const Eigen::MatrixXcd& F, const Point& t);
  static DomainSpec reinhardt(const Shadow& shadow, int degree, int order);

  /// Throws ConfigError / QuadratureFailure on invalid data.
  void validate() const;
  /// 2-norm condition number of the affine matrix (1 for other kinds).
  double condition_number() const;
  /// Identifies the norm table: kind, dim, shadow, degree, quadrature order.
  std::uint64_t norm_hash() const;
};

/// Squared L² norms c_m of z^m, stored as ln c_m for |m| ≤ degree in graded
/// order.
class NormTable {
 public:
  NormTable() = default;
  NormTable(int dim, int degree);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  std::size_t size() const { return ln_norm_.size(); }
  const std::uint16_t* exponents(std::size_t i) const { return &exps_[i * dim_]; }
  int total_degree(std::size_t i) const;
  double ln_norm(std::size_t i) const { return ln_norm_[i]; }
  void set_ln_norm(std::size_t i, double v) { ln_norm_[i] = v; }
  /// c_m for an explicit multi-index.
  double norm(const std::vector<int>& m) const;
  std::size_t index(const std::vector<int>& m) const;

  bool operator==(const NormTable& o) const;

 private:
  int dim_ = 0;
  int degree_ = 0;
  std::vector<std::uint16_t> exps_;
  std::vector<double> ln_norm_;
};

/// Gauss–Legendre tensor quadrature over the mapped shadow; the innermost
/// axis is integrated exactly. Uses and fills the cache when cache_dir is
/// non-empty.
NormTable monomial_norms(const DomainSpec& spec, const std::string& cache_dir = "", int jobs = 1);

std::string norm_cache_path(const DomainSpec& spec, const std::string& cache_dir);
void write_norm_cache(const DomainSpec& spec, const NormTable& table, const std::string& path);
/// Returns false when the file does not exist; throws CacheCorrupt when it is
/// unreadable or does not match the domain.
bool read_norm_cache(const DomainSpec& spec, const std::string& path, NormTable& table);

struct KernelJet {
  Jet K;
  double tail_estimate = 0.0;
  /// Closed forms also carry log K and φ built without composing through K,
  /// which keeps their high-order coefficients accurate near the boundary.
  Jet log_K, phi;

  Jet log_kernel() const;
  Jet defining_function() const;
};

/// n! π^{-n} (1 - |z|²)^{-(n+1)}.
Jet kernel_ball(int n, const Point& z);
KernelJet ball_kernel_jet(int n, const Point& z);
/// K_{F(B)}(z) = K_B(F^{-1}(z - t)) |det F^{-1}|².
Jet affine_pushforward(const DomainSpec& spec, const Point& z);
KernelJet affine_kernel_jet(const DomainSpec& spec, const Point& z);
/// φ = -K^{-1/(n+1)}.
Jet defining_function(const Jet& K);

class KernelModel {
 public:
  explicit KernelModel(const DomainSpec& spec, const std::string& cache_dir = "", int jobs = 1);
  KernelModel(const DomainSpec& spec, std::shared_ptr<const NormTable> norms);

  const DomainSpec& spec() const { return spec_; }
  int dim() const { return spec_.dim; }
  const NormTable* norms() const { return norms_.get(); }

  bool inside(const Point& z) const;
  /// Jet of K(z, z) with the truncation tail estimate (0 for closed forms).
  KernelJet kernel(const Point& z) const;
  Jet log_kernel(const Point& z) const;
  Jet phi(const Point& z) const;
  /// K(z, z) without derivatives. With a tail pointer the truncation check is
  /// left to the caller; otherwise SeriesNotConverged is thrown.
  double kernel_value(const Point& z, double* tail = nullptr) const;
  double phi_value(const Point& z, double* tail = nullptr) const;
  /// Smallest t > 0 with anchor + t·dir on the boundary.
  double boundary_parameter(const Point& anchor, const Point& dir) const;

 private:
  KernelJet kernel_series(const Point& z) const;
  double series_value(const Point& z, double* tail) const;

  DomainSpec spec_;
  std::shared_ptr<const NormTable> norms_;
  Eigen::MatrixXcd finv_;
  double det_factor_ = 1.0;
};

}  // namespace bergman
