#pragma once

// Residual checks tying the Bergman metric to the CR foliation of its level
// sets, and the curvature samples used by the boundary scans.

#include <optional>
#include <string>
#include <vector>

#include "bergman/crfoliation.hpp"
#include "bergman/domains.hpp"
#include "bergman/kahler.hpp"

namespace bergman {

enum class IdentityId {
  b4, b5, b6, b7, b13, b17, b21, b25, b29, b30, b31, b32, b33,
  A2, A4, A5, A6, A7, A8, A9, A10,
  e425, e426, e433, e434, sigma0_ratio,
  Omega, Xf, Nf,
};

std::string to_string(IdentityId id);
/// Throws ConfigError for unknown names.
IdentityId identity_from_string(const std::string& s);
const std::vector<IdentityId>& all_identities();
/// Ids that involve the Bergman metric and need φ = -K^{-1/(n+1)}.
bool requires_bergman(IdentityId id);

struct IdentityResidual {
  IdentityId id = IdentityId::b4;
  Point point;
  double residual = 0.0;
  double scale = 0.0;
  double relative() const { return residual / std::max(1.0, scale); }
};

/// Pointwise data at a collar point: the foliation of φ and, when φ comes
/// from a Bergman kernel, the Kähler side as well.
class CollarGeometry {
 public:
  CollarGeometry(const KernelModel& model, const Point& z, const FrameOptions& opt = {});
  explicit CollarGeometry(const Jet& phi, const FrameOptions& opt = {});

  bool is_bergman() const { return metric_.has_value(); }
  const FoliationFrame& frame() const { return frame_; }
  /// Throws NotBergmanPhi.
  const MetricField& metric() const;
  const Jet& kernel() const;
  const Jet& log_kernel() const;
  Point point() const { return frame_.point(); }
  double epsilon() const { return -frame_.phi().value().real(); }
  double tail_estimate() const { return tail_; }

  /// Basis {Re W_α, Im W_α, T, N} of the real tangent space.
  std::vector<Field> real_basis() const;

 private:
  CollarGeometry(const KernelJet& kj, const FrameOptions& opt);

  std::optional<Jet> K_, logK_;
  FoliationFrame frame_;
  std::optional<MetricField> metric_;
  double tail_ = 0.0;
};

IdentityResidual residual(const CollarGeometry& geo, IdentityId id);

/// A(X,Y) = g_θ(τX, Y) and Ω(X,Y) = g_θ(X, ΦY).
Jet torsion_form(const FoliationFrame& F, const Field& X, const Field& Y);
Jet omega_form(const FoliationFrame& F, const Field& X, const Field& Y);

struct Sigma0 {
  double k = 0.0;      // g(R(N,T)T, N) / (g(N,N) g(T,T) - g(N,T)²)
  double ratio = 0.0;  // 2k, the quotient as displayed
  double L1 = 0.0;
  double L2 = 0.0;
};

Sigma0 k_g_sigma0(const CollarGeometry& geo);
/// Sectional curvature of span{X, ΦX} through the foliation formula.
double k_g_horizontal(const CollarGeometry& geo, const Field& X);
/// Same plane through the Kähler curvature tensor.
double k_g_horizontal_kahler(const CollarGeometry& geo, const Field& X);

struct CurvatureSample {
  Point point;
  double epsilon = 0.0;
  double k_g_H = 0.0;
  double k_g_H_kahler = 0.0;
  double k_g_sigma0 = 0.0;
  double k_theta = 0.0;
  double r = 0.0;
  double f = 0.0;
  double phi_over_f = 0.0;
  double f2_phi_h = 0.0;
  double L1 = 0.0;
  double L2 = 0.0;
  double one_minus_r_phi = 0.0;
  double tail_estimate = 0.0;
};

CurvatureSample sample(const CollarGeometry& geo, const Field& X);

}  // namespace bergman
