#pragma once

// Pointwise CR-foliation data for the level sets of a defining function φ:
// contact form θ = (i/2)(∂̄ - ∂)φ, Lee–Melrose field ξ, transverse curvature
// r, Levi frame, tangential metric g_θ, the morphism Φ (J on H, 0 on T),
// pseudohermitian torsion τ and the Graham–Lee connection.
//
// Pairing convention: a (1,1)-form evaluates as
//   (α ∧ β)(U, V) = c (α(U) β(V) - α(V) β(U)),   c = kPairing = 1/2,
// so ∂∂̄φ(U, V) = c Σ φ_{jk̄} (U^j V^k̄ - V^j U^k̄) and r = 2∂∂̄φ(ξ, ξ̄) = Σ φ_{jk̄} ξ_j conj(ξ_k).

#include <array>
#include <vector>

#include "bergman/fields.hpp"
#include "bergman/jet.hpp"

namespace bergman {

inline constexpr double kPairing = 0.5;

struct FrameOptions {
  double pairing = kPairing;
  /// Minimum |∂φ| for the collar predicate.
  double gradient_floor = 1e-12;
};

/// ξ = λ (H^T)^{-1} ∂̄φ with λ fixed by ∂φ(ξ) = 1. Throws OutsideCollar or
/// SingularHessian.
JetVector lee_melrose_xi(const Jet& phi, const FrameOptions& opt = {});

struct LeviFrame {
  std::vector<Field> W;    // (1,0) fields spanning ker ∂φ
  Eigen::MatrixXcd gram;   // L_θ(W_α, W̄_β)
};

/// Basis of ker ∂φ; Gram–Schmidt in L_θ when orthonormalize is set.
/// Pivot p = argmax |∂_p φ|; candidates e_k - (φ_k/φ_p) e_p are taken in
/// descending |∂_k φ|, ties by index. Throws DegenerateLeviForm.
LeviFrame levi_frame(const Jet& phi, bool orthonormalize = true, const FrameOptions& opt = {});

class FoliationFrame {
 public:
  explicit FoliationFrame(const Jet& phi, const FrameOptions& opt = {});

  int dim() const { return n_; }
  int rank() const { return n_ - 1; }
  Point point() const { return phi_.base(); }
  double pairing() const { return c_; }

  const Jet& phi() const { return phi_; }
  const JetMatrix& hessian() const { return H_; }
  const JetVector& xi() const { return xi_; }
  const Field& N() const { return N_; }
  const Field& T() const { return T_; }
  const Jet& r() const { return r_; }
  const std::vector<Field>& W() const { return W_; }
  const std::vector<Field>& Wbar() const { return Wbar_; }
  const Eigen::MatrixXcd& levi_gram() const { return gram_; }
  /// Frame E = {W_1..W_m, W̄_1..W̄_m, T, N}.
  const std::vector<Field>& frame() const { return E_; }
  int index_T() const { return 2 * rank(); }
  int index_N() const { return 2 * rank() + 1; }

  const Jet& f() const { return f_; }
  const Jet& g() const { return g_; }
  const Jet& h() const { return h_; }
  const Field& Xr() const { return Xr_; }

  // One-forms
  Jet theta(const Field& V) const;
  Jet dphi(const Field& V) const;
  Jet del_phi(const Field& V) const;
  Jet delbar_phi(const Field& V) const;
  /// θ^α(V) and θ^ᾱ(V).
  Jet coframe(int alpha, const Field& V) const;
  Jet coframe_bar(int alpha, const Field& V) const;

  // Two-forms and metrics
  Jet ddbar_phi(const Field& U, const Field& V) const;
  Jet dtheta(const Field& U, const Field& V) const;
  Jet wedge(const Jet& aU, const Jet& bV, const Jet& aV, const Jet& bU) const;
  /// L_θ(U, V̄) for (1,0) U and (0,1) V̄.
  Jet levi(const Field& U, const Field& Vbar) const;
  Jet g_theta(const Field& U, const Field& V) const;

  Field pi_H(const Field& V) const;
  Field Phi(const Field& V) const;

  /// Coefficients of V in the frame E.
  std::vector<Jet> decompose(const Field& V) const;
  Field combine(const std::vector<Jet>& coeffs) const;

  /// τ(V) = T_∇(T, V).
  Field tau(const Field& V) const;
  const std::vector<Field>& tau_W() const { return tauW_; }
  /// A_α^β̄ with τ(W_α) = Σ A_α^β̄ W̄_β.
  Eigen::MatrixXcd torsion_matrix() const;

  /// Graham–Lee ∇_X Y.
  Field nabla(const Field& X, const Field& Y) const;
  /// ∇_{E_a} E_b.
  const Field& connection(int a, int b) const { return conn_[a * E_.size() + b]; }
  Field torsion_tensor(const Field& X, const Field& Y) const;
  /// R(X,Y)Z = ∇_X∇_Y Z - ∇_Y∇_X Z - ∇_[X,Y] Z.
  Field curvature(const Field& X, const Field& Y, const Field& Z) const;

  /// Pseudohermitian sectional curvature of span{U, V} ⊂ H:
  /// ¼ g_θ(R(U,V)V, U) / (g_θ(U,U) g_θ(V,V) - g_θ(U,V)²).
  double k_theta(const Field& U, const Field& V) const;
  double k_theta(const Field& X) const { return k_theta(X, Phi(X)); }

  /// Real horizontal frame fields W_α + W̄_α, i(W_α - W̄_α).
  std::vector<Field> horizontal_basis() const;

 private:
  void build_connection();

  int n_;
  double c_;
  Jet phi_;
  JetMatrix H_;
  JetVector dphi_, dphibar_;
  JetVector xi_;
  Field N_, T_;
  Jet r_;
  std::vector<Field> W_, Wbar_, E_;
  Eigen::MatrixXcd gram_;
  Jet f_, g_, h_;
  Field Xr_;
  std::vector<Field> tauW_, tauWbar_;
  Field tauN_;
  std::vector<Field> conn_;
};

struct StructureReport {
  double A2 = 0, A4 = 0, A5 = 0;
  double A2_scale = 0, A4_scale = 0, A5_scale = 0;
};

/// Residuals of dθ = 2i g_{αβ̄} θ^α∧θ^β̄ + r dφ∧θ, i_T dθ = -(r/2) dφ,
/// i_N dθ = rθ and [T,N] = i W^α(r) W_α - i W^ᾱ(r) W_ᾱ + 2rT on the frame.
StructureReport structure_identities(const FoliationFrame& F);

}  // namespace bergman
