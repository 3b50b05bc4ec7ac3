#include "bergman/crfoliation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bergman/error.hpp"

namespace bergman {
namespace {

constexpr cplx I(0.0, 1.0);

JetMatrix complex_hessian(const Jet& phi) {
  const int n = phi.dim();
  JetMatrix H(n, JetVector(n));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) H[j][k] = phi.dz(j).dzbar(k);
  return H;
}

void check_collar(const JetMatrix& H, const JetVector& dphi, const FrameOptions& opt) {
  const Eigen::MatrixXcd h = values(H);
  const Eigen::MatrixXcd herm = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
  const auto& ev = es.eigenvalues();
  if (!(ev.minCoeff() > 0.0)) throw Error(ErrorKind::OutsideCollar, "complex Hessian of phi is not positive definite");
  if (ev.minCoeff() < 1e-13 * ev.maxCoeff()) throw Error(ErrorKind::SingularHessian, "complex Hessian of phi is singular");
  double g = 0.0;
  for (const auto& d : dphi) g += std::norm(d.value());
  if (!(std::sqrt(g) > opt.gradient_floor)) throw Error(ErrorKind::OutsideCollar, "gradient of phi vanishes");
}

// c Σ H_jk u_j v_k for the (1,0) coefficients u of U and (0,1) coefficients v of V.
Jet pair_form(const JetMatrix& H, double c, const std::vector<Jet>& u, const std::vector<Jet>& v) {
  const int n = static_cast<int>(H.size());
  Jet s = H[0][0] * u[0] * v[0];
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      if (j + k > 0) s += H[j][k] * u[j] * v[k];
  return c * s;
}

std::vector<Jet> conj_all(const std::vector<Jet>& v) {
  std::vector<Jet> out;
  for (const auto& x : v) out.push_back(x.conj());
  return out;
}

Field holomorphic_field(const std::vector<Jet>& p) {
  Field f;
  f.p = p;
  for (const auto& x : p) f.q.push_back(Jet(x.dim(), x.base(), x.order()));
  return f;
}

}  // namespace

JetVector lee_melrose_xi(const Jet& phi, const FrameOptions& opt) {
  const int n = phi.dim();
  const JetMatrix H = complex_hessian(phi);
  JetVector dphi, dphibar;
  for (int j = 0; j < n; ++j) {
    dphi.push_back(phi.dz(j));
    dphibar.push_back(phi.dzbar(j));
  }
  check_collar(H, dphi, opt);
  JetMatrix HT(n, JetVector(n));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) HT[j][k] = H[k][j];
  JetVector y = solve(HT, dphibar);
  Jet s = dphi[0] * y[0];
  for (int j = 1; j < n; ++j) s += dphi[j] * y[j];
  const Jet lambda = reciprocal(s);
  for (auto& v : y) v = v * lambda;
  return y;
}

LeviFrame levi_frame(const Jet& phi, bool orthonormalize, const FrameOptions& opt) {
  const int n = phi.dim();
  const JetMatrix H = complex_hessian(phi);
  JetVector dphi;
  for (int j = 0; j < n; ++j) dphi.push_back(phi.dz(j));
  check_collar(H, dphi, opt);
  const Point z = phi.base();
  const int order = std::min(H[0][0].order(), dphi[0].order());

  int pivot = 0;
  for (int j = 1; j < n; ++j)
    if (std::abs(dphi[j].value()) > std::abs(dphi[pivot].value())) pivot = j;
  std::vector<int> cand;
  for (int k = 0; k < n; ++k)
    if (k != pivot) cand.push_back(k);
  std::stable_sort(cand.begin(), cand.end(),
                   [&](int a, int b) { return std::abs(dphi[a].value()) > std::abs(dphi[b].value()); });

  LeviFrame out;
  const Jet inv_pivot = reciprocal(dphi[pivot]);
  for (int k : cand) {
    std::vector<Jet> v(n, Jet(n, z, order));
    v[k] = Jet::constant(n, z, 1.0, order);
    v[pivot] = -(dphi[k] * inv_pivot);
    if (orthonormalize) {
      for (const Field& w : out.W) {
        const Jet proj = pair_form(H, opt.pairing, v, conj_all(w.p));
        for (int j = 0; j < n; ++j) v[j] -= proj * w.p[j];
      }
      const Jet norm2 = pair_form(H, opt.pairing, v, conj_all(v));
      if (!(norm2.value().real() > 1e-14)) throw Error(ErrorKind::DegenerateLeviForm, "Levi form degenerates");
      const Jet scale = pow(norm2, -0.5);
      for (auto& x : v) x = x * scale;
    }
    out.W.push_back(holomorphic_field(v));
  }
  const int m = n - 1;
  out.gram.resize(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) out.gram(a, b) = pair_form(H, opt.pairing, out.W[a].p, conj_all(out.W[b].p)).value();
  if (!orthonormalize && m > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (out.gram + out.gram.adjoint()));
    if (!(es.eigenvalues().minCoeff() > 0.0)) throw Error(ErrorKind::DegenerateLeviForm, "Levi form is not positive");
  }
  return out;
}

FoliationFrame::FoliationFrame(const Jet& phi, const FrameOptions& opt)
    : n_(phi.dim()), c_(opt.pairing), phi_(phi) {
  H_ = complex_hessian(phi);
  for (int j = 0; j < n_; ++j) {
    dphi_.push_back(phi.dz(j));
    dphibar_.push_back(phi.dzbar(j));
  }
  xi_ = lee_melrose_xi(phi, opt);
  N_.p = xi_;
  N_.q = conj_all(xi_);
  T_ = N_.J();
  // r = 2 ∂∂̄φ(ξ, ξ̄)
  r_ = 2.0 * pair_form(H_, c_, xi_, conj_all(xi_));

  LeviFrame lf = levi_frame(phi, true, opt);
  W_ = lf.W;
  gram_ = lf.gram;
  for (const auto& w : W_) Wbar_.push_back(w.conj());
  E_ = W_;
  E_.insert(E_.end(), Wbar_.begin(), Wbar_.end());
  E_.push_back(T_);
  E_.push_back(N_);

  if (phi.value() != 0.0) {
    const Jet Nr = apply(N_, r_);
    const Jet inv_phi = reciprocal(phi_);
    f_ = phi_ / (1.0 - phi_ * r_);
    g_ = Nr + 4.0 * inv_phi * inv_phi - 2.0 * r_ * inv_phi;
    h_ = Nr + 4.0 * inv_phi * inv_phi - 6.0 * r_ * inv_phi + 4.0 * r_ * r_;
  }

  Xr_ = Field::zero(n_, point(), 1);
  for (int a = 0; a < rank(); ++a) Xr_ += apply(Wbar_[a], r_) * W_[a] + apply(W_[a], r_) * Wbar_[a];

  for (int a = 0; a < rank(); ++a) {
    for (int conjugate = 0; conjugate < 2; ++conjugate) {
      const Field& w = conjugate ? Wbar_[a] : W_[a];
      // τ(X) = -½ Φ((L_T Φ) X),  (L_T Φ) X = [T, ΦX] - Φ[T, X]
      const Field lie = bracket(T_, Phi(w)) - Phi(bracket(T_, w));
      (conjugate ? tauWbar_ : tauW_).push_back(-0.5 * Phi(lie));
    }
  }
  tauN_ = -bracket(T_, N_);
  build_connection();
}

Jet FoliationFrame::del_phi(const Field& V) const {
  Jet s = dphi_[0] * V.p[0];
  for (int j = 1; j < n_; ++j) s += dphi_[j] * V.p[j];
  return s;
}

Jet FoliationFrame::delbar_phi(const Field& V) const {
  Jet s = dphibar_[0] * V.q[0];
  for (int j = 1; j < n_; ++j) s += dphibar_[j] * V.q[j];
  return s;
}

Jet FoliationFrame::theta(const Field& V) const { return (0.5 * I) * (delbar_phi(V) - del_phi(V)); }

Jet FoliationFrame::dphi(const Field& V) const { return del_phi(V) + delbar_phi(V); }

Jet FoliationFrame::ddbar_phi(const Field& U, const Field& V) const {
  return pair_form(H_, c_, U.p, V.q) - pair_form(H_, c_, V.p, U.q);
}

Jet FoliationFrame::dtheta(const Field& U, const Field& V) const { return I * ddbar_phi(U, V); }

Jet FoliationFrame::wedge(const Jet& aU, const Jet& bV, const Jet& aV, const Jet& bU) const {
  return c_ * (aU * bV - aV * bU);
}

Jet FoliationFrame::levi(const Field& U, const Field& Vbar) const { return pair_form(H_, c_, U.p, Vbar.q); }

Field FoliationFrame::pi_H(const Field& V) const { return V - theta(V) * T_ - (0.5 * dphi(V)) * N_; }

Field FoliationFrame::Phi(const Field& V) const { return pi_H(V).J(); }

Jet FoliationFrame::g_theta(const Field& U, const Field& V) const {
  const Field u = pi_H(U), v = pi_H(V);
  return pair_form(H_, c_, u.p, v.q) + pair_form(H_, c_, v.p, u.q) + theta(U) * theta(V);
}

Jet FoliationFrame::coframe(int alpha, const Field& V) const { return pair_form(H_, c_, pi_H(V).p, Wbar_[alpha].q); }

Jet FoliationFrame::coframe_bar(int alpha, const Field& V) const {
  return pair_form(H_, c_, W_[alpha].p, pi_H(V).q);
}

std::vector<Jet> FoliationFrame::decompose(const Field& V) const {
  const Field h = pi_H(V);
  std::vector<Jet> out;
  for (int a = 0; a < rank(); ++a) out.push_back(pair_form(H_, c_, h.p, Wbar_[a].q));
  for (int a = 0; a < rank(); ++a) out.push_back(pair_form(H_, c_, W_[a].p, h.q));
  out.push_back(theta(V));
  out.push_back(0.5 * dphi(V));
  return out;
}

Field FoliationFrame::combine(const std::vector<Jet>& coeffs) const {
  Field out = coeffs[0] * E_[0];
  for (std::size_t b = 1; b < E_.size(); ++b) out += coeffs[b] * E_[b];
  return out;
}

Field FoliationFrame::tau(const Field& V) const {
  const std::vector<Jet> d = decompose(V);
  Field out = d[index_N()] * tauN_;
  for (int a = 0; a < rank(); ++a) out += d[a] * tauW_[a] + d[rank() + a] * tauWbar_[a];
  return out;
}

Eigen::MatrixXcd FoliationFrame::torsion_matrix() const {
  Eigen::MatrixXcd A(rank(), rank());
  for (int a = 0; a < rank(); ++a)
    for (int b = 0; b < rank(); ++b) A(a, b) = coframe_bar(b, tauW_[a]).value();
  return A;
}

void FoliationFrame::build_connection() {
  const int m = rank();
  const int E = static_cast<int>(E_.size());
  const Field zero = Field::zero(n_, point(), 1);
  conn_.assign(static_cast<std::size_t>(E * E), zero);

  // H × H: metric connection with H-torsion free on H, frame products constant.
  std::vector<Field> br(static_cast<std::size_t>(4 * m * m));
  for (int a = 0; a < 2 * m; ++a)
    for (int b = 0; b < 2 * m; ++b) br[a * 2 * m + b] = bracket(E_[a], E_[b]);
  for (int a = 0; a < 2 * m; ++a) {
    for (int b = 0; b < 2 * m; ++b) {
      auto koszul = [&](int c) {
        return 0.5 * (g_theta(br[a * 2 * m + b], E_[c]) - g_theta(br[a * 2 * m + c], E_[b]) -
                      g_theta(br[b * 2 * m + c], E_[a]));
      };
      Field out = zero;
      for (int gmm = 0; gmm < m; ++gmm) out += koszul(m + gmm) * W_[gmm] + koszul(gmm) * Wbar_[gmm];
      conn_[a * E + b] = out;
    }
  }
  for (int b = 0; b < m; ++b) {
    conn_[index_T() * E + b] = bracket(T_, W_[b]) + tauW_[b];
    conn_[index_T() * E + m + b] = bracket(T_, Wbar_[b]) + tauWbar_[b];
    conn_[index_N() * E + b] = bracket(N_, W_[b]) + r_ * W_[b] + I * tauW_[b];
    conn_[index_N() * E + m + b] = bracket(N_, Wbar_[b]) + r_ * Wbar_[b] - I * tauWbar_[b];
  }
}

Field FoliationFrame::nabla(const Field& X, const Field& Y) const {
  const std::vector<Jet> x = decompose(X), y = decompose(Y);
  const int E = static_cast<int>(E_.size());
  const int m = rank();
  Field out = apply(X, y[0]) * E_[0];
  for (int b = 1; b < E; ++b) out += apply(X, y[b]) * E_[b];
  for (int a = 0; a < E; ++a)
    for (int b = 0; b < 2 * m; ++b) out += (x[a] * y[b]) * conn_[a * E + b];
  return out;
}

Field FoliationFrame::torsion_tensor(const Field& X, const Field& Y) const {
  return nabla(X, Y) - nabla(Y, X) - bracket(X, Y);
}

Field FoliationFrame::curvature(const Field& X, const Field& Y, const Field& Z) const {
  return nabla(X, nabla(Y, Z)) - nabla(Y, nabla(X, Z)) - nabla(bracket(X, Y), Z);
}

double FoliationFrame::k_theta(const Field& U, const Field& V) const {
  const cplx uu = g_theta(U, U).value(), vv = g_theta(V, V).value(), uv = g_theta(U, V).value();
  const double den = (uu * vv - uv * uv).real();
  if (!(den > 1e-300)) throw Error(ErrorKind::DegeneratePlane, "degenerate horizontal plane");
  return 0.25 * g_theta(curvature(U, V, V), U).value().real() / den;
}

std::vector<Field> FoliationFrame::horizontal_basis() const {
  std::vector<Field> out;
  for (int a = 0; a < rank(); ++a) {
    out.push_back(W_[a] + Wbar_[a]);
    out.push_back(I * (W_[a] - Wbar_[a]));
  }
  return out;
}

StructureReport structure_identities(const FoliationFrame& F) {
  StructureReport rep;
  const auto& E = F.frame();
  const int m = F.rank();
  const cplx r = F.r().value();
  auto note = [](double& res, double& scale, cplx l, cplx rr) {
    res = std::max(res, std::abs(l - rr));
    scale = std::max({scale, std::abs(l), std::abs(rr)});
  };
  std::vector<std::vector<cplx>> th(m), thb(m);
  std::vector<cplx> tht, dph;
  for (const auto& e : E) {
    for (int a = 0; a < m; ++a) {
      th[a].push_back(F.coframe(a, e).value());
      thb[a].push_back(F.coframe_bar(a, e).value());
    }
    tht.push_back(F.theta(e).value());
    dph.push_back(F.dphi(e).value());
  }
  const double c = F.pairing();
  const Eigen::MatrixXcd& gram = F.levi_gram();
  for (std::size_t u = 0; u < E.size(); ++u) {
    for (std::size_t v = 0; v < E.size(); ++v) {
      const cplx lhs = F.dtheta(E[u], E[v]).value();
      cplx rhs = r * c * (dph[u] * tht[v] - dph[v] * tht[u]);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) rhs += 2.0 * I * gram(a, b) * c * (th[a][u] * thb[b][v] - th[a][v] * thb[b][u]);
      note(rep.A2, rep.A2_scale, lhs, rhs);
    }
    note(rep.A4, rep.A4_scale, F.dtheta(F.T(), E[u]).value(), -0.5 * r * dph[u]);
    note(rep.A4, rep.A4_scale, F.dtheta(F.N(), E[u]).value(), r * tht[u]);
  }
  Field rhs = 2.0 * F.r() * F.T();
  for (int a = 0; a < m; ++a) {
    rhs += (I * apply(F.Wbar()[a], F.r())) * F.W()[a] - (I * apply(F.W()[a], F.r())) * F.Wbar()[a];
  }
  const Vec lhs = bracket(F.T(), F.N()).value(), rv = rhs.value();
  for (Eigen::Index i = 0; i < lhs.size(); ++i) note(rep.A5, rep.A5_scale, lhs[i], rv[i]);
  return rep;
}

}  // namespace bergman
