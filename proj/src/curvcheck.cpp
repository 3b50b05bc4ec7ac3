#include "bergman/curvcheck.hpp"

#include <algorithm>
#include <cmath>

#include "bergman/error.hpp"

namespace bergman {
namespace {

constexpr cplx I(0.0, 1.0);

struct NameEntry {
  IdentityId id;
  const char* name;
};

const NameEntry kNames[] = {
    {IdentityId::b4, "b4"},       {IdentityId::b5, "b5"},       {IdentityId::b6, "b6"},
    {IdentityId::b7, "b7"},       {IdentityId::b13, "b13"},     {IdentityId::b17, "b17"},
    {IdentityId::b21, "b21"},     {IdentityId::b25, "b25"},     {IdentityId::b29, "b29"},
    {IdentityId::b30, "b30"},     {IdentityId::b31, "b31"},     {IdentityId::b32, "b32"},
    {IdentityId::b33, "b33"},     {IdentityId::A2, "A2"},       {IdentityId::A4, "A4"},
    {IdentityId::A5, "A5"},       {IdentityId::A6, "A6"},       {IdentityId::A7, "A7"},
    {IdentityId::A8, "A8"},       {IdentityId::A9, "A9"},       {IdentityId::A10, "A10"},
    {IdentityId::e425, "e425"},   {IdentityId::e426, "e426"},   {IdentityId::e433, "e433"},
    {IdentityId::e434, "e434"},   {IdentityId::sigma0_ratio, "sigma0_ratio"},
    {IdentityId::Omega, "Omega"}, {IdentityId::Xf, "Xf"},       {IdentityId::Nf, "Nf"},
};

class Residual {
 public:
  void add(cplx lhs, cplx rhs) {
    res_ = std::max(res_, std::abs(lhs - rhs));
    scale_ = std::max({scale_, std::abs(lhs), std::abs(rhs)});
  }
  void add(const Vec& lhs, const Vec& rhs) {
    for (Eigen::Index i = 0; i < lhs.size(); ++i) add(lhs[i], rhs[i]);
  }
  IdentityResidual finish(IdentityId id, const Point& z) const { return {id, z, res_, scale_}; }

 private:
  double res_ = 0.0, scale_ = 0.0;
};

cplx v(const Jet& j) { return j.value(); }
Vec v(const Field& f) { return f.value(); }

}  // namespace

std::string to_string(IdentityId id) {
  for (const auto& e : kNames)
    if (e.id == id) return e.name;
  return "?";
}

IdentityId identity_from_string(const std::string& s) {
  for (const auto& e : kNames)
    if (s == e.name) return e.id;
  throw Error(ErrorKind::ConfigError, "unknown identity id '" + s + "'");
}

const std::vector<IdentityId>& all_identities() {
  static const std::vector<IdentityId> ids = [] {
    std::vector<IdentityId> out;
    for (const auto& e : kNames) out.push_back(e.id);
    return out;
  }();
  return ids;
}

bool requires_bergman(IdentityId id) {
  switch (id) {
    case IdentityId::A2:
    case IdentityId::A4:
    case IdentityId::A5:
    case IdentityId::A6:
    case IdentityId::A7:
    case IdentityId::A8:
    case IdentityId::A9:
    case IdentityId::A10:
    case IdentityId::Omega:
      return false;
    default:
      return true;
  }
}

CollarGeometry::CollarGeometry(const KernelModel& model, const Point& z, const FrameOptions& opt)
    : CollarGeometry(model.kernel(z), opt) {}

CollarGeometry::CollarGeometry(const KernelJet& kj, const FrameOptions& opt)
    : K_(kj.K), logK_(kj.log_kernel()), frame_(kj.defining_function(), opt), tail_(kj.tail_estimate) {
  metric_.emplace(*logK_);
}

CollarGeometry::CollarGeometry(const Jet& phi, const FrameOptions& opt) : frame_(phi, opt) {}

const MetricField& CollarGeometry::metric() const {
  if (!metric_) throw Error(ErrorKind::NotBergmanPhi, "defining function does not come from a Bergman kernel");
  return *metric_;
}

const Jet& CollarGeometry::kernel() const {
  if (!K_) throw Error(ErrorKind::NotBergmanPhi, "no kernel attached");
  return *K_;
}

const Jet& CollarGeometry::log_kernel() const {
  if (!logK_) throw Error(ErrorKind::NotBergmanPhi, "no kernel attached");
  return *logK_;
}

std::vector<Field> CollarGeometry::real_basis() const {
  std::vector<Field> out = frame_.horizontal_basis();
  out.push_back(frame_.T());
  out.push_back(frame_.N());
  return out;
}

Jet torsion_form(const FoliationFrame& F, const Field& X, const Field& Y) { return F.g_theta(F.tau(X), Y); }

Jet omega_form(const FoliationFrame& F, const Field& X, const Field& Y) { return F.g_theta(X, F.Phi(Y)); }

IdentityResidual residual(const CollarGeometry& geo, IdentityId id) {
  const FoliationFrame& F = geo.frame();
  const Point z = geo.point();
  if (requires_bergman(id)) geo.metric();
  if (requires_bergman(id) && F.f().empty())
    throw Error(ErrorKind::NotBergmanPhi, "phi vanishes at the sample point");
  const double n1 = F.dim() + 1.0;
  const std::vector<Field> Hb = F.horizontal_basis();
  const std::vector<Field> B = geo.real_basis();
  const Field& T = F.T();
  const Field& N = F.N();
  const cplx phi = v(F.phi()), r = v(F.r());
  Residual acc;

  auto A = [&](const Field& X, const Field& Y) { return v(torsion_form(F, X, Y)); };
  auto Om = [&](const Field& X, const Field& Y) { return v(omega_form(F, X, Y)); };
  auto gt = [&](const Field& X, const Field& Y) { return v(F.g_theta(X, Y)); };
  auto Xr_of = [&](const Field& X) { return v(apply(X, F.r())); };

  switch (id) {
    case IdentityId::A2:
    case IdentityId::A4:
    case IdentityId::A5: {
      const StructureReport rep = structure_identities(F);
      if (id == IdentityId::A2) return {id, z, rep.A2, rep.A2_scale};
      if (id == IdentityId::A4) return {id, z, rep.A4, rep.A4_scale};
      return {id, z, rep.A5, rep.A5_scale};
    }
    case IdentityId::A6:
      for (int a = 0; a < F.rank(); ++a)
        for (int b = 0; b < F.rank(); ++b) {
          acc.add(v(F.torsion_tensor(F.W()[a], F.W()[b])), Vec::Zero(2 * F.dim()));
          acc.add(v(F.torsion_tensor(F.W()[a], F.Wbar()[b])), 2.0 * I * v(F.levi(F.W()[a], F.Wbar()[b])) * v(T));
        }
      break;
    case IdentityId::A7:
      for (int a = 0; a < F.rank(); ++a)
        acc.add(v(F.torsion_tensor(N, F.W()[a])), r * v(F.W()[a]) + I * v(F.tau(F.W()[a])));
      break;
    case IdentityId::A8:
      for (int a = 0; a < F.rank(); ++a)
        for (int b = 0; b < F.rank(); ++b) acc.add(v(F.coframe(b, F.tau(F.W()[a]))), 0.0);
      break;
    case IdentityId::A9:
      acc.add(v(F.tau(N)), -v(F.Xr().J()) - 2.0 * r * v(T));
      break;
    case IdentityId::A10:
      for (const auto& X : Hb) acc.add(v(F.Phi(F.tau(X))), -v(F.tau(F.Phi(X))));
      break;
    case IdentityId::Omega:
      for (const auto& X : Hb)
        for (const auto& Y : Hb) acc.add(Om(X, Y), -v(F.dtheta(X, Y)));
      break;
    default:
      break;
  }
  if (!requires_bergman(id)) return acc.finish(id, z);

  const MetricField& M = geo.metric();
  const cplx f = v(F.f()), gs = v(F.g()), hs = v(F.h());
  const Field& Xr = F.Xr();
  const cplx Tr = v(apply(T, F.r())), Nr = v(apply(N, F.r()));
  auto gk = [&](const Field& X, const Field& Y) { return v(M.inner(X, Y)); };
  auto D = [&](const Field& X, const Field& Y) { return v(M.covariant_derivative(X, Y)); };
  const Vec Tv = v(T), Nv = v(N);

  switch (id) {
    case IdentityId::b4:
      for (const auto& X : B)
        for (const auto& Y : B) {
          const Field JY = Y.J();
          const cplx wedge =
              v(F.wedge(F.del_phi(X), F.delbar_phi(JY), F.del_phi(JY), F.delbar_phi(X)));
          acc.add(gk(X, Y), (n1 / phi) * ((I / phi) * wedge - v(F.dtheta(X, JY))));
        }
      break;
    case IdentityId::b5:
      for (const auto& X : Hb)
        for (const auto& Y : Hb) acc.add(gk(X, Y), -(n1 / phi) * gt(X, Y));
      break;
    case IdentityId::b6:
      for (const auto& X : Hb) {
        acc.add(gk(X, T), 0.0);
        acc.add(gk(X, N), 0.0);
      }
      break;
    case IdentityId::b7: {
      const cplx expect = (n1 / phi) * (1.0 / phi - r);
      acc.add(gk(T, N), 0.0);
      acc.add(gk(T, T), expect);
      acc.add(gk(N, N), expect);
      break;
    }
    case IdentityId::b13:
      for (const auto& X : Hb)
        for (const auto& Y : Hb) {
          const Vec rhs = v(F.nabla(X, Y)) + (f * A(X, Y) + Om(X, Y)) * Tv -
                          (gt(X, Y) + f * gt(X, F.Phi(F.tau(Y)))) * Nv;
          acc.add(D(X, Y), rhs);
        }
      break;
    case IdentityId::b17:
      for (const auto& X : Hb) {
        const Field PX = F.Phi(X);
        const Vec rhs =
            v(F.tau(X)) - (1.0 / f) * v(PX) - (f / 2.0) * (Xr_of(X) * Tv + Xr_of(PX) * Nv);
        acc.add(D(X, T), rhs);
      }
      break;
    case IdentityId::b21:
      for (const auto& X : Hb) {
        const Field PX = F.Phi(X);
        const Vec rhs =
            -(1.0 / f) * v(X) + v(F.tau(PX)) + (f / 2.0) * (Xr_of(PX) * Tv - Xr_of(X) * Nv);
        acc.add(D(X, N), rhs);
      }
      break;
    case IdentityId::b25:
      for (const auto& X : Hb) {
        const Field PX = F.Phi(X);
        const Vec rhs =
            v(F.nabla(T, X)) - (1.0 / f) * v(PX) - (f / 2.0) * (Xr_of(X) * Tv + Xr_of(PX) * Nv);
        acc.add(D(T, X), rhs);
      }
      break;
    case IdentityId::b29:
      for (const auto& X : Hb) {
        const Field PX = F.Phi(X);
        const Vec rhs =
            v(F.nabla(N, X)) - (1.0 / phi) * v(X) + (f / 2.0) * (Xr_of(PX) * Tv - Xr_of(X) * Nv);
        acc.add(D(N, X), rhs);
      }
      break;
    case IdentityId::b30:
      acc.add(D(N, T), -0.5 * v(F.Phi(Xr)) - (f / 2.0) * (gs * Tv + Tr * Nv));
      break;
    case IdentityId::b31:
      acc.add(D(T, N), 0.5 * v(F.Phi(Xr)) - (f / 2.0) * (hs * Tv + Tr * Nv));
      break;
    case IdentityId::b32:
      acc.add(D(T, T), -0.5 * v(Xr) - (f / 2.0) * (Tr * Tv - hs * Nv));
      break;
    case IdentityId::b33:
      acc.add(D(N, N), -0.5 * v(Xr) + (f / 2.0) * (Tr * Tv - gs * Nv));
      break;
    case IdentityId::e425:
      for (std::size_t i = 0; i < Hb.size(); ++i)
        for (std::size_t j = i + 1; j < Hb.size(); ++j)
          for (const auto& Z : Hb) {
            const Field& X = Hb[i];
            const Field& Y = Hb[j];
            const Field PX = F.Phi(X), PY = F.Phi(Y), PZ = F.Phi(Z), tZ = F.tau(Z);
            const cplx thXY = v(F.theta(bracket(X, Y)));
            const cplx AYZ = A(Y, Z), AXZ = A(X, Z), OYZ = Om(Y, Z), OXZ = Om(X, Z);
            const cplx OYtZ = Om(Y, tZ), OXtZ = Om(X, tZ);
            const cplx gYZ = gt(Y, Z), gXZ = gt(X, Z);
            const cplx Xr_ = Xr_of(X), Yr = Xr_of(Y), PXr = Xr_of(PX), PYr = Xr_of(PY);
            const Field DXY = F.nabla(X, Y), DXZ = F.nabla(X, Z), DYX = F.nabla(Y, X), DYZ = F.nabla(Y, Z);
            auto nablaA = [&](const Field& U, const Field& V, const Field& W, const Field& DUV, const Field& DUW) {
              return v(apply(U, torsion_form(F, V, W))) - A(DUV, W) - A(V, DUW);
            };
            auto nablaTau = [&](const Field& U, const Field& DUZ) -> Vec { return v(F.nabla(U, tZ)) - v(F.tau(DUZ)); };
            const cplx dA = nablaA(X, Y, Z, DXY, DXZ) - nablaA(Y, X, Z, DYX, DYZ);
            const cplx dTau = gt(Y, F.Phi(Field::constant(nablaTau(X, DXZ), z, 1))) -
                              gt(X, F.Phi(Field::constant(nablaTau(Y, DYZ), z, 1)));
            Vec rhs = v(F.curvature(X, Y, Z)) + (1.0 / f) * thXY * v(PZ);
            rhs += (f * AYZ + OYZ) * (v(F.tau(X)) - (1.0 / f) * v(PX));
            rhs -= (f * AXZ + OXZ) * (v(F.tau(Y)) - (1.0 / f) * v(PY));
            rhs += (gYZ + f * OYtZ) * ((1.0 / f) * v(X) - v(F.tau(PX)));
            rhs -= (gXZ + f * OXtZ) * ((1.0 / f) * v(Y) - v(F.tau(PY)));
            const cplx tcoef = f * dA + (f / 2.0) * (Xr_ * (f * AYZ - OYZ) - Yr * (f * AXZ - OXZ) -
                                                     PXr * (gYZ + f * OYtZ) + PYr * (gXZ + f * OXtZ) +
                                                     Xr_of(Z) * thXY);
            const cplx ncoef = f * dTau - (f / 2.0) * (Xr_ * (gYZ - f * OYtZ) - Yr * (gXZ - f * OXtZ) -
                                                       PXr * (f * AYZ + OYZ) + PYr * (f * AXZ + OXZ) +
                                                       Xr_of(PZ) * thXY);
            rhs += tcoef * Tv - ncoef * Nv;
            acc.add(v(M.curvature(X, Y, Z)), rhs);
          }
      break;
    case IdentityId::e426: {
      std::vector<Field> xs = Hb;
      Field sum = Hb[0];
      for (std::size_t i = 1; i < Hb.size(); ++i) sum += (0.5 + 0.25 * static_cast<double>(i)) * Hb[i];
      xs.push_back(sum);
      for (const auto& X : xs) {
        const Field PX = F.Phi(X);
        const cplx G = gt(X, X);
        const cplx lhs = gk(M.curvature(X, PX, PX), X);
        const cplx rhs = -(n1 / phi) * (gt(F.curvature(X, PX, PX), X) + (4.0 / f) * G * G -
                                        2.0 * f * (A(X, X) * A(X, X) + A(X, PX) * A(X, PX)));
        acc.add(lhs, rhs);
      }
      break;
    }
    case IdentityId::e433: {
      const cplx xr2 = gt(Xr, Xr);
      const Vec rhs = (r - 1.0 / f) * v(Xr) - v(F.tau(F.Phi(Xr))) + f * r * Tr * Tv -
                      (f / 2.0) * (xr2 + 2.0 * r * hs) * Nv;
      acc.add(D(bracket(N, T), T), rhs);
      break;
    }
    case IdentityId::e434: {
      const Field PXr = F.Phi(Xr);
      const cplx xr2 = gt(Xr, Xr);
      const Jet TrJ = apply(T, F.r());
      const cplx NTr = v(apply(N, TrJ)), TTr = v(apply(T, TrJ));
      const cplx Tg = v(apply(T, F.g())), Nh = v(apply(N, F.h()));
      const cplx k2 = 2.0 / (phi * phi) + Nr;
      Vec rhs = v(F.nabla(N, Xr)) - v(F.nabla(T, PXr)) - f * Tr * v(PXr) - 2.0 * v(F.tau(PXr));
      rhs += (2.0 * r + (f / 2.0) * (gs + hs) - 1.0 / phi - 3.0 / f) * v(Xr);
      rhs += f * (f * k2 * Tr + NTr - Tg + (2.0 * r - f * gs) * Tr) * Tv;
      rhs -= f * (2.0 * xr2 + f * hs * k2 + Nh + f * Tr * Tr + TTr + 2.0 * r * hs) * Nv;
      acc.add(-2.0 * v(M.curvature(N, T, T)), rhs);
      break;
    }
    case IdentityId::sigma0_ratio: {
      const cplx xr2 = gt(Xr, Xr);
      const Jet TrJ = apply(T, F.r());
      const cplx TTr = v(apply(T, TrJ)), Nh = v(apply(N, F.h()));
      const cplx den = gk(N, N) * gk(T, T) - gk(N, T) * gk(N, T);
      const cplx lhs = 2.0 * gk(M.curvature(N, T, T), N) / den;
      const cplx rhs = (f * f * phi / n1) * (2.0 * xr2 + TTr + f * Tr * Tr + 2.0 * hs * r + Nh + f * hs * Nr +
                                             2.0 * f * hs / (phi * phi));
      acc.add(lhs, rhs);
      break;
    }
    case IdentityId::Xf:
      for (const auto& X : Hb) acc.add(v(apply(X, F.f())), f * f * Xr_of(X));
      acc.add(v(apply(T, F.f())), f * f * Tr);
      break;
    case IdentityId::Nf:
      acc.add(v(apply(N, F.f())), f * f * (2.0 / (phi * phi) + Nr));
      break;
    default:
      break;
  }
  return acc.finish(id, z);
}

Sigma0 k_g_sigma0(const CollarGeometry& geo) {
  const FoliationFrame& F = geo.frame();
  const MetricField& M = geo.metric();
  if (F.f().empty()) throw Error(ErrorKind::NotBergmanPhi, "phi vanishes at the sample point");
  const Field& N = F.N();
  const Field& T = F.T();
  const cplx nn = M.inner(N, N).value(), tt = M.inner(T, T).value(), nt = M.inner(N, T).value();
  const double den = (nn * tt - nt * nt).real();
  if (!(den > 0.0)) throw Error(ErrorKind::DegeneratePlane, "degenerate plane span{N, T}");
  Sigma0 out;
  out.k = M.inner(M.curvature(N, T, T), N).value().real() / den;
  out.ratio = 2.0 * out.k;
  const double n1 = F.dim() + 1.0;
  const double phi = F.phi().value().real(), r = F.r().value().real(), f = F.f().value().real();
  const double Nr = apply(N, F.r()).value().real();
  const double one = 1.0 - r * phi;
  out.L1 = (2.0 / n1) * (f / phi) * (f * f * Nr + 4.0 / (one * one) - 6.0 * f * f * r / phi + 4.0 * f * f * r * r);
  out.L2 = (f * f * phi / n1) * apply(N, F.h()).value().real();
  return out;
}

double k_g_horizontal(const CollarGeometry& geo, const Field& X0) {
  const FoliationFrame& F = geo.frame();
  if (F.f().empty()) throw Error(ErrorKind::NotBergmanPhi, "phi vanishes at the sample point");
  geo.metric();
  const Field X = F.pi_H(X0);
  const Field PX = F.Phi(X);
  const double G = F.g_theta(X, X).value().real();
  if (!(G > 1e-300)) throw Error(ErrorKind::DegeneratePlane, "zero horizontal vector");
  const double kt = F.k_theta(X, PX);
  const double axx = torsion_form(F, X, X).value().real();
  const double axp = torsion_form(F, X, PX).value().real();
  const double phi = F.phi().value().real(), f = F.f().value().real();
  return -(phi / (F.dim() + 1.0)) * (4.0 * kt + 4.0 / f - 2.0 * f * (axx * axx + axp * axp) / (G * G));
}

double k_g_horizontal_kahler(const CollarGeometry& geo, const Field& X0) {
  const Field X = geo.frame().pi_H(X0);
  const MetricPoint m = bergman_metric(geo.log_kernel());
  const CurvaturePoint R = curvature_hessian(m);
  const Vec x = X.value();
  return hol_sectional(m, R, x.head(geo.frame().dim()));
}

CurvatureSample sample(const CollarGeometry& geo, const Field& X) {
  const FoliationFrame& F = geo.frame();
  CurvatureSample s;
  s.point = geo.point();
  s.epsilon = geo.epsilon();
  s.k_g_H = k_g_horizontal(geo, X);
  s.k_g_H_kahler = k_g_horizontal_kahler(geo, X);
  const Sigma0 s0 = k_g_sigma0(geo);
  s.k_g_sigma0 = s0.k;
  s.L1 = s0.L1;
  s.L2 = s0.L2;
  s.k_theta = F.k_theta(F.pi_H(X));
  const double phi = F.phi().value().real();
  s.r = F.r().value().real();
  s.f = F.f().value().real();
  s.phi_over_f = phi / s.f;
  s.f2_phi_h = s.f * s.f * phi * F.h().value().real();
  s.one_minus_r_phi = 1.0 - s.r * phi;
  s.tail_estimate = geo.tail_estimate();
  return s;
}

}  // namespace bergman
