#include "bergman/domains.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <gsl/gsl_integration.h>

#include "bergman/error.hpp"
#include "bergman/parallel.hpp"

namespace bergman {
namespace {

constexpr double kPi = 3.14159265358979323846;
// Coordinates with |z_j| below this are treated as exactly zero by the series
// evaluator (their monomials only contribute through m_j = α_j = β_j).
constexpr double kZeroRadius = 1e-30;
// Series summation stops once the shell tail estimate is this far below tolerance.
constexpr double kEarlyStop = 1e-3;
constexpr int kMinShells = 8;

double ln_factorial(int k) { return std::lgamma(static_cast<double>(k) + 1.0); }

double binomial(int m, int k) {
  if (k < 0 || k > m) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (m - k + i) / i;
  return r;
}

void enumerate_shell(int dim, int pos, int remaining, std::vector<std::uint16_t>& cur,
                     std::vector<std::uint16_t>& out) {
  if (pos == dim - 1) {
    cur[pos] = static_cast<std::uint16_t>(remaining);
    out.insert(out.end(), cur.begin(), cur.end());
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    cur[pos] = static_cast<std::uint16_t>(e);
    enumerate_shell(dim, pos + 1, remaining - e, cur, out);
  }
}

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

// K = c·det·s^{-(n+1)} with s = 1 - Σ u ū; log K and φ = -(c·det)^{-1/(n+1)} s
// are formed from s directly.
KernelJet ball_from_coordinates(int n, const std::vector<Jet>& u, const std::vector<Jet>& ubar, double det) {
  Jet s = 1.0 - u[0] * ubar[0];
  for (int j = 1; j < n; ++j) s -= u[j] * ubar[j];
  if (s.value().real() <= 0.0) throw Error(ErrorKind::OutsideDomain, "point is not inside the unit ball");
  const double lnc = ln_factorial(n) - n * std::log(kPi) + std::log(det);
  KernelJet out;
  out.K = std::exp(lnc) * pow(s, -(n + 1.0));
  out.log_K = lnc - (n + 1.0) * log(s);
  out.phi = -std::exp(-lnc / (n + 1.0)) * s;
  return out;
}

}  // namespace

const char* to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::UnitBall: return "unit_ball";
    case DomainKind::AffineImage: return "affine_image";
    case DomainKind::ReinhardtSeries: return "reinhardt_series";
  }
  return "unknown";
}

DomainKind domain_kind_from_string(const std::string& s) {
  if (s == "unit_ball") return DomainKind::UnitBall;
  if (s == "affine_image") return DomainKind::AffineImage;
  if (s == "reinhardt_series") return DomainKind::ReinhardtSeries;
  throw Error(ErrorKind::ConfigError, "unknown domain kind '" + s + "'");
}

double Shadow::value(const std::vector<double>& s) const {
  double v = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) v += linear[j] * s[j] + quadratic[j] * s[j] * s[j];
  return v;
}

double Shadow::axis_extent(int j, double budget) const {
  if (budget <= 0.0) return 0.0;
  const double a = linear[j], b = quadratic[j];
  return 2.0 * budget / (a + std::sqrt(a * a + 4.0 * b * budget));
}

DomainSpec DomainSpec::ball(int n) {
  DomainSpec s;
  s.kind = DomainKind::UnitBall;
  s.dim = n;
  return s;
}

DomainSpec DomainSpec::affine(const Eigen::MatrixXcd& F, const Point& t) {
  DomainSpec s;
  s.kind = DomainKind::AffineImage;
  s.dim = static_cast<int>(F.rows());
  s.affine_matrix = F;
  s.affine_translation = t;
  return s;
}

DomainSpec DomainSpec::reinhardt(const Shadow& shadow, int degree, int order) {
  DomainSpec s;
  s.kind = DomainKind::ReinhardtSeries;
  s.dim = static_cast<int>(shadow.linear.size());
  s.shadow = shadow;
  s.truncation_degree = degree;
  s.quadrature_order = order;
  return s;
}

void DomainSpec::validate() const {
  if (dim < 1 || dim > kMaxDim) {
    throw Error(ErrorKind::ConfigError, "dimension must be between 1 and " + std::to_string(kMaxDim));
  }
  if (kind == DomainKind::AffineImage) {
    if (affine_matrix.rows() != dim || affine_matrix.cols() != dim || affine_translation.size() != dim) {
      throw Error(ErrorKind::ConfigError, "affine map has the wrong shape");
    }
    const double c = condition_number();
    if (!std::isfinite(c) || c > 1e12) throw Error(ErrorKind::ConfigError, "affine map is not invertible");
  }
  if (kind == DomainKind::ReinhardtSeries) {
    if (static_cast<int>(shadow.linear.size()) != dim || static_cast<int>(shadow.quadratic.size()) != dim) {
      throw Error(ErrorKind::ConfigError, "shadow coefficients must have one entry per dimension");
    }
    for (int j = 0; j < dim; ++j) {
      // a_j > 0 keeps the shadow bounded with 0 inside; b_j >= 0 makes the
      // (separable) constraint convex, since its Hessian is diag(2 b_j).
      if (!(shadow.linear[j] > 0.0) || !std::isfinite(shadow.linear[j])) {
        throw Error(ErrorKind::ConfigError, "shadow linear coefficients must be positive");
      }
      if (!(shadow.quadratic[j] >= 0.0) || !std::isfinite(shadow.quadratic[j])) {
        throw Error(ErrorKind::ConfigError, "shadow quadratic coefficients must be non-negative");
      }
    }
    if (truncation_degree < 1 || truncation_degree > 60000) {
      throw Error(ErrorKind::ConfigError, "truncation degree out of range");
    }
    if (quadrature_order < 1) throw Error(ErrorKind::ConfigError, "quadrature order must be positive");
    if (!(series_tol > 0.0)) throw Error(ErrorKind::ConfigError, "series tolerance must be positive");
  }
}

double DomainSpec::condition_number() const {
  if (kind != DomainKind::AffineImage) return 1.0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(affine_matrix);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[s.size() - 1] == 0.0) return std::numeric_limits<double>::infinity();
  return s[0] / s[s.size() - 1];
}

std::uint64_t DomainSpec::norm_hash() const {
  std::ostringstream key;
  key << "kind=" << to_string(kind) << ";dim=" << dim;
  for (int j = 0; j < static_cast<int>(shadow.linear.size()); ++j) {
    key << ";a" << j << "=" << hex(shadow.linear[j]) << ";b" << j << "=" << hex(shadow.quadratic[j]);
  }
  key << ";degree=" << truncation_degree << ";order=" << quadrature_order;
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : key.str()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

NormTable::NormTable(int dim, int degree) : dim_(dim), degree_(degree) {
  std::vector<std::uint16_t> cur(dim, 0);
  for (int d = 0; d <= degree; ++d) enumerate_shell(dim, 0, d, cur, exps_);
  ln_norm_.assign(exps_.size() / dim, 0.0);
}

int NormTable::total_degree(std::size_t i) const {
  int d = 0;
  for (int j = 0; j < dim_; ++j) d += exps_[i * dim_ + j];
  return d;
}

std::size_t NormTable::index(const std::vector<int>& m) const {
  for (std::size_t i = 0; i < size(); ++i) {
    bool same = true;
    for (int j = 0; j < dim_ && same; ++j) same = exps_[i * dim_ + j] == m[j];
    if (same) return i;
  }
  throw std::out_of_range("multi-index not in norm table");
}

double NormTable::norm(const std::vector<int>& m) const { return std::exp(ln_norm_[index(m)]); }

bool NormTable::operator==(const NormTable& o) const {
  return dim_ == o.dim_ && degree_ == o.degree_ && exps_ == o.exps_ && ln_norm_ == o.ln_norm_;
}

std::string norm_cache_path(const DomainSpec& spec, const std::string& cache_dir) {
  char name[40];
  std::snprintf(name, sizeof name, "%016" PRIx64 ".norms", spec.norm_hash());
  return (std::filesystem::path(cache_dir) / name).string();
}

namespace {

std::string cache_header(const DomainSpec& spec) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "# bergman-norms hash=%016" PRIx64 " dim=%d degree=%d order=%d value=ln_norm",
                spec.norm_hash(), spec.dim, spec.truncation_degree, spec.quadrature_order);
  return buf;
}

}  // namespace

void write_norm_cache(const DomainSpec& spec, const NormTable& table, const std::string& path) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error(ErrorKind::CacheCorrupt, "cannot write " + tmp);
    out << cache_header(spec) << '\n';
    for (std::size_t i = 0; i < table.size(); ++i) {
      const std::uint16_t* m = table.exponents(i);
      for (int j = 0; j < table.dim(); ++j) out << m[j] << ' ';
      out << hex(table.ln_norm(i)) << '\n';
    }
    if (!out) throw Error(ErrorKind::CacheCorrupt, "write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

bool read_norm_cache(const DomainSpec& spec, const std::string& path, NormTable& table) {
  std::ifstream in(path);
  if (!in) return false;
  std::string line;
  if (!std::getline(in, line) || line != cache_header(spec)) {
    throw Error(ErrorKind::CacheCorrupt, "bad header in " + path);
  }
  NormTable t(spec.dim, spec.truncation_degree);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::getline(in, line)) throw Error(ErrorKind::CacheCorrupt, "truncated cache " + path);
    std::istringstream ls(line);
    const std::uint16_t* m = t.exponents(i);
    for (int j = 0; j < spec.dim; ++j) {
      int e = -1;
      if (!(ls >> e) || e != m[j]) throw Error(ErrorKind::CacheCorrupt, "unexpected multi-index in " + path);
    }
    std::string v;
    if (!(ls >> v)) throw Error(ErrorKind::CacheCorrupt, "missing value in " + path);
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0' || !std::isfinite(x)) {
      throw Error(ErrorKind::CacheCorrupt, "bad value in " + path);
    }
    t.set_ln_norm(i, x);
  }
  if (std::getline(in, line) && !line.empty()) throw Error(ErrorKind::CacheCorrupt, "trailing data in " + path);
  table = std::move(t);
  return true;
}

NormTable monomial_norms(const DomainSpec& spec, const std::string& cache_dir, int jobs) {
  spec.validate();
  if (spec.kind != DomainKind::ReinhardtSeries) {
    throw Error(ErrorKind::ConfigError, "monomial norms need a reinhardt_series domain");
  }
  std::string path;
  if (!cache_dir.empty()) {
    path = norm_cache_path(spec, cache_dir);
    NormTable cached;
    if (read_norm_cache(spec, path, cached)) return cached;
  }

  const int n = spec.dim;
  const int Q = spec.quadrature_order;
  gsl_integration_fixed_workspace* gl =
      gsl_integration_fixed_alloc(gsl_integration_fixed_legendre, static_cast<std::size_t>(Q), 0.0, 1.0, 0.0, 0.0);
  if (gl == nullptr) throw Error(ErrorKind::QuadratureFailure, "cannot build Gauss-Legendre rule");
  const std::vector<double> x(gsl_integration_fixed_nodes(gl), gsl_integration_fixed_nodes(gl) + Q);
  const std::vector<double> w(gsl_integration_fixed_weights(gl), gsl_integration_fixed_weights(gl) + Q);
  gsl_integration_fixed_free(gl);

  // Outer nodes over s_1..s_{n-1}, each axis mapped onto [0, extent(remaining budget)].
  struct Node {
    double lnw;
    std::vector<double> lns;
    double ln_last;
  };
  std::vector<Node> nodes;
  std::vector<double> lns(std::max(0, n - 1));
  auto build = [&](auto&& self, int axis, double budget, double lnw) -> void {
    const double extent = spec.shadow.axis_extent(axis, budget);
    if (!(extent > 0.0) || !std::isfinite(extent)) {
      throw Error(ErrorKind::QuadratureFailure, "degenerate shadow map on axis " + std::to_string(axis));
    }
    if (axis == n - 1) {
      nodes.push_back({lnw, lns, std::log(extent)});
      return;
    }
    for (int i = 0; i < Q; ++i) {
      const double s = extent * x[i];
      lns[axis] = std::log(s);
      const double rest = budget - spec.shadow.linear[axis] * s - spec.shadow.quadratic[axis] * s * s;
      self(self, axis + 1, rest, lnw + std::log(w[i] * extent));
    }
  };
  build(build, 0, 1.0, 0.0);

  NormTable table(n, spec.truncation_degree);
  const double ln_pi_n = n * std::log(kPi);
  parallel_for(table.size(), jobs, [&](std::size_t idx) {
    const std::uint16_t* m = table.exponents(idx);
    const double last = m[n - 1] + 1.0;
    double peak = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      double t = nodes[k].lnw + last * nodes[k].ln_last;
      for (int j = 0; j + 1 < n; ++j) t += m[j] * nodes[k].lns[j];
      terms[k] = t;
      peak = std::max(peak, t);
    }
    double sum = 0.0;
    for (double t : terms) sum += std::exp(t - peak);
    table.set_ln_norm(idx, ln_pi_n + peak + std::log(sum) - std::log(last));
  });
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (!std::isfinite(table.ln_norm(i))) throw Error(ErrorKind::QuadratureFailure, "non-finite monomial norm");
  }
  if (!path.empty()) write_norm_cache(spec, table, path);
  return table;
}

Jet kernel_ball(int n, const Point& z) { return ball_kernel_jet(n, z).K; }

KernelJet ball_kernel_jet(int n, const Point& z) {
  if (z.squaredNorm() >= 1.0) throw Error(ErrorKind::OutsideDomain, "point is not inside the unit ball");
  auto c = seed_coordinates(z);
  std::vector<Jet> u(c.begin(), c.begin() + n), ubar(c.begin() + n, c.end());
  return ball_from_coordinates(n, u, ubar, 1.0);
}

Jet affine_pushforward(const DomainSpec& spec, const Point& z) { return affine_kernel_jet(spec, z).K; }

KernelJet affine_kernel_jet(const DomainSpec& spec, const Point& z) {
  const int n = spec.dim;
  const Eigen::MatrixXcd finv = spec.affine_matrix.inverse();
  const Point pre = finv * (z - spec.affine_translation);
  if (pre.squaredNorm() >= 1.0) throw Error(ErrorKind::OutsideDomain, "point is not inside the affine image of the ball");
  auto c = seed_coordinates(z);
  std::vector<Jet> u, ubar;
  for (int j = 0; j < n; ++j) {
    Jet uj = Jet::constant(n, z, 0.0);
    for (int k = 0; k < n; ++k) uj += finv(j, k) * (c[k] - spec.affine_translation[k]);
    ubar.push_back(uj.conj());
    u.push_back(std::move(uj));
  }
  return ball_from_coordinates(n, u, ubar, std::norm(finv.determinant()));
}

Jet defining_function(const Jet& K) { return -pow(K, -1.0 / (K.dim() + 1.0)); }

KernelModel::KernelModel(const DomainSpec& spec, const std::string& cache_dir, int jobs) : spec_(spec) {
  spec_.validate();
  if (spec_.kind == DomainKind::ReinhardtSeries) {
    norms_ = std::make_shared<const NormTable>(monomial_norms(spec_, cache_dir, jobs));
  }
  if (spec_.kind == DomainKind::AffineImage) {
    finv_ = spec_.affine_matrix.inverse();
    det_factor_ = std::norm(finv_.determinant());
  }
}

KernelModel::KernelModel(const DomainSpec& spec, std::shared_ptr<const NormTable> norms)
    : spec_(spec), norms_(std::move(norms)) {
  spec_.validate();
  if (spec_.kind == DomainKind::AffineImage) {
    finv_ = spec_.affine_matrix.inverse();
    det_factor_ = std::norm(finv_.determinant());
  }
}

bool KernelModel::inside(const Point& z) const {
  switch (spec_.kind) {
    case DomainKind::UnitBall: return z.squaredNorm() < 1.0;
    case DomainKind::AffineImage: return (finv_ * (z - spec_.affine_translation)).squaredNorm() < 1.0;
    case DomainKind::ReinhardtSeries: {
      std::vector<double> s(spec_.dim);
      for (int j = 0; j < spec_.dim; ++j) s[j] = std::norm(z[j]);
      return spec_.shadow.value(s) < 1.0;
    }
  }
  return false;
}

KernelJet KernelModel::kernel(const Point& z) const {
  if (z.size() != spec_.dim) throw Error(ErrorKind::ConfigError, "point has the wrong dimension");
  switch (spec_.kind) {
    case DomainKind::UnitBall: return ball_kernel_jet(spec_.dim, z);
    case DomainKind::AffineImage: return affine_kernel_jet(spec_, z);
    case DomainKind::ReinhardtSeries: return kernel_series(z);
  }
  return {};
}

Jet KernelModel::log_kernel(const Point& z) const { return kernel(z).log_kernel(); }

Jet KernelModel::phi(const Point& z) const { return kernel(z).defining_function(); }

Jet KernelJet::log_kernel() const { return log_K.empty() ? log(K) : log_K; }

Jet KernelJet::defining_function() const { return phi.empty() ? bergman::defining_function(K) : phi; }

double KernelModel::kernel_value(const Point& z, double* tail_out) const {
  const int n = spec_.dim;
  if (!inside(z)) throw Error(ErrorKind::OutsideDomain, "point is not inside the domain");
  if (tail_out != nullptr) *tail_out = 0.0;
  const double c = std::exp(ln_factorial(n) - n * std::log(kPi));
  switch (spec_.kind) {
    case DomainKind::UnitBall: return c * std::pow(1.0 - z.squaredNorm(), -(n + 1.0));
    case DomainKind::AffineImage: {
      const Point u = finv_ * (z - spec_.affine_translation);
      return c * std::pow(1.0 - u.squaredNorm(), -(n + 1.0)) * det_factor_;
    }
    case DomainKind::ReinhardtSeries: {
      double tail = 0.0;
      const double v = series_value(z, &tail);
      if (tail_out != nullptr) {
        *tail_out = tail;
      } else if (!(tail <= spec_.series_tol)) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "kernel tail estimate %.3e exceeds tolerance %.3e", tail, spec_.series_tol);
        throw Error(ErrorKind::SeriesNotConverged, buf);
      }
      return v;
    }
  }
  return 0.0;
}

double KernelModel::phi_value(const Point& z, double* tail) const {
  return -std::pow(kernel_value(z, tail), -1.0 / (spec_.dim + 1.0));
}

double KernelModel::series_value(const Point& z, double* tail) const {
  const int n = spec_.dim;
  std::vector<double> lnr2(n);
  std::vector<bool> zero(n);
  for (int j = 0; j < n; ++j) {
    zero[j] = std::abs(z[j]) < kZeroRadius;
    lnr2[j] = zero[j] ? 0.0 : std::log(std::norm(z[j]));
  }
  double total = 0.0, current = 0.0, last = 0.0, prev = 0.0;
  auto estimate = [&] {
    if (last == 0.0) return 0.0;
    const double q = prev > 0.0 ? last / prev : std::numeric_limits<double>::infinity();
    return q < 1.0 ? 2.0 * last * q / (1.0 - q) / total : std::numeric_limits<double>::infinity();
  };
  int shell = 0;
  bool stopped = false;
  for (std::size_t i = 0; i < norms_->size(); ++i) {
    const std::uint16_t* m = norms_->exponents(i);
    int d = 0;
    for (int j = 0; j < n; ++j) d += m[j];
    if (d != shell) {
      prev = last;
      last = current;
      current = 0.0;
      if (shell >= kMinShells && estimate() <= kEarlyStop * spec_.series_tol) {
        stopped = true;
        break;
      }
      shell = d;
    }
    double lnb = -norms_->ln_norm(i);
    bool skip = false;
    for (int j = 0; j < n; ++j) {
      if (zero[j]) {
        if (m[j] > 0) skip = true;
      } else {
        lnb += m[j] * lnr2[j];
      }
    }
    if (skip) continue;
    const double b = std::exp(lnb);
    total += b;
    current += b;
  }
  if (!stopped) {
    prev = last;
    last = current;
  }
  if (tail != nullptr) *tail = estimate();
  return total;
}

KernelJet KernelModel::kernel_series(const Point& z) const {
  const int n = spec_.dim;
  if (!inside(z)) throw Error(ErrorKind::OutsideDomain, "point is not inside the domain");
  const int D = norms_->degree();
  constexpr int E = kJetOrder + 1;

  std::vector<double> lnr(n);
  std::vector<bool> zero(n);
  std::vector<cplx> phase(n);
  for (int j = 0; j < n; ++j) {
    const double r = std::abs(z[j]);
    zero[j] = r < kZeroRadius;
    lnr[j] = zero[j] ? 0.0 : std::log(r);
    phase[j] = zero[j] ? cplx(1.0) : z[j] / r;
  }

  // factor[j][(m*E + a)*E + b] = C(m,a) C(m,b) r_j^{-a-b}, or [a = b = m] when z_j = 0
  std::vector<std::vector<double>> factor(n, std::vector<double>(static_cast<std::size_t>(D + 1) * E * E, 0.0));
  for (int j = 0; j < n; ++j) {
    for (int m = 0; m <= D; ++m) {
      for (int a = 0; a < E; ++a) {
        for (int b = 0; b < E; ++b) {
          double v;
          if (zero[j]) v = (a == m && b == m) ? 1.0 : 0.0;
          else v = binomial(m, a) * binomial(m, b) * std::exp(-(a + b) * lnr[j]);
          factor[j][(static_cast<std::size_t>(m) * E + a) * E + b] = v;
        }
      }
    }
  }

  Jet K(n, z);
  const std::size_t slots = K.size();
  std::vector<std::array<int, 2 * kMaxDim>> ab(slots);
  std::vector<int> deg(slots);
  for (std::size_t s = 0; s < slots; ++s) {
    Exponents a, b;
    K.exponents_of(s, a, b);
    for (int j = 0; j < n; ++j) {
      ab[s][j] = a[j];
      ab[s][n + j] = b[j];
    }
    deg[s] = K.degree_of(s);
  }

  std::vector<double> sums(slots, 0.0);
  using Shell = std::array<double, kJetOrder + 1>;
  Shell total{}, current{}, last{}, prev{};
  auto estimate = [&] {
    double tail = 0.0;
    for (int k = 0; k <= kJetOrder; ++k) {
      if (last[k] == 0.0 || total[k] == 0.0) continue;
      const double q = prev[k] > 0.0 ? last[k] / prev[k] : std::numeric_limits<double>::infinity();
      const double t = q < 1.0 ? 2.0 * last[k] * q / (1.0 - q) / total[k] : std::numeric_limits<double>::infinity();
      tail = std::max(tail, t);
    }
    return tail;
  };
  int shell = 0;
  bool stopped = false;
  for (std::size_t i = 0; i < norms_->size() && !stopped; ++i) {
    const std::uint16_t* m = norms_->exponents(i);
    int d = 0;
    for (int j = 0; j < n; ++j) d += m[j];
    if (d != shell) {
      prev = last;
      last = current;
      current = Shell{};
      if (shell >= kMinShells && estimate() <= kEarlyStop * spec_.series_tol) {
        stopped = true;
        break;
      }
      shell = d;
    }
    double lnb = -norms_->ln_norm(i);
    bool skip = false;
    for (int j = 0; j < n; ++j) {
      if (zero[j]) {
        if (m[j] > kJetOrder / 2) skip = true;
      } else {
        lnb += 2.0 * m[j] * lnr[j];
      }
    }
    if (skip) continue;
    const double base = std::exp(lnb);
    if (base == 0.0) continue;
    for (std::size_t s = 0; s < slots; ++s) {
      double term = base;
      for (int j = 0; j < n && term != 0.0; ++j) {
        term *= factor[j][(static_cast<std::size_t>(m[j]) * E + ab[s][j]) * E + ab[s][n + j]];
      }
      if (term == 0.0) continue;
      sums[s] += term;
      total[deg[s]] += term;
      current[deg[s]] += term;
    }
  }
  if (!stopped) {
    prev = last;
    last = current;
  }

  for (std::size_t s = 0; s < slots; ++s) {
    cplx ph = 1.0;
    for (int j = 0; j < n; ++j) {
      const int k = ab[s][n + j] - ab[s][j];
      ph *= std::pow(phase[j], k);
    }
    K.coefficients()[s] = ph * sums[s];
  }

  const double tail = estimate();
  if (!(tail <= spec_.series_tol)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "kernel tail estimate %.3e exceeds tolerance %.3e", tail, spec_.series_tol);
    throw Error(ErrorKind::SeriesNotConverged, buf);
  }
  KernelJet out;
  out.K = std::move(K);
  out.tail_estimate = tail;
  return out;
}

double KernelModel::boundary_parameter(const Point& anchor, const Point& dir) const {
  if (!inside(anchor)) throw Error(ErrorKind::OutsideDomain, "anchor is not inside the domain");
  if (dir.norm() == 0.0) throw Error(ErrorKind::ConfigError, "zero direction");
  auto quadratic_exit = [](const Point& a, const Point& d) {
    const double A = d.squaredNorm();
    const double B = 2.0 * std::real(d.dot(a));
    const double C = a.squaredNorm() - 1.0;
    return (-B + std::sqrt(B * B - 4.0 * A * C)) / (2.0 * A);
  };
  switch (spec_.kind) {
    case DomainKind::UnitBall: return quadratic_exit(anchor, dir);
    case DomainKind::AffineImage:
      return quadratic_exit(finv_ * (anchor - spec_.affine_translation), finv_ * dir);
    case DomainKind::ReinhardtSeries: {
      double reach = 0.0;
      for (int j = 0; j < spec_.dim; ++j) reach += spec_.shadow.axis_extent(j, 1.0);
      const double step = std::sqrt(reach) / dir.norm() / 256.0;
      double lo = 0.0, hi = step;
      while (inside(anchor + hi * dir)) {
        lo = hi;
        hi += step;
        if (hi > 1024.0 * step) throw Error(ErrorKind::RootNotBracketed, "no boundary crossing along direction");
      }
      for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (inside(anchor + mid * dir) ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
  }
  return 0.0;
}

}  // namespace bergman
