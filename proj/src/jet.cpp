#include "bergman/jet.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>

#include "bergman/error.hpp"

namespace bergman {
namespace {

using Mono = std::array<int, 2 * kMaxDim>;

// Dense layout for one complex dimension: monomials in 2n variables of total
// degree <= kJetOrder in graded order, plus precomputed product and
// derivative tables.
struct Layout {
  int dim = 0;
  int nvars = 0;
  std::vector<Mono> monos;
  std::vector<int> degree;
  std::array<std::size_t, kJetOrder + 2> degree_end{};  // monos with deg < k end at [k]
  std::vector<int> lookup;                               // base-(kJetOrder+1) key -> slot
  // product triples (i, j, k) sorted by deg(k); prefix end per max result degree
  std::vector<std::array<std::uint16_t, 3>> products;
  std::array<std::size_t, kJetOrder + 1> products_end{};
  // deriv[v][b] = (slot of b + e_v, factor b_v + 1), for deg(b) < kJetOrder
  std::vector<std::vector<std::pair<int, double>>> deriv;
  std::vector<int> conj_slot;
  std::vector<double> factorial_weight;  // α! β!

  int key(const Mono& m) const {
    int k = 0;
    for (int v = 0; v < nvars; ++v) k = k * (kJetOrder + 1) + m[v];
    return k;
  }
  int slot(const Mono& m) const {
    int tot = 0;
    for (int v = 0; v < nvars; ++v) tot += m[v];
    if (tot > kJetOrder) return -1;
    return lookup[key(m)];
  }
};

void enumerate(int nvars, int var, int remaining, Mono& cur, std::vector<Mono>& out) {
  if (var == nvars) {
    out.push_back(cur);
    return;
  }
  for (int e = 0; e <= remaining; ++e) {
    cur[var] = e;
    enumerate(nvars, var + 1, remaining - e, cur, out);
  }
  cur[var] = 0;
}

std::unique_ptr<Layout> build_layout(int dim) {
  auto L = std::make_unique<Layout>();
  L->dim = dim;
  L->nvars = 2 * dim;
  Mono cur{};
  std::vector<Mono> all;
  enumerate(L->nvars, 0, kJetOrder, cur, all);
  auto deg = [&](const Mono& m) {
    int s = 0;
    for (int v = 0; v < L->nvars; ++v) s += m[v];
    return s;
  };
  // graded, then reverse-lexicographic by exponents for a stable canonical order
  std::stable_sort(all.begin(), all.end(), [&](const Mono& a, const Mono& b) {
    int da = deg(a), db = deg(b);
    if (da != db) return da < db;
    return std::lexicographical_compare(b.begin(), b.begin() + L->nvars, a.begin(),
                                        a.begin() + L->nvars);
  });
  L->monos = all;
  int keyspace = 1;
  for (int v = 0; v < L->nvars; ++v) keyspace *= (kJetOrder + 1);
  L->lookup.assign(keyspace, -1);
  for (std::size_t i = 0; i < all.size(); ++i) {
    L->degree.push_back(deg(all[i]));
    L->lookup[L->key(all[i])] = static_cast<int>(i);
  }
  for (int k = 0; k <= kJetOrder + 1; ++k) {
    L->degree_end[k] = static_cast<std::size_t>(
        std::count_if(L->degree.begin(), L->degree.end(), [k](int d) { return d < k; }));
  }
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = 0; j < all.size(); ++j) {
      if (L->degree[i] + L->degree[j] > kJetOrder) continue;
      Mono m{};
      for (int v = 0; v < L->nvars; ++v) m[v] = all[i][v] + all[j][v];
      L->products.push_back({static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(j),
                             static_cast<std::uint16_t>(L->slot(m))});
    }
  }
  std::stable_sort(L->products.begin(), L->products.end(),
                   [&](const auto& a, const auto& b) { return L->degree[a[2]] < L->degree[b[2]]; });
  for (int k = 0; k <= kJetOrder; ++k) {
    L->products_end[k] = static_cast<std::size_t>(std::count_if(
        L->products.begin(), L->products.end(), [&](const auto& p) { return L->degree[p[2]] <= k; }));
  }
  L->deriv.resize(L->nvars);
  for (int v = 0; v < L->nvars; ++v) {
    L->deriv[v].assign(all.size(), {-1, 0.0});
    for (std::size_t b = 0; b < all.size(); ++b) {
      if (L->degree[b] >= kJetOrder) continue;
      Mono m = all[b];
      m[v] += 1;
      L->deriv[v][b] = {L->slot(m), static_cast<double>(m[v])};
    }
  }
  L->conj_slot.resize(all.size());
  L->factorial_weight.resize(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    Mono m{};
    for (int j = 0; j < dim; ++j) {
      m[j] = all[i][dim + j];
      m[dim + j] = all[i][j];
    }
    L->conj_slot[i] = L->slot(m);
    double w = 1.0;
    for (int v = 0; v < L->nvars; ++v) w *= std::tgamma(all[i][v] + 1.0);
    L->factorial_weight[i] = w;
  }
  return L;
}

const Layout& layout(int dim) {
  static std::array<std::unique_ptr<Layout>, kMaxDim + 1> cache;
  static std::once_flag flags[kMaxDim + 1];
  if (dim < 1 || dim > kMaxDim) {
    throw std::invalid_argument("jet dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  }
  std::call_once(flags[dim], [dim] { cache[dim] = build_layout(dim); });
  return *cache[dim];
}

Mono to_mono(int dim, const Exponents& alpha, const Exponents& beta) {
  Mono m{};
  for (int j = 0; j < dim; ++j) {
    m[j] = alpha[j];
    m[dim + j] = beta[j];
  }
  return m;
}

}  // namespace

Exponents unit(int j) {
  Exponents e{};
  e[j] = 1;
  return e;
}

Exponents operator+(Exponents a, const Exponents& b) {
  for (int j = 0; j < kMaxDim; ++j) a[j] += b[j];
  return a;
}

Jet::Jet(int dim, const Point& base, int order) : dim_(dim), order_(order) {
  const Layout& L = layout(dim);
  if (base.size() != dim) throw std::invalid_argument("jet base point has wrong dimension");
  if (order < 0 || order > kJetOrder) throw std::invalid_argument("jet order out of range");
  for (int j = 0; j < dim; ++j) base_[j] = base[j];
  coeffs_.assign(L.monos.size(), cplx{0.0, 0.0});
}

Jet Jet::constant(int dim, const Point& base, cplx c, int order) {
  Jet j(dim, base, order);
  j.coeffs_[0] = c;
  return j;
}

Point Jet::base() const {
  Point p(dim_);
  for (int j = 0; j < dim_; ++j) p[j] = base_[j];
  return p;
}

std::size_t Jet::index_of(const Exponents& alpha, const Exponents& beta) const {
  const Layout& L = layout(dim_);
  int s = L.slot(to_mono(dim_, alpha, beta));
  if (s < 0) throw std::out_of_range("bidegree exceeds jet truncation order");
  return static_cast<std::size_t>(s);
}

int Jet::degree_of(std::size_t idx) const { return layout(dim_).degree[idx]; }

void Jet::exponents_of(std::size_t idx, Exponents& alpha, Exponents& beta) const {
  const Layout& L = layout(dim_);
  alpha = {};
  beta = {};
  for (int j = 0; j < dim_; ++j) {
    alpha[j] = L.monos[idx][j];
    beta[j] = L.monos[idx][dim_ + j];
  }
}

cplx Jet::taylor(const Exponents& alpha, const Exponents& beta) const {
  std::size_t idx = index_of(alpha, beta);
  if (degree_of(idx) > order_) throw std::out_of_range("coefficient above valid jet order");
  return coeffs_[idx];
}

void Jet::set_taylor(const Exponents& alpha, const Exponents& beta, cplx v) {
  coeffs_[index_of(alpha, beta)] = v;
}

cplx Jet::derivative(const Exponents& alpha, const Exponents& beta) const {
  std::size_t idx = index_of(alpha, beta);
  if (degree_of(idx) > order_) throw std::out_of_range("coefficient above valid jet order");
  return coeffs_[idx] * layout(dim_).factorial_weight[idx];
}

void Jet::check_compatible(const Jet& o) const {
  if (dim_ != o.dim_) throw std::invalid_argument("jet dimension mismatch");
  for (int j = 0; j < dim_; ++j) {
    if (base_[j] != o.base_[j]) throw std::invalid_argument("jet base point mismatch");
  }
}

Jet Jet::d(int var) const {
  const Layout& L = layout(dim_);
  if (order_ == 0) throw std::logic_error("cannot differentiate an order-0 jet");
  Jet out(*this);
  out.order_ = order_ - 1;
  const auto& table = L.deriv[var];
  const std::size_t end = L.degree_end[out.order_ + 1];
  for (std::size_t b = 0; b < end; ++b) {
    out.coeffs_[b] = coeffs_[table[b].first] * table[b].second;
  }
  std::fill(out.coeffs_.begin() + static_cast<std::ptrdiff_t>(end), out.coeffs_.end(), cplx{});
  return out;
}

Jet Jet::conj() const {
  const Layout& L = layout(dim_);
  Jet out(*this);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) out.coeffs_[L.conj_slot[i]] = std::conj(coeffs_[i]);
  // The conjugate function is expanded about the same base point; the
  // base coordinates themselves are unchanged.
  return out;
}

Jet Jet::truncated(int order) const {
  Jet out(*this);
  if (order >= order_) return out;
  const Layout& L = layout(dim_);
  out.order_ = order;
  std::fill(out.coeffs_.begin() + static_cast<std::ptrdiff_t>(L.degree_end[order + 1]), out.coeffs_.end(),
            cplx{});
  return out;
}

double Jet::hermitian_defect() const {
  const Layout& L = layout(dim_);
  double worst = 0.0;
  const std::size_t end = L.degree_end[order_ + 1];
  for (std::size_t i = 0; i < end; ++i) {
    worst = std::max(worst, std::abs(coeffs_[i] - std::conj(coeffs_[L.conj_slot[i]])));
  }
  return worst;
}

Jet& Jet::operator+=(const Jet& o) {
  check_compatible(o);
  order_ = std::min(order_, o.order_);
  const std::size_t end = layout(dim_).degree_end[order_ + 1];
  for (std::size_t i = 0; i < end; ++i) coeffs_[i] += o.coeffs_[i];
  std::fill(coeffs_.begin() + static_cast<std::ptrdiff_t>(end), coeffs_.end(), cplx{});
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  check_compatible(o);
  order_ = std::min(order_, o.order_);
  const std::size_t end = layout(dim_).degree_end[order_ + 1];
  for (std::size_t i = 0; i < end; ++i) coeffs_[i] -= o.coeffs_[i];
  std::fill(coeffs_.begin() + static_cast<std::ptrdiff_t>(end), coeffs_.end(), cplx{});
  return *this;
}

Jet& Jet::operator*=(cplx c) {
  for (auto& v : coeffs_) v *= c;
  return *this;
}

Jet& Jet::operator*=(const Jet& o) {
  *this = *this * o;
  return *this;
}

Jet Jet::operator-() const {
  Jet out(*this);
  for (auto& v : out.coeffs_) v = -v;
  return out;
}

Jet operator*(const Jet& a, const Jet& b) {
  a.check_compatible(b);
  const Layout& L = layout(a.dim_);
  Jet out(a);
  out.order_ = std::min(a.order_, b.order_);
  std::fill(out.coeffs_.begin(), out.coeffs_.end(), cplx{});
  const std::size_t end = L.products_end[out.order_];
  const cplx* pa = a.coeffs_.data();
  const cplx* pb = b.coeffs_.data();
  cplx* po = out.coeffs_.data();
  for (std::size_t t = 0; t < end; ++t) {
    const auto& p = L.products[t];
    po[p[2]] += pa[p[0]] * pb[p[1]];
  }
  return out;
}

Jet compose(const Jet& a, const std::array<cplx, kJetOrder + 1>& taylor) {
  Jet u(a);
  u.coeffs_[0] = 0.0;
  Jet out = Jet::constant(a.dim_, a.base(), taylor[0], a.order_);
  Jet power = u;
  for (int k = 1; k <= a.order_; ++k) {
    out += power * taylor[k];
    if (k < a.order_) power = power * u;
  }
  return out;
}

Jet reciprocal(const Jet& b, double floor) {
  const cplx b0 = b.value();
  if (!(std::abs(b0) > floor)) {
    throw Error(ErrorKind::DivisionByZeroJet, "divisor value below floor");
  }
  std::array<cplx, kJetOrder + 1> t{};
  cplx inv = 1.0 / b0;
  cplx term = inv;
  for (int k = 0; k <= kJetOrder; ++k) {
    t[k] = term;
    term *= -inv;
  }
  return compose(b, t);
}

Jet divide(const Jet& a, const Jet& b, double floor) { return a * reciprocal(b, floor); }

Jet operator/(const Jet& a, const Jet& b) { return divide(a, b); }

Jet operator/(cplx c, const Jet& a) { return reciprocal(a) * c; }

namespace {

double positive_real_value(const Jet& a, const char* what) {
  const cplx v = a.value();
  if (!(v.real() > 0.0) || std::abs(v.imag()) > 1e-10 * std::abs(v.real())) {
    throw Error(ErrorKind::DomainError, std::string(what) + " requires a positive real value");
  }
  return v.real();
}

}  // namespace

Jet log(const Jet& a) {
  const double v = positive_real_value(a, "log");
  std::array<cplx, kJetOrder + 1> t{};
  t[0] = std::log(v);
  double p = 1.0 / v;
  for (int k = 1; k <= kJetOrder; ++k) {
    t[k] = ((k % 2 == 1) ? 1.0 : -1.0) * p / k;
    p /= v;
  }
  return compose(a, t);
}

Jet pow(const Jet& a, double exponent) {
  std::array<cplx, kJetOrder + 1> t{};
  const bool integral = exponent == std::floor(exponent);
  if (integral) {
    const cplx v = a.value();
    if (v == cplx{} && exponent < 0) throw Error(ErrorKind::DomainError, "negative power of zero");
    cplx binom = 1.0;
    for (int k = 0; k <= kJetOrder; ++k) {
      t[k] = binom * std::pow(v, exponent - k);
      binom *= (exponent - k) / (k + 1.0);
    }
    return compose(a, t);
  }
  const double v = positive_real_value(a, "pow");
  double binom = 1.0;
  for (int k = 0; k <= kJetOrder; ++k) {
    t[k] = binom * std::pow(v, exponent - k);
    binom *= (exponent - k) / (k + 1.0);
  }
  return compose(a, t);
}

Jet sqrt(const Jet& a) { return pow(a, 0.5); }

Jet exp(const Jet& a) {
  std::array<cplx, kJetOrder + 1> t{};
  const cplx e = std::exp(a.value());
  double fact = 1.0;
  for (int k = 0; k <= kJetOrder; ++k) {
    if (k > 0) fact *= k;
    t[k] = e / fact;
  }
  return compose(a, t);
}

std::vector<Jet> seed_coordinates(const Point& z) {
  const int n = static_cast<int>(z.size());
  if (n < 1) throw std::invalid_argument("seed_coordinates needs n >= 1");
  std::vector<Jet> out;
  out.reserve(2 * n);
  for (int j = 0; j < n; ++j) {
    Jet c = Jet::constant(n, z, z[j]);
    c.set_taylor(unit(j), Exponents{}, 1.0);
    out.push_back(std::move(c));
  }
  for (int j = 0; j < n; ++j) {
    Jet c = Jet::constant(n, z, std::conj(z[j]));
    c.set_taylor(Exponents{}, unit(j), 1.0);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace bergman
