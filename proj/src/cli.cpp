#include "bergman/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "bergman/error.hpp"
#include "bergman/parallel.hpp"

namespace bergman::cli {

namespace {

using Json = nlohmann::json;

Error config_error(const std::string& key, const std::string& what) {
  return Error(ErrorKind::ConfigError, key + ": " + what);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  if (!s.empty() && s.back() == ',') out.push_back("");
  return out;
}

bool parse_real(const std::string& s, double& v) {
  if (s.empty()) return false;
  const char* b = s.data();
  if (*b == '+') ++b;
  const auto [p, ec] = std::from_chars(b, s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size() && std::isfinite(v);
}

class Entries {
 public:
  void add(const std::string& key, const std::string& value) {
    if (!values_.emplace(key, value).second) throw config_error(key, "duplicate key");
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  const std::string* raw(const std::string& key) {
    const auto it = values_.find(key);
    if (it == values_.end()) return nullptr;
    used_.insert(key);
    return &it->second;
  }

  void real(const std::string& key, double& out) {
    if (const auto* v = raw(key)) {
      if (!parse_real(*v, out)) throw config_error(key, "expected a real number, got '" + *v + "'");
    }
  }

  void integer(const std::string& key, int& out) {
    if (const auto* v = raw(key)) {
      const auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
      if (ec != std::errc() || p != v->data() + v->size()) {
        throw config_error(key, "expected an integer, got '" + *v + "'");
      }
    }
  }

  void unsigned64(const std::string& key, std::uint64_t& out) {
    if (const auto* v = raw(key)) {
      const auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
      if (ec != std::errc() || p != v->data() + v->size()) {
        throw config_error(key, "expected a non-negative integer, got '" + *v + "'");
      }
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const auto* v = raw(key)) {
      if (*v == "true") out = true;
      else if (*v == "false") out = false;
      else throw config_error(key, "expected true or false, got '" + *v + "'");
    }
  }

  void text(const std::string& key, std::string& out) {
    if (const auto* v = raw(key)) out = *v;
  }

  std::vector<double> reals(const std::string& key) {
    std::vector<double> out;
    if (const auto* v = raw(key)) {
      if (v->empty()) return out;
      for (const auto& item : split_list(*v)) {
        double x;
        if (!parse_real(item, x)) throw config_error(key, "expected a list of real numbers, got '" + *v + "'");
        out.push_back(x);
      }
    }
    return out;
  }

  std::optional<Point> point(const std::string& key, int dim) {
    const auto* v = raw(key);
    if (v == nullptr) return std::nullopt;
    const auto items = split_list(*v);
    if (static_cast<int>(items.size()) != dim) {
      throw config_error(key, "expected " + std::to_string(dim) + " complex entries");
    }
    Point z(dim);
    try {
      for (int j = 0; j < dim; ++j) z[j] = parse_complex(items[j]);
    } catch (const Error&) {
      throw config_error(key, "malformed complex entry in '" + *v + "'");
    }
    return z;
  }

  void reject_unused() const {
    for (const auto& [key, value] : values_) {
      if (!used_.count(key)) throw config_error(key, "unknown key");
    }
  }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

Point center(const RunConfig& cfg) {
  if (!cfg.sphere && cfg.domain.kind == DomainKind::AffineImage) return cfg.domain.affine_translation;
  return Point::Zero(cfg.domain.dim);
}

Point unit_vector(int n, int j) {
  Point e = Point::Zero(n);
  e[j] = 1.0;
  return e;
}

Json point_json(const Point& z) {
  Json a = Json::array();
  for (int j = 0; j < z.size(); ++j) a.push_back({z[j].real(), z[j].imag()});
  return a;
}

Json domain_json(const RunConfig& cfg) {
  Json d;
  d["kind"] = cfg.sphere ? "sphere" : to_string(cfg.domain.kind);
  d["dim"] = cfg.domain.dim;
  if (!cfg.sphere && cfg.domain.kind == DomainKind::ReinhardtSeries) {
    d["shadow_linear"] = cfg.domain.shadow.linear;
    d["shadow_quadratic"] = cfg.domain.shadow.quadratic;
    d["degree"] = cfg.domain.truncation_degree;
    d["quadrature_order"] = cfg.domain.quadrature_order;
    d["series_tol"] = cfg.domain.series_tol;
  }
  if (!cfg.sphere && cfg.domain.kind == DomainKind::AffineImage) {
    Json rows = Json::array();
    for (int i = 0; i < cfg.domain.dim; ++i) rows.push_back(point_json(cfg.domain.affine_matrix.row(i).transpose()));
    d["affine_matrix"] = rows;
    d["affine_translation"] = point_json(cfg.domain.affine_translation);
  }
  return d;
}

Json header(const RunConfig& cfg, const std::string& command) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  j["domain"] = domain_json(cfg);
  j["seed"] = cfg.seed;
  return j;
}

Jet sphere_phi(const Point& z) {
  const int n = static_cast<int>(z.size());
  const auto c = seed_coordinates(z);
  Jet s = c[0] * c[n];
  for (int j = 1; j < n; ++j) s += c[j] * c[n + j];
  return s - 1.0;
}

FrameOptions frame_options(const RunConfig& cfg) {
  FrameOptions opt;
  opt.pairing = cfg.pairing;
  return opt;
}

KernelModel make_model(const RunConfig& cfg) {
  if (cfg.sphere) throw Error(ErrorKind::ConfigError, "domain.kind: sphere has no Bergman kernel for this command");
  return KernelModel(cfg.domain, resolve_cache_dir(cfg), cfg.jobs);
}

// Collar points for the identity suite: random directions from the centre,
// ε uniform in the configured range.
std::vector<Point> collar_points(const RunConfig& cfg, const KernelModel* model) {
  const int n = cfg.domain.dim;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> uni(cfg.verify_eps_min, cfg.verify_eps_max);
  std::vector<Point> dirs;
  std::vector<double> eps;
  for (int i = 0; i < cfg.verify_points; ++i) {
    Point d(n);
    for (int j = 0; j < n; ++j) d[j] = cplx(gauss(rng), gauss(rng));
    dirs.push_back(d / d.norm());
    eps.push_back(uni(rng));
  }
  std::vector<Point> pts(cfg.verify_points);
  parallel_for(pts.size(), cfg.jobs, [&](std::size_t i) {
    if (model == nullptr) pts[i] = std::sqrt(1.0 - eps[i]) * dirs[i];
    else pts[i] = locate_level(*model, center(cfg), dirs[i], eps[i]);
  });
  return pts;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

cplx parse_complex(const std::string& raw) {
  const std::string s = trim(raw);
  double re = 0.0, im = 0.0;
  if (s.empty()) throw Error(ErrorKind::ConfigError, "empty complex number");
  if (s.back() != 'i') {
    if (!parse_real(s, re)) throw Error(ErrorKind::ConfigError, "malformed complex number '" + s + "'");
    return {re, 0.0};
  }
  const std::string body = s.substr(0, s.size() - 1);
  std::size_t split = std::string::npos;
  for (std::size_t k = body.size(); k-- > 1;) {
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  const std::string re_part = split == std::string::npos ? "" : body.substr(0, split);
  std::string im_part = split == std::string::npos ? body : body.substr(split);
  if (im_part.empty() || im_part == "+" || im_part == "-") im_part += "1";
  const bool ok = (re_part.empty() || parse_real(re_part, re)) && parse_real(im_part, im);
  if (!ok) throw Error(ErrorKind::ConfigError, "malformed complex number '" + s + "'");
  return {re, im};
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_complex(cplx z) {
  char buf[80];
  std::snprintf(buf, sizeof buf, "%.17g%+.17gi", z.real(), z.imag());
  return buf;
}

std::string format_point(const Point& z) {
  std::string s;
  for (int j = 0; j < z.size(); ++j) {
    if (j) s += ' ';
    s += format_complex(z[j]);
  }
  return s;
}

RunConfig parse_config(std::istream& in) {
  Entries e;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::ConfigError, "line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw Error(ErrorKind::ConfigError, "line " + std::to_string(lineno) + ": empty key");
    e.add(key, trim(line.substr(eq + 1)));
  }

  RunConfig cfg;
  std::string kind = "unit_ball";
  e.text("domain.kind", kind);
  int n = 2;
  e.integer("domain.dim", n);
  if (n < 1 || n > kMaxDim) throw config_error("domain.dim", "must be between 1 and " + std::to_string(kMaxDim));
  if (kind == "sphere") {
    cfg.sphere = true;
    cfg.domain = DomainSpec::ball(n);
  } else {
    try {
      cfg.domain.kind = domain_kind_from_string(kind);
    } catch (const Error&) {
      throw config_error("domain.kind", "unknown domain kind '" + kind + "'");
    }
    cfg.domain.dim = n;
  }
  DomainSpec& d = cfg.domain;
  if (!cfg.sphere && d.kind == DomainKind::AffineImage) {
    d.affine_matrix = Eigen::MatrixXcd::Identity(n, n);
    if (const auto* v = e.raw("domain.affine_matrix")) {
      const auto items = split_list(*v);
      if (static_cast<int>(items.size()) != n * n) {
        throw config_error("domain.affine_matrix", "expected " + std::to_string(n * n) + " complex entries, row major");
      }
      try {
        for (int i = 0; i < n * n; ++i) d.affine_matrix(i / n, i % n) = parse_complex(items[i]);
      } catch (const Error&) {
        throw config_error("domain.affine_matrix", "malformed complex entry");
      }
    }
    d.affine_translation = e.point("domain.affine_translation", n).value_or(Point::Zero(n));
  }
  if (!cfg.sphere && d.kind == DomainKind::ReinhardtSeries) {
    d.shadow.linear = e.reals("domain.shadow_linear");
    d.shadow.quadratic = e.reals("domain.shadow_quadratic");
    if (d.shadow.linear.empty()) d.shadow.linear.assign(n, 1.0);
    if (d.shadow.quadratic.empty()) d.shadow.quadratic.assign(n, 0.0);
    if (static_cast<int>(d.shadow.linear.size()) != n || static_cast<int>(d.shadow.quadratic.size()) != n) {
      throw config_error("domain.shadow_linear", "shadow coefficient lists need domain.dim entries");
    }
    e.integer("domain.degree", d.truncation_degree);
    e.integer("domain.quadrature_order", d.quadrature_order);
    e.real("domain.series_tol", d.series_tol);
  }
  if (!cfg.sphere) d.validate();

  cfg.kernel_point = e.point("kernel.point", n).value_or(Point::Zero(n));

  if (const auto* v = e.raw("verify.identities"); v != nullptr && *v != "all") {
    for (const auto& name : split_list(*v)) {
      try {
        cfg.identities.push_back(identity_from_string(name));
      } catch (const Error&) {
        throw config_error("verify.identities", "unknown identity '" + name + "'");
      }
    }
    if (cfg.identities.empty()) throw config_error("verify.identities", "empty identity list");
  } else {
    cfg.identities = all_identities();
  }
  e.integer("verify.points", cfg.verify_points);
  if (cfg.verify_points < 1) throw config_error("verify.points", "must be positive");
  e.real("verify.epsilon_min", cfg.verify_eps_min);
  e.real("verify.epsilon_max", cfg.verify_eps_max);
  if (!(cfg.verify_eps_min > 0.0 && cfg.verify_eps_min <= cfg.verify_eps_max)) {
    throw config_error("verify.epsilon_min", "need 0 < verify.epsilon_min <= verify.epsilon_max");
  }

  cfg.anchor = e.point("scan.anchor", n).value_or(center(cfg));
  cfg.direction = e.point("scan.direction", n).value_or(unit_vector(n, 0));
  const bool closed = cfg.sphere || d.kind != DomainKind::ReinhardtSeries;
  double first = 0.4, last = closed ? 1e-4 : 0.05, ratio = closed ? 0.5 : 0.7;
  const bool geometric = e.has("scan.epsilon_first") || e.has("scan.epsilon_last") || e.has("scan.epsilon_ratio");
  e.real("scan.epsilon_first", first);
  e.real("scan.epsilon_last", last);
  e.real("scan.epsilon_ratio", ratio);
  if (e.has("scan.epsilons")) {
    if (geometric) throw config_error("scan.epsilons", "give either an explicit list or a geometric grid");
    cfg.epsilons = e.reals("scan.epsilons");
    if (cfg.epsilons.empty()) throw config_error("scan.epsilons", "empty epsilon list");
  } else {
    if (!(first > 0.0 && last > 0.0 && last <= first && ratio > 0.0 && ratio < 1.0)) {
      throw config_error("scan.epsilon_ratio", "geometric grid needs 0 < last <= first and 0 < ratio < 1");
    }
    cfg.epsilons = geometric_epsilons(first, last, ratio);
  }
  for (std::size_t i = 0; i < cfg.epsilons.size(); ++i) {
    if (!(cfg.epsilons[i] > 0.0) || (i > 0 && !(cfg.epsilons[i] < cfg.epsilons[i - 1]))) {
      throw config_error("scan.epsilons", "epsilons must be positive and strictly decreasing");
    }
  }
  if (const auto* v = e.raw("scan.plane")) {
    try {
      cfg.plane = plane_choice_from_string(*v);
    } catch (const Error&) {
      throw config_error("scan.plane", "unknown plane choice '" + *v + "'");
    }
  }
  cfg.fixed_x = e.point("scan.fixed_x", n).value_or(Point());
  e.integer("scan.fit_rows", cfg.fit_rows);
  e.boolean("scan.quadratic", cfg.quadratic);
  if (cfg.fit_rows < (cfg.quadratic ? 3 : 2)) throw config_error("scan.fit_rows", "too few rows for the fit model");

  e.real("tolerance.identity", cfg.identity_tol);
  e.real("tolerance.scan", cfg.scan_tol);
  if (!(cfg.identity_tol > 0.0)) throw config_error("tolerance.identity", "must be positive");
  if (!(cfg.scan_tol > 0.0)) throw config_error("tolerance.scan", "must be positive");

  e.text("output.dir", cfg.out_dir);
  e.text("cache.dir", cfg.cache_dir);
  e.unsigned64("run.seed", cfg.seed);
  e.integer("run.jobs", cfg.jobs);
  if (cfg.jobs < 1) throw config_error("run.jobs", "must be positive");
  e.real("debug.pairing_constant", cfg.pairing);
  if (!(cfg.pairing > 0.0)) throw config_error("debug.pairing_constant", "must be positive");

  e.reject_unused();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open config file " + path);
  return parse_config(in);
}

std::string resolve_cache_dir(const RunConfig& cfg) {
  if (const char* env = std::getenv("BERGMAN_LAB_CACHE"); env != nullptr && *env != '\0') return env;
  if (!cfg.cache_dir.empty()) return cfg.cache_dir;
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg != nullptr && *xdg != '\0') {
    return (std::filesystem::path(xdg) / "bergman-lab").string();
  }
  if (const char* home = std::getenv("HOME"); home != nullptr && *home != '\0') {
    return (std::filesystem::path(home) / ".cache" / "bergman-lab").string();
  }
  return "";
}

CommandResult cmd_kernel(const RunConfig& cfg) {
  const Point& z = cfg.kernel_point;
  CommandResult res;
  Json j = header(cfg, "kernel");
  j["point"] = point_json(z);
  std::ostringstream t;
  t << "domain       " << j["domain"]["kind"].get<std::string>() << " (n = " << cfg.domain.dim << ")\n";
  t << "point        " << format_point(z) << "\n";

  Jet phi;
  if (cfg.sphere) {
    phi = sphere_phi(z);
  } else {
    const KernelModel model = make_model(cfg);
    if (!model.inside(z)) throw Error(ErrorKind::OutsideDomain, "point is not inside the domain");
    const KernelJet kj = model.kernel(z);
    const Jet logK = kj.log_kernel();
    phi = kj.defining_function();
    const MetricPoint m = bergman_metric(logK);
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(m.g).eigenvalues();
    t << "K            " << format_double(kj.K.value().real()) << "\n";
    t << "log K        " << format_double(logK.value().real()) << "\n";
    t << "tail         " << format_double(kj.tail_estimate) << "\n";
    t << "metric eigs ";
    for (int k = 0; k < ev.size(); ++k) t << ' ' << format_double(ev[k]);
    t << "\n";
    j["K"] = kj.K.value().real();
    j["log_K"] = logK.value().real();
    j["tail_estimate"] = kj.tail_estimate;
    j["metric_eigenvalues"] = std::vector<double>(ev.data(), ev.data() + ev.size());
    std::vector<double> by_order(kj.K.order() + 1, 0.0);
    for (std::size_t k = 0; k < kj.K.size(); ++k) {
      double& slot = by_order[kj.K.degree_of(k)];
      slot = std::max(slot, std::abs(kj.K.coefficients()[k]));
    }
    t << "K jet order  " << kj.K.order() << ", max |coeff| by degree:";
    for (double v : by_order) t << ' ' << format_double(v);
    t << "\n";
    j["K_jet_order"] = kj.K.order();
    j["K_max_coeff_by_degree"] = by_order;
  }
  t << "phi          " << format_double(phi.value().real()) << "\n";
  j["phi"] = phi.value().real();
  try {
    const FoliationFrame F(phi, frame_options(cfg));
    const double r = F.r().value().real(), p = phi.value().real();
    t << "r            " << format_double(r) << "\n";
    t << "1 - r phi    " << format_double(1.0 - r * p) << "\n";
    j["r"] = r;
    j["one_minus_r_phi"] = 1.0 - r * p;
    if (!F.f().empty()) {
      t << "f            " << format_double(F.f().value().real()) << "\n";
      j["f"] = F.f().value().real();
    }
  } catch (const Error& ex) {
    if (ex.kind() != ErrorKind::OutsideCollar && ex.kind() != ErrorKind::SingularHessian) throw;
    t << "r, f         n/a (" << to_string(ex.kind()) << ")\n";
    j["foliation"] = to_string(ex.kind());
  }
  res.text = t.str();
  res.summary = j;
  return res;
}

CommandResult cmd_verify(const RunConfig& cfg) {
  std::optional<KernelModel> model;
  if (!cfg.sphere) model.emplace(make_model(cfg));
  const std::vector<Point> pts = collar_points(cfg, model ? &*model : nullptr);
  const std::size_t ids = cfg.identities.size();

  struct Row {
    IdentityResidual r;
    bool skipped = false;
  };
  std::vector<Row> rows(pts.size() * ids);
  parallel_for(pts.size(), cfg.jobs, [&](std::size_t i) {
    const CollarGeometry geo = model ? CollarGeometry(*model, pts[i], frame_options(cfg))
                                     : CollarGeometry(sphere_phi(pts[i]), frame_options(cfg));
    for (std::size_t k = 0; k < ids; ++k) {
      Row& row = rows[i * ids + k];
      row.r.id = cfg.identities[k];
      row.r.point = pts[i];
      try {
        row.r = residual(geo, cfg.identities[k]);
      } catch (const Error& ex) {
        if (ex.kind() != ErrorKind::NotBergmanPhi) throw;
        row.skipped = true;
      }
    }
  });

  CommandResult res;
  std::ostringstream csv;
  csv << "identity_id,point,residual,relative_residual,pass\n";
  std::map<std::string, double> worst;
  int failed = 0, skipped = 0;
  for (const Row& row : rows) {
    const std::string id = to_string(row.r.id);
    csv << id << ',' << format_point(row.r.point) << ',';
    if (row.skipped) {
      csv << ",,NotBergmanPhi\n";
      ++skipped;
      continue;
    }
    const bool ok = row.r.relative() < cfg.identity_tol;
    failed += ok ? 0 : 1;
    worst[id] = std::max(worst[id], row.r.relative());
    csv << format_double(row.r.residual) << ',' << format_double(row.r.relative()) << ',' << (ok ? "true" : "false")
        << '\n';
  }
  Json j = header(cfg, "verify");
  j["points"] = pts.size();
  j["identity_tol"] = cfg.identity_tol;
  j["checked"] = rows.size() - skipped;
  j["failed"] = failed;
  j["skipped"] = skipped;
  j["max_relative_residual"] = worst;
  j["pass"] = failed == 0;
  std::ostringstream t;
  t << "identity       max relative residual\n";
  for (const auto& [id, v] : worst) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%-14s %.3e %s\n", id.c_str(), v, v < cfg.identity_tol ? "pass" : "FAIL");
    t << buf;
  }
  if (skipped) t << skipped << " checks skipped (NotBergmanPhi)\n";
  t << (failed == 0 ? "all identities pass" : std::to_string(failed) + " checks fail") << " at tolerance "
    << cfg.identity_tol << "\n";
  res.text = t.str();
  res.csv = csv.str();
  res.summary = j;
  res.exit_code = failed == 0 ? kExitPass : kExitFailure;
  return res;
}

CommandResult cmd_klembeck(const RunConfig& cfg) {
  const KernelModel model = make_model(cfg);
  RaySpec ray;
  ray.anchor = cfg.anchor;
  ray.direction = cfg.direction;
  ray.epsilons = cfg.epsilons;
  ray.plane = cfg.plane;
  ray.fixed_X = cfg.fixed_x;
  ray.seed = cfg.seed;
  ScanOptions opt;
  opt.fit_rows = cfg.fit_rows;
  opt.quadratic = cfg.quadratic;
  opt.tolerance = cfg.scan_tol;
  opt.jobs = cfg.jobs;
  const ScanReport rep = scan(model, ray, opt);

  CommandResult res;
  std::ostringstream csv;
  csv << "epsilon,k_g_H,k_g_sigma0,k_theta,r,f,phi_over_f,L1,L2,tail_estimate\n";
  for (const auto& s : rep.rows) {
    const double v[] = {s.epsilon, s.k_g_H, s.k_g_sigma0, s.k_theta, s.r, s.f, s.phi_over_f, s.L1, s.L2,
                        s.tail_estimate};
    for (std::size_t k = 0; k < std::size(v); ++k) csv << (k ? "," : "") << format_double(v[k]);
    csv << '\n';
  }
  const int n = cfg.domain.dim;
  Json j = header(cfg, "klembeck");
  j["plane"] = to_string(rep.plane);
  j["anchor"] = point_json(cfg.anchor);
  j["direction"] = point_json(cfg.direction);
  j["epsilons"] = cfg.epsilons;
  j["fit_rows"] = cfg.fit_rows;
  j["fit_model"] = cfg.quadratic ? "quadratic" : "linear";
  j["target"] = rep.target;
  j["extrapolated_limit"] = rep.extrapolated_limit;
  j["fit_slope"] = rep.fit.slope;
  j["fit_residual"] = rep.fit.residual;
  j["fit_order"] = rep.fit_order ? Json(*rep.fit_order) : Json(nullptr);
  j["L1_limit"] = rep.L1_limit;
  j["L1_target"] = 8.0 / (n + 1.0);
  j["L2_limit"] = rep.L2_limit;
  j["L2_target"] = -16.0 / (n + 1.0);
  j["scan_tol"] = cfg.scan_tol;
  j["warnings"] = rep.warnings;
  j["pass"] = rep.pass;
  std::ostringstream t;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-12s %-22s %-22s\n", "epsilon", "curvature", "L1, L2");
  t << buf;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%-12.4e %-22.15f %.6f, %.6f\n", rep.rows[i].epsilon, rep.column[i],
                  rep.rows[i].L1, rep.rows[i].L2);
    t << buf;
  }
  std::snprintf(buf, sizeof buf, "limit %.10f  target %.10f  |diff| %.3e  %s\n", rep.extrapolated_limit, rep.target,
                std::abs(rep.extrapolated_limit - rep.target), rep.pass ? "pass" : "FAIL");
  t << buf;
  for (const auto& w : rep.warnings) t << "warning: " << w << "\n";
  res.text = t.str();
  res.csv = csv.str();
  res.summary = j;
  res.exit_code = rep.pass ? kExitPass : kExitFailure;
  return res;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bergman kernel curvature laboratory", "bergman-lab"};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir;
  int jobs = 0;
  std::uint64_t seed = 0;
  for (const char* name : {"kernel", "verify", "klembeck"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "key=value configuration file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "random seed");
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitConfig;
  }
  const CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  try {
    RunConfig cfg = load_config(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (sub->count("--jobs")) cfg.jobs = jobs;
    if (sub->count("--seed")) cfg.seed = seed;
    CommandResult res = command == "kernel" ? cmd_kernel(cfg) : command == "verify" ? cmd_verify(cfg) : cmd_klembeck(cfg);
    const std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);
    if (!res.csv.empty()) write_file(dir / (command + ".csv"), res.csv);
    write_file(dir / (command + ".json"), res.summary.dump(2) + "\n");
    out << res.text;
    return res.exit_code;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return ex.kind() == ErrorKind::ConfigError ? kExitConfig : kExitFailure;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace bergman::cli
