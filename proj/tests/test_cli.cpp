#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bergman/cli.hpp"
#include "bergman/error.hpp"

using namespace bergman;
using namespace bergman::cli;
namespace fs = std::filesystem;

namespace {

struct Sandbox {
  fs::path dir;

  explicit Sandbox(const std::string& name) : dir(fs::temp_directory_path() / ("bergman-lab-test-" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }

  std::string config(const std::string& name, const std::string& body) const {
    const fs::path p = dir / name;
    std::ofstream(p) << body;
    return p.string();
  }

  std::string read(const std::string& name) const {
    std::ifstream in(dir / name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  nlohmann::json json(const std::string& name) const { return nlohmann::json::parse(read(name)); }
};

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

ErrorKind kind_of(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::DomainError;
}

}  // namespace

TEST_CASE("complex scalars") {
  CHECK(parse_complex("1.5") == cplx(1.5, 0.0));
  CHECK(parse_complex("-2i") == cplx(0.0, -2.0));
  CHECK(parse_complex("i") == cplx(0.0, 1.0));
  CHECK(parse_complex("0.3+0.5i") == cplx(0.3, 0.5));
  CHECK(parse_complex("1e-3-2.5e-2i") == cplx(1e-3, -2.5e-2));
  CHECK(parse_complex(" +4-i ") == cplx(4.0, -1.0));
  CHECK_THROWS_AS(parse_complex("abc"), Error);
  CHECK_THROWS_AS(parse_complex("1+2j"), Error);
  CHECK_THROWS_AS(parse_complex(""), Error);
  const cplx z(0.1, -1.0 / 3.0);
  CHECK(parse_complex(format_complex(z)) == z);
  CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("config defaults and strictness") {
  const RunConfig ball = parse("# comment\ndomain.kind = unit_ball\n\ndomain.dim = 3  # trailing\n");
  CHECK(ball.domain.dim == 3);
  CHECK(ball.identities.size() == all_identities().size());
  CHECK(ball.epsilons.front() == 0.4);
  CHECK(ball.epsilons.back() == doctest::Approx(1e-4));
  CHECK(ball.direction == Point::Unit(3, 0));

  const RunConfig series = parse("domain.kind = reinhardt_series\ndomain.shadow_quadratic = 0.5, 0.5\n");
  CHECK(series.domain.shadow.linear == std::vector<double>{1.0, 1.0});
  CHECK(series.epsilons.back() == doctest::Approx(0.05));

  const RunConfig aff = parse(
      "domain.kind = affine_image\ndomain.affine_matrix = 2, 0, 0.5i, 1\ndomain.affine_translation = 1, -1i\n");
  CHECK(aff.domain.affine_matrix(1, 0) == cplx(0.0, 0.5));
  CHECK(aff.anchor == aff.domain.affine_translation);

  const RunConfig sphere = parse("domain.kind = sphere\nverify.identities = A2, A9\n");
  CHECK(sphere.sphere);
  CHECK(sphere.identities == std::vector<IdentityId>{IdentityId::A2, IdentityId::A9});

  try {
    parse("domain.kind = unit_ball\nscan.ratio = 0.5\n");
    FAIL("unknown key accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigError);
    CHECK(std::string(e.what()).find("scan.ratio") != std::string::npos);
  }
  CHECK(kind_of("domain.dim = 2\ndomain.dim = 3\n") == ErrorKind::ConfigError);
  CHECK(kind_of("domain.dim\n") == ErrorKind::ConfigError);
  CHECK(kind_of("domain.dim = two\n") == ErrorKind::ConfigError);
  CHECK(kind_of("domain.dim = 9\n") == ErrorKind::ConfigError);
  CHECK(kind_of("domain.kind = torus\n") == ErrorKind::ConfigError);
  CHECK(kind_of("scan.epsilons =\n") == ErrorKind::ConfigError);
  CHECK(kind_of("scan.epsilons = 0.1, 0.2\n") == ErrorKind::ConfigError);
  CHECK(kind_of("scan.epsilons = 0.1, -0.2\n") == ErrorKind::ConfigError);
  CHECK(kind_of("scan.epsilons = 0.1\nscan.epsilon_last = 0.01\n") == ErrorKind::ConfigError);
  CHECK(kind_of("tolerance.identity = 0\n") == ErrorKind::ConfigError);
  CHECK(kind_of("tolerance.scan = -1\n") == ErrorKind::ConfigError);
  CHECK(kind_of("verify.identities = b4, b99\n") == ErrorKind::ConfigError);
  CHECK(kind_of("scan.direction = 1, 2, 3\n") == ErrorKind::ConfigError);
  CHECK(kind_of("scan.quadratic = yes\n") == ErrorKind::ConfigError);
  CHECK(kind_of("domain.kind = reinhardt_series\ndomain.shadow_linear = 1\n") == ErrorKind::ConfigError);
  CHECK(kind_of("domain.kind = reinhardt_series\ndomain.shadow_linear = 1, -1\n") == ErrorKind::ConfigError);
}

TEST_CASE("usage and configuration errors exit with 2") {
  Sandbox box("usage");
  const std::string bad = box.config("bad.conf", "domain.kind = unit_ball\nscan.wobble = 3\n");
  Outcome o = invoke({"verify", "--config", bad, "--out", box.dir.string()});
  CHECK(o.code == kExitConfig);
  CHECK(o.err.find("scan.wobble") != std::string::npos);
  CHECK(invoke({"verify"}).code == kExitConfig);
  CHECK(invoke({"explode", "--config", bad}).code == kExitConfig);
  CHECK(invoke({"kernel", "--config", (box.dir / "missing.conf").string()}).code == kExitConfig);
  CHECK(invoke({"kernel", "--config", bad, "--jobs", "0"}).code == kExitConfig);
  const std::string empty = box.config("empty.conf", "domain.kind = unit_ball\nscan.epsilons =\n");
  CHECK(invoke({"klembeck", "--config", empty, "--out", box.dir.string()}).code == kExitConfig);
  const std::string sphere = box.config("sphere.conf", "domain.kind = sphere\n");
  CHECK(invoke({"klembeck", "--config", sphere, "--out", box.dir.string()}).code == kExitConfig);
}

TEST_CASE("kernel command") {
  Sandbox box("kernel");
  const std::string cfg = box.config("ball.conf", "domain.kind = unit_ball\ndomain.dim = 2\n");
  Outcome o = invoke({"kernel", "--config", cfg, "--out", box.dir.string()});
  REQUIRE(o.code == kExitPass);
  CHECK(o.out.find("0.2026423672846") != std::string::npos);
  const auto j = box.json("kernel.json");
  CHECK(j["schema_version"] == kSchemaVersion);
  CHECK(std::abs(j["K"].get<double>() - 2.0 / (M_PI * M_PI)) < 1e-15);
  CHECK(j["foliation"] == "OutsideCollar");

  const std::string inner = box.config("inner.conf", "domain.kind = unit_ball\nkernel.point = 0.6, 0.3i\n");
  REQUIRE(invoke({"kernel", "--config", inner, "--out", box.dir.string()}).code == kExitPass);
  const auto k = box.json("kernel.json");
  const double s = 1.0 - 0.45;
  CHECK(k["one_minus_r_phi"].get<double>() == doctest::Approx(1.0 / 0.45).epsilon(1e-12));
  CHECK(k["K"].get<double>() == doctest::Approx(2.0 / (M_PI * M_PI) / (s * s * s)).epsilon(1e-13));

  const std::string outside = box.config("out.conf", "domain.kind = unit_ball\nkernel.point = 0.9, 0.9\n");
  o = invoke({"kernel", "--config", outside, "--out", box.dir.string()});
  CHECK(o.code == kExitFailure);
  CHECK(o.err.find("OutsideDomain") != std::string::npos);

  const std::string series = box.config("series.conf",
                                        "domain.kind = reinhardt_series\ndomain.shadow_quadratic = 0.5, 0.5\n"
                                        "domain.degree = 40\nkernel.point = 0.75, 0\ncache.dir = " +
                                            (box.dir / "cache").string() + "\n");
  o = invoke({"kernel", "--config", series, "--out", box.dir.string()});
  CHECK(o.code == kExitFailure);
  CHECK(o.err.find("SeriesNotConverged") != std::string::npos);
  CHECK(o.err.find("tail estimate") != std::string::npos);
}

TEST_CASE("verify command") {
  Sandbox box("verify");
  const std::string ball = box.config("ball.conf", "domain.kind = unit_ball\nverify.points = 4\n");
  Outcome o = invoke({"verify", "--config", ball, "--out", box.dir.string()});
  CHECK(o.code == kExitPass);
  const std::string csv = box.read("verify.csv");
  CHECK(csv.rfind("identity_id,point,residual,relative_residual,pass\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 4 * static_cast<long>(all_identities().size()));
  CHECK(box.json("verify.json")["pass"] == true);

  const std::string bad = box.config("bad.conf", "domain.kind = unit_ball\nverify.points = 3\nverify.identities = A2\n"
                                                 "debug.pairing_constant = 0.25\n");
  o = invoke({"verify", "--config", bad, "--out", box.dir.string()});
  CHECK(o.code == kExitFailure);
  CHECK(box.json("verify.json")["max_relative_residual"]["A2"].get<double>() > 0.1);

  const std::string sphere = box.config("sphere.conf", "domain.kind = sphere\ndomain.dim = 3\nverify.points = 3\n");
  o = invoke({"verify", "--config", sphere, "--out", box.dir.string()});
  CHECK(o.code == kExitPass);
  const auto j = box.json("verify.json");
  CHECK(j["skipped"].get<int>() > 0);
  CHECK(j["failed"] == 0);
  CHECK(j["max_relative_residual"].contains("A6"));
  CHECK_FALSE(j["max_relative_residual"].contains("b4"));
  CHECK(box.read("verify.csv").find(",,NotBergmanPhi") != std::string::npos);
}

TEST_CASE("klembeck command and byte-identical reruns") {
  Sandbox box("klembeck");
  const std::string cfg = box.config("ball3.conf",
                                     "domain.kind = unit_ball\ndomain.dim = 3\nscan.direction = 0.6+0.2i, 0, -0.3+0.5i\n"
                                     "scan.epsilon_last = 1e-3\n");
  REQUIRE(invoke({"klembeck", "--config", cfg, "--out", (box.dir / "a").string(), "--jobs", "1"}).code == kExitPass);
  REQUIRE(invoke({"klembeck", "--config", cfg, "--out", (box.dir / "b").string(), "--jobs", "3"}).code == kExitPass);
  const std::string a = box.read("a/klembeck.csv"), b = box.read("b/klembeck.csv");
  CHECK(a == b);
  CHECK(a.rfind("epsilon,k_g_H,k_g_sigma0,k_theta,r,f,phi_over_f,L1,L2,tail_estimate\n", 0) == 0);
  const auto j = box.json("a/klembeck.json");
  CHECK(j["schema_version"] == kSchemaVersion);
  CHECK(std::abs(j["extrapolated_limit"].get<double>() + 1.0) < 1e-9);
  CHECK(j["target"] == -1.0);
  CHECK(j["pass"] == true);

  REQUIRE(invoke({"klembeck", "--config", cfg, "--out", (box.dir / "c").string(), "--seed", "7"}).code == kExitPass);
  CHECK(box.json("c/klembeck.json")["seed"] == 7);
}

TEST_CASE("cache directory resolution") {
  RunConfig cfg;
  cfg.cache_dir = "/from/config";
  ::unsetenv("BERGMAN_LAB_CACHE");
  CHECK(resolve_cache_dir(cfg) == "/from/config");
  ::setenv("BERGMAN_LAB_CACHE", "/from/env", 1);
  CHECK(resolve_cache_dir(cfg) == "/from/env");
  ::unsetenv("BERGMAN_LAB_CACHE");

  Sandbox box("cache");
  const std::string cfg_path = box.config("s.conf", "domain.kind = reinhardt_series\ndomain.degree = 30\n"
                                                    "domain.quadrature_order = 32\nkernel.point = 0.2, 0.1\n"
                                                    "cache.dir = " + (box.dir / "unused").string() + "\n");
  ::setenv("BERGMAN_LAB_CACHE", (box.dir / "env").string().c_str(), 1);
  const int code = invoke({"kernel", "--config", cfg_path, "--out", box.dir.string()}).code;
  ::unsetenv("BERGMAN_LAB_CACHE");
  CHECK(code == kExitPass);
  CHECK(fs::exists(box.dir / "env"));
  CHECK_FALSE(fs::exists(box.dir / "unused"));
}
