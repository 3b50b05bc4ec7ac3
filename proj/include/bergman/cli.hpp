#pragma once

// Front end of the bergman-lab tool: a flat key=value configuration, the
// kernel / verify / klembeck commands and their CSV and JSON reports.
//
// Exit codes: 0 pass, 1 computational or tolerance failure, 2 usage or
// configuration error.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bergman/asympt.hpp"
#include "bergman/curvcheck.hpp"
#include "bergman/domains.hpp"

namespace bergman::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr int kExitPass = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

struct RunConfig {
  DomainSpec domain;
  /// φ = |z|² - 1 instead of a Bergman kernel (verify and kernel only).
  bool sphere = false;

  Point kernel_point;

  std::vector<IdentityId> identities;
  int verify_points = 10;
  double verify_eps_min = 0.01;
  double verify_eps_max = 0.4;

  Point anchor;
  Point direction;
  std::vector<double> epsilons;
  PlaneChoice plane = PlaneChoice::HorizontalRandom;
  Point fixed_x;
  int fit_rows = 3;
  bool quadratic = false;

  double identity_tol = 1e-6;
  double scan_tol = 1e-2;

  std::string out_dir = ".";
  std::string cache_dir;
  std::uint64_t seed = 1;
  int jobs = 1;
  double pairing = kPairing;
};

/// Complex scalar written as "a", "bi", "a+bi" or "a-bi".
cplx parse_complex(const std::string& s);
std::string format_complex(cplx z);
std::string format_point(const Point& z);
/// 17 significant digits.
std::string format_double(double v);

/// Strict parser: unknown, duplicate or malformed keys throw ConfigError
/// naming the key. Missing keys take defaults that depend on the domain.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

/// BERGMAN_LAB_CACHE, else cache.dir, else $XDG_CACHE_HOME or ~/.cache.
std::string resolve_cache_dir(const RunConfig& cfg);

struct CommandResult {
  int exit_code = kExitPass;
  std::string text;  // human-readable report
  std::string csv;   // empty for kernel
  nlohmann::json summary;
};

CommandResult cmd_kernel(const RunConfig& cfg);
CommandResult cmd_verify(const RunConfig& cfg);
CommandResult cmd_klembeck(const RunConfig& cfg);

/// Full command line (without the program name). Writes <command>.csv and
/// <command>.json into the output directory and returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bergman::cli
