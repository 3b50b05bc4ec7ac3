#pragma once

// Boundary-approach scans along inward rays and limit extrapolation.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bergman/curvcheck.hpp"
#include "bergman/domains.hpp"

namespace bergman {

enum class PlaneChoice { HorizontalRandom, HorizontalFixed, Sigma0 };

const char* to_string(PlaneChoice p);
/// "horizontal_random", "horizontal_fixed", "sigma0". Throws ConfigError.
PlaneChoice plane_choice_from_string(const std::string& s);

/// Geometric grid from `first` down to `last` (inclusive) with the given ratio.
std::vector<double> geometric_epsilons(double first, double last, double ratio);

struct RaySpec {
  Point anchor;
  Point direction;
  std::vector<double> epsilons;
  PlaneChoice plane = PlaneChoice::HorizontalRandom;
  /// (1,0) part of X for HorizontalFixed; projected onto H at each row.
  Point fixed_X;
  std::uint64_t seed = 1;

  /// Throws ConfigError.
  void validate(int dim) const;
};

/// Point anchor + t·dir with φ = -ε, |φ + ε| < 1e-12 (1 + ε). Throws
/// RootNotBracketed.
Point locate_level(const KernelModel& model, const Point& anchor, const Point& dir, double eps);

struct Extrapolation {
  double limit = 0.0;
  double slope = 0.0;
  double curvature = 0.0;  // ε² coefficient of the quadratic model
  double residual = 0.0;   // RMS misfit on the fitted rows
};

/// Least-squares fit of L + cε (or L + cε + dε²) to the rows with the m
/// smallest ε. Throws InsufficientRows.
Extrapolation extrapolate(const std::vector<double>& eps, const std::vector<double>& values, int m,
                          bool quadratic = false);

/// Exponent p in |k(ε) - L| ≈ C ε^p over the last m rows; empty when the
/// deviations vanish.
std::optional<double> fit_order(const std::vector<double>& eps, const std::vector<double>& values, double limit,
                                int m);

struct ScanOptions {
  int fit_rows = 3;
  bool quadratic = false;
  double tolerance = 1e-2;
  int jobs = 1;
};

struct ScanReport {
  std::vector<CurvatureSample> rows;  // decreasing ε
  std::vector<double> column;         // curvature of the chosen plane per row
  PlaneChoice plane = PlaneChoice::HorizontalRandom;
  std::uint64_t seed = 0;
  Extrapolation fit;
  std::optional<double> fit_order;
  double extrapolated_limit = 0.0;
  double L1_limit = 0.0;
  double L2_limit = 0.0;
  double target = 0.0;
  bool pass = false;
  /// Non-fatal findings: non-monotone series tail, large fit residual.
  std::vector<std::string> warnings;
};

/// Horizontal vector used for row `row` of a scan.
Field scan_plane_vector(const RaySpec& ray, const FoliationFrame& F, std::size_t row);

ScanReport scan(const KernelModel& model, const RaySpec& ray, const ScanOptions& opt = {});

}  // namespace bergman
