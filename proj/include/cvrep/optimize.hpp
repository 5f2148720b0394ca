#pragma once

// Small derivative-free optimisers. The objectives here are cheap to state but
// noisy at the 1e-10 level (quadrature, truncation), so simplex and
// golden-section searches are a better fit than gradient methods.

#include <functional>
#include <span>
#include <vector>

namespace cvrep {

using Objective = std::function<double(std::span<const double>)>;

struct Bounds {
  std::vector<double> lower;
  std::vector<double> upper;
};

struct NelderMeadOptions {
  double initial_step = 0.1;  // relative to the box width when bounds are given
  /// Converged when the simplex spans at most x_tolerance in every
  /// coordinate, or when its values agree to f_tolerance relative to the best.
  double x_tolerance = 1e-8;
  double f_tolerance = 1e-12;
  int max_evaluations = 4000;
};

struct OptimResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Minimises `f` from `start`. With `bounds`, the simplex is clamped into the
/// box and initial_step is a fraction of each side.
OptimResult nelder_mead(const Objective& f, std::vector<double> start, const NelderMeadOptions& options = {},
                        const Bounds* bounds = nullptr);

/// Bounded Nelder-Mead from `start` plus restarts from a fixed set of points
/// inside the box (a scaled Halton sequence), keeping the best.
OptimResult nelder_mead_restarts(const Objective& f, std::vector<double> start, const Bounds& bounds,
                                 int restarts, const NelderMeadOptions& options = {});

struct ScalarResult {
  double x = 0.0;
  double value = 0.0;
};

ScalarResult golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                                     double tolerance = 1e-9);

/// Root of a continuous function bracketed by [lo, hi] (bisection).
double bisect_root(const std::function<double(double)>& f, double lo, double hi, double tolerance = 1e-9);

}  // namespace cvrep
