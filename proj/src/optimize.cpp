#include "cvrep/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cvrep {

namespace {

void clamp_into(std::vector<double>& x, const Bounds* bounds) {
  if (!bounds) return;
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], bounds->lower[i], bounds->upper[i]);
}

double safe_eval(const Objective& f, const std::vector<double>& x) {
  const double v = f(x);
  return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
}

double halton(int index, int base) {
  double f = 1.0;
  double r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * (index % base);
    index /= base;
  }
  return r;
}

}  // namespace

OptimResult nelder_mead(const Objective& f, std::vector<double> start, const NelderMeadOptions& options,
                        const Bounds* bounds) {
  const std::size_t n = start.size();
  if (n == 0) throw std::invalid_argument("nelder_mead: empty start point");
  if (bounds && (bounds->lower.size() != n || bounds->upper.size() != n)) {
    throw std::invalid_argument("nelder_mead: bounds dimension mismatch");
  }
  clamp_into(start, bounds);

  std::vector<std::vector<double>> simplex(n + 1, start);
  for (std::size_t i = 0; i < n; ++i) {
    double step = options.initial_step;
    if (bounds) {
      step *= bounds->upper[i] - bounds->lower[i];
      if (start[i] + step > bounds->upper[i]) step = -step;
    }
    simplex[i + 1][i] += step;
    clamp_into(simplex[i + 1], bounds);
  }
  OptimResult res;
  std::vector<double> values(n + 1);
  for (std::size_t i = 0; i <= n; ++i) values[i] = safe_eval(f, simplex[i]);
  res.evaluations = static_cast<int>(n + 1);

  std::vector<std::size_t> order(n + 1);
  auto point = [&](const std::vector<double>& centroid, const std::vector<double>& worst, double t) {
    std::vector<double> p(n);
    for (std::size_t k = 0; k < n; ++k) p[k] = centroid[k] + t * (worst[k] - centroid[k]);
    clamp_into(p, bounds);
    return p;
  };

  while (res.evaluations < options.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return values[l] < values[r]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];

    double spread = 0.0;
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t k = 0; k < n; ++k) spread = std::max(spread, std::abs(simplex[i][k] - simplex[best][k]));
    const double fspread = values[worst] - values[best];
    if (spread <= options.x_tolerance ||
        (std::isfinite(fspread) && fspread <= options.f_tolerance * std::abs(values[best]))) {
      res.converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / static_cast<double>(n);
    }
    const auto xr = point(centroid, simplex[worst], -1.0);
    const double fr = safe_eval(f, xr);
    ++res.evaluations;
    if (fr < values[best]) {
      const auto xe = point(centroid, simplex[worst], -2.0);
      const double fe = safe_eval(f, xe);
      ++res.evaluations;
      if (fe < fr) {
        simplex[worst] = xe;
        values[worst] = fe;
      } else {
        simplex[worst] = xr;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = xr;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    const auto xc = point(centroid, simplex[worst], outside ? -0.5 : 0.5);
    const double fc = safe_eval(f, xc);
    ++res.evaluations;
    if (fc < std::min(fr, values[worst])) {
      simplex[worst] = xc;
      values[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t k = 0; k < n; ++k) simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
      clamp_into(simplex[i], bounds);
      values[i] = safe_eval(f, simplex[i]);
      ++res.evaluations;
    }
  }
  const auto it = std::min_element(values.begin(), values.end());
  res.x = simplex[static_cast<std::size_t>(it - values.begin())];
  res.value = *it;
  return res;
}

OptimResult nelder_mead_restarts(const Objective& f, std::vector<double> start, const Bounds& bounds, int restarts,
                                 const NelderMeadOptions& options) {
  static constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19};
  OptimResult best = nelder_mead(f, start, options, &bounds);
  int total = best.evaluations;
  for (int r = 1; r <= restarts; ++r) {
    std::vector<double> x0(start.size());
    for (std::size_t k = 0; k < x0.size(); ++k) {
      const double u = halton(r, kPrimes[k % 8]);
      x0[k] = bounds.lower[k] + u * (bounds.upper[k] - bounds.lower[k]);
    }
    OptimResult cand = nelder_mead(f, x0, options, &bounds);
    total += cand.evaluations;
    if (cand.value < best.value) best = std::move(cand);
  }
  // polish from the best point
  OptimResult polished = nelder_mead(f, best.x, options, &bounds);
  total += polished.evaluations;
  if (polished.value <= best.value) best = std::move(polished);
  best.evaluations = total;
  return best;
}

ScalarResult golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                                     double tolerance) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tolerance) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

double bisect_root(const std::function<double(double)>& f, double lo, double hi, double tolerance) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) throw std::invalid_argument("bisect_root: root not bracketed");
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace cvrep
