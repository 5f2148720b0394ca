#include "cvrep/metrics.hpp"

#include "cvrep/optimize.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>
#include <span>

namespace cvrep {

std::string to_string(Protocol p) { return p == Protocol::homodyne ? "hom" : "het"; }

Protocol protocol_from_string(const std::string& s) {
  if (s == "hom" || s == "homodyne") return Protocol::homodyne;
  if (s == "het" || s == "heterodyne") return Protocol::heterodyne;
  throw std::invalid_argument("unknown protocol '" + s + "' (expected hom or het)");
}

CovarianceMatrixTM CovarianceMatrixTM::standard(double a, double b, double c) {
  CovarianceMatrixTM v;
  v.a = a;
  v.b = b;
  v.c = c;
  v.full << a, 0, c, 0,  //
      0, a, 0, -c,       //
      c, 0, b, 0,        //
      0, -c, 0, b;
  return v;
}

CovarianceMatrixTM CovarianceMatrixTM::from_full(const Eigen::Matrix4d& full, const Eigen::Vector4d& means) {
  CovarianceMatrixTM v;
  v.full = 0.5 * (full + full.transpose());
  v.means = means;
  v.a = std::sqrt(std::max(0.0, v.full.block<2, 2>(0, 0).determinant()));
  v.b = std::sqrt(std::max(0.0, v.full.block<2, 2>(2, 2).determinant()));
  v.c = std::sqrt(std::abs(v.full.block<2, 2>(0, 2).determinant()));
  return v;
}

CovarianceMatrixTM lossy_tmsv_cm(double chi, double eta) {
  const double c2 = chi * chi;
  const double a = (1.0 + c2) / (1.0 - c2);
  const double c = std::sqrt(eta) * 2.0 * chi / (1.0 - c2);
  return CovarianceMatrixTM::standard(a, 1.0 + eta * (a - 1.0), c);
}

namespace {

struct Invariants {
  double det_a, det_b, det_c, det_v;
};

Invariants invariants(const CovarianceMatrixTM& v) {
  return {v.a * v.a, v.b * v.b, -v.c * v.c, std::pow(v.a * v.b - v.c * v.c, 2)};
}

double sym_eig(double delta, double det_v, double sign) {
  double disc = delta * delta - 4.0 * det_v;
  if (disc < -1e-9) throw std::domain_error("unphysical covariance matrix: negative symplectic discriminant");
  disc = std::max(0.0, disc);
  return std::sqrt(std::max(0.0, 0.5 * (delta + sign * std::sqrt(disc))));
}

}  // namespace

SymplecticEigs symplectic_eigs(const CovarianceMatrixTM& v) {
  const Invariants inv = invariants(v);
  const double delta = inv.det_a + inv.det_b + 2.0 * inv.det_c;
  return {sym_eig(delta, inv.det_v, +1.0), sym_eig(delta, inv.det_v, -1.0)};
}

double pt_min_symplectic_eig(const CovarianceMatrixTM& v) {
  const Invariants inv = invariants(v);
  const double delta = inv.det_a + inv.det_b - 2.0 * inv.det_c;
  return sym_eig(delta, inv.det_v, -1.0);
}

double g_entropy(double x) {
  if (x <= 0.0) return 0.0;
  return ((1.0 + x) * std::log1p(x) - x * std::log(x)) / std::numbers::ln2;
}

double mutual_info(const CovarianceMatrixTM& v, Protocol protocol) {
  const double c2 = v.c * v.c;
  if (protocol == Protocol::heterodyne) {
    return std::log2((1.0 + v.a) / (1.0 + v.a - c2 / (1.0 + v.b)));
  }
  return 0.5 * std::log2(v.a / (v.a - c2 / v.b));
}

double holevo_reverse(const CovarianceMatrixTM& v) {
  const SymplecticEigs nu = symplectic_eigs(v);
  const double nu3 = v.a - v.c * v.c / (1.0 + v.b);
  return g_entropy(0.5 * (nu.nu1 - 1.0)) + g_entropy(0.5 * (nu.nu2 - 1.0)) - g_entropy(0.5 * (nu3 - 1.0));
}

double key_margin(const CovarianceMatrixTM& v, const KeyRateInputs& in) {
  return in.beta * mutual_info(v, in.protocol) - holevo_reverse(v);
}

double raw_key(const CovarianceMatrixTM& v, const KeyRateInputs& in) {
  return std::max(0.0, key_margin(v, in));
}

// ---------------------------------------------------------------------------
// Entanglement of formation

namespace {

// Entanglement of a pure TMSV-like state with cosh(2r) = (t + 1/t)/2, t = e^{2r}.
double entanglement_from_t(double t) {
  const double sinh2 = 0.25 * (t + 1.0 / t) - 0.5;
  return g_entropy(sinh2);
}

struct Interval {
  double lo, hi;
};

// Values of t = e^{2r} for which [[al, ga], [ga, be]] >= [[C, S], [S, C]].
std::optional<Interval> block_interval(double al, double be, double ga) {
  // 2t * ((al-C)(be-C) - (ga-S)^2) = P t^2 + Q t + R
  double p = 2.0 * ga - al - be;
  double q = 2.0 * (al * be - ga * ga + 1.0);
  double r = -(al + be + 2.0 * ga);
  const double scale = std::max({std::abs(p), std::abs(q), std::abs(r)});
  p /= scale;
  q /= scale;
  r /= scale;
  if (std::abs(p) < 1e-15) {
    // degenerate: linear in t
    if (q <= 0.0) return std::nullopt;
    return Interval{-r / q, std::numeric_limits<double>::infinity()};
  }
  double disc = q * q - 4.0 * p * r;
  if (disc < 0.0) {
    // loss-only states touch the boundary (disc = 0); ab - c^2 cancels digits
    if (disc < -1e-9 * (q * q + 4.0 * std::abs(p * r))) return std::nullopt;
    disc = 0.0;
  }
  const double s = std::sqrt(disc);
  const double qq = -0.5 * (q + std::copysign(s, q));
  const double t1 = qq / p;
  const double t2 = (qq != 0.0) ? r / qq : t1;
  return Interval{std::min(t1, t2), std::max(t1, t2)};
}

// Smallest t such that the TMSV CM (after local squeezes s_a, s_b along x/p)
// lies below V; +inf if none exists.
double min_t_for_squeezes(double a, double b, double c, double sa, double sb) {
  const double q = std::sqrt(sa * sb);
  const auto ix = block_interval(a / sa, b / sb, c / q);
  const auto ip = block_interval(a * sa, b * sb, c * q);
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (!ix || !ip) return inf;
  const double lo = std::max({1.0, ix->lo, ip->lo});
  const double hi = std::min(ix->hi, ip->hi);
  if (lo > hi * (1.0 + 1e-12)) return inf;
  const double cosh2r = 0.5 * (lo + 1.0 / lo);
  const double diag = std::min({a / sa, b / sb, a * sa, b * sb});
  if (cosh2r > diag * (1.0 + 1e-10)) return inf;
  return lo;
}

}  // namespace

double tmsv_entanglement(double chi) {
  if (!(chi >= 0.0 && chi < 1.0)) throw std::domain_error("tmsv_entanglement: chi must lie in [0, 1)");
  const double c2 = chi * chi;
  return g_entropy(c2 / (1.0 - c2));  // sinh^2 r = chi^2 / (1 - chi^2)
}

double eof_gaussian(const CovarianceMatrixTM& v) {
  const double nu_pt = pt_min_symplectic_eig(v);
  if (nu_pt >= 1.0 || v.c == 0.0) return 0.0;
  const double a = v.a;
  const double b = v.b;
  const double c = std::abs(v.c);
  if (std::abs(a - b) <= 1e-12 * std::max(a, b)) {
    // symmetric: optimal pure state is a TMSV with e^{-2r} = a - c
    return entanglement_from_t(1.0 / nu_pt);
  }
  const double t_tmsv = min_t_for_squeezes(a, b, c, 1.0, 1.0);
  auto objective = [&](std::span<const double> u) { return min_t_for_squeezes(a, b, c, std::exp(u[0]), std::exp(u[1])); };
  NelderMeadOptions opts;
  opts.initial_step = 0.2;
  opts.x_tolerance = 1e-12;
  opts.f_tolerance = 1e-15;
  opts.max_evaluations = 2000;
  const auto res = nelder_mead(objective, std::vector<double>{0.0, 0.0}, opts);
  double t = std::min(t_tmsv, res.value);
  if (!std::isfinite(t)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "eof_gaussian: no pure Gaussian state below CM (a %.17g, b %.17g, c %.17g)", a, b, c);
    throw std::domain_error(buf);
  }
  return entanglement_from_t(t);
}

double plob(double eta) {
  if (!(eta >= 0.0 && eta < 1.0)) throw std::domain_error("plob: transmissivity must lie in [0, 1)");
  return -std::log1p(-eta) / std::numbers::ln2;
}

DirectKeyResult direct_transmission_key(double length_km, double beta, double attenuation_db_per_km,
                                        double chi_max) {
  if (length_km < 0.0) throw std::domain_error("direct_transmission_key: negative length");
  const double eta = std::pow(10.0, -attenuation_db_per_km * length_km / 10.0);
  const KeyRateInputs in{beta, Protocol::homodyne};
  auto margin = [&](double chi) { return key_margin(lossy_tmsv_cm(chi, eta), in); };
  // scan in r = atanh(chi), then refine with golden section
  const double r_max = std::atanh(chi_max);
  constexpr int kScan = 200;
  int best_i = 1;
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 1; i <= kScan; ++i) {
    const double k = margin(std::tanh(r_max * i / kScan));
    if (k > best) {
      best = k;
      best_i = i;
    }
  }
  const double lo = r_max * (best_i - 1) / kScan;
  const double hi = r_max * std::min(best_i + 1, kScan) / kScan;
  const auto res = golden_section_maximize([&](double r) { return margin(std::tanh(r)); }, lo, hi, 1e-10);
  DirectKeyResult out;
  out.chi = std::tanh(res.x);
  out.key = std::max(0.0, std::max(res.value, best));
  out.at_bound = best_i == kScan;
  return out;
}

double eof_direct_infinite_squeezing(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw std::domain_error("eof_direct_infinite_squeezing: eta must lie in (0, 1]");
  // error is linear in h = 1 - chi; extrapolate successive pairs to h = 0
  constexpr std::array<double, 3> hs{1e-3, 1e-4, 1e-5};
  std::array<double, 3> e{};
  for (std::size_t i = 0; i < hs.size(); ++i) e[i] = eof_gaussian(lossy_tmsv_cm(1.0 - hs[i], eta));
  auto extrapolate = [&](std::size_t i) { return e[i + 1] + (e[i + 1] - e[i]) * hs[i + 1] / (hs[i] - hs[i + 1]); };
  const double prev = extrapolate(0);
  const double last = extrapolate(1);
  if (std::abs(last - prev) >= 1e-4) {
    throw ConvergenceError("infinite-squeezing EOF did not converge: successive extrapolants differ by " +
                           std::to_string(std::abs(last - prev)));
  }
  return std::max(0.0, last);
}

}  // namespace cvrep
