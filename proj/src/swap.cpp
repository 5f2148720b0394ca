#include "cvrep/swap.hpp"

#include "cvrep/channel.hpp"
#include "cvrep/scissor.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace cvrep {

namespace {

constexpr double kPi = std::numbers::pi;

// Projector kernel K(c, f) = pi^{-1/2} conj(<c|D(gamma)|f>). Quadrature
// revisits the same outcomes many times (and large |gamma| needs a wide guard
// band), so kernels are memoised.
class KernelCache {
 public:
  Eigen::MatrixXcd get(cplx gamma, int rows, int cols) {
    const Key key{gamma.real(), gamma.imag(), rows, cols};
    {
      std::lock_guard lock(mutex_);
      if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    Eigen::MatrixXcd k = displacement(gamma, rows, cols).conjugate() / std::sqrt(kPi);
    std::lock_guard lock(mutex_);
    if (cache_.size() > 20000) cache_.clear();
    cache_.emplace(key, k);
    return k;
  }

 private:
  using Key = std::tuple<double, double, int, int>;
  std::mutex mutex_;
  std::map<Key, Eigen::MatrixXcd> cache_;
};

Eigen::MatrixXcd projector_kernel(cplx gamma, int rows, int cols) {
  static KernelCache cache;
  return cache.get(gamma, rows, cols);
}

cplx mean_amplitude(const Moments& m, int mode) {
  return {0.5 * m.mean[2 * mode], 0.5 * m.mean[2 * mode + 1]};
}

DisplacementGains gains_from_means(const Moments& m, double probe) {
  // <a_1> = lambda_a conj(probe), <a_2> = -lambda_b probe for a real probe
  return {mean_amplitude(m, 0).real() / probe, -mean_amplitude(m, 1).real() / probe};
}

const ModeId& other_mode(const MultiModeDensity& rho, const ModeId& inner) {
  if (rho.modes().size() != 2) throw std::invalid_argument("nested_swap: inputs must be two-mode states");
  if (!rho.layout().contains(inner)) {
    throw std::invalid_argument("nested_swap: mode '" + inner.label() + "' not present");
  }
  return rho.modes()[0].id == inner ? rho.modes()[1].id : rho.modes()[0].id;
}

MultiModeDensity relabel(const MultiModeDensity& rho, const ModeId& first, const ModeId& second) {
  return MultiModeDensity({{first, rho.modes()[0].cutoff}, {second, rho.modes()[1].cutoff}}, rho.matrix());
}

// Gauss-Legendre nodes and weights on [0, 1] (Golub-Welsch).
std::pair<std::vector<double>, std::vector<double>> gauss_legendre_unit(int n) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  std::vector<double> x(static_cast<std::size_t>(n));
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    x[static_cast<std::size_t>(k)] = 0.5 * (es.eigenvalues()[k] + 1.0);
    const double v = es.eigenvectors()(0, k);
    w[static_cast<std::size_t>(k)] = v * v;  // 2 v^2 on [-1, 1], halved on [0, 1]
  }
  return {x, w};
}

}  // namespace

void LinkParams::validate() const {
  SourceParams{chi}.validate();
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::domain_error("link transmissivity must lie in [0, 1]");
  NlaParams{gain}.validate();
  if (cutoff < 1) throw std::domain_error("link cutoff must be >= 1");
}

std::vector<PolarNode> polar_nodes(double radius, const QuadratureSpec& spec, bool single_phase) {
  if (spec.radial_nodes < 1 || spec.phase_nodes < 1) throw std::invalid_argument("quadrature needs >= 1 node");
  const auto [x, w] = gauss_legendre_unit(spec.radial_nodes);
  const int phases = single_phase ? 1 : spec.phase_nodes;
  std::vector<PolarNode> nodes;
  nodes.reserve(x.size() * static_cast<std::size_t>(phases));
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double r = radius * x[k];
    for (int j = 0; j < phases; ++j) {
      const double phi = 2.0 * kPi * j / phases;
      nodes.push_back({std::polar(r, phi), radius * w[k] * r * 2.0 * kPi / phases});
    }
  }
  return nodes;
}

MultiModeKet dual_hd_project(const MultiModeKet& state, const ModeId& f, const ModeId& c, cplx gamma) {
  const auto& layout = state.layout();
  if (f == c) throw std::invalid_argument("dual_hd_project: measured modes must differ");
  const std::size_t pf = layout.position(f);
  const std::size_t pc = layout.position(c);
  const Eigen::MatrixXcd k = projector_kernel(gamma, layout.modes()[pc].cutoff, layout.modes()[pf].cutoff);

  std::vector<ModeSpec> rest;
  std::vector<std::size_t> rest_pos;
  for (std::size_t p = 0; p < layout.num_modes(); ++p) {
    if (p == pf || p == pc) continue;
    rest.push_back(layout.modes()[p]);
    rest_pos.push_back(p);
  }
  MultiModeKet out = MultiModeKet::vacuum(rest);
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(out.layout().size()));
  std::vector<int> rest_occ(rest.size());
  for (std::size_t j = 0; j < layout.size(); ++j) {
    const cplx aj = state.amplitudes()[static_cast<Eigen::Index>(j)];
    if (aj == cplx{}) continue;
    const std::vector<int> occ = layout.occupation(j);
    for (std::size_t r = 0; r < rest_pos.size(); ++r) rest_occ[r] = occ[rest_pos[r]];
    amps[static_cast<Eigen::Index>(out.layout().index(rest_occ))] += k(occ[pc], occ[pf]) * aj;
  }
  return MultiModeKet(rest, std::move(amps));
}

// ---------------------------------------------------------------------------
// SingleNodeSwap

SingleNodeSwap::SingleNodeSwap(const LinkParams& link)
    : link_(link),
      first_(distilled_link(link.chi, link.eta, link.gain, link.cutoff, "A", "C", "D")),
      second_(distilled_link(link.chi, link.eta, link.gain, link.cutoff, "F", "B", "E")) {
  link.validate();
}

MultiModeKet SingleNodeSwap::conditional_ket(cplx gamma) const {
  const int n = link_.cutoff;
  const Eigen::Index d = n + 1;
  const Eigen::MatrixXcd k = projector_kernel(gamma, 1, n);  // (c, f)
  // second link as (f) x (b, e); phi_c = sum_f K(c, f) psi2[f, :]
  const Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> psi2(
      second_.amplitudes().data(), d, 2 * d);
  const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> phi = k * psi2;  // 2 x (b, e)

  Eigen::VectorXcd out(d * d * 2 * d);
  const auto& psi1 = first_.amplitudes();  // (a, c, d)
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index dd = 0; dd < d; ++dd) {
      const cplx u0 = psi1[(a * 2 + 0) * d + dd];
      const cplx u1 = psi1[(a * 2 + 1) * d + dd];
      const Eigen::Index base = (a * d + dd) * 2 * d;
      for (Eigen::Index be = 0; be < 2 * d; ++be) out[base + be] = u0 * phi(0, be) + u1 * phi(1, be);
    }
  }
  return MultiModeKet({{"A", n}, {"D", n}, {"B", 1}, {"E", n}}, std::move(out));
}

double SingleNodeSwap::outcome_density(cplx gamma) const {
  const int n = link_.cutoff;
  const Eigen::Index d = n + 1;
  const Eigen::MatrixXcd k = projector_kernel(gamma, 1, n);
  const Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> psi2(
      second_.amplitudes().data(), d, 2 * d);
  const Eigen::MatrixXcd phi = k * psi2;
  const Eigen::Matrix2cd g2 = phi.conjugate() * phi.transpose();  // <phi_c|phi_c'>
  Eigen::Matrix2cd g1 = Eigen::Matrix2cd::Zero();
  const auto& psi1 = first_.amplitudes();
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index dd = 0; dd < d; ++dd) {
      const cplx u[2] = {psi1[(a * 2) * d + dd], psi1[(a * 2 + 1) * d + dd]};
      for (int c = 0; c < 2; ++c)
        for (int c2 = 0; c2 < 2; ++c2) g1(c, c2) += std::conj(u[c]) * u[c2];
    }
  }
  return g1.cwiseProduct(g2).sum().real();
}

MultiModeDensity SingleNodeSwap::output_state(cplx gamma, const DisplacementGains& gains) const {
  MultiModeDensity rho = partial_trace(conditional_ket(gamma), {"A", "B"});
  rho = with_cutoff(rho, "B", link_.cutoff);
  if (gamma == cplx{}) return rho;
  rho = displace(rho, "A", first_correction(gamma, gains.lambda_a));
  return displace(rho, "B", second_correction(gamma, gains.lambda_b));
}

Moments SingleNodeSwap::output_moments(cplx gamma, const DisplacementGains& gains) const {
  const Moments m = moments(conditional_ket(gamma).normalized(), "A", "B");
  return displaced(m, first_correction(gamma, gains.lambda_a), second_correction(gamma, gains.lambda_b));
}

DisplacementGains SingleNodeSwap::mean_nulling_gains(double probe) const {
  if (!(probe > 0.0)) throw std::invalid_argument("mean_nulling_gains: probe must be positive");
  return gains_from_means(moments(conditional_ket(probe).normalized(), "A", "B"), probe);
}

// ---------------------------------------------------------------------------
// Nested swap

MultiModeDensity nested_swap(const MultiModeDensity& rho1, const ModeId& inner1, const MultiModeDensity& rho2,
                             const ModeId& inner2, cplx gamma, const DisplacementGains& gains) {
  const ModeId outer1 = other_mode(rho1, inner1);
  const ModeId outer2 = other_mode(rho2, inner2);
  if (outer1 == outer2) throw std::invalid_argument("nested_swap: outer modes share a label");
  const std::vector<ModeId> order1{outer1, inner1};
  const std::vector<ModeId> order2{inner2, outer2};
  const MultiModeDensity r1 = reorder(rho1, order1);
  const MultiModeDensity r2 = reorder(rho2, order2);
  const int co1 = r1.modes()[0].cutoff;
  const int ci1 = r1.modes()[1].cutoff;
  const int ci2 = r2.modes()[0].cutoff;
  const int co2 = r2.modes()[1].cutoff;
  const Eigen::Index d1 = co1 + 1;
  const Eigen::Index b1 = ci1 + 1;
  const Eigen::Index b2 = ci2 + 1;
  const Eigen::Index d2 = co2 + 1;

  const Eigen::MatrixXcd k = projector_kernel(gamma, ci1, ci2);  // (b, m)
  const Eigen::MatrixXcd kt = k.transpose();
  const Eigen::MatrixXcd kc = k.conjugate();

  // X[(a, a'), (m, m')] = (K^T rho1_{a a'} conj(K))(m, m')
  Eigen::MatrixXcd x(d1 * d1, b2 * b2);
  for (Eigen::Index a = 0; a < d1; ++a) {
    for (Eigen::Index ap = 0; ap < d1; ++ap) {
      const Eigen::MatrixXcd t = kt * r1.matrix().block(a * b1, ap * b1, b1, b1) * kc;
      for (Eigen::Index m = 0; m < b2; ++m)
        for (Eigen::Index mp = 0; mp < b2; ++mp) x(a * d1 + ap, m * b2 + mp) = t(m, mp);
    }
  }
  // Y[(m, m'), (n, n')] = rho2[(m, n), (m', n')]
  Eigen::MatrixXcd y(b2 * b2, d2 * d2);
  for (Eigen::Index m = 0; m < b2; ++m)
    for (Eigen::Index mp = 0; mp < b2; ++mp)
      for (Eigen::Index n = 0; n < d2; ++n)
        for (Eigen::Index np = 0; np < d2; ++np) y(m * b2 + mp, n * d2 + np) = r2.matrix()(m * d2 + n, mp * d2 + np);
  const Eigen::MatrixXcd z = x * y;

  Eigen::MatrixXcd out(d1 * d2, d1 * d2);
  for (Eigen::Index a = 0; a < d1; ++a)
    for (Eigen::Index ap = 0; ap < d1; ++ap)
      for (Eigen::Index n = 0; n < d2; ++n)
        for (Eigen::Index np = 0; np < d2; ++np) out(a * d2 + n, ap * d2 + np) = z(a * d1 + ap, n * d2 + np);

  MultiModeDensity rho({{outer1, co1}, {outer2, co2}}, std::move(out));
  if (gamma == cplx{}) return rho;
  rho = displace(rho, outer1, first_correction(gamma, gains.lambda_a));
  return displace(rho, outer2, second_correction(gamma, gains.lambda_b));
}

double nested_outcome_density(const MultiModeDensity& inner1_state, const MultiModeDensity& inner2_state,
                              cplx gamma) {
  if (inner1_state.modes().size() != 1 || inner2_state.modes().size() != 1) {
    throw std::invalid_argument("nested_outcome_density: expects single-mode reduced states");
  }
  const Eigen::MatrixXcd k =
      projector_kernel(gamma, inner1_state.modes()[0].cutoff, inner2_state.modes()[0].cutoff);
  const Eigen::MatrixXcd t = k.transpose() * inner1_state.matrix() * k.conjugate();
  return t.cwiseProduct(inner2_state.matrix()).sum().real();
}

DisplacementGains nested_mean_nulling_gains(const MultiModeDensity& rho1, const ModeId& inner1,
                                            const MultiModeDensity& rho2, const ModeId& inner2, double probe) {
  if (!(probe > 0.0)) throw std::invalid_argument("nested_mean_nulling_gains: probe must be positive");
  const MultiModeDensity out = nested_swap(rho1, inner1, rho2, inner2, probe, {}).normalized();
  return gains_from_means(moments(out, out.modes()[0].id, out.modes()[1].id), probe);
}

// ---------------------------------------------------------------------------
// Integration over outcomes

PsEstimate ps_probability(const TraceFamily& trace, const PostSelectionRule& rule, const QuadratureSpec& spec,
                          bool phase_invariant) {
  if (!(rule.gamma_max >= 0.0)) throw std::domain_error("ps_probability: gamma_max must be >= 0");
  const bool single = phase_invariant && spec.phase_symmetry;
  auto integrate = [&](double radius, const QuadratureSpec& s) {
    double acc = 0.0;
    for (const auto& node : polar_nodes(radius, s, single)) acc += node.weight * trace(node.gamma);
    return acc;
  };
  auto estimate = [&](const QuadratureSpec& s) {
    PsEstimate e;
    e.plane = integrate(s.tail_radius, s);
    if (rule.gamma_max >= s.tail_radius) {
      e.disk = e.plane;
    } else if (rule.gamma_max > 0.0) {
      e.disk = integrate(rule.gamma_max, s);
    }
    if (!(e.plane > 0.0)) throw std::domain_error("ps_probability: outcome density integrates to zero");
    e.probability = std::clamp(e.disk / e.plane, 0.0, 1.0);
    return e;
  };
  PsEstimate full = estimate(spec);
  QuadratureSpec half = spec;
  half.radial_nodes = std::max(1, spec.radial_nodes / 2);
  full.residual = std::abs(full.probability - estimate(half).probability);
  return full;
}

MultiModeDensity averaged_state(const DensityFamily& family, const PostSelectionRule& rule,
                                const QuadratureSpec& spec, std::span<const int> charges) {
  if (!(rule.gamma_max >= 0.0)) throw std::domain_error("averaged_state: gamma_max must be >= 0");
  if (rule.gamma_max == 0.0) return family(0.0).normalized();
  const bool single = !charges.empty() && spec.phase_symmetry;
  MultiModeDensity acc;
  for (const auto& node : polar_nodes(rule.gamma_max, spec, single)) {
    MultiModeDensity rho = family(node.gamma);
    rho.matrix() *= node.weight;
    if (acc.modes().empty()) {
      acc = std::move(rho);
    } else {
      acc.matrix() += rho.matrix();
    }
  }
  if (single) acc = dephase(acc, charges);
  return acc.normalized();
}

Eigen::Matrix4d phase_average(const Eigen::Matrix4d& cov) {
  const double a = 0.5 * (cov(0, 0) + cov(1, 1));
  const double b = 0.5 * (cov(2, 2) + cov(3, 3));
  const double u = 0.5 * (cov(0, 2) - cov(1, 3));
  const double v = 0.5 * (cov(0, 3) + cov(1, 2));
  Eigen::Matrix4d out;
  out << a, 0, u, v,  //
      0, a, v, -u,    //
      u, v, b, 0,     //
      v, -u, 0, b;
  return out;
}

CovarianceMatrixTM averaged_cm(const MomentFamily& family, const PostSelectionRule& rule, const QuadratureSpec& spec,
                               bool phase_covariant) {
  if (!(rule.gamma_max >= 0.0)) throw std::domain_error("averaged_cm: gamma_max must be >= 0");
  const bool single = phase_covariant && spec.phase_symmetry;
  if (rule.gamma_max == 0.0) {
    const Moments m = family(0.0).second;
    return CovarianceMatrixTM::from_full(single ? phase_average(m.cov) : Eigen::Matrix4d(m.cov));
  }
  Eigen::Matrix4d acc = Eigen::Matrix4d::Zero();
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  double total = 0.0;
  for (const auto& node : polar_nodes(rule.gamma_max, spec, single)) {
    const auto [tr, m] = family(node.gamma);
    acc += node.weight * tr * m.cov;
    mean += node.weight * tr * m.mean;
    total += node.weight * tr;
  }
  if (!(total > 0.0)) throw std::domain_error("averaged_cm: zero weight over the acceptance disk");
  acc /= total;
  if (single) return CovarianceMatrixTM::from_full(phase_average(acc));
  return CovarianceMatrixTM::from_full(acc, mean / total);
}

// ---------------------------------------------------------------------------
// Chains

std::string to_string(BoundMode m) {
  switch (m) {
    case BoundMode::numeric:
      return "numeric";
    case BoundMode::upper:
      return "upper";
    case BoundMode::lower:
      return "lower";
  }
  return "?";
}

BoundMode bound_mode_from_string(const std::string& s) {
  if (s == "numeric") return BoundMode::numeric;
  if (s == "upper") return BoundMode::upper;
  if (s == "lower") return BoundMode::lower;
  throw std::invalid_argument("unknown bound mode '" + s + "' (expected numeric, upper or lower)");
}

void ChainConfig::validate() const {
  if (n_levels < 1 || n_levels > 4) throw std::invalid_argument("n_levels must lie in [1, 4] (2 to 16 links)");
  if (bound == BoundMode::numeric && n_levels > 1) {
    throw IntractableConfiguration("numeric mode integrates every outcome and is limited to two links; use "
                                   "--bound upper or --bound lower");
  }
  if (static_cast<int>(gamma_max.size()) != n_levels) {
    throw std::invalid_argument("gamma_max needs one radius per swap level (" + std::to_string(n_levels) + ")");
  }
  for (double g : gamma_max) {
    if (!(g >= 0.0)) throw std::invalid_argument("gamma_max must be >= 0");
  }
  if (!(total_distance_km >= 0.0)) throw std::invalid_argument("distance must be >= 0");
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
  LinkParams{chi, link_eta(), gain, cutoff}.validate();
}

double ChainConfig::link_length_km() const { return total_distance_km / std::ldexp(1.0, n_levels); }

double ChainConfig::link_eta() const {
  return transmissivity(FiberChannel{link_length_km(), attenuation_db_per_km});
}

std::vector<double> preset_lower_gamma_max(int n_levels) {
  switch (n_levels) {
    case 1:
      return {0.5};
    case 2:
      return {0.2, 0.45};
    case 3:
      return {0.06, 0.15, 0.4};
    default:
      throw std::invalid_argument("no preset post-selection radii for " + std::to_string(n_levels) + " levels");
  }
}

ChainResult chain_evaluate(const ChainConfig& cfg) {
  cfg.validate();
  const int n = cfg.n_levels;
  const double eta = cfg.link_eta();
  const SingleNodeSwap node(LinkParams{cfg.chi, eta, cfg.gain, cfg.cutoff});
  const QuadratureSpec& quad = cfg.quadrature;
  static constexpr int kCharges[] = {-1, 1};

  ChainResult res;
  res.eta_link = eta;
  res.probabilities.p_nla = p_nla(cfg.chi, eta, cfg.gain);
  res.probabilities.p_ps.assign(static_cast<std::size_t>(n), 0.0);
  auto record = [&](int level, const PsEstimate& ps, double expected_plane) {
    res.probabilities.p_ps[static_cast<std::size_t>(n - 1 - level)] = ps.probability;
    res.ps_residual = std::max(res.ps_residual, ps.residual);
    res.completeness = std::max(res.completeness, std::abs(ps.plane / expected_plane - 1.0));
  };

  // base level
  const PsEstimate ps0 = ps_probability([&](cplx g) { return node.outcome_density(g); },
                                        PostSelectionRule{cfg.gamma_max[0]}, quad);
  record(0, ps0, res.probabilities.p_nla * res.probabilities.p_nla);
  const DisplacementGains base_gains = node.mean_nulling_gains(cfg.probe);
  res.gains.push_back(base_gains);

  if (n == 1) {
    if (cfg.bound == BoundMode::upper) {
      res.cm = CovarianceMatrixTM::from_moments(node.output_moments(0.0, base_gains));
    } else {
      const MomentFamily family = [&](cplx g) {
        const MultiModeKet ket = node.conditional_ket(g);
        const double tr = ket.squared_norm();
        return std::make_pair(tr, moments(ket.normalized(), "A", "B"));
      };
      res.cm = averaged_cm(family, PostSelectionRule{cfg.gamma_max[0]}, quad);
    }
    return res;
  }

  // averaged states drive the probabilities in both bound modes
  MultiModeDensity avg = averaged_state([&](cplx g) { return node.output_state(g, base_gains); },
                                        PostSelectionRule{cfg.gamma_max[0]}, quad, kCharges);
  MultiModeDensity ideal = node.output_state(0.0, base_gains).normalized();

  for (int level = 1; level < n; ++level) {
    const MultiModeDensity left = avg;
    const MultiModeDensity right = relabel(avg, "M", "N");
    const MultiModeDensity inner_left = partial_trace(left, {"B"});
    const MultiModeDensity inner_right = partial_trace(right, {"M"});
    const PostSelectionRule rule{cfg.gamma_max[static_cast<std::size_t>(level)]};
    const PsEstimate ps = ps_probability(
        [&](cplx g) { return nested_outcome_density(inner_left, inner_right, g); }, rule, quad);
    record(level, ps, 1.0);
    const DisplacementGains gains = nested_mean_nulling_gains(left, "B", right, "M", cfg.probe);
    res.gains.push_back(gains);

    if (cfg.bound == BoundMode::upper) {
      ideal = relabel(nested_swap(ideal, "B", relabel(ideal, "M", "N"), "M", 0.0, gains).normalized(), "A", "B");
    }
    if (level == n - 1) {
      if (cfg.bound == BoundMode::upper) {
        res.cm = CovarianceMatrixTM::from_moments(moments(ideal, "A", "B"));
      } else {
        const MomentFamily family = [&](cplx g) {
          const MultiModeDensity out = nested_swap(left, "B", right, "M", g, gains);
          const double tr = out.trace();
          return std::make_pair(tr, moments(out.normalized(), "A", "N"));
        };
        res.cm = averaged_cm(family, rule, quad);
      }
    } else {
      avg = averaged_state(
          [&](cplx g) { return relabel(nested_swap(left, "B", right, "M", g, gains), "A", "B"); }, rule, quad,
          kCharges);
    }
  }
  return res;
}

}  // namespace cvrep
