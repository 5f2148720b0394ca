#pragma once

// Post-selected dual-homodyne entanglement swapping.
//
// Mode naming for one repeater node: the first link is (A, C, D) with A kept
// at the left end, C the scissored arm arriving at the node and D its loss
// environment; the second link is (F, B, E) with F kept at the node and B the
// scissored arm arriving at the right end. The node measures (F, C); Alice and
// Bob keep (A, B).
//
// Phase convention: an outcome gamma leaves <a_A> proportional to conj(gamma)
// and <a_B> proportional to -gamma, so the corrections are
// D_A(-lambda_a conj(gamma)) and D_B(lambda_b gamma). The same holds for the
// nested swap with (A, N) in place of (A, B).

#include "cvrep/fock.hpp"
#include "cvrep/metrics.hpp"
#include "cvrep/rates.hpp"

#include <functional>
#include <stdexcept>
#include <vector>

namespace cvrep {

struct LinkParams {
  double chi = 0.3;
  double eta = 1.0;
  double gain = 1.0;
  int cutoff = 12;  // source and environment modes; scissored modes are binary

  void validate() const;
};

struct DisplacementGains {
  double lambda_a = 0.0;
  double lambda_b = 0.0;  // lambda_n at nested levels
};

struct PostSelectionRule {
  double gamma_max = 0.5;
};

struct SwapOutcome {
  cplx gamma;
  ModeId first;   // mode whose displacement enters the projector
  ModeId second;
};

struct QuadratureSpec {
  int radial_nodes = 32;
  int phase_nodes = 16;
  double tail_radius = 6.0;
  /// Collapse the phase integral to one node when the integrand is covariant
  /// under gamma -> e^{i theta} gamma.
  bool phase_symmetry = true;
};

struct PolarNode {
  cplx gamma;
  double weight;  // includes |gamma| d|gamma| d(phi)
};

/// Gauss-Legendre in |gamma| on [0, radius] times a trapezoid in phase. With
/// `single_phase`, one node per radius at phase 0 carrying weight 2 pi.
std::vector<PolarNode> polar_nodes(double radius, const QuadratureSpec& spec, bool single_phase);

/// Correction amplitudes for an outcome gamma.
inline cplx first_correction(cplx gamma, double lambda) { return -lambda * std::conj(gamma); }
inline cplx second_correction(cplx gamma, double lambda) { return lambda * gamma; }

/// Contracts modes (f, c) of `state` with <gamma|_{fc} = pi^{-1/2} sum_k <k|_c D_c(gamma)^dag <k|_f.
/// The remaining modes keep their order. Squared norm = outcome density.
MultiModeKet dual_hd_project(const MultiModeKet& state, const ModeId& f, const ModeId& c, cplx gamma);

/// Two identical distilled links swapped at one node.
class SingleNodeSwap {
 public:
  explicit SingleNodeSwap(const LinkParams& link);

  const LinkParams& link() const { return link_; }
  const MultiModeKet& first_link() const { return first_; }    // (A, C, D)
  const MultiModeKet& second_link() const { return second_; }  // (F, B, E)

  /// Unnormalised ket over (A, D, B, E) for outcome gamma, before corrections.
  MultiModeKet conditional_ket(cplx gamma) const;
  /// Tr rho(gamma): density of the outcome times both heralding probabilities.
  double outcome_density(cplx gamma) const;
  /// Tr_DE of the corrected state over (A, B), unnormalised. B is embedded at
  /// the link cutoff so the correction on it is representable.
  MultiModeDensity output_state(cplx gamma, const DisplacementGains& gains) const;
  /// Moments of the normalised conditional state over (A, B) after corrections.
  Moments output_moments(cplx gamma, const DisplacementGains& gains) const;
  /// Gains that null both conditional means at the real outcome `probe`.
  DisplacementGains mean_nulling_gains(double probe = 0.1) const;

 private:
  LinkParams link_;
  MultiModeKet first_;
  MultiModeKet second_;
};

/// Swaps rho1 over (outer1, inner1) with rho2 over (inner2, outer2): projects
/// (inner1, inner2) onto the dual-HD outcome gamma, with the displacement on
/// inner1, then applies the corrections to (outer1, outer2). Returns the
/// unnormalised state over (outer1, outer2).
MultiModeDensity nested_swap(const MultiModeDensity& rho1, const ModeId& inner1, const MultiModeDensity& rho2,
                             const ModeId& inner2, cplx gamma, const DisplacementGains& gains);

/// Trace of the nested_swap output, from the reduced states of the inner modes.
double nested_outcome_density(const MultiModeDensity& inner1_state, const MultiModeDensity& inner2_state,
                              cplx gamma);

/// Mean-nulling gains for a nested swap of rho1 and rho2 at a real probe outcome.
DisplacementGains nested_mean_nulling_gains(const MultiModeDensity& rho1, const ModeId& inner1,
                                            const MultiModeDensity& rho2, const ModeId& inner2,
                                            double probe = 0.1);

struct PsEstimate {
  double probability = 0.0;
  double disk = 0.0;   // integral of Tr rho over the acceptance disk
  double plane = 0.0;  // same over |gamma| <= tail radius
  /// |P(n nodes) - P(n/2 nodes)|, an estimate of the quadrature error.
  double residual = 0.0;
};

using TraceFamily = std::function<double(cplx)>;
using DensityFamily = std::function<MultiModeDensity(cplx)>;
/// Trace and normalised moments of rho(gamma).
using MomentFamily = std::function<std::pair<double, Moments>(cplx)>;

/// Probability that the outcome falls in the acceptance disk. `phase_invariant`
/// declares that the trace depends on |gamma| only.
PsEstimate ps_probability(const TraceFamily& trace, const PostSelectionRule& rule, const QuadratureSpec& spec,
                          bool phase_invariant = true);

/// Normalised average of rho(gamma) over the acceptance disk. When `charges` is
/// non-empty the family is taken to be covariant under exp(i theta sum q_k n_k)
/// and the phase integral is done exactly by dephasing.
MultiModeDensity averaged_state(const DensityFamily& family, const PostSelectionRule& rule,
                                const QuadratureSpec& spec, std::span<const int> charges = {});

/// Trace-weighted average of the (centred) covariance matrices of rho(gamma)
/// over the acceptance disk. With `phase_covariant`, rho(e^{i theta} gamma) is
/// rho(gamma) rotated by e^{-i theta n_1} e^{i theta n_2} and only the phase
/// invariant part of the CM survives; it is computed from one phase node.
CovarianceMatrixTM averaged_cm(const MomentFamily& family, const PostSelectionRule& rule,
                               const QuadratureSpec& spec, bool phase_covariant = true);

/// Part of a CM invariant under opposite phase rotations of the two modes.
Eigen::Matrix4d phase_average(const Eigen::Matrix4d& cov);

enum class BoundMode { numeric, upper, lower };

std::string to_string(BoundMode m);
BoundMode bound_mode_from_string(const std::string& s);

struct IntractableConfiguration : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ChainConfig {
  int n_levels = 1;  // 2^n_levels links
  double total_distance_km = 0.0;
  double attenuation_db_per_km = 0.2;
  double chi = 0.3;
  double gain = 1.0;
  int cutoff = 12;
  /// Post-selection radius per swap level, base level first.
  std::vector<double> gamma_max{0.5};
  double beta = 0.95;
  Protocol protocol = Protocol::homodyne;
  BoundMode bound = BoundMode::numeric;
  QuadratureSpec quadrature;
  double probe = 0.1;  // outcome used for mean-nulling gains

  void validate() const;
  double link_length_km() const;
  double link_eta() const;
};

/// Preset post-selection radii for the lower bound, base level first.
std::vector<double> preset_lower_gamma_max(int n_levels);

struct ChainResult {
  CovarianceMatrixTM cm;
  StageProbabilities probabilities;      // p_ps[i], i = 0 is the final swap
  std::vector<DisplacementGains> gains;  // base level first
  double eta_link = 1.0;
  double ps_residual = 0.0;    // largest quadrature residual over levels
  double completeness = 0.0;   // largest |plane integral / expected - 1|
};

/// Upper: key from the gamma = 0 state at every level, probabilities from the
/// averaged-state path. Lower: states averaged over each disk before the next
/// swap, final CM averaged over the last disk. Numeric: gamma-resolved CM
/// averaging; two links only.
ChainResult chain_evaluate(const ChainConfig& cfg);

}  // namespace cvrep
