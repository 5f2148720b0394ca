#pragma once

// Gaussian information quantities computed from two-mode covariance
// matrices in shot-noise units. Every rate here is a Gaussian-CM-based
// estimate: for the slightly non-Gaussian repeater output it overestimates
// Eve's information rather than giving the exact non-Gaussian value.

#include "cvrep/fock.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace cvrep {

enum class Protocol { homodyne, heterodyne };

std::string to_string(Protocol p);
Protocol protocol_from_string(const std::string& s);

/// Two-mode covariance matrix with its standard-form parameters
/// V = [[a I, c Z], [c Z, b I]] alongside the full matrix and the means.
struct CovarianceMatrixTM {
  double a = 1.0;
  double b = 1.0;
  double c = 0.0;
  Eigen::Matrix4d full = Eigen::Matrix4d::Identity();
  Eigen::Vector4d means = Eigen::Vector4d::Zero();

  static CovarianceMatrixTM standard(double a, double b, double c);
  /// Standard-form parameters from the local symplectic invariants:
  /// a = sqrt(det A), b = sqrt(det B), c = sqrt(|det C|).
  static CovarianceMatrixTM from_full(const Eigen::Matrix4d& full,
                                      const Eigen::Vector4d& means = Eigen::Vector4d::Zero());
  static CovarianceMatrixTM from_moments(const Moments& m) { return from_full(m.cov, m.mean); }
};

/// CM of a TMSV whose second arm went through a pure-loss channel:
/// a = (1+chi^2)/(1-chi^2), b = 1 + eta (a - 1), c = sqrt(eta) 2 chi / (1-chi^2).
CovarianceMatrixTM lossy_tmsv_cm(double chi, double eta);

struct SymplecticEigs {
  double nu1 = 1.0;  // larger
  double nu2 = 1.0;
};

/// nu_{1,2} = sqrt((Delta +- sqrt(Delta^2 - 4 det V)) / 2), Delta = a^2 + b^2 - 2c^2.
/// Throws std::domain_error when the discriminant is below -1e-9.
SymplecticEigs symplectic_eigs(const CovarianceMatrixTM& v);

/// Smallest symplectic eigenvalue of the partially transposed CM.
double pt_min_symplectic_eig(const CovarianceMatrixTM& v);

/// G(x) = (1+x) log2(1+x) - x log2 x with G(0) = 0; tiny negative x clamps to 0.
double g_entropy(double x);

double mutual_info(const CovarianceMatrixTM& v, Protocol protocol);

/// Eve's information for reverse reconciliation:
/// G((nu1-1)/2) + G((nu2-1)/2) - G((nu3-1)/2), nu3 = a - c^2/(1+b).
double holevo_reverse(const CovarianceMatrixTM& v);

struct KeyRateInputs {
  double beta = 0.95;
  Protocol protocol = Protocol::homodyne;
};

/// beta I_AB - I_BE without clamping; optimisers use this for guidance.
double key_margin(const CovarianceMatrixTM& v, const KeyRateInputs& in);
/// max(0, beta I_AB - I_BE), bits per accepted use.
double raw_key(const CovarianceMatrixTM& v, const KeyRateInputs& in);

/// Entanglement of formation (ebits) of the Gaussian state with CM `v`,
/// taken as the least entanglement of a pure Gaussian state whose CM lies
/// below `v`. Symmetric states use the closed form in the smallest
/// partially transposed symplectic eigenvalue.
double eof_gaussian(const CovarianceMatrixTM& v);

/// Entropy of entanglement of a TMSV with squeezing chi = tanh r.
double tmsv_entanglement(double chi);

/// Repeaterless secret-key capacity of the pure-loss channel, -log2(1-eta).
double plob(double eta);

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DirectKeyResult {
  double key = 0.0;  // bits per use, clamped at 0
  double chi = 0.0;  // maximiser
  bool at_bound = false;
};

/// Homodyne reverse-reconciliation key of a TMSV sent straight through the
/// whole fibre, maximised over chi in (0, chi_max].
DirectKeyResult direct_transmission_key(double length_km, double beta, double attenuation_db_per_km = 0.2,
                                        double chi_max = 0.9999);

/// EOF of an infinitely squeezed TMSV through loss eta, as the chi -> 1 limit.
/// Samples chi in {0.999, 0.9999, 0.99999} and extrapolates linearly in
/// 1 - chi; throws ConvergenceError when the two extrapolants differ by 1e-4
/// ebits or more.
double eof_direct_infinite_squeezing(double eta);

}  // namespace cvrep
