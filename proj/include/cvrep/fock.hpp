#pragma once

// Truncated multimode Fock-space states and the handful of primitives the
// repeater physics is assembled from: tensor products, partial traces,
// single-mode operators, displacements and quadrature moments.
//
// Quadrature convention: x = a + a^dag, p = -i (a - a^dag), so the vacuum has
// unit variance (shot-noise units).

#include <Eigen/Dense>

#include <complex>
#include <compare>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cvrep {

using cplx = std::complex<double>;

/// Label of a bosonic mode. Operations always address modes by label.
class ModeId {
 public:
  ModeId() = default;
  explicit ModeId(std::string label) : label_(std::move(label)) {}
  ModeId(const char* label) : label_(label) {}  // NOLINT: literals read naturally

  const std::string& label() const { return label_; }

  auto operator<=>(const ModeId&) const = default;

 private:
  std::string label_;
};

struct ModeSpec {
  ModeId id;
  int cutoff = 0;  // maximum photon number kept

  int dim() const { return cutoff + 1; }
  bool operator==(const ModeSpec&) const = default;
};

/// Row-major layout helper shared by kets and density matrices: the first
/// listed mode is the slowest-varying index.
class ModeLayout {
 public:
  ModeLayout() = default;
  explicit ModeLayout(std::vector<ModeSpec> modes);

  const std::vector<ModeSpec>& modes() const { return modes_; }
  std::size_t size() const { return size_; }
  std::size_t num_modes() const { return modes_.size(); }

  /// Position of `id` in the mode list; throws std::out_of_range if absent.
  std::size_t position(const ModeId& id) const;
  bool contains(const ModeId& id) const;
  std::size_t stride(std::size_t pos) const { return strides_[pos]; }
  int cutoff(const ModeId& id) const { return modes_[position(id)].cutoff; }

  std::size_t index(std::span<const int> occupation) const;
  std::vector<int> occupation(std::size_t index) const;

  bool operator==(const ModeLayout& other) const { return modes_ == other.modes_; }

 private:
  std::vector<ModeSpec> modes_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 1;
};

/// Complex amplitudes over the occupation lattice of labelled modes. Kets are
/// allowed to be unnormalised so that heralding probabilities ride along in
/// the squared norm.
class MultiModeKet {
 public:
  MultiModeKet() = default;
  MultiModeKet(std::vector<ModeSpec> modes, Eigen::VectorXcd amplitudes);

  static MultiModeKet vacuum(std::vector<ModeSpec> modes);
  /// Product Fock state |n_1 n_2 ...>.
  static MultiModeKet basis(std::vector<ModeSpec> modes, std::span<const int> occupation);

  const ModeLayout& layout() const { return layout_; }
  const std::vector<ModeSpec>& modes() const { return layout_.modes(); }
  const Eigen::VectorXcd& amplitudes() const { return amps_; }
  Eigen::VectorXcd& amplitudes() { return amps_; }

  cplx amplitude(std::span<const int> occupation) const {
    return amps_[static_cast<Eigen::Index>(layout_.index(occupation))];
  }
  cplx amplitude(std::initializer_list<int> occupation) const {
    return amplitude(std::span<const int>(occupation.begin(), occupation.size()));
  }

  double squared_norm() const { return amps_.squaredNorm(); }
  MultiModeKet normalized() const;

 private:
  ModeLayout layout_;
  Eigen::VectorXcd amps_;
};

/// Density operator over labelled modes; rows and columns share one layout.
class MultiModeDensity {
 public:
  MultiModeDensity() = default;
  MultiModeDensity(std::vector<ModeSpec> modes, Eigen::MatrixXcd matrix);

  const ModeLayout& layout() const { return layout_; }
  const std::vector<ModeSpec>& modes() const { return layout_.modes(); }
  const Eigen::MatrixXcd& matrix() const { return rho_; }
  Eigen::MatrixXcd& matrix() { return rho_; }

  double trace() const { return rho_.trace().real(); }
  MultiModeDensity normalized() const;

  /// Largest elementwise |rho - rho^dag|.
  double hermiticity_error() const;
  /// Smallest eigenvalue of the Hermitian part.
  double min_eigenvalue() const;
  double purity() const;  // Tr rho^2 / (Tr rho)^2

 private:
  ModeLayout layout_;
  Eigen::MatrixXcd rho_;
};

MultiModeDensity to_density(const MultiModeKet& ket);

/// Tensor product; throws std::invalid_argument on a mode-label collision.
MultiModeKet tensor(const MultiModeKet& lhs, const MultiModeKet& rhs);
MultiModeDensity tensor(const MultiModeDensity& lhs, const MultiModeDensity& rhs);

/// Reduced state on `keep` (in the order the modes appear in the input).
MultiModeDensity partial_trace(const MultiModeDensity& rho, std::span<const ModeId> keep);
MultiModeDensity partial_trace(const MultiModeDensity& rho, std::initializer_list<ModeId> keep);
/// Same, computed directly from a purification without forming |psi><psi|.
MultiModeDensity partial_trace(const MultiModeKet& psi, std::span<const ModeId> keep);
MultiModeDensity partial_trace(const MultiModeKet& psi, std::initializer_list<ModeId> keep);

/// Applies `op` (rows: new dimension, cols: current dimension) to one mode. A
/// non-square `op` changes that mode's cutoff.
MultiModeKet apply_mode_operator(const MultiModeKet& psi, const ModeId& mode,
                                 const Eigen::MatrixXcd& op);
/// rho -> op rho op^dag on one mode.
MultiModeDensity apply_mode_operator(const MultiModeDensity& rho, const ModeId& mode,
                                     const Eigen::MatrixXcd& op);

/// Embeds into (or truncates to) a new cutoff for one mode.
MultiModeKet with_cutoff(const MultiModeKet& psi, const ModeId& mode, int cutoff);
MultiModeDensity with_cutoff(const MultiModeDensity& rho, const ModeId& mode, int cutoff);

/// Moves the listed modes into the given order (must be a permutation).
MultiModeDensity reorder(const MultiModeDensity& rho, std::span<const ModeId> order);

/// Truncated annihilation operator (dim x dim).
Eigen::MatrixXcd annihilation(int cutoff);

/// Guard band used when building a displacement for amplitude alpha.
int displacement_guard(cplx alpha);

/// D(alpha) = exp(alpha a^dag - alpha^* a), exponentiated in an enlarged space
/// of cutoff + guard and cut back to (cutoff + 1)^2.
Eigen::MatrixXcd displacement(cplx alpha, int cutoff);
/// Rectangular block <m|D(alpha)|n>, m <= rows_cutoff, n <= cols_cutoff.
Eigen::MatrixXcd displacement(cplx alpha, int rows_cutoff, int cols_cutoff);

/// Applies D(alpha) to a mode in a density (cutoff unchanged).
MultiModeDensity displace(const MultiModeDensity& rho, const ModeId& mode, cplx alpha);

/// First and second quadrature moments of two modes, ordered
/// (x1, p1, x2, p2). Covariance is the symmetrised second moment minus the
/// product of means.
struct Moments {
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  Eigen::Matrix4d cov = Eigen::Matrix4d::Identity();
};

/// Requires a unit-trace state (|Tr - 1| <= 1e-9); throws std::invalid_argument otherwise.
Moments moments(const MultiModeDensity& rho, const ModeId& first, const ModeId& second);
/// Moments of a normalised ket; avoids forming the density matrix.
Moments moments(const MultiModeKet& psi, const ModeId& first, const ModeId& second);

/// Shift of the moments under D(alpha1) on the first mode and D(alpha2) on
/// the second. Covariance is unchanged; only the means move.
Moments displaced(const Moments& m, cplx alpha1, cplx alpha2);

/// Keeps only matrix elements whose charge sum_k q_k (n_k - n'_k) vanishes,
/// i.e. the average over the phase rotation exp(i theta sum_k q_k n_k).
MultiModeDensity dephase(const MultiModeDensity& rho, std::span<const int> charges);

/// Doubles the cutoff from `start` until f(2N) differs from f(N) by at most
/// `tolerance`, returning that N. Throws std::runtime_error past `max_cutoff`.
int converged_cutoff(const std::function<double(int)>& f, int start = 12, double tolerance = 1e-8,
                     int max_cutoff = 96);

/// Von Neumann entropy in bits.
double von_neumann_entropy(const MultiModeDensity& rho);

}  // namespace cvrep
