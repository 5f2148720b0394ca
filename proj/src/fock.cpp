#include "cvrep/fock.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace cvrep {

namespace {

constexpr double kTraceTolerance = 1e-9;

std::vector<ModeSpec> concat(const std::vector<ModeSpec>& a, const std::vector<ModeSpec>& b) {
  std::vector<ModeSpec> out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

// Maps every full lattice index to (kept index, traced index).
struct SplitIndex {
  ModeLayout kept;
  ModeLayout traced;
  std::vector<std::size_t> kept_of;
  std::vector<std::size_t> traced_of;
};

SplitIndex split_layout(const ModeLayout& layout, std::span<const ModeId> keep) {
  for (const auto& id : keep) {
    if (!layout.contains(id)) {
      throw std::out_of_range("partial_trace: unknown mode '" + id.label() + "'");
    }
  }
  std::vector<ModeSpec> kept_modes;
  std::vector<ModeSpec> traced_modes;
  std::vector<bool> is_kept(layout.num_modes(), false);
  for (std::size_t p = 0; p < layout.num_modes(); ++p) {
    const auto& spec = layout.modes()[p];
    if (std::find(keep.begin(), keep.end(), spec.id) != keep.end()) {
      kept_modes.push_back(spec);
      is_kept[p] = true;
    } else {
      traced_modes.push_back(spec);
    }
  }
  SplitIndex split{ModeLayout(kept_modes), ModeLayout(traced_modes), {}, {}};
  split.kept_of.resize(layout.size());
  split.traced_of.resize(layout.size());
  std::vector<int> occ(layout.num_modes(), 0);
  for (std::size_t idx = 0; idx < layout.size(); ++idx) {
    std::size_t k = 0;
    std::size_t t = 0;
    std::size_t kp = 0;
    std::size_t tp = 0;
    for (std::size_t p = 0; p < layout.num_modes(); ++p) {
      if (is_kept[p]) {
        k += static_cast<std::size_t>(occ[p]) * split.kept.stride(kp++);
      } else {
        t += static_cast<std::size_t>(occ[p]) * split.traced.stride(tp++);
      }
    }
    split.kept_of[idx] = k;
    split.traced_of[idx] = t;
    // odometer increment, last mode fastest
    for (std::size_t p = layout.num_modes(); p-- > 0;) {
      if (++occ[p] <= layout.modes()[p].cutoff) break;
      occ[p] = 0;
    }
  }
  return split;
}

// Applies a dim_out x dim_in operator to the row index of `m` along one mode.
Eigen::MatrixXcd apply_on_rows(const Eigen::MatrixXcd& m, const ModeLayout& layout,
                               std::size_t pos, const Eigen::MatrixXcd& op,
                               const ModeLayout& out_layout) {
  const std::size_t inner = layout.stride(pos);
  const auto dim_in = static_cast<std::size_t>(layout.modes()[pos].dim());
  const auto dim_out = static_cast<std::size_t>(out_layout.modes()[pos].dim());
  const std::size_t outer = layout.size() / (dim_in * inner);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(out_layout.size()), m.cols());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t r = 0; r < dim_out; ++r) {
      for (std::size_t c = 0; c < dim_in; ++c) {
        const cplx w = op(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        if (w == cplx{}) continue;
        for (std::size_t i = 0; i < inner; ++i) {
          const auto dst = static_cast<Eigen::Index>((o * dim_out + r) * inner + i);
          const auto src = static_cast<Eigen::Index>((o * dim_in + c) * inner + i);
          out.row(dst) += w * m.row(src);
        }
      }
    }
  }
  return out;
}

std::vector<ModeSpec> replace_cutoff(const std::vector<ModeSpec>& modes, std::size_t pos, int cutoff) {
  auto out = modes;
  out[pos].cutoff = cutoff;
  return out;
}

// A normally ordered monomial of ladder operators acting on one basis state.
struct Ladder {
  std::size_t pos;
  bool dagger;
};

// Applies ops (rightmost first) to basis index j; returns false on a zero.
bool act(const ModeLayout& layout, std::size_t j, std::span<const Ladder> ops,
         std::size_t& i_out, double& coef) {
  std::vector<int> occ = layout.occupation(j);
  coef = 1.0;
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
    int& n = occ[it->pos];
    if (it->dagger) {
      if (n + 1 > layout.modes()[it->pos].cutoff) return false;
      coef *= std::sqrt(static_cast<double>(n + 1));
      ++n;
    } else {
      if (n == 0) return false;
      coef *= std::sqrt(static_cast<double>(n));
      --n;
    }
  }
  i_out = layout.index(occ);
  return true;
}

// Tr(rho O) for a ladder monomial O.
cplx expect(const MultiModeDensity& rho, std::span<const Ladder> ops) {
  const auto& layout = rho.layout();
  cplx acc{};
  for (std::size_t j = 0; j < layout.size(); ++j) {
    std::size_t i = 0;
    double c = 0.0;
    if (!act(layout, j, ops, i, c)) continue;
    acc += c * rho.matrix()(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
  }
  return acc;
}

// <psi|O|psi> for a ladder monomial O.
cplx expect(const MultiModeKet& psi, std::span<const Ladder> ops) {
  const auto& layout = psi.layout();
  cplx acc{};
  const auto& amp = psi.amplitudes();
  for (std::size_t j = 0; j < layout.size(); ++j) {
    const cplx aj = amp[static_cast<Eigen::Index>(j)];
    if (aj == cplx{}) continue;
    std::size_t i = 0;
    double c = 0.0;
    if (!act(layout, j, ops, i, c)) continue;
    acc += c * std::conj(amp[static_cast<Eigen::Index>(i)]) * aj;
  }
  return acc;
}

template <class State>
Moments moments_impl(const State& s, const ModeId& first, const ModeId& second) {
  const std::size_t p1 = s.layout().position(first);
  const std::size_t p2 = s.layout().position(second);
  if (p1 == p2) throw std::invalid_argument("moments: modes must differ");
  auto ev = [&](std::initializer_list<Ladder> ops) {
    return expect(s, std::span<const Ladder>(ops.begin(), ops.size()));
  };
  const cplx a1 = ev({{p1, false}});
  const cplx a2 = ev({{p2, false}});
  const cplx a1a1 = ev({{p1, false}, {p1, false}});
  const cplx a2a2 = ev({{p2, false}, {p2, false}});
  const double n1 = ev({{p1, true}, {p1, false}}).real();
  const double n2 = ev({{p2, true}, {p2, false}}).real();
  const cplx a1a2 = ev({{p1, false}, {p2, false}});
  const cplx a1a2d = ev({{p1, false}, {p2, true}});

  Moments m;
  m.mean << 2 * a1.real(), 2 * a1.imag(), 2 * a2.real(), 2 * a2.imag();
  Eigen::Matrix4d s2;
  s2(0, 0) = 2 * a1a1.real() + 2 * n1 + 1;
  s2(1, 1) = -2 * a1a1.real() + 2 * n1 + 1;
  s2(0, 1) = 2 * a1a1.imag();
  s2(2, 2) = 2 * a2a2.real() + 2 * n2 + 1;
  s2(3, 3) = -2 * a2a2.real() + 2 * n2 + 1;
  s2(2, 3) = 2 * a2a2.imag();
  s2(0, 2) = 2 * a1a2.real() + 2 * a1a2d.real();
  s2(0, 3) = 2 * a1a2.imag() - 2 * a1a2d.imag();
  s2(1, 2) = 2 * a1a2.imag() + 2 * a1a2d.imag();
  s2(1, 3) = -2 * a1a2.real() + 2 * a1a2d.real();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < r; ++c) s2(r, c) = s2(c, r);
  }
  m.cov = s2 - m.mean * m.mean.transpose();
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// ModeLayout

ModeLayout::ModeLayout(std::vector<ModeSpec> modes) : modes_(std::move(modes)) {
  std::set<ModeId> seen;
  for (const auto& m : modes_) {
    if (m.cutoff < 0) throw std::invalid_argument("mode '" + m.id.label() + "': negative cutoff");
    if (!seen.insert(m.id).second) {
      throw std::invalid_argument("duplicate mode label '" + m.id.label() + "'");
    }
  }
  strides_.assign(modes_.size(), 1);
  size_ = 1;
  for (std::size_t p = modes_.size(); p-- > 0;) {
    strides_[p] = size_;
    size_ *= static_cast<std::size_t>(modes_[p].dim());
  }
}

std::size_t ModeLayout::position(const ModeId& id) const {
  for (std::size_t p = 0; p < modes_.size(); ++p) {
    if (modes_[p].id == id) return p;
  }
  throw std::out_of_range("unknown mode '" + id.label() + "'");
}

bool ModeLayout::contains(const ModeId& id) const {
  return std::any_of(modes_.begin(), modes_.end(), [&](const ModeSpec& m) { return m.id == id; });
}

std::size_t ModeLayout::index(std::span<const int> occupation) const {
  if (occupation.size() != modes_.size()) throw std::invalid_argument("occupation rank mismatch");
  std::size_t idx = 0;
  for (std::size_t p = 0; p < modes_.size(); ++p) {
    if (occupation[p] < 0 || occupation[p] > modes_[p].cutoff) {
      throw std::out_of_range("occupation beyond cutoff on mode '" + modes_[p].id.label() + "'");
    }
    idx += static_cast<std::size_t>(occupation[p]) * strides_[p];
  }
  return idx;
}

std::vector<int> ModeLayout::occupation(std::size_t index) const {
  std::vector<int> occ(modes_.size());
  for (std::size_t p = 0; p < modes_.size(); ++p) {
    occ[p] = static_cast<int>(index / strides_[p]);
    index %= strides_[p];
  }
  return occ;
}

// ---------------------------------------------------------------------------
// States

MultiModeKet::MultiModeKet(std::vector<ModeSpec> modes, Eigen::VectorXcd amplitudes)
    : layout_(std::move(modes)), amps_(std::move(amplitudes)) {
  if (static_cast<std::size_t>(amps_.size()) != layout_.size()) {
    throw std::invalid_argument("ket amplitude count does not match mode cutoffs");
  }
  if (!amps_.allFinite()) throw std::invalid_argument("ket amplitudes must be finite");
}

MultiModeKet MultiModeKet::vacuum(std::vector<ModeSpec> modes) {
  std::vector<int> zeros(modes.size(), 0);
  return basis(std::move(modes), zeros);
}

MultiModeKet MultiModeKet::basis(std::vector<ModeSpec> modes, std::span<const int> occupation) {
  ModeLayout layout(modes);
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(layout.size()));
  amps[static_cast<Eigen::Index>(layout.index(occupation))] = 1.0;
  return MultiModeKet(std::move(modes), std::move(amps));
}

MultiModeKet MultiModeKet::normalized() const {
  const double n = amps_.norm();
  if (!(n > 0.0)) throw std::domain_error("cannot normalise a zero ket");
  return MultiModeKet(modes(), amps_ / n);
}

MultiModeDensity::MultiModeDensity(std::vector<ModeSpec> modes, Eigen::MatrixXcd matrix)
    : layout_(std::move(modes)), rho_(std::move(matrix)) {
  const auto n = static_cast<Eigen::Index>(layout_.size());
  if (rho_.rows() != n || rho_.cols() != n) {
    throw std::invalid_argument("density matrix shape does not match mode cutoffs");
  }
  if (!rho_.allFinite()) throw std::invalid_argument("density matrix must be finite");
}

MultiModeDensity MultiModeDensity::normalized() const {
  const double t = trace();
  if (!(t > 0.0)) throw std::domain_error("cannot normalise a density with non-positive trace");
  return MultiModeDensity(modes(), rho_ / t);
}

double MultiModeDensity::hermiticity_error() const {
  return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
}

double MultiModeDensity::min_eigenvalue() const {
  const Eigen::MatrixXcd h = 0.5 * (rho_ + rho_.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double MultiModeDensity::purity() const {
  const double t = trace();
  return (rho_ * rho_).trace().real() / (t * t);
}

MultiModeDensity to_density(const MultiModeKet& ket) {
  return MultiModeDensity(ket.modes(), ket.amplitudes() * ket.amplitudes().adjoint());
}

// ---------------------------------------------------------------------------
// Tensor and trace

MultiModeKet tensor(const MultiModeKet& lhs, const MultiModeKet& rhs) {
  auto modes = concat(lhs.modes(), rhs.modes());
  ModeLayout check(modes);  // throws on collision
  const auto& a = lhs.amplitudes();
  const auto& b = rhs.amplitudes();
  Eigen::VectorXcd out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a[i] * b;
  return MultiModeKet(std::move(modes), std::move(out));
}

MultiModeDensity tensor(const MultiModeDensity& lhs, const MultiModeDensity& rhs) {
  auto modes = concat(lhs.modes(), rhs.modes());
  ModeLayout check(modes);
  const auto& a = lhs.matrix();
  const auto& b = rhs.matrix();
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return MultiModeDensity(std::move(modes), std::move(out));
}

MultiModeDensity partial_trace(const MultiModeDensity& rho, std::span<const ModeId> keep) {
  const SplitIndex split = split_layout(rho.layout(), keep);
  const auto nk = static_cast<Eigen::Index>(split.kept.size());
  const auto nt = split.traced.size();
  // full index for every (kept, traced) pair
  std::vector<std::size_t> full(split.kept.size() * nt);
  for (std::size_t idx = 0; idx < rho.layout().size(); ++idx) {
    full[split.kept_of[idx] * nt + split.traced_of[idx]] = idx;
  }
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(nk, nk);
  for (Eigen::Index k1 = 0; k1 < nk; ++k1) {
    for (Eigen::Index k2 = 0; k2 < nk; ++k2) {
      cplx acc{};
      for (std::size_t t = 0; t < nt; ++t) {
        acc += rho.matrix()(static_cast<Eigen::Index>(full[static_cast<std::size_t>(k1) * nt + t]),
                            static_cast<Eigen::Index>(full[static_cast<std::size_t>(k2) * nt + t]));
      }
      out(k1, k2) = acc;
    }
  }
  return MultiModeDensity(split.kept.modes(), std::move(out));
}

MultiModeDensity partial_trace(const MultiModeDensity& rho, std::initializer_list<ModeId> keep) {
  return partial_trace(rho, std::span<const ModeId>(keep.begin(), keep.size()));
}

MultiModeDensity partial_trace(const MultiModeKet& psi, std::span<const ModeId> keep) {
  const SplitIndex split = split_layout(psi.layout(), keep);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(split.kept.size()),
                                              static_cast<Eigen::Index>(split.traced.size()));
  for (std::size_t idx = 0; idx < psi.layout().size(); ++idx) {
    m(static_cast<Eigen::Index>(split.kept_of[idx]), static_cast<Eigen::Index>(split.traced_of[idx])) =
        psi.amplitudes()[static_cast<Eigen::Index>(idx)];
  }
  return MultiModeDensity(split.kept.modes(), m * m.adjoint());
}

MultiModeDensity partial_trace(const MultiModeKet& psi, std::initializer_list<ModeId> keep) {
  return partial_trace(psi, std::span<const ModeId>(keep.begin(), keep.size()));
}

// ---------------------------------------------------------------------------
// Single-mode operators

MultiModeKet apply_mode_operator(const MultiModeKet& psi, const ModeId& mode, const Eigen::MatrixXcd& op) {
  const std::size_t pos = psi.layout().position(mode);
  if (op.cols() != psi.modes()[pos].dim()) throw std::invalid_argument("operator/mode dimension mismatch");
  ModeLayout out_layout(replace_cutoff(psi.modes(), pos, static_cast<int>(op.rows()) - 1));
  Eigen::MatrixXcd out = apply_on_rows(psi.amplitudes(), psi.layout(), pos, op, out_layout);
  return MultiModeKet(out_layout.modes(), out.col(0));
}

MultiModeDensity apply_mode_operator(const MultiModeDensity& rho, const ModeId& mode,
                                     const Eigen::MatrixXcd& op) {
  const std::size_t pos = rho.layout().position(mode);
  if (op.cols() != rho.modes()[pos].dim()) throw std::invalid_argument("operator/mode dimension mismatch");
  ModeLayout out_layout(replace_cutoff(rho.modes(), pos, static_cast<int>(op.rows()) - 1));
  const Eigen::MatrixXcd half = apply_on_rows(rho.matrix(), rho.layout(), pos, op, out_layout);
  const Eigen::MatrixXcd full = apply_on_rows(half.adjoint(), rho.layout(), pos, op, out_layout);
  return MultiModeDensity(out_layout.modes(), full.adjoint());
}

namespace {
Eigen::MatrixXcd embedding(int new_cutoff, int old_cutoff) {
  Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(new_cutoff + 1, old_cutoff + 1);
  for (int n = 0; n <= std::min(new_cutoff, old_cutoff); ++n) e(n, n) = 1.0;
  return e;
}
}  // namespace

MultiModeKet with_cutoff(const MultiModeKet& psi, const ModeId& mode, int cutoff) {
  return apply_mode_operator(psi, mode, embedding(cutoff, psi.layout().cutoff(mode)));
}

MultiModeDensity with_cutoff(const MultiModeDensity& rho, const ModeId& mode, int cutoff) {
  return apply_mode_operator(rho, mode, embedding(cutoff, rho.layout().cutoff(mode)));
}

MultiModeDensity reorder(const MultiModeDensity& rho, std::span<const ModeId> order) {
  const auto& layout = rho.layout();
  if (order.size() != layout.num_modes()) throw std::invalid_argument("reorder: not a permutation");
  std::vector<ModeSpec> modes;
  std::vector<std::size_t> src_pos;
  for (const auto& id : order) {
    src_pos.push_back(layout.position(id));
    modes.push_back(layout.modes()[src_pos.back()]);
  }
  ModeLayout out_layout(modes);
  std::vector<std::size_t> perm(layout.size());
  for (std::size_t idx = 0; idx < layout.size(); ++idx) {
    const auto occ = layout.occupation(idx);
    std::vector<int> new_occ(occ.size());
    for (std::size_t p = 0; p < occ.size(); ++p) new_occ[p] = occ[src_pos[p]];
    perm[idx] = out_layout.index(new_occ);
  }
  Eigen::MatrixXcd out(rho.matrix().rows(), rho.matrix().cols());
  for (std::size_t i = 0; i < layout.size(); ++i) {
    for (std::size_t j = 0; j < layout.size(); ++j) {
      out(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(perm[j])) =
          rho.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return MultiModeDensity(std::move(modes), std::move(out));
}

Eigen::MatrixXcd annihilation(int cutoff) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(cutoff + 1, cutoff + 1);
  for (int n = 1; n <= cutoff; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

int displacement_guard(cplx alpha) {
  const double r = std::abs(alpha);
  return 20 + static_cast<int>(std::ceil(10.0 * r + 2.0 * r * r));
}

Eigen::MatrixXcd displacement(cplx alpha, int rows_cutoff, int cols_cutoff) {
  if (rows_cutoff < 0 || cols_cutoff < 0) throw std::invalid_argument("displacement: negative cutoff");
  const int big = std::max(rows_cutoff, cols_cutoff) + displacement_guard(alpha);
  if (alpha == cplx{}) return embedding(rows_cutoff, cols_cutoff);
  const Eigen::MatrixXcd a = annihilation(big);
  // D = exp(G) with G anti-Hermitian; diagonalise the Hermitian H = iG.
  const Eigen::MatrixXcd h = cplx(0, 1) * (alpha * a.adjoint() - std::conj(alpha) * a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (h + h.adjoint()));
  const Eigen::VectorXcd phases =
      es.eigenvalues().unaryExpr([](double l) { return std::exp(cplx(0, -l)); });
  const Eigen::MatrixXcd d = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  return d.topLeftCorner(rows_cutoff + 1, cols_cutoff + 1);
}

Eigen::MatrixXcd displacement(cplx alpha, int cutoff) {
  if (cutoff < 1) throw std::invalid_argument("displacement: cutoff must be at least 1");
  return displacement(alpha, cutoff, cutoff);
}

MultiModeDensity displace(const MultiModeDensity& rho, const ModeId& mode, cplx alpha) {
  if (alpha == cplx{}) return rho;
  const int n = rho.layout().cutoff(mode);
  return apply_mode_operator(rho, mode, displacement(alpha, n, n));
}

// ---------------------------------------------------------------------------
// Moments

Moments moments(const MultiModeDensity& rho, const ModeId& first, const ModeId& second) {
  if (std::abs(rho.trace() - 1.0) > kTraceTolerance) {
    throw std::invalid_argument("moments: density must be normalised");
  }
  return moments_impl(rho, first, second);
}

Moments moments(const MultiModeKet& psi, const ModeId& first, const ModeId& second) {
  if (std::abs(psi.squared_norm() - 1.0) > kTraceTolerance) {
    throw std::invalid_argument("moments: ket must be normalised");
  }
  return moments_impl(psi, first, second);
}

Moments displaced(const Moments& m, cplx alpha1, cplx alpha2) {
  Moments out = m;
  out.mean += Eigen::Vector4d(2 * alpha1.real(), 2 * alpha1.imag(), 2 * alpha2.real(), 2 * alpha2.imag());
  return out;
}

MultiModeDensity dephase(const MultiModeDensity& rho, std::span<const int> charges) {
  const auto& layout = rho.layout();
  if (charges.size() != layout.num_modes()) throw std::invalid_argument("dephase: one charge per mode");
  std::vector<long> q(layout.size());
  for (std::size_t idx = 0; idx < layout.size(); ++idx) {
    const auto occ = layout.occupation(idx);
    long s = 0;
    for (std::size_t p = 0; p < occ.size(); ++p) s += static_cast<long>(charges[p]) * occ[p];
    q[idx] = s;
  }
  Eigen::MatrixXcd out = rho.matrix();
  for (std::size_t i = 0; i < layout.size(); ++i) {
    for (std::size_t j = 0; j < layout.size(); ++j) {
      if (q[i] != q[j]) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 0.0;
    }
  }
  return MultiModeDensity(rho.modes(), std::move(out));
}

double von_neumann_entropy(const MultiModeDensity& rho) {
  const MultiModeDensity n = rho.normalized();
  const Eigen::MatrixXcd h = 0.5 * (n.matrix() + n.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double l = es.eigenvalues()[i];
    if (l > 1e-300) s -= l * std::log2(l);
  }
  return s;
}

int converged_cutoff(const std::function<double(int)>& f, int start, double tolerance, int max_cutoff) {
  if (start < 1) throw std::invalid_argument("converged_cutoff: start must be >= 1");
  double prev = f(start);
  for (int n = start; 2 * n <= max_cutoff; n *= 2) {
    const double next = f(2 * n);
    if (std::abs(next - prev) <= tolerance) return n;
    prev = next;
  }
  throw std::runtime_error("converged_cutoff: no convergence up to cutoff " + std::to_string(max_cutoff));
}

}  // namespace cvrep
