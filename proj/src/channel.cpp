#include "cvrep/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cvrep {

void SourceParams::validate() const {
  if (!(chi >= 0.0 && chi < 1.0)) {
    throw std::domain_error("squeezing parameter chi must lie in [0, 1), got " + std::to_string(chi));
  }
}

double transmissivity(const FiberChannel& channel) {
  if (channel.length_km < 0.0) throw std::domain_error("fibre length must be nonnegative");
  return std::pow(10.0, -channel.attenuation_db_per_km * channel.length_km / 10.0);
}

MultiModeKet tmsv(const SourceParams& source, int cutoff, const ModeId& first, const ModeId& second) {
  source.validate();
  if (cutoff < 0) throw std::invalid_argument("tmsv: negative cutoff");
  std::vector<ModeSpec> modes{{first, cutoff}, {second, cutoff}};
  ModeLayout layout(modes);
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(layout.size()));
  const double pre = std::sqrt(1.0 - source.chi * source.chi);
  double chi_n = 1.0;
  for (int n = 0; n <= cutoff; ++n) {
    const int occ[2] = {n, n};
    amps[static_cast<Eigen::Index>(layout.index(occ))] = pre * chi_n;
    chi_n *= source.chi;
  }
  return MultiModeKet(std::move(modes), std::move(amps));
}

MultiModeKet apply_loss(const MultiModeKet& state, const ModeId& mode, double eta, const ModeId& env) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::domain_error("transmissivity must lie in [0, 1]");
  const auto& in_layout = state.layout();
  const std::size_t pos = in_layout.position(mode);
  const int cutoff = in_layout.modes()[pos].cutoff;
  auto modes = state.modes();
  modes.push_back({env, cutoff});
  ModeLayout out_layout(modes);  // throws if env collides

  // binomial splitting amplitudes sqrt(C(n,p)) eta^(p/2) (1-eta)^((n-p)/2)
  std::vector<std::vector<double>> split(static_cast<std::size_t>(cutoff) + 1);
  for (int n = 0; n <= cutoff; ++n) {
    auto& row = split[static_cast<std::size_t>(n)];
    row.resize(static_cast<std::size_t>(n) + 1);
    for (int p = 0; p <= n; ++p) {
      const double log_binom = std::lgamma(n + 1.0) - std::lgamma(p + 1.0) - std::lgamma(n - p + 1.0);
      const double t = (p == 0) ? 1.0 : std::pow(eta, 0.5 * p);
      const double r = (n - p == 0) ? 1.0 : std::pow(1.0 - eta, 0.5 * (n - p));
      row[static_cast<std::size_t>(p)] = std::exp(0.5 * log_binom) * t * r;
    }
  }

  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(out_layout.size()));
  const std::size_t env_stride = out_layout.stride(out_layout.num_modes() - 1);
  for (std::size_t idx = 0; idx < in_layout.size(); ++idx) {
    const cplx amp = state.amplitudes()[static_cast<Eigen::Index>(idx)];
    if (amp == cplx{}) continue;
    auto occ = in_layout.occupation(idx);
    const int n = occ[pos];
    occ.push_back(0);
    for (int p = 0; p <= n; ++p) {
      occ[pos] = p;
      occ.back() = 0;
      const std::size_t base = out_layout.index(occ);
      out[static_cast<Eigen::Index>(base + static_cast<std::size_t>(n - p) * env_stride)] +=
          amp * split[static_cast<std::size_t>(n)][static_cast<std::size_t>(p)];
    }
  }
  return MultiModeKet(std::move(modes), std::move(out));
}

}  // namespace cvrep
