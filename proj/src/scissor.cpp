#include "cvrep/scissor.hpp"

#include "cvrep/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cvrep {

NlaParams NlaParams::from_xi(double xi) {
  if (!(xi > 0.0 && xi < 1.0)) throw std::domain_error("scissor ratio xi must lie in (0, 1)");
  return NlaParams{std::sqrt((1.0 - xi) / xi)};
}

void NlaParams::validate() const {
  if (!(gain > 0.0)) throw std::domain_error("NLA gain must be positive");
  if (gain > kMaxGain) {
    throw std::domain_error("NLA gain " + std::to_string(gain) + " exceeds the supported maximum of " + std::to_string(kMaxGain));
  }
}

MultiModeKet apply_qs(const MultiModeKet& state, const ModeId& mode, const NlaParams& nla) {
  nla.validate();
  const int cutoff = state.layout().cutoff(mode);
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(2, cutoff + 1);
  const double pre = 1.0 / std::sqrt(nla.gain * nla.gain + 1.0);
  t(0, 0) = pre;
  if (cutoff >= 1) t(1, 1) = pre * nla.gain;
  return apply_mode_operator(state, mode, t);
}

double p_nla(double chi, double eta, double gain) {
  if (!(chi >= 0.0 && chi < 1.0)) throw std::domain_error("p_nla: chi must lie in [0, 1)");
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::domain_error("p_nla: eta must lie in [0, 1]");
  if (!(gain > 0.0)) throw std::domain_error("p_nla: gain must be positive");
  const double c2 = chi * chi;
  const double g2 = gain * gain;
  const double den = (eta - 1.0) * c2 + 1.0;
  return (1.0 - c2) * (c2 * (eta * g2 + eta - 1.0) + 1.0) / ((g2 + 1.0) * den * den);
}

MultiModeKet distilled_link(double chi, double eta, double gain, int cutoff, const ModeId& outer,
                            const ModeId& inner, const ModeId& env) {
  const MultiModeKet source = tmsv(SourceParams{chi}, cutoff, outer, inner);
  const MultiModeKet lossy = apply_loss(source, inner, eta, env);
  return apply_qs(lossy, inner, NlaParams{gain});
}

}  // namespace cvrep
