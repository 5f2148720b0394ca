#include "cvrep/rates.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cvrep {

namespace {

void check_args(int n, double p) {
  if (n < 0 || n > 20) throw std::domain_error("z_steps: n must lie in [0, 20]");
  if (!(p > 0.0 && p <= 1.0)) throw std::domain_error("z_steps: p must lie in (0, 1]");
}

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace

double z_steps_alternating(int n, double p) {
  check_args(n, p);
  const int m = 1 << n;
  const double log_q = std::log1p(-p);
  CompensatedSum sum;
  for (int j = 1; j <= m; ++j) {
    const double log_binom = std::lgamma(m + 1.0) - std::lgamma(j + 1.0) - std::lgamma(m - j + 1.0);
    const double denom = (p == 1.0) ? 1.0 : -std::expm1(j * log_q);  // 1 - (1-p)^j
    const double term = std::exp(log_binom) / denom;
    sum.add((j % 2 == 1) ? term : -term);
  }
  return sum.value();
}

double z_steps_expectation(int n, double p) {
  check_args(n, p);
  if (p == 1.0) return 1.0;
  const double m = std::ldexp(1.0, n);
  const double log_q = std::log1p(-p);
  CompensatedSum sum;
  sum.add(1.0);  // t = 0 term: P(max > 0) = 1
  for (long t = 1;; ++t) {
    const double qt = std::exp(t * log_q);
    if (m * qt < 1e-6) {
      // remaining terms to second order in q^s: m q^s - C(m, 2) q^{2s}; the
      // third-order remainder is below 1e-12 of the sum
      sum.add(m * qt / p - 0.5 * m * (m - 1.0) * qt * qt / (-std::expm1(2.0 * log_q)));
      break;
    }
    // 1 - (1 - q^t)^m, evaluated without cancellation
    sum.add(-std::expm1(m * std::log1p(-qt)));
    if (t > 100'000'000) throw std::runtime_error("z_steps_expectation: series did not converge");
  }
  return sum.value();
}

double z_steps(int n, double p) {
  check_args(n, p);
  // The alternating form loses about log10 C(2^n, 2^{n-1}) digits: at most
  // four up to 16 processes, hopeless beyond a few dozen.
  if (n <= 4) return z_steps_alternating(n, p);
  return z_steps_expectation(n, p);
}

double repeater_rate(const StageProbabilities& sp, int n) {
  if (static_cast<int>(sp.p_ps.size()) != n) {
    throw std::invalid_argument("repeater_rate: expected " + std::to_string(n) + " post-selection probabilities, got " +
                                std::to_string(sp.p_ps.size()));
  }
  double r = 1.0 / z_steps(n, sp.p_nla);
  for (int i = 0; i < n; ++i) r /= z_steps(i, sp.p_ps[static_cast<std::size_t>(i)]);
  return r;
}

double secret_key_rate(double raw_key_bits, double r_rep) {
  if (raw_key_bits < 0.0) throw std::domain_error("secret_key_rate: raw key must be >= 0");
  if (!(r_rep > 0.0 && r_rep <= 1.0)) throw std::domain_error("secret_key_rate: repeater rate must lie in (0, 1]");
  return raw_key_bits * r_rep;
}

}  // namespace cvrep
