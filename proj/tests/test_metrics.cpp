#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cvrep/channel.hpp"
#include "cvrep/metrics.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

using namespace cvrep;

namespace {

Eigen::Matrix4d omega() {
  Eigen::Matrix4d w = Eigen::Matrix4d::Zero();
  w(0, 1) = 1;
  w(1, 0) = -1;
  w(2, 3) = 1;
  w(3, 2) = -1;
  return w;
}

// Symplectic spectrum from |eig(i Omega V)|, sorted descending.
std::pair<double, double> spectrum(const Eigen::Matrix4d& v) {
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(std::complex<double>(0, 1) * (omega() * v).cast<cplx>());
  std::vector<double> ev;
  for (int i = 0; i < 4; ++i) ev.push_back(std::abs(es.eigenvalues()(i)));
  std::sort(ev.begin(), ev.end());
  return {ev[3], ev[0]};
}

Eigen::Matrix4d tmsv_cov(double r) {
  const double ch = std::cosh(2 * r), sh = std::sinh(2 * r);
  Eigen::Matrix4d v;
  v << ch, 0, sh, 0, 0, ch, 0, -sh, sh, 0, ch, 0, 0, -sh, 0, ch;
  return v;
}

bool psd(const Eigen::Matrix4d& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(m);
  return es.eigenvalues().minCoeff() >= -1e-12;
}

// Minimum over a grid of local squeezes of the entanglement of the least
// entangled pure TMSV-like state lying below v.
double brute_force_eof(const Eigen::Matrix4d& v) {
  double best = std::numeric_limits<double>::infinity();
  for (double ua = -1.5; ua <= 1.5 + 1e-9; ua += 0.05) {
    for (double ub = -1.5; ub <= 1.5 + 1e-9; ub += 0.05) {
      Eigen::Matrix4d s = Eigen::Matrix4d::Zero();
      s.diagonal() << std::exp(ua), std::exp(-ua), std::exp(ub), std::exp(-ub);
      auto feasible = [&](double r) { return psd(v - s * tmsv_cov(r) * s.transpose()); };
      double lo = -1, hi = -1;
      for (double r = 0.0; r <= 4.0; r += 0.02) {
        if (feasible(r)) {
          hi = r;
          break;
        }
        lo = r;
      }
      if (hi < 0) continue;
      if (lo >= 0) {
        for (int it = 0; it < 50; ++it) {
          const double mid = 0.5 * (lo + hi);
          (feasible(mid) ? hi : lo) = mid;
        }
      }
      best = std::min(best, g_entropy(std::pow(std::sinh(hi), 2)));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("symplectic eigenvalues agree with the matrix spectrum") {
  for (auto [chi, eta] : {std::pair{0.3, 1.0}, {0.6, 0.2}, {0.8, 0.05}}) {
    const CovarianceMatrixTM v = lossy_tmsv_cm(chi, eta);
    const auto [n1, n2] = spectrum(v.full);
    const SymplecticEigs s = symplectic_eigs(v);
    CHECK(s.nu1 == doctest::Approx(n1).epsilon(1e-9));
    CHECK(s.nu2 == doctest::Approx(n2).epsilon(1e-9));
    CHECK(s.nu2 >= 1.0 - 1e-12);
    Eigen::Matrix4d pt = v.full;
    const Eigen::Vector4d flip(1, 1, 1, -1);
    pt = flip.asDiagonal() * pt * flip.asDiagonal();
    CHECK(pt_min_symplectic_eig(v) == doctest::Approx(spectrum(pt).second).epsilon(1e-9));
  }
}

TEST_CASE("from_full recovers standard-form invariants") {
  const CovarianceMatrixTM v = lossy_tmsv_cm(0.5, 0.4);
  // a local phase rotation on A leaves the invariants alone
  const double th = 0.7;
  Eigen::Matrix4d rot = Eigen::Matrix4d::Identity();
  rot.block<2, 2>(0, 0) << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  const CovarianceMatrixTM w = CovarianceMatrixTM::from_full(rot * v.full * rot.transpose(), Eigen::Vector4d::Zero());
  CHECK(w.a == doctest::Approx(v.a));
  CHECK(w.b == doctest::Approx(v.b));
  CHECK(w.c == doctest::Approx(v.c));
}

TEST_CASE("unphysical covariance matrices are rejected") {
  CHECK_THROWS_AS(symplectic_eigs(CovarianceMatrixTM::standard(1.0, 2.0, 5.0)), std::domain_error);
  // symmetric violations have a real spectrum and show up as nu < 1
  CHECK(symplectic_eigs(CovarianceMatrixTM::standard(1.0, 1.0, 0.5)).nu2 < 1.0);
}

TEST_CASE("G entropy") {
  CHECK(g_entropy(0.0) == 0.0);
  CHECK(g_entropy(1.0) == doctest::Approx(2.0));
  double prev = 0.0;
  for (double x = 0.1; x < 100.0; x *= 1.5) {
    CHECK(g_entropy(x) > prev);
    prev = g_entropy(x);
  }
  CHECK(g_entropy(1e6) == doctest::Approx(std::log2(1e6) + 1.0 / std::log(2.0)).epsilon(1e-6));
}

TEST_CASE("pure TMSV: Eve learns nothing and Alice-Bob information is log2 a") {
  const CovarianceMatrixTM v = lossy_tmsv_cm(0.6, 1.0);
  CHECK(std::abs(holevo_reverse(v)) < 1e-9);
  CHECK(mutual_info(v, Protocol::homodyne) == doctest::Approx(std::log2(v.a)).epsilon(1e-12));
  // heterodyne: log2((1+a)/(1+a-(a^2-1)/(1+a))) = log2((1+a)/2)
  CHECK(mutual_info(v, Protocol::heterodyne) == doctest::Approx(std::log2((1 + v.a) / 2)).epsilon(1e-12));
}

TEST_CASE("key margin under loss") {
  const CovarianceMatrixTM v = lossy_tmsv_cm(0.5, 0.1);
  CHECK(holevo_reverse(v) > 0.0);
  const KeyRateInputs in{0.95, Protocol::homodyne};
  CHECK(key_margin(v, in) == doctest::Approx(0.95 * mutual_info(v, in.protocol) - holevo_reverse(v)));
  CHECK(raw_key(v, in) >= 0.0);
  CHECK(raw_key(v, {0.0, Protocol::homodyne}) == 0.0);
}

TEST_CASE("pure-state EOF equals the reduced entropy") {
  for (double chi : {0.1, 0.4, 0.8}) {
    const double c2 = chi * chi;
    const double nbar = c2 / (1 - c2);
    // von Neumann entropy of a thermal state with mean photon number nbar
    const double s = (nbar + 1) * std::log2(nbar + 1) - nbar * std::log2(nbar);
    CHECK(std::abs(eof_gaussian(lossy_tmsv_cm(chi, 1.0)) - s) <= 1e-6);
    CHECK(std::abs(tmsv_entanglement(chi) - s) <= 1e-12);
  }
}

TEST_CASE("EOF agrees with a brute-force search over pure states") {
  // extra local noise keeps the feasible set full-dimensional so a grid can find it
  auto noisy = [](const CovarianceMatrixTM& v, double na, double nb) {
    return CovarianceMatrixTM::standard(v.a + na, v.b + nb, v.c);
  };
  for (const CovarianceMatrixTM& v : {noisy(lossy_tmsv_cm(0.6, 0.3), 0.05, 0.02), noisy(lossy_tmsv_cm(0.4, 0.6), 0.1, 0.1),
                                      CovarianceMatrixTM::standard(2.0, 2.0, 1.5)}) {
    const double e = eof_gaussian(v);
    const double brute = brute_force_eof(v.full);
    CHECK(e <= brute + 1e-9);
    CHECK(e >= brute - 2e-3);
  }
}

TEST_CASE("separable states have no EOF") {
  CHECK(eof_gaussian(CovarianceMatrixTM::standard(2.0, 2.0, 0.5)) == 0.0);
  CHECK(eof_gaussian(CovarianceMatrixTM::standard(1.0, 1.0, 0.0)) == 0.0);
}

TEST_CASE("PLOB bound") {
  CHECK(plob(0.5) == doctest::Approx(1.0));
  CHECK(plob(0.0) == 0.0);
  CHECK_THROWS(plob(1.0));
}

TEST_CASE("direct transmission key stays below PLOB") {
  for (double l = 10.0; l <= 300.0; l += 20.0) {
    const double eta = transmissivity(FiberChannel{l});
    const DirectKeyResult d = direct_transmission_key(l, 1.0);
    CHECK(d.key > 0.0);
    CHECK(d.key <= plob(eta));
    CHECK(direct_transmission_key(l, 0.95).key <= d.key);
  }
}

TEST_CASE("infinite-squeezing EOF over loss converges and falls with distance") {
  const double e1 = eof_direct_infinite_squeezing(transmissivity(FiberChannel{50.0}));
  const double e2 = eof_direct_infinite_squeezing(transmissivity(FiberChannel{100.0}));
  CHECK(e1 > e2);
  CHECK(e2 > 0.0);
  const double eta = transmissivity(FiberChannel{100.0});
  CHECK(eof_gaussian(lossy_tmsv_cm(0.99999, eta)) < e2);
  CHECK(eof_gaussian(lossy_tmsv_cm(0.9, eta)) < e2);
}

TEST_CASE("infinite-squeezing EOF matches the high-precision limit") {
  // 60-digit evaluation of the optimal TMSV decomposition at 1 - chi = 1e-14
  const std::vector<std::pair<double, double>> oracle{
      {5.0, 3.56455153713}, {20.0, 1.611304435842}, {60.0, 0.3624843990403}, {150.0, 0.01141917691438}};
  for (const auto& [km, limit] : oracle) {
    CHECK(std::abs(eof_direct_infinite_squeezing(transmissivity(FiberChannel{km})) - limit) < 1e-5);
  }
}
