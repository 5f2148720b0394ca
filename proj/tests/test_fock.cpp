#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cvrep/channel.hpp"
#include "cvrep/fock.hpp"

#include <cmath>

using namespace cvrep;

namespace {

// <m|D(alpha)|n> for m >= n from the associated Laguerre polynomial.
cplx displacement_element(cplx alpha, int m, int n) {
  if (m < n) return std::conj(displacement_element(-alpha, n, m));  // D(alpha)^dag = D(-alpha)
  const double x = std::norm(alpha);
  const double pref = std::exp(0.5 * (std::lgamma(n + 1.0) - std::lgamma(m + 1.0)) - 0.5 * x);
  return pref * std::pow(alpha, m - n) * std::assoc_laguerre(static_cast<unsigned>(n), static_cast<unsigned>(m - n), x);
}

}  // namespace

TEST_CASE("displacement matches the Laguerre closed form") {
  for (int cutoff : {12, 30}) {
    for (cplx alpha : {cplx(0.3, 0.0), cplx(0.7, -0.4), cplx(-1.1, 0.5), std::polar(2.0, 1.0), std::polar(6.0, -2.0)}) {
      const Eigen::MatrixXcd d = displacement(alpha, cutoff);
      double worst = 0.0;
      for (int m = 0; m <= cutoff; ++m) {
        for (int n = 0; n <= cutoff; ++n) worst = std::max(worst, std::abs(d(m, n) - displacement_element(alpha, m, n)));
      }
      CHECK(worst < 1e-10);
    }
  }
}

TEST_CASE("rectangular displacement is a block of the square one") {
  const cplx alpha(0.4, 0.2);
  const Eigen::MatrixXcd big = displacement(alpha, 12);
  const Eigen::MatrixXcd block = displacement(alpha, 12, 1);
  CHECK((big.leftCols(2) - block).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("displacement into the guard band preserves the norm of in-cutoff states") {
  for (cplx a : {cplx(1.0, 0.0), cplx(-1.2, 0.9), cplx(0.0, 2.0)}) {
    const Eigen::MatrixXcd d = displacement(a, 12 + displacement_guard(a), 12);
    CHECK(((d.adjoint() * d) - Eigen::MatrixXcd::Identity(13, 13)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("displacement is unitary well inside the cutoff") {
  const Eigen::MatrixXcd d = displacement(cplx(0.5, -0.3), 30);
  const Eigen::MatrixXcd dd = d.adjoint() * d;
  const Eigen::MatrixXcd low = dd.topLeftCorner(16, 16);
  CHECK((low - Eigen::MatrixXcd::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("coherent state moments") {
  const cplx alpha(0.6, -0.25);
  const MultiModeKet vac = MultiModeKet::vacuum({{"A", 20}, {"B", 20}});
  MultiModeKet psi = apply_mode_operator(vac, "A", displacement(alpha, 20));
  const Moments m = moments(psi, "A", "B");
  CHECK(m.mean(0) == doctest::Approx(2.0 * alpha.real()).epsilon(1e-10));
  CHECK(m.mean(1) == doctest::Approx(2.0 * alpha.imag()).epsilon(1e-10));
  CHECK((m.cov - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
  const Moments shifted = displaced(m, cplx(0.1, 0.0), cplx(0.0, 0.2));
  CHECK(shifted.mean(0) == doctest::Approx(m.mean(0) + 0.2));
  CHECK(shifted.mean(3) == doctest::Approx(0.4));
}

TEST_CASE("TMSV moments at a generous cutoff match the Gaussian covariance") {
  const double chi = 0.5;
  const MultiModeKet psi = tmsv(SourceParams{chi}, 40);
  CHECK(psi.squared_norm() == doctest::Approx(1.0).epsilon(1e-12));
  const Moments m = moments(psi, "A", "C");
  const double a = (1 + chi * chi) / (1 - chi * chi);
  const double c = 2 * chi / (1 - chi * chi);
  Eigen::Matrix4d want;
  want << a, 0, c, 0, 0, a, 0, -c, c, 0, a, 0, 0, -c, 0, a;
  CHECK((m.cov - want).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(m.mean.norm() < 1e-12);
}

TEST_CASE("partial trace of a TMSV is thermal and moment paths agree") {
  const double chi = 0.4;
  const MultiModeKet psi = tmsv(SourceParams{chi}, 25);
  const MultiModeDensity rho_a = partial_trace(psi, {"A"});
  const MultiModeDensity rho_a2 = partial_trace(to_density(psi), {"A"});
  CHECK((rho_a.matrix() - rho_a2.matrix()).cwiseAbs().maxCoeff() < 1e-14);
  for (int n = 0; n <= 25; ++n) {
    CHECK(rho_a.matrix()(n, n).real() == doctest::Approx((1 - chi * chi) * std::pow(chi, 2 * n)).epsilon(1e-12));
  }
  // entanglement entropy from the Schmidt coefficients
  double s = 0.0;
  for (int n = 0; n <= 25; ++n) {
    const double p = (1 - chi * chi) * std::pow(chi, 2 * n);
    s -= p * std::log2(p);
  }
  CHECK(von_neumann_entropy(rho_a) == doctest::Approx(s).epsilon(1e-10));
  const Moments from_ket = moments(psi, "A", "C");
  const Moments from_rho = moments(to_density(psi), "A", "C");
  CHECK((from_ket.cov - from_rho.cov).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("tensor, reorder and cutoff changes keep the state") {
  const MultiModeKet a = tmsv(SourceParams{0.3}, 6, "A", "B");
  const MultiModeKet c = tmsv(SourceParams{0.2}, 6, "C", "D");
  const MultiModeDensity rho = tensor(to_density(a), to_density(c));
  CHECK(rho.trace() == doctest::Approx(1.0));
  const ModeId order[] = {"D", "B", "C", "A"};
  const MultiModeDensity r = reorder(rho, order);
  const MultiModeDensity ab1 = partial_trace(rho, {"A", "B"});
  const MultiModeDensity ab2 = reorder(partial_trace(r, {"B", "A"}), std::vector<ModeId>{"A", "B"});
  CHECK((ab1.matrix() - ab2.matrix()).cwiseAbs().maxCoeff() < 1e-14);
  const MultiModeKet wide = with_cutoff(a, "A", 9);
  CHECK(wide.layout().cutoff("A") == 9);
  CHECK(wide.squared_norm() == doctest::Approx(a.squared_norm()));
  CHECK_THROWS_AS(tensor(a, a), std::invalid_argument);
}

TEST_CASE("densities stay Hermitian and positive") {
  const MultiModeKet psi = apply_loss(tmsv(SourceParams{0.6}, 30), "C", 0.3, "E");
  const MultiModeDensity rho = partial_trace(psi, {"A", "C"});
  CHECK(rho.hermiticity_error() < 1e-14);
  CHECK(rho.min_eigenvalue() > -1e-12);
  CHECK(rho.purity() < 1.0);
  CHECK(rho.trace() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("dephasing keeps only charge-neutral elements") {
  const MultiModeKet psi = apply_mode_operator(tmsv(SourceParams{0.4}, 8), "A", displacement(cplx(0.3, 0.1), 8));
  const MultiModeDensity rho = to_density(psi);
  const int charges[] = {-1, 1};
  const MultiModeDensity d = dephase(rho, charges);
  const auto& layout = rho.layout();
  for (std::size_t i = 0; i < layout.size(); ++i) {
    for (std::size_t j = 0; j < layout.size(); ++j) {
      const auto oi = layout.occupation(i);
      const auto oj = layout.occupation(j);
      const int q = -(oi[0] - oj[0]) + (oi[1] - oj[1]);
      const cplx want = q == 0 ? rho.matrix()(i, j) : cplx(0.0);
      CHECK(std::abs(d.matrix()(i, j) - want) < 1e-15);
    }
  }
  CHECK(d.trace() == doctest::Approx(rho.trace()));
}

TEST_CASE("moments reject unnormalised input") {
  MultiModeDensity rho = to_density(tmsv(SourceParams{0.3}, 8));
  rho.matrix() *= 2.0;
  CHECK_THROWS_AS(moments(rho, "A", "C"), std::invalid_argument);
}
