#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cvrep/channel.hpp"
#include "cvrep/metrics.hpp"

#include <cmath>

using namespace cvrep;

TEST_CASE("fibre transmissivity") {
  CHECK(transmissivity(FiberChannel{0.0}) == 1.0);
  CHECK(transmissivity(FiberChannel{50.0}) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(transmissivity(FiberChannel{100.0, 0.3}) == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK_THROWS(transmissivity(FiberChannel{-1.0}));
}

TEST_CASE("source validation") {
  CHECK_NOTHROW(SourceParams{0.0}.validate());
  CHECK_THROWS(SourceParams{1.0}.validate());
  CHECK_THROWS(SourceParams{-0.1}.validate());
}

TEST_CASE("loss preserves the norm and composes multiplicatively") {
  const MultiModeKet psi = tmsv(SourceParams{0.45}, 12);
  const MultiModeKet once = apply_loss(psi, "C", 0.3 * 0.5, "E1");
  const MultiModeKet twice = apply_loss(apply_loss(psi, "C", 0.3, "E1"), "C", 0.5, "E2");
  CHECK(once.squared_norm() == doctest::Approx(psi.squared_norm()).epsilon(1e-12));
  const MultiModeDensity r1 = partial_trace(once, {"A", "C"});
  const MultiModeDensity r2 = partial_trace(twice, {"A", "C"});
  CHECK((r1.matrix() - r2.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("lossy TMSV moments match the Gaussian covariance") {
  for (double eta : {1.0, 0.5, 0.05}) {
    const double chi = 0.35;
    const MultiModeKet psi = apply_loss(tmsv(SourceParams{chi}, 30), "C", eta, "E");
    const CovarianceMatrixTM want = lossy_tmsv_cm(chi, eta);
    const CovarianceMatrixTM got = CovarianceMatrixTM::from_moments(moments(psi, "A", "C"));
    CHECK(got.a == doctest::Approx(want.a).epsilon(1e-9));
    CHECK(got.b == doctest::Approx(want.b).epsilon(1e-9));
    CHECK(got.c == doctest::Approx(want.c).epsilon(1e-9));
  }
}

TEST_CASE("environment mode carries the lost photons") {
  // a single photon through eta leaves |1,0> with weight eta and |0,1> with 1 - eta
  const int occ[] = {1};
  const MultiModeKet one = MultiModeKet::basis({{"C", 3}}, occ);
  const MultiModeKet out = apply_loss(one, "C", 0.3, "E");
  CHECK(std::norm(out.amplitude({1, 0})) == doctest::Approx(0.3));
  CHECK(std::norm(out.amplitude({0, 1})) == doctest::Approx(0.7));
}
