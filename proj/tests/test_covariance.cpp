#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "wegnerlab/covariance.hpp"
#include "wegnerlab/errors.hpp"

using namespace wegnerlab;

namespace {

PiecewiseConstantKernel unit_boxcar() {
  return {{-0.5, 0.5}, {1.0}};
}

// w = indicator of [-3,3] minus 5/4 times the indicator of [-1,1]
PiecewiseConstantKernel notched_boxcar() {
  return {{-3.0, -1.0, 1.0, 3.0}, {1.0, -0.25, 1.0}};
}

CovarianceModel triangular_model() {
  return CovarianceModel::autocorrelation_from_kernel(unit_boxcar());
}

CovarianceModel notched_model() {
  return CovarianceModel::autocorrelation_from_kernel(notched_boxcar());
}

// independent oracle: brute-force midpoint autocorrelation of the kernel
double autocorr_oracle(const PiecewiseConstantKernel& w, double x) {
  const double lo = w.breakpoints.front();
  const double hi = w.breakpoints.back();
  const int n = 400000;
  const double h = (hi - lo) / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y = lo + (i + 0.5) * h;
    sum += w(y) * w(y + x) * h;
  }
  return sum;
}

}  // namespace

TEST_CASE("unit boxcar autocorrelation is the triangular covariance") {
  const auto m = triangular_model();
  CHECK(m.evaluate1(0.0) == 1.0);
  CHECK(m.evaluate1(0.5) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(m.evaluate1(1.0) == 0.0);
  CHECK(m.evaluate1(1.5) == 0.0);
  CHECK(m.support_radius() == doctest::Approx(1.0));
  for (double x : {0.1, 0.3, 0.77, 0.99})
    CHECK(m.evaluate1(x) == doctest::Approx(1.0 - x).epsilon(1e-12));
}

TEST_CASE("notched boxcar matches its closed-form values") {
  const auto m = notched_model();
  CHECK(m.evaluate1(0.0) == 4.125);
  CHECK(m.evaluate1(2.0) == -1.0);
  CHECK(m.evaluate1(4.0) == 2.0);
  CHECK(m.evaluate1(6.0) == 0.0);
  CHECK(m.evaluate1(7.0) == 0.0);
  CHECK(m.support_radius() == doctest::Approx(6.0));
  const auto w = notched_boxcar();
  for (double x : {0.4, 1.0, 1.7, 2.5, 3.3, 4.8, 5.9})
    CHECK(m.evaluate1(x) ==
          doctest::Approx(autocorr_oracle(w, x)).epsilon(5e-4));
}

TEST_CASE("degenerate kernels are rejected") {
  CHECK_THROWS_AS(CovarianceModel::autocorrelation_from_kernel({{}, {}}),
                  ModelError);
  CHECK_THROWS_AS(
      CovarianceModel::autocorrelation_from_kernel({{0.0, 1.0}, {0.0}}),
      ModelError);
  CHECK_THROWS_AS(
      CovarianceModel::autocorrelation_from_kernel({{1.0, 0.0}, {1.0}}),
      ModelError);
}

TEST_CASE("gauss-hermite profile matches its formula") {
  const auto m = CovarianceModel::gauss_hermite(1.0, 1.0, 1);
  CHECK(m.evaluate1(0.0) == 1.0);
  for (double x : {0.3, 1.0, 2.2, 4.0}) {
    const double s = x * x;
    const double want =
        std::exp(-0.5 * s) * (1.0 - 7.0 * s / 16.0 + s * s / 32.0);
    CHECK(m.evaluate1(x) == doctest::Approx(want).epsilon(1e-14));
  }
  const auto m2 = CovarianceModel::gauss_hermite(2.5, 0.7, 2);
  const std::vector<double> p{0.4, -0.3};
  const double s = (0.4 * 0.4 + 0.3 * 0.3) / (0.7 * 0.7);
  CHECK(m2.evaluate(p) ==
        doctest::Approx(2.5 * std::exp(-0.5 * s) *
                        (1.0 - 7.0 * s / 16.0 + s * s / 32.0))
            .epsilon(1e-14));
}

TEST_CASE("evaluation is exactly even") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(-8.0, 8.0);
  const auto tri = triangular_model();
  const auto notched = notched_model();
  const auto gauss = CovarianceModel::gauss_hermite(1.3, 0.9, 1);
  for (int i = 0; i < 200; ++i) {
    const double x = uni(rng);
    CHECK(tri.evaluate1(x) == tri.evaluate1(-x));
    CHECK(notched.evaluate1(x) == notched.evaluate1(-x));
    CHECK(gauss.evaluate1(x) == gauss.evaluate1(-x));
  }
}

TEST_CASE("triangular summary integrals are exact") {
  const auto s = summarize(triangular_model());
  CHECK(std::abs(s.c0 - 1.0) < 1e-15);
  CHECK(std::abs(s.cbar - 1.0) < 1e-13);
  CHECK(std::abs(s.l1 - 1.0) < 1e-13);
  CHECK(s.support_radius == doctest::Approx(1.0));
  CHECK(s.certificate_eligible);
  CHECK(s.l1 >= std::abs(s.cbar) - 1e-13);
}

TEST_CASE("notched boxcar summary matches the analytic integrals") {
  const auto m = notched_model();
  const auto s = summarize(m);
  // integral of C is the squared kernel integral
  const double want_cbar = 3.5 * 3.5;
  CHECK(std::abs(s.cbar - want_cbar) < 1e-12);
  CHECK(std::abs(s.cbar - want_cbar) <= s.quadrature_error + 1e-12);
  CHECK(s.c0 == 4.125);
  // piecewise-linear L1: positive and negative lobes integrate to 7067/492;
  // the sign crossings sit off the kink lattice, so the deviation must be
  // covered by the reported budget
  CHECK(std::abs(s.l1 - 7067.0 / 492.0) <= s.quadrature_error);
  CHECK(std::abs(s.l1 - 7067.0 / 492.0) < 5e-5);
  CHECK(s.certificate_eligible);
  const auto* w = m.kernel();
  REQUIRE(w != nullptr);
  CHECK(w->integral() == doctest::Approx(3.5).epsilon(1e-14));
}

TEST_CASE("gauss-hermite summary resolves the positive integral") {
  QuadratureSpec spec;
  spec.truncation_radius = 12.0;
  const auto s = summarize(CovarianceModel::gauss_hermite(1.0, 1.0, 1), spec);
  const double want = std::sqrt(2.0 * std::numbers::pi) * 21.0 / 32.0;
  CHECK(std::abs(s.cbar - want) < 1e-4);
  CHECK(s.c0 == 1.0);
  CHECK_FALSE(s.certificate_eligible);  // infinite support
  CHECK(s.l1 > s.cbar);                 // sign changes inflate the L1 norm
}

TEST_CASE("two-dimensional summaries integrate radially") {
  // 2 pi Int r C(r) dr with Gaussian moments 1, 2, 8 gives 0.75 pi
  QuadratureSpec spec;
  spec.truncation_radius = 10.0;
  const auto s = summarize(CovarianceModel::gauss_hermite(1.0, 1.0, 2), spec);
  CHECK(std::abs(s.cbar - 0.75 * std::numbers::pi) < 1e-4);
  CHECK(s.l1 > s.cbar);
  CHECK_FALSE(s.certificate_eligible);
}

TEST_CASE("summary quadrature converges under step halving") {
  const auto m = CovarianceModel::gauss_hermite(1.0, 1.0, 1);
  QuadratureSpec coarse;
  coarse.truncation_radius = 10.0;
  coarse.step = 0.02;
  QuadratureSpec fine = coarse;
  fine.step = 0.01;
  const auto sc = summarize(m, coarse);
  const auto sf = summarize(m, fine);
  CHECK(std::abs(sf.cbar - sc.cbar) <= sc.quadrature_error);
  CHECK(std::abs(sf.l1 - sc.l1) <= sc.quadrature_error);
}

TEST_CASE("kernel summaries agree with the squared kernel integral") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> uni(0.2, 1.5);
  for (int trial = 0; trial < 10; ++trial) {
    PiecewiseConstantKernel w;
    double t = -2.0;
    w.breakpoints.push_back(t);
    const int pieces = 1 + static_cast<int>(rng() % 4);
    for (int p = 0; p < pieces; ++p) {
      t += uni(rng);
      w.breakpoints.push_back(t);
      w.values.push_back(uni(rng));  // positive pieces keep the sign resolved
    }
    const auto m = CovarianceModel::autocorrelation_from_kernel(w);
    const auto s = summarize(m);
    const double want = w.integral() * w.integral();
    CHECK(std::abs(s.cbar - want) <=
          s.quadrature_error + 1e-10 * std::abs(want));
  }
}

TEST_CASE("pointwise nonnegativity classifies the example models") {
  CHECK(is_pointwise_nonnegative(triangular_model()));
  CHECK_FALSE(is_pointwise_nonnegative(notched_model()));
  CHECK_FALSE(
      is_pointwise_nonnegative(CovarianceModel::gauss_hermite(1.0, 1.0, 1)));
}

TEST_CASE("spectral check accepts autocorrelations and rejects the sawtooth") {
  const auto tri = spectral_nonnegativity_check(triangular_model(), 4.0,
                                                1.0 / 64.0);
  CHECK(tri.pass);
  CHECK(tri.min_coefficient >= -1e-9);
  CHECK(tri.max_coefficient == doctest::Approx(1.0).epsilon(1e-3));

  CHECK(spectral_nonnegativity_check(notched_model()).pass);

  // C(x) = 1 - 2|x| on [-1,1] is not a covariance
  const auto bad = CovarianceModel::tabulated_even({0.0, 1.0}, {1.0, -1.0}, 1);
  const auto rep = spectral_nonnegativity_check(bad);
  CHECK_FALSE(rep.pass);
  CHECK(rep.min_coefficient < -1e-3);
}

TEST_CASE("spectral check passes for random kernel autocorrelations") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    PiecewiseConstantKernel w;
    w.breakpoints = {-1.5, -0.5, 0.25, 1.0};
    w.values = {uni(rng), uni(rng), uni(rng) + 1.5};
    const auto m = CovarianceModel::autocorrelation_from_kernel(w);
    CHECK(spectral_nonnegativity_check(m).pass);
  }
}

TEST_CASE("tabulated models interpolate and flag edge jumps") {
  const auto m =
      CovarianceModel::tabulated_even({0.0, 0.5, 1.0}, {1.0, 0.5, 0.0}, 1);
  CHECK_FALSE(m.flagged_discontinuous());
  CHECK(m.evaluate1(0.25) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(m.evaluate1(1.0) == 0.0);
  CHECK(m.evaluate1(2.0) == 0.0);

  const auto jump =
      CovarianceModel::tabulated_even({0.0, 1.0}, {1.0, -1.0}, 1);
  CHECK(jump.flagged_discontinuous());

  CHECK_THROWS_AS(
      CovarianceModel::tabulated_even({0.0, 1.0}, {0.0, 1.0}, 1), ModelError);
  CHECK_THROWS_AS(
      CovarianceModel::tabulated_even({0.5, 1.0}, {1.0, 0.0}, 1), ModelError);
}

TEST_CASE("json round trip preserves the model identity") {
  const auto models = {triangular_model(), notched_model(),
                       CovarianceModel::gauss_hermite(2.0, 1.5, 2),
                       CovarianceModel::tabulated_even({0.0, 1.0, 2.0},
                                                       {1.0, 0.3, 0.0}, 2)};
  for (const auto& m : models) {
    const auto back = CovarianceModel::from_json(m.to_json());
    CHECK(back.model_id() == m.model_id());
    CHECK(back.dimension() == m.dimension());
  }
  CHECK(triangular_model().model_id() != notched_model().model_id());
}

TEST_CASE("model documents are validated strictly") {
  CHECK_THROWS_AS(CovarianceModel::from_json({{"kind", "nope"}}), ConfigError);
  CHECK_THROWS_AS(CovarianceModel::from_json(
                      {{"kind", "gauss-hermite"}, {"C0", 1.0}, {"t", 1.0},
                       {"extra", 1}}),
                  ConfigError);
  CHECK_THROWS_AS(CovarianceModel::from_json({{"kind", "kernel"}}),
                  ConfigError);
  CHECK_THROWS_AS(CovarianceModel::from_json(nlohmann::json::array()),
                  ConfigError);
  // semantic validity is a model error, not a usage error
  CHECK_THROWS_AS(CovarianceModel::from_json(
                      {{"kind", "gauss-hermite"}, {"C0", -1.0}, {"t", 1.0}}),
                  ModelError);
}
