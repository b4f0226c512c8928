#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "wegnerlab/errors.hpp"
#include "wegnerlab/field_sampler.hpp"
#include "wegnerlab/rng.hpp"

using namespace wegnerlab;

namespace {

CovarianceModel triangular_model() {
  return CovarianceModel::autocorrelation_from_kernel({{-0.5, 0.5}, {1.0}});
}

CovarianceModel spherical_model_2d() {
  std::vector<double> radii, values;
  const int n = 64;
  for (int i = 0; i <= n; ++i) {
    const double r = static_cast<double>(i) / n;
    radii.push_back(r);
    values.push_back(1.0 - 1.5 * r + 0.5 * r * r * r);
  }
  values.back() = 0.0;
  return CovarianceModel::tabulated_even(radii, values, 2);
}

LatticeSpec box_1d() { return {1, 8.0, 0.125}; }

}  // namespace

TEST_CASE("lattice geometry and validation") {
  const LatticeSpec lat = box_1d();
  CHECK(lat.n_per_axis() == 128);
  CHECK(lat.size() == 128);
  CHECK(lat.node(0) == doctest::Approx(-8.0 + 0.0625));
  CHECK(lat.node(127) == doctest::Approx(8.0 - 0.0625));
  CHECK_THROWS_AS((LatticeSpec{1, 1.0, 0.3}).validate(), ModelError);
  CHECK_THROWS_AS((LatticeSpec{3, 1.0, 0.25}).validate(), ModelError);
}

TEST_CASE("triangular embedding has a clean spectrum") {
  const EmbeddingOperator emb(triangular_model(), box_1d(), 1.0);
  CHECK(emb.clip_mass() <= 1e-12);
  CHECK(emb.torus_n() == 144);
  CHECK(emb.period() >= 2.0 * 8.0 + 2.0 * 1.0 - 1e-9);
  for (double lambda : emb.multipliers()) CHECK(lambda >= 0.0);
}

TEST_CASE("insufficient padding is rejected") {
  CHECK_THROWS_AS(EmbeddingOperator(triangular_model(), box_1d(), 0.0),
                  ModelError);
  CHECK_THROWS_AS(EmbeddingOperator(triangular_model(), box_1d(), 0.5),
                  ModelError);
}

TEST_CASE("the embedding reproduces box covariances exactly") {
  const auto model = triangular_model();
  const EmbeddingOperator emb(model, box_1d(), 1.0);
  const int N = emb.torus_n();
  const auto mult = emb.multipliers();
  const int n = emb.lattice().n_per_axis();
  for (int k = 0; k < n; ++k) {
    double rec = 0.0;  // inverse transform of the multipliers at lag k
    for (int m = 0; m < N; ++m)
      rec += mult[m] * std::cos(2.0 * std::numbers::pi * k * m / N);
    rec /= N;
    const double want = model.evaluate1(k * emb.lattice().step);
    CHECK(std::abs(rec - want) < 1e-10);
  }
}

TEST_CASE("sampling is deterministic and seed-sensitive") {
  const EmbeddingOperator emb(triangular_model(), box_1d(), 1.0);
  const auto a = emb.sample(1234);
  const auto b = emb.sample(1234);
  const auto c = emb.sample(1235);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
  CHECK(a.seed == 1234);
  CHECK(a.model_id == triangular_model().model_id());
}

TEST_CASE("covariance scaling maps to amplitude scaling of the field") {
  const auto doubled = CovarianceModel::autocorrelation_from_kernel(
      {{-0.5, 0.5}, {std::sqrt(2.0)}});
  const EmbeddingOperator base(triangular_model(), box_1d(), 1.0);
  const EmbeddingOperator scaled(doubled, box_1d(), 1.0);
  const auto a = base.sample(99);
  const auto b = scaled.sample(99);
  for (std::size_t i = 0; i < a.values.size(); ++i)
    CHECK(b.values[i] ==
          doctest::Approx(std::sqrt(2.0) * a.values[i]).epsilon(1e-12));
}

TEST_CASE("sampled statistics recover mean zero and the covariance") {
  const auto model = triangular_model();
  const EmbeddingOperator emb(model, box_1d(), 1.0);
  const int k_real = 2000;
  std::vector<FieldRealization> fields;
  fields.reserve(k_real);
  const std::uint64_t master = 20260810;
  for (int k = 0; k < k_real; ++k)
    fields.push_back(emb.sample(derive_stream_seed(master, k)));

  // grand mean within 3 standard errors of zero
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& f : fields) {
    double m = 0.0;
    for (double v : f.values) m += v;
    m /= static_cast<double>(f.values.size());
    sum += m;
    sum_sq += m * m;
  }
  const double mean = sum / k_real;
  const double se = std::sqrt(
      (sum_sq - sum * sum / k_real) / (k_real - 1.0) / k_real);
  CHECK(std::abs(mean) <= 3.0 * se);

  // lags 0, h, 1/2, 1, 2 (the last two sit at and beyond the support edge)
  const std::vector<std::vector<int>> lags{{0}, {1}, {4}, {8}, {16}};
  const auto est = empirical_covariance(fields, lags);
  for (std::size_t i = 0; i < lags.size(); ++i) {
    const double want = model.evaluate1(lags[i][0] * 0.125);
    CHECK(std::abs(est[i].mean - want) <= 3.0 * est[i].std_error);
  }
  CHECK(est[4].lag == doctest::Approx(2.0));
  CHECK(std::abs(est[4].mean) <= 3.0 * est[4].std_error);
}

TEST_CASE("half-box estimates agree with each other") {
  const auto model = triangular_model();
  const EmbeddingOperator emb(model, box_1d(), 1.0);
  const int k_real = 1500;
  const int n = 128;
  double left_sum = 0.0, left_sq = 0.0, right_sum = 0.0, right_sq = 0.0;
  for (int k = 0; k < k_real; ++k) {
    const auto f = emb.sample(derive_stream_seed(77, k));
    double left = 0.0, right = 0.0;
    for (int i = 0; i < n / 2; ++i) left += f.values[i] * f.values[i];
    for (int i = n / 2; i < n; ++i) right += f.values[i] * f.values[i];
    left /= n / 2;
    right /= n / 2;
    left_sum += left;
    left_sq += left * left;
    right_sum += right;
    right_sq += right * right;
  }
  const double ml = left_sum / k_real, mr = right_sum / k_real;
  const double sel = std::sqrt(
      (left_sq - left_sum * left_sum / k_real) / (k_real - 1.0) / k_real);
  const double ser = std::sqrt(
      (right_sq - right_sum * right_sum / k_real) / (k_real - 1.0) / k_real);
  CHECK(std::abs(ml - mr) <= 3.0 * std::sqrt(sel * sel + ser * ser));
}

TEST_CASE("constant-zero realization lists give exactly zero") {
  FieldRealization zero;
  zero.lattice = box_1d();
  zero.values.assign(zero.lattice.size(), 0.0);
  const std::vector<FieldRealization> fields{zero, zero};
  const auto est = empirical_covariance(fields, {{0}, {3}});
  for (const auto& e : est) {
    CHECK(e.mean == 0.0);
    CHECK(e.std_error == 0.0);
  }
}

TEST_CASE("mismatched realizations are rejected") {
  FieldRealization a, b;
  a.lattice = box_1d();
  a.values.assign(a.lattice.size(), 0.0);
  b.lattice = {1, 4.0, 0.125};
  b.values.assign(b.lattice.size(), 0.0);
  const std::vector<FieldRealization> fields{a, b};
  CHECK_THROWS_AS(empirical_covariance(fields, {{0}}), ModelError);
  const std::vector<FieldRealization> single{a};
  CHECK_THROWS_AS(empirical_covariance(single, {{0}}), ModelError);
}

TEST_CASE("two-dimensional sampling reproduces the covariance") {
  const auto model = spherical_model_2d();
  const LatticeSpec lat{2, 2.0, 0.25};
  const EmbeddingOperator emb(model, lat, 1.0);
  CHECK(emb.clip_mass() <= 1e-10);

  const int k_real = 1200;
  std::vector<FieldRealization> fields;
  fields.reserve(k_real);
  for (int k = 0; k < k_real; ++k)
    fields.push_back(emb.sample(derive_stream_seed(5150, k)));
  const std::vector<std::vector<int>> lags{{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  const auto est = empirical_covariance(fields, lags);
  for (std::size_t i = 0; i < lags.size(); ++i) {
    const std::vector<double> x{lags[i][0] * 0.25, lags[i][1] * 0.25};
    const double want = model.evaluate(x);
    CHECK(std::abs(est[i].mean - want) <= 3.0 * est[i].std_error);
  }
}

TEST_CASE("infinite-support models embed with a padded torus") {
  const auto model = CovarianceModel::gauss_hermite(1.0, 0.5, 1);
  const LatticeSpec lat{1, 4.0, 0.25};
  const EmbeddingOperator emb(model, lat, 4.0);
  CHECK(emb.bias_bound() < 1e-10);
  const auto f = emb.sample(1);
  CHECK(f.values.size() == lat.size());
}
