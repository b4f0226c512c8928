#include "wegnerlab/field_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "wegnerlab/errors.hpp"
#include "wegnerlab/quadrature.hpp"
#include "wegnerlab/rng.hpp"

namespace wegnerlab {

std::string to_string(BoundaryCondition bc) {
  return bc == BoundaryCondition::Dirichlet ? "dirichlet" : "neumann";
}

BoundaryCondition bc_from_string(const std::string& s) {
  if (s == "dirichlet") return BoundaryCondition::Dirichlet;
  if (s == "neumann") return BoundaryCondition::Neumann;
  throw ConfigError("unknown boundary condition \"" + s + "\"");
}

int LatticeSpec::n_per_axis() const {
  return static_cast<int>(std::llround(2.0 * half_side / step));
}

std::size_t LatticeSpec::size() const {
  const auto n = static_cast<std::size_t>(n_per_axis());
  return dimension == 1 ? n : n * n;
}

double LatticeSpec::node(int i) const {
  return -half_side + (static_cast<double>(i) + 0.5) * step;
}

void LatticeSpec::validate() const {
  if (dimension != 1 && dimension != 2)
    throw ModelError("lattice dimension must be 1 or 2");
  if (!(step > 0.0) || !(half_side > 0.0))
    throw ModelError("lattice requires positive step and half side");
  const int n = n_per_axis();
  if (n < 2) throw ModelError("lattice needs at least 2 nodes per axis");
  if (std::abs(n * step - 2.0 * half_side) >
      1e-9 * std::max(1.0, 2.0 * half_side))
    throw ModelError("lattice step must divide the box side");
}

EmbeddingOperator::EmbeddingOperator(const CovarianceModel& model,
                                     const LatticeSpec& lattice, double pad) {
  lattice.validate();
  if (model.dimension() != lattice.dimension)
    throw ModelError("model and lattice dimensions differ");
  const double R = model.support_radius();
  if (model.has_finite_support()) {
    if (pad < R - 1e-12 * std::max(1.0, R))
      throw ModelError(
          "pad must be at least the covariance support radius");
  } else if (!(pad > 0.0)) {
    throw ModelError("infinite-support model requires a positive pad");
  }

  lattice_ = lattice;
  model_id_ = model.model_id();
  const int n = lattice.n_per_axis();
  const double h = lattice.step;
  const int pad_cells = static_cast<int>(std::ceil(pad / h - 1e-9));
  torus_n_ = n + 2 * pad_cells;
  period_ = torus_n_ * h;

  const int N = torus_n_;
  const int images = model.has_finite_support() ? 1 : 2;
  const auto rep = [&](int j) {
    double x = static_cast<double>(j) * h;
    if (j > N / 2) x -= period_;
    return x;
  };
  const auto periodized = [&](double x) {
    double c = 0.0;
    for (int m = -images; m <= images; ++m)
      c += model.radial(std::abs(x + m * period_));
    return c;
  };
  if (!model.has_finite_support()) {
    bias_bound_ = 4.0 * model.tail_envelope((images + 0.5) * period_);
  }

  const int d = lattice.dimension;
  const std::size_t total = d == 1 ? static_cast<std::size_t>(N)
                                   : static_cast<std::size_t>(N) * N;
  std::vector<std::complex<double>> sheet(total), spec(total);
  if (d == 1) {
    for (int j = 0; j < N; ++j) sheet[j] = periodized(rep(j));
    dft_ = std::make_unique<Dft>(N);
  } else {
    for (int j1 = 0; j1 < N; ++j1)
      for (int j2 = 0; j2 < N; ++j2) {
        double c = 0.0;
        for (int m1 = -images; m1 <= images; ++m1)
          for (int m2 = -images; m2 <= images; ++m2)
            c += model.radial(std::hypot(rep(j1) + m1 * period_,
                                         rep(j2) + m2 * period_));
        sheet[static_cast<std::size_t>(j1) * N + j2] = c;
      }
    dft_ = std::make_unique<Dft>(N, N);
  }
  dft_->forward(sheet, spec);

  multipliers_.resize(total);
  scale_.resize(total);
  KahanSum clipped;
  const double inv_total = 1.0 / static_cast<double>(total);
  for (std::size_t m = 0; m < total; ++m) {
    double lambda = spec[m].real();
    if (lambda < 0.0) {
      clipped.add(-lambda);
      lambda = 0.0;
    }
    multipliers_[m] = lambda;
    scale_[m] = std::sqrt(lambda * inv_total);
  }
  clip_mass_ = clipped.value() * inv_total;
  const double budget = 1e-8 * model.at_zero();
  if (clip_mass_ + bias_bound_ > budget)
    throw ResolutionError(
        "covariance not embeddable at this resolution: clipped spectral mass "
        "exceeds the budget (increase pad or refine the mesh)");
}

FieldRealization EmbeddingOperator::sample(std::uint64_t seed) const {
  const int N = torus_n_;
  const int d = lattice_.dimension;
  const std::size_t total = scale_.size();
  std::vector<std::complex<double>> spec(total), out(total);
  NormalStream g(seed);
  for (std::size_t m = 0; m < total; ++m) {
    const double re = g.next();
    const double im = g.next();
    spec[m] = scale_[m] * std::complex<double>(re, im);
  }
  dft_->backward(spec, out);

  FieldRealization field;
  field.lattice = lattice_;
  field.seed = seed;
  field.model_id = model_id_;
  const int n = lattice_.n_per_axis();
  field.values.resize(lattice_.size());
  if (d == 1) {
    for (int i = 0; i < n; ++i) field.values[i] = out[i].real();
  } else {
    for (int i1 = 0; i1 < n; ++i1)
      for (int i2 = 0; i2 < n; ++i2)
        field.values[static_cast<std::size_t>(i1) * n + i2] =
            out[static_cast<std::size_t>(i1) * N + i2].real();
  }
  return field;
}

std::vector<LagEstimate> empirical_covariance(
    std::span<const FieldRealization> fields,
    const std::vector<std::vector<int>>& lags) {
  if (fields.size() < 2)
    throw ModelError("empirical covariance requires >= 2 realizations");
  const LatticeSpec& lat = fields.front().lattice;
  for (const auto& f : fields) {
    if (!(f.lattice == lat) || f.values.size() != lat.size())
      throw ModelError("realizations live on mismatched lattices");
  }
  const int n = lat.n_per_axis();
  const int d = lat.dimension;

  std::vector<LagEstimate> out;
  out.reserve(lags.size());
  for (const auto& u : lags) {
    if (static_cast<int>(u.size()) != d)
      throw ModelError("lag dimension mismatch");
    double sup = 0.0;
    for (int c : u) sup = std::max(sup, std::abs(c * lat.step));
    LagEstimate est;
    est.offset = u;
    est.lag = sup;
    est.n_realizations = fields.size();

    KahanSum sum, sum_sq;
    for (const auto& f : fields) {
      KahanSum per;
      std::size_t count = 0;
      if (d == 1) {
        const int u0 = u[0];
        for (int i = std::max(0, -u0); i < std::min(n, n - u0); ++i) {
          per.add(f.values[i] * f.values[i + u0]);
          ++count;
        }
      } else {
        const int u0 = u[0], u1 = u[1];
        for (int i = std::max(0, -u0); i < std::min(n, n - u0); ++i)
          for (int j = std::max(0, -u1); j < std::min(n, n - u1); ++j) {
            per.add(f.values[static_cast<std::size_t>(i) * n + j] *
                    f.values[static_cast<std::size_t>(i + u0) * n + j + u1]);
            ++count;
          }
      }
      if (count == 0)
        throw ModelError("lag exceeds the lattice extent");
      const double mean = per.value() / static_cast<double>(count);
      sum.add(mean);
      sum_sq.add(mean * mean);
    }
    const double k = static_cast<double>(fields.size());
    est.mean = sum.value() / k;
    const double var =
        std::max(0.0, (sum_sq.value() - sum.value() * sum.value() / k) /
                          (k - 1.0));
    est.std_error = std::sqrt(var / k);
    out.push_back(std::move(est));
  }
  return out;
}

}  // namespace wegnerlab
