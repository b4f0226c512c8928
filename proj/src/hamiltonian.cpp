#include "wegnerlab/hamiltonian.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "wegnerlab/errors.hpp"

namespace wegnerlab {

namespace {

int neighbor_count_1d(int i, int n) {
  return (i > 0 ? 1 : 0) + (i + 1 < n ? 1 : 0);
}

int neighbor_count_2d(int i, int j, int n) {
  return neighbor_count_1d(i, n) + neighbor_count_1d(j, n);
}

}  // namespace

double HamiltonianMatrix::gershgorin_lower() const {
  const int n = lattice.n_per_axis();
  const double coup = std::abs(off_diagonal);
  double lo = std::numeric_limits<double>::infinity();
  if (lattice.dimension == 1) {
    for (int i = 0; i < n; ++i)
      lo = std::min(lo, diagonal[i] - coup * neighbor_count_1d(i, n));
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        lo = std::min(lo, diagonal[static_cast<std::size_t>(i) * n + j] -
                              coup * neighbor_count_2d(i, j, n));
  }
  return lo;
}

double HamiltonianMatrix::gershgorin_upper() const {
  const int n = lattice.n_per_axis();
  const double coup = std::abs(off_diagonal);
  double hi = -std::numeric_limits<double>::infinity();
  if (lattice.dimension == 1) {
    for (int i = 0; i < n; ++i)
      hi = std::max(hi, diagonal[i] + coup * neighbor_count_1d(i, n));
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        hi = std::max(hi, diagonal[static_cast<std::size_t>(i) * n + j] +
                              coup * neighbor_count_2d(i, j, n));
  }
  return hi;
}

HamiltonianMatrix assemble(const LatticeSpec& lattice,
                           const FieldRealization& field,
                           BoundaryCondition bc) {
  lattice.validate();
  if (!(field.lattice == lattice) || field.values.size() != lattice.size())
    throw ModelError("field does not match the lattice");
  const int n = lattice.n_per_axis();
  const double inv_h2 = 1.0 / (lattice.step * lattice.step);

  HamiltonianMatrix h;
  h.lattice = lattice;
  h.bc = bc;
  h.off_diagonal = -inv_h2;
  h.diagonal.resize(lattice.size());
  const double full = 2.0 * lattice.dimension * inv_h2;
  if (lattice.dimension == 1) {
    for (int i = 0; i < n; ++i) {
      double diag = full;
      if (bc == BoundaryCondition::Neumann)
        diag -= (2 - neighbor_count_1d(i, n)) * inv_h2;
      h.diagonal[i] = diag + field.values[i];
    }
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const std::size_t idx = static_cast<std::size_t>(i) * n + j;
        double diag = full;
        if (bc == BoundaryCondition::Neumann)
          diag -= (4 - neighbor_count_2d(i, j, n)) * inv_h2;
        h.diagonal[idx] = diag + field.values[idx];
      }
  }
  return h;
}

namespace {

constexpr int kMaxCountAttempts = 12;

// Sturm sign count for the shifted tridiagonal: the number of negative
// pivots d_i = (a_i - E) - e^2 / d_{i-1} equals the number of eigenvalues
// below E. Tiny pivots are clamped sign-preservingly against e^2/safmin
// overflow; an exact zero pivot signals a tie and triggers the retry shift.
bool sturm_count_1d(std::span<const double> diag, double e2, double energy,
                    std::int64_t* count_out) {
  const double pivmin =
      std::numeric_limits<double>::min() * std::max(1.0, e2);
  std::int64_t count = 0;
  double d = 1.0;
  for (std::size_t i = 0; i < diag.size(); ++i) {
    d = (diag[i] - energy) - (i == 0 ? 0.0 : e2 / d);
    if (d == 0.0) return false;
    if (std::abs(d) < pivmin) d = std::copysign(pivmin, d);
    if (d < 0.0) ++count;
  }
  *count_out = count;
  return true;
}

// Band LDLT without pivoting on H - E; by Sylvester's law of inertia the
// number of negative pivots counts the eigenvalues below E. Breakdown
// (zero/tiny pivot or runaway growth) triggers the retry shift.
bool band_ldlt_count(const HamiltonianMatrix& h, double energy,
                     std::vector<double>& band, std::int64_t* count_out) {
  const int n = h.lattice.n_per_axis();
  const std::size_t N = h.dimension();
  const std::size_t bw = static_cast<std::size_t>(n);
  band.assign((bw + 1) * N, 0.0);
  const auto at = [&](std::size_t r, std::size_t j) -> double& {
    return band[r * N + j];
  };
  for (std::size_t j = 0; j < N; ++j) {
    at(0, j) = h.diagonal[j] - energy;
    if ((j + 1) % bw != 0 && j + 1 < N) at(1, j) = h.off_diagonal;
    if (j + bw < N) at(bw, j) = h.off_diagonal;
  }

  double scale = 0.0;
  for (std::size_t j = 0; j < N; ++j)
    scale = std::max(scale, std::abs(at(0, j)));
  scale = std::max(scale, std::abs(h.off_diagonal));
  const double pivmin = std::numeric_limits<double>::min() * scale;
  const double growth_cap = 1e8;

  std::int64_t count = 0;
  for (std::size_t j = 0; j < N; ++j) {
    const double dj = at(0, j);
    if (dj == 0.0 || std::abs(dj) < pivmin || !std::isfinite(dj))
      return false;
    if (dj < 0.0) ++count;
    const std::size_t imax = std::min(N - 1, j + bw);
    for (std::size_t i = j + 1; i <= imax; ++i) {
      const double aij = at(i - j, j);
      if (aij == 0.0) continue;
      const double lij = aij / dj;
      if (std::abs(lij) > growth_cap) return false;
      // A[k][i] -= l_ij * A[k][j] for k in [i, j + bw]
      for (std::size_t k = i; k <= imax; ++k)
        at(k - i, i) -= lij * at(k - j, j);
    }
  }
  *count_out = count;
  return true;
}

CountResult count_with_retry(const HamiltonianMatrix& h, double energy,
                             std::vector<double>* band) {
  CountResult result;
  const double e2 = h.off_diagonal * h.off_diagonal;
  double shift = 0.0;
  for (int attempt = 0; attempt < kMaxCountAttempts; ++attempt) {
    result.attempts = attempt + 1;
    result.shift_applied = shift;
    const double target = energy + shift;
    bool ok;
    if (h.lattice.dimension == 1) {
      ok = sturm_count_1d(h.diagonal, e2, target, &result.count);
    } else {
      std::vector<double> local;
      std::vector<double>& buf = band ? *band : local;
      ok = band_ldlt_count(h, target, buf, &result.count);
    }
    if (ok) return result;
    shift = shift == 0.0 ? 1e-12 * (1.0 + std::abs(energy)) : 2.0 * shift;
  }
  throw ResolutionError("eigenvalue count did not stabilize under shifts");
}

}  // namespace

CountResult count_below(const HamiltonianMatrix& h, double energy) {
  if (!std::isfinite(energy)) throw ModelError("energy must be finite");
  return count_with_retry(h, energy, nullptr);
}

std::vector<std::int64_t> count_below_many(const HamiltonianMatrix& h,
                                           std::span<const double> energies) {
  std::vector<std::int64_t> counts(energies.size());
  std::vector<double> band;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    if (!std::isfinite(energies[i]))
      throw ModelError("energy must be finite");
    counts[i] = count_with_retry(h, energies[i],
                                 h.lattice.dimension == 2 ? &band : nullptr)
                    .count;
  }
  return counts;
}

std::vector<double> eigenvalues(const HamiltonianMatrix& h,
                                std::size_t dense_limit) {
  const std::size_t N = h.dimension();
  if (N > dense_limit)
    throw ModelError("matrix dimension exceeds the dense limit; use "
                     "count_below");
  Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(N, N);
  const int n = h.lattice.n_per_axis();
  for (std::size_t i = 0; i < N; ++i) mat(i, i) = h.diagonal[i];
  if (h.lattice.dimension == 1) {
    for (int i = 0; i + 1 < n; ++i) {
      mat(i, i + 1) = h.off_diagonal;
      mat(i + 1, i) = h.off_diagonal;
    }
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const std::size_t idx = static_cast<std::size_t>(i) * n + j;
        if (j + 1 < n) {
          mat(idx, idx + 1) = h.off_diagonal;
          mat(idx + 1, idx) = h.off_diagonal;
        }
        if (i + 1 < n) {
          mat(idx, idx + n) = h.off_diagonal;
          mat(idx + n, idx) = h.off_diagonal;
        }
      }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      mat, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw ResolutionError("dense eigensolver failed to converge");
  const auto& ev = solver.eigenvalues();
  return std::vector<double>(ev.data(), ev.data() + ev.size());
}

}  // namespace wegnerlab
