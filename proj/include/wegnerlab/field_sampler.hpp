#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "wegnerlab/covariance.hpp"
#include "wegnerlab/fft.hpp"

namespace wegnerlab {

enum class BoundaryCondition { Dirichlet, Neumann };

std::string to_string(BoundaryCondition bc);
BoundaryCondition bc_from_string(const std::string& s);

/// Uniform lattice of cell centers over the box (-L, L)^d, d in {1, 2}.
struct LatticeSpec {
  int dimension = 1;
  double half_side = 0.0;  // L
  double step = 0.0;       // h

  int n_per_axis() const;
  std::size_t size() const;
  double node(int i) const;  // -L + (i + 1/2) h
  void validate() const;
  bool operator==(const LatticeSpec&) const = default;
};

struct FieldRealization {
  LatticeSpec lattice;
  std::vector<double> values;  // row-major, size n^d
  std::uint64_t seed = 0;
  std::uint64_t model_id = 0;
};

/// Circulant embedding of a covariance on a padded torus.
///
/// The covariance sequence is periodized on a torus of period >= 2L + 2 pad
/// and diagonalized by the DFT; negative spectral coefficients (discretization
/// artifacts) are clipped against a hard budget of 1e-8 C(0). Immutable after
/// construction; sample() is safe to call concurrently.
class EmbeddingOperator {
 public:
  EmbeddingOperator(const CovarianceModel& model, const LatticeSpec& lattice,
                    double pad);

  /// Spectral synthesis: one stationary Gaussian field on the torus,
  /// restricted to the box lattice. Deterministic in (embedding, seed).
  FieldRealization sample(std::uint64_t seed) const;

  const LatticeSpec& lattice() const { return lattice_; }
  int torus_n() const { return torus_n_; }
  double period() const { return period_; }
  /// sup-norm covariance distortion from clipping, in covariance units
  double clip_mass() const { return clip_mass_; }
  /// bound on the periodization bias for infinite-support models
  double bias_bound() const { return bias_bound_; }
  std::span<const double> multipliers() const { return multipliers_; }
  std::uint64_t model_id() const { return model_id_; }

 private:
  LatticeSpec lattice_;
  int torus_n_ = 0;
  double period_ = 0.0;
  double clip_mass_ = 0.0;
  double bias_bound_ = 0.0;
  std::uint64_t model_id_ = 0;
  std::vector<double> multipliers_;  // clipped DFT of the covariance sheet
  std::vector<double> scale_;        // sqrt(multiplier / N)
  std::unique_ptr<Dft> dft_;
};

struct LagEstimate {
  std::vector<int> offset;  // lattice cells per axis
  double lag = 0.0;         // physical sup-norm distance
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_realizations = 0;
};

/// Averages V(x+u) V(x) over sites and realizations for each lag u.
/// Requires >= 2 realizations on identical lattices.
std::vector<LagEstimate> empirical_covariance(
    std::span<const FieldRealization> fields,
    const std::vector<std::vector<int>>& lags);

}  // namespace wegnerlab
