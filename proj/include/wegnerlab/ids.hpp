#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wegnerlab/covariance.hpp"
#include "wegnerlab/field_sampler.hpp"
#include "wegnerlab/hamiltonian.hpp"

namespace wegnerlab {

/// Monte Carlo estimate of the expected eigenvalue counting function on one
/// box. Counts are kept per realization (exact integers), so every derived
/// statistic is reproducible bit for bit regardless of the thread count.
struct IDSCurve {
  std::vector<double> energies;  // ascending grid
  LatticeSpec lattice;
  BoundaryCondition bc = BoundaryCondition::Dirichlet;
  int n_realizations = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t model_id = 0;
  std::vector<std::int32_t> counts;  // [realization][energy], row-major
  std::vector<double> mean_counts;
  std::vector<double> normalized;    // mean / (2L)^d
  std::vector<double> std_errors;    // of the normalized values

  double volume() const;
  std::int32_t count_at(int realization, std::size_t energy_idx) const {
    return counts[static_cast<std::size_t>(realization) * energies.size() +
                  energy_idx];
  }
};

struct IdsOptions {
  double pad = 0.0;  // 0 -> support radius (8 t for infinite support)
  int threads = 1;
};

/// Samples n_realizations fields with streams (master_seed, k); for each
/// realization assembles H per boundary condition from the same field and
/// counts eigenvalues below every grid energy. The returned curves are
/// aligned realization by realization, so Dirichlet/Neumann bracketing is
/// exact per sample.
std::vector<IDSCurve> estimate_ids(const CovarianceModel& model,
                                   const LatticeSpec& lattice,
                                   const std::vector<BoundaryCondition>& bcs,
                                   std::vector<double> energies,
                                   int n_realizations,
                                   std::uint64_t master_seed,
                                   const IdsOptions& options = {});

struct EnergyWindow {
  double e1 = 0.0;
  double e2 = 0.0;
};

struct WindowEstimate {
  double e1 = 0.0, e2 = 0.0;  // snapped to grid energies
  double half_side = 0.0;     // box L of the curve
  double c_emp = 0.0;         // (N(e2) - N(e1)) / ((2L)^d (e2 - e1))
  double std_error = 0.0;
  double ci_low = 0.0, ci_high = 0.0;  // 95% normal interval
};

struct WegnerReport {
  std::vector<WindowEstimate> entries;  // per (curve, window), curve-major
  std::vector<double> window_max;       // per window, max over curves
  std::vector<double> envelope;         // isotone in e2 (running max)
  std::vector<bool> growth_flag;        // c_emp grows with L beyond 2 CI
};

/// Per-window empirical constants of the counting estimate. Curves must
/// share bc, mesh and energy grid and are compared across box sizes.
WegnerReport wegner_report(std::span<const IDSCurve> curves,
                           std::span<const EnergyWindow> windows);

struct LipschitzReport {
  struct PairDiff {
    double l_small = 0.0, l_large = 0.0;
    double sup_diff = 0.0;   // max over the grid of |normalized difference|
    double sup_scale = 0.0;  // max normalized value of the larger box
  };
  std::vector<PairDiff> pairs;          // consecutive box sizes
  std::vector<double> slope_energies;   // right edge of each difference
  std::vector<double> slopes;           // density-of-states proxy
  std::vector<double> slope_std_errors;
};

/// Convergence probe across box sizes plus finite-difference slopes of the
/// largest-box curve (stride in grid steps).
LipschitzReport lipschitz_probe(std::span<const IDSCurve> curves,
                                int slope_stride = 1);

}  // namespace wegnerlab
