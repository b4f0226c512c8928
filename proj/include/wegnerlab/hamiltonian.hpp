#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wegnerlab/field_sampler.hpp"

namespace wegnerlab {

/// Finite-difference H = -Laplacian + V on the box lattice.
///
/// The stencil is the standard 2d+1-point second-order one: interior
/// diagonal 2d/h^2, neighbor coupling -1/h^2. Dirichlet keeps the full
/// diagonal at boundary nodes; Neumann (mirror) subtracts 1/h^2 per missing
/// neighbor, so H_D - H_N is a nonnegative diagonal.
struct HamiltonianMatrix {
  LatticeSpec lattice;
  BoundaryCondition bc = BoundaryCondition::Dirichlet;
  std::vector<double> diagonal;  // stencil diagonal + V, row-major
  double off_diagonal = 0.0;     // -1/h^2

  std::size_t dimension() const { return diagonal.size(); }
  double gershgorin_lower() const;
  double gershgorin_upper() const;
};

HamiltonianMatrix assemble(const LatticeSpec& lattice,
                           const FieldRealization& field,
                           BoundaryCondition bc);

struct CountResult {
  std::int64_t count = 0;
  double shift_applied = 0.0;  // nonzero only after factorization breakdown
  int attempts = 1;
};

/// Number of eigenvalues <= E without diagonalization: Sturm sign counts on
/// the tridiagonal (d = 1) or band LDLT inertia (d = 2). Exact breakdown at
/// E retries at E + eps_shift, eps_shift = 1e-12 (1 + |E|), doubling per
/// attempt; the applied shift is reported.
CountResult count_below(const HamiltonianMatrix& h, double energy);

/// One factorization pass per energy; identical to calling count_below
/// per entry.
std::vector<std::int64_t> count_below_many(const HamiltonianMatrix& h,
                                           std::span<const double> energies);

/// All eigenvalues, ascending, through a dense symmetric eigensolver.
/// Intended as an oracle and for small spectra; throws ModelError above
/// dense_limit.
std::vector<double> eigenvalues(const HamiltonianMatrix& h,
                                std::size_t dense_limit = 4096);

}  // namespace wegnerlab
