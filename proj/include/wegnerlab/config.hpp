#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wegnerlab/certificate.hpp"
#include "wegnerlab/covariance.hpp"
#include "wegnerlab/field_sampler.hpp"
#include "wegnerlab/ids.hpp"

namespace wegnerlab {

struct EnergyGridSpec {
  std::optional<double> min;  // absent -> Gershgorin bound of realization 0
  double max = 0.0;
  int count = 200;
};

struct Overrides {
  double b_factor = 1.0;
  std::size_t dense_limit = 4096;
  double pad = 0.0;  // 0 -> support radius (8t for infinite support)
  int threads = 1;
  // counting runs repeat at h/2 so discretization error sits next to the
  // Monte Carlo error in the outputs
  bool mesh_refinement = true;
};

/// One experiment as a single validated document. Parsing is strict: unknown
/// keys anywhere are rejected before any computation starts.
struct ExperimentConfig {
  nlohmann::json model_doc;
  std::optional<int> lattice_dimension;
  std::vector<double> half_sides;
  double lattice_step = 0.0;
  std::vector<BoundaryCondition> bcs{BoundaryCondition::Dirichlet,
                                     BoundaryCondition::Neumann};
  std::optional<EnergyGridSpec> energies;
  int n_realizations = 0;
  std::uint64_t master_seed = 1;
  std::string output_dir = "out";
  QuadratureSpec quadrature;
  CertificateGrid certificate_grid;
  std::vector<double> lags;
  std::vector<EnergyWindow> windows;
  Overrides overrides;
  int dump_fields = 0;
  std::string fields_dir;

  static ExperimentConfig from_json(const nlohmann::json& doc);
  static ExperimentConfig load(const std::filesystem::path& path);

  CovarianceModel model() const;
  LatticeSpec lattice(double half_side) const;  // validated
  void require_lattice() const;
  nlohmann::json snapshot() const;
};

}  // namespace wegnerlab
