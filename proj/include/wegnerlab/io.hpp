#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wegnerlab/certificate.hpp"
#include "wegnerlab/field_sampler.hpp"
#include "wegnerlab/ids.hpp"

namespace wegnerlab {

/// Shortest fixed-width float formatting used in all text outputs:
/// %.17g round-trips every double, so reruns compare byte for byte.
std::string format_double(double v);

std::string ids_curve_csv(const IDSCurve& curve);
std::string wegner_report_csv(std::span<const IDSCurve> curves,
                              std::span<const EnergyWindow> windows,
                              const WegnerReport& report);
std::string lag_table_csv(std::span<const LagEstimate> lags,
                          std::span<const double> model_values);
std::string spectrum_csv(std::span<const double> eigenvalues);

/// Certificate JSON with floats printed to 17 significant digits.
std::string certificate_json(const WegnerCertificate& cert);

std::uint64_t fnv1a64_file(const std::filesystem::path& path);
std::string digest_hex(std::uint64_t digest);

/// Write-to-temporary-then-rename; the target never holds partial content.
void atomic_write(const std::filesystem::path& path,
                  const std::string& content);

/// Row-major 64-bit little-endian floats plus a JSON sidecar
/// {lattice, seed, model_id}.
void dump_field(const std::filesystem::path& base_path,
                const FieldRealization& field);
FieldRealization load_field(const std::filesystem::path& base_path);

}  // namespace wegnerlab
