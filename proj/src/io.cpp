#include "wegnerlab/io.hpp"

#include <bit>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "wegnerlab/errors.hpp"

namespace wegnerlab {

static_assert(std::endian::native == std::endian::little,
              "field dumps assume a little-endian host");

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string ids_curve_csv(const IDSCurve& curve) {
  std::ostringstream os;
  os << "E,mean_count,normalized,stderr,bc,L,h,n_realizations\n";
  for (std::size_t e = 0; e < curve.energies.size(); ++e) {
    os << format_double(curve.energies[e]) << ','
       << format_double(curve.mean_counts[e]) << ','
       << format_double(curve.normalized[e]) << ','
       << format_double(curve.std_errors[e]) << ',' << to_string(curve.bc)
       << ',' << format_double(curve.lattice.half_side) << ','
       << format_double(curve.lattice.step) << ',' << curve.n_realizations
       << '\n';
  }
  return os.str();
}

std::string wegner_report_csv(std::span<const IDSCurve> curves,
                              std::span<const EnergyWindow> windows,
                              const WegnerReport& report) {
  std::ostringstream os;
  os << "E1,E2,L,c_emp,ci_low,ci_high\n";
  const std::size_t nw = windows.size();
  for (std::size_t c = 0; c < curves.size(); ++c) {
    for (std::size_t w = 0; w < nw; ++w) {
      const auto& est = report.entries[c * nw + w];
      os << format_double(est.e1) << ',' << format_double(est.e2) << ','
         << format_double(est.half_side) << ',' << format_double(est.c_emp)
         << ',' << format_double(est.ci_low) << ','
         << format_double(est.ci_high) << '\n';
    }
  }
  return os.str();
}

std::string lag_table_csv(std::span<const LagEstimate> lags,
                          std::span<const double> model_values) {
  std::ostringstream os;
  os << "offset,lag,mean,stderr,model,z\n";
  for (std::size_t i = 0; i < lags.size(); ++i) {
    const auto& l = lags[i];
    std::string offset;
    for (std::size_t c = 0; c < l.offset.size(); ++c) {
      if (c) offset += ':';
      offset += std::to_string(l.offset[c]);
    }
    const double model = i < model_values.size() ? model_values[i] : 0.0;
    const double z =
        l.std_error > 0.0 ? (l.mean - model) / l.std_error : 0.0;
    os << offset << ',' << format_double(l.lag) << ','
       << format_double(l.mean) << ',' << format_double(l.std_error) << ','
       << format_double(model) << ',' << format_double(z) << '\n';
  }
  return os.str();
}

std::string spectrum_csv(std::span<const double> eigenvalues) {
  std::ostringstream os;
  os << "index,eigenvalue\n";
  for (std::size_t i = 0; i < eigenvalues.size(); ++i)
    os << i << ',' << format_double(eigenvalues[i]) << '\n';
  return os.str();
}

namespace {

void json_kv(std::ostringstream& os, const char* key, double v,
             bool trailing_comma = true) {
  os << '"' << key << "\": " << format_double(v);
  if (trailing_comma) os << ", ";
}

}  // namespace

std::string certificate_json(const WegnerCertificate& cert) {
  std::ostringstream os;
  os << "{\n  ";
  json_kv(os, "b", cert.b);
  json_kv(os, "alpha", cert.alpha);
  json_kv(os, "gamma", cert.gamma);
  json_kv(os, "box_radius", cert.box_radius);
  json_kv(os, "pair_integral", cert.pair_integral, false);
  os << ",\n  \"summary\": {";
  json_kv(os, "C0", cert.summary.c0);
  json_kv(os, "Cbar", cert.summary.cbar);
  json_kv(os, "L1", cert.summary.l1);
  json_kv(os, "R", cert.summary.support_radius);
  json_kv(os, "quadrature_error", cert.summary.quadrature_error, false);
  os << "},\n  \"convolution_report\": {";
  json_kv(os, "min_ratio", cert.convolution.min_ratio);
  json_kv(os, "threshold", cert.convolution.threshold);
  json_kv(os, "margin", cert.convolution.margin);
  json_kv(os, "argmin", cert.convolution.argmin);
  json_kv(os, "quadrature_error", cert.convolution.quadrature_error, false);
  os << ", \"tail_certified\": "
     << (cert.convolution.tail_certified ? "true" : "false");
  os << ", \"pass\": " << (cert.convolution.pass ? "true" : "false");
  os << "},\n  \"condition4_report\": {";
  json_kv(os, "normalization_residual", cert.condition4.normalization_residual);
  json_kv(os, "lower_bound_margin", cert.condition4.lower_bound_margin);
  json_kv(os, "residual_tolerance", cert.condition4.residual_tolerance);
  json_kv(os, "margin_tolerance", cert.condition4.margin_tolerance, false);
  os << ", \"pass\": " << (cert.condition4.pass ? "true" : "false");
  os << "},\n  \"grid\": {";
  json_kv(os, "x_step", cert.convolution.x_step);
  json_kv(os, "z_step", cert.convolution.z_step);
  json_kv(os, "truncation_radius", cert.convolution.truncation_radius);
  json_kv(os, "summary_step", cert.summary.step);
  json_kv(os, "summary_truncation", cert.summary.truncation_radius, false);
  os << "}\n}\n";
  return os.str();
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (got < static_cast<std::streamsize>(sizeof buf)) break;
  }
  return h;
}

std::string digest_hex(std::uint64_t digest) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, digest);
  return buf;
}

void atomic_write(const std::filesystem::path& path,
                  const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
  }
  std::filesystem::rename(tmp, path);
}

void dump_field(const std::filesystem::path& base_path,
                const FieldRealization& field) {
  std::filesystem::create_directories(base_path.parent_path());
  const std::filesystem::path bin = base_path.string() + ".f64";
  {
    std::ofstream out(bin, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + bin.string());
    out.write(reinterpret_cast<const char*>(field.values.data()),
              static_cast<std::streamsize>(field.values.size() *
                                           sizeof(double)));
  }
  nlohmann::json side;
  side["lattice"] = {{"dimension", field.lattice.dimension},
                     {"half_side", field.lattice.half_side},
                     {"step", field.lattice.step}};
  side["seed"] = field.seed;
  side["model_id"] = digest_hex(field.model_id);
  atomic_write(base_path.string() + ".json", side.dump(2) + "\n");
}

FieldRealization load_field(const std::filesystem::path& base_path) {
  std::ifstream meta(base_path.string() + ".json");
  if (!meta) throw ConfigError("cannot open " + base_path.string() + ".json");
  nlohmann::json side;
  meta >> side;
  FieldRealization field;
  field.lattice.dimension = side.at("lattice").at("dimension").get<int>();
  field.lattice.half_side = side.at("lattice").at("half_side").get<double>();
  field.lattice.step = side.at("lattice").at("step").get<double>();
  field.lattice.validate();
  field.seed = side.at("seed").get<std::uint64_t>();
  field.model_id =
      std::stoull(side.at("model_id").get<std::string>(), nullptr, 16);
  const std::filesystem::path bin = base_path.string() + ".f64";
  std::ifstream in(bin, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + bin.string());
  field.values.resize(field.lattice.size());
  in.read(reinterpret_cast<char*>(field.values.data()),
          static_cast<std::streamsize>(field.values.size() * sizeof(double)));
  if (in.gcount() !=
      static_cast<std::streamsize>(field.values.size() * sizeof(double)))
    throw ConfigError("field dump truncated: " + bin.string());
  return field;
}

}  // namespace wegnerlab
