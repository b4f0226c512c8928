#include "wegnerlab/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>
#include <vector>

#include "wegnerlab/errors.hpp"
#include "wegnerlab/io.hpp"
#include "wegnerlab/rng.hpp"

namespace wegnerlab {

namespace {

namespace fs = std::filesystem;

constexpr const char* kVersion = "wegnerlab 0.1.0";

std::string iso8601_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string compact_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Collects emitted files so the manifest can digest them and failed runs can
// remove partial outputs.
class OutputTracker {
 public:
  explicit OutputTracker(fs::path dir) : dir_(std::move(dir)) {
    started_ = iso8601_now();
    t0_ = std::chrono::steady_clock::now();
  }

  const fs::path& dir() const { return dir_; }

  void write(const std::string& name, const std::string& content) {
    atomic_write(dir_ / name, content);
    files_.push_back(name);
  }

  // for files emitted through other writers (field dumps)
  void note_file(const std::string& name) { files_.push_back(name); }

  void note_duration(const std::string& stage, double seconds) {
    durations_.emplace_back(stage, seconds);
  }

  void discard() {
    std::error_code ec;
    for (const auto& name : files_) fs::remove(dir_ / name, ec);
    files_.clear();
  }

  void write_manifest(const nlohmann::json& config_snapshot) {
    nlohmann::json manifest;
    manifest["version"] = kVersion;
    manifest["config"] = config_snapshot;
    manifest["started_at"] = started_;
    manifest["finished_at"] = iso8601_now();
    const double total =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_)
            .count();
    nlohmann::json durations;
    durations["total_seconds"] = total;
    for (const auto& [stage, secs] : durations_) durations[stage] = secs;
    manifest["durations"] = durations;
    nlohmann::json outputs = nlohmann::json::array();
    for (const auto& name : files_) {
      const fs::path p = dir_ / name;
      outputs.push_back({{"path", name},
                         {"bytes", fs::file_size(p)},
                         {"fnv1a64", digest_hex(fnv1a64_file(p))}});
    }
    manifest["outputs"] = outputs;
    atomic_write(dir_ / "manifest.json", manifest.dump(2) + "\n");
  }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
  std::vector<std::pair<std::string, double>> durations_;
  std::string started_;
  std::chrono::steady_clock::time_point t0_;
};

class StageTimer {
 public:
  StageTimer() : t0_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t0_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> xs(count);
  for (int i = 0; i < count; ++i)
    xs[i] = lo + (hi - lo) * static_cast<double>(i) /
                     static_cast<double>(count - 1);
  return xs;
}

double resolve_energy_min(const ExperimentConfig& config,
                          const CovarianceModel& model, double half_side) {
  if (config.energies->min.has_value()) return *config.energies->min;
  const LatticeSpec lattice = config.lattice(half_side);
  const EmbeddingOperator embedding(
      model, lattice,
      config.overrides.pad > 0.0
          ? config.overrides.pad
          : (model.has_finite_support() ? model.support_radius()
                                        : 8.0 * model.length_scale()));
  const FieldRealization field =
      embedding.sample(derive_stream_seed(config.master_seed, 0));
  double lo = std::numeric_limits<double>::infinity();
  for (auto bc : config.bcs)
    lo = std::min(lo, assemble(lattice, field, bc).gershgorin_lower());
  return lo;
}

}  // namespace

int run_certificate(const ExperimentConfig& config, std::ostream& log) {
  const CovarianceModel model = config.model();
  OutputTracker out(config.output_dir);
  const StageTimer timer;
  const WegnerCertificate cert =
      build_certificate(model, config.quadrature, config.certificate_grid,
                        config.overrides.b_factor);
  out.note_duration("certificate_seconds", timer.seconds());

  out.write("certificate.json", certificate_json(cert));
  std::ostringstream text;
  text << "decay rate b          " << format_double(cert.b) << "\n"
       << "normalization alpha   " << format_double(cert.alpha) << "\n"
       << "lower-bound gamma     " << format_double(cert.gamma) << "\n"
       << "box radius 1/b        " << format_double(cert.box_radius) << "\n"
       << "C(0)                  " << format_double(cert.summary.c0) << "\n"
       << "integral of C         " << format_double(cert.summary.cbar) << "\n"
       << "L1 norm of C          " << format_double(cert.summary.l1) << "\n"
       << "support radius R      "
       << format_double(cert.summary.support_radius) << "\n"
       << "convolution min ratio " << format_double(cert.convolution.min_ratio)
       << " (threshold " << format_double(cert.convolution.threshold)
       << ", pass " << (cert.convolution.pass ? "yes" : "no") << ")\n"
       << "normalization residual "
       << format_double(cert.condition4.normalization_residual) << "\n"
       << "box lower-bound margin "
       << format_double(cert.condition4.lower_bound_margin) << " (pass "
       << (cert.condition4.pass ? "yes" : "no") << ")\n";
  out.write("certificate.txt", text.str());
  out.write_manifest(config.snapshot());

  const bool ok = cert.convolution.pass && cert.condition4.pass;
  log << "certificate: " << (ok ? "verified" : "NOT verified") << ", b = "
      << format_double(cert.b) << ", gamma = " << format_double(cert.gamma)
      << "\n";
  return ok ? kExitOk : kExitCheckFailed;
}

int run_ids(const ExperimentConfig& config, std::ostream& log) {
  const CovarianceModel model = config.model();
  config.require_lattice();
  if (!config.energies.has_value())
    throw ConfigError("ids requires an \"energies\" section");
  if (config.n_realizations < 2)
    throw ConfigError("ids requires n_realizations >= 2");

  OutputTracker out(config.output_dir);
  try {
    const double emin =
        resolve_energy_min(config, model, config.half_sides.front());
    const auto energies =
        linspace(emin, config.energies->max, config.energies->count);

    IdsOptions options;
    options.pad = config.overrides.pad;
    options.threads = config.overrides.threads;

    // curves per bc across box sizes, primary mesh only
    std::vector<std::vector<IDSCurve>> by_bc(config.bcs.size());
    for (double half_side : config.half_sides) {
      const StageTimer timer;
      const LatticeSpec lattice = config.lattice(half_side);
      auto curves = estimate_ids(model, lattice, config.bcs, energies,
                                 config.n_realizations, config.master_seed,
                                 options);
      for (std::size_t c = 0; c < curves.size(); ++c) {
        const std::string name = "ids_L" + compact_number(half_side) + "_h" +
                                 compact_number(lattice.step) + "_" +
                                 to_string(curves[c].bc) + ".csv";
        out.write(name, ids_curve_csv(curves[c]));
        by_bc[c].push_back(std::move(curves[c]));
      }
      if (config.overrides.mesh_refinement) {
        LatticeSpec fine = lattice;
        fine.step = lattice.step / 2.0;
        auto fine_curves =
            estimate_ids(model, fine, config.bcs, energies,
                         config.n_realizations, config.master_seed, options);
        for (const auto& curve : fine_curves) {
          const std::string name = "ids_L" + compact_number(half_side) +
                                   "_h" + compact_number(fine.step) + "_" +
                                   to_string(curve.bc) + ".csv";
          out.write(name, ids_curve_csv(curve));
        }
      }
      out.note_duration("estimate_L" + compact_number(half_side) + "_seconds",
                        timer.seconds());
    }

    if (!config.windows.empty()) {
      for (std::size_t c = 0; c < config.bcs.size(); ++c) {
        const auto report = wegner_report(by_bc[c], config.windows);
        out.write("wegner_" + to_string(config.bcs[c]) + ".csv",
                  wegner_report_csv(by_bc[c], config.windows, report));
      }
    }
    out.write_manifest(config.snapshot());
  } catch (...) {
    out.discard();
    throw;
  }
  log << "ids: wrote curves for " << config.half_sides.size()
      << " box size(s) to " << out.dir().string() << "\n";
  return kExitOk;
}

int run_sample_check(const ExperimentConfig& config, std::ostream& log) {
  const CovarianceModel model = config.model();
  config.require_lattice();
  if (config.n_realizations < 1)
    throw ConfigError("sample-check requires n_realizations >= 1");
  const LatticeSpec lattice = config.lattice(config.half_sides.front());

  OutputTracker out(config.output_dir);
  const StageTimer timer;

  std::vector<FieldRealization> fields;
  if (!config.fields_dir.empty()) {
    for (int k = 0;; ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "field_%05d", k);
      const fs::path base = fs::path(config.fields_dir) / name;
      if (!fs::exists(base.string() + ".json")) break;
      fields.push_back(load_field(base));
    }
    if (fields.empty())
      throw ConfigError("no field dumps found in " + config.fields_dir);
    for (const auto& f : fields) {
      if (f.model_id != model.model_id())
        throw ModelError("field dump model_id does not match the model");
      if (!(f.lattice == lattice))
        throw ModelError("field dump lattice does not match the config");
    }
  } else {
    const double pad = config.overrides.pad > 0.0
                           ? config.overrides.pad
                           : (model.has_finite_support()
                                  ? model.support_radius()
                                  : 8.0 * model.length_scale());
    const EmbeddingOperator embedding(model, lattice, pad);
    fields.resize(config.n_realizations);
    const int threads = std::max(1, config.overrides.threads);
    std::atomic<int> next{0};
    const auto worker = [&]() {
      for (;;) {
        const int k = next.fetch_add(1);
        if (k >= config.n_realizations) break;
        fields[k] = embedding.sample(derive_stream_seed(config.master_seed, k));
      }
    };
    if (threads == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
  }

  for (int k = 0; k < std::min<int>(config.dump_fields, fields.size()); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "fields/field_%05d", k);
    dump_field(out.dir() / name, fields[k]);
    out.note_file(std::string(name) + ".f64");
    out.note_file(std::string(name) + ".json");
  }

  std::vector<double> lag_lengths = config.lags;
  if (lag_lengths.empty()) {
    const double R = model.has_finite_support() ? model.support_radius()
                                                : model.length_scale();
    for (double lag : {0.0, lattice.step, R / 2.0, R, 2.0 * R}) {
      const int cells = static_cast<int>(std::llround(lag / lattice.step));
      if (cells < lattice.n_per_axis()) lag_lengths.push_back(lag);
    }
  }

  std::vector<std::vector<int>> offsets;
  std::vector<double> model_values;
  for (double lag : lag_lengths) {
    const int cells = static_cast<int>(std::llround(lag / lattice.step));
    std::vector<int> offset(lattice.dimension, 0);
    offset[0] = cells;
    offsets.push_back(offset);
    std::vector<double> x(lattice.dimension, 0.0);
    x[0] = cells * lattice.step;
    model_values.push_back(model.evaluate(x));
  }

  const auto estimates = empirical_covariance(fields, offsets);
  out.note_duration("sample_check_seconds", timer.seconds());
  out.write("sample_check.csv", lag_table_csv(estimates, model_values));
  out.write_manifest(config.snapshot());

  bool all_ok = true;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const auto& est = estimates[i];
    const double z = est.std_error > 0.0
                         ? (est.mean - model_values[i]) / est.std_error
                         : 0.0;
    if (std::abs(z) > 3.0) {
      all_ok = false;
      log << "lag " << format_double(est.lag) << ": z = " << format_double(z)
          << " exceeds 3 standard errors\n";
    }
  }
  log << "sample-check: " << (all_ok ? "all lags consistent" : "FAILED")
      << " (" << estimates.size() << " lags, " << fields.size()
      << " realizations)\n";
  return all_ok ? kExitOk : kExitCheckFailed;
}

int run_spectrum(const ExperimentConfig& config, std::ostream& log) {
  const CovarianceModel model = config.model();
  config.require_lattice();
  const LatticeSpec lattice = config.lattice(config.half_sides.front());
  const double pad = config.overrides.pad > 0.0
                         ? config.overrides.pad
                         : (model.has_finite_support()
                                ? model.support_radius()
                                : 8.0 * model.length_scale());
  OutputTracker out(config.output_dir);
  const StageTimer timer;
  const EmbeddingOperator embedding(model, lattice, pad);
  const FieldRealization field =
      embedding.sample(derive_stream_seed(config.master_seed, 0));
  for (auto bc : config.bcs) {
    const HamiltonianMatrix h = assemble(lattice, field, bc);
    const auto ev = eigenvalues(h, config.overrides.dense_limit);
    out.write("spectrum_" + to_string(bc) + ".csv", spectrum_csv(ev));
  }
  out.note_duration("spectrum_seconds", timer.seconds());
  out.write_manifest(config.snapshot());
  log << "spectrum: wrote " << config.bcs.size() << " file(s) to "
      << out.dir().string() << "\n";
  return kExitOk;
}

int run_guarded(int (*command)(const ExperimentConfig&, std::ostream&),
                const ExperimentConfig& config, std::ostream& log,
                std::ostream& err) {
  try {
    return command(config, log);
  } catch (const ConfigError& ex) {
    err << "usage error: " << ex.what() << "\n";
    return kExitUsage;
  } catch (const ModelError& ex) {
    err << "model error: " << ex.what() << "\n";
    return kExitModelError;
  } catch (const ResolutionError& ex) {
    err << "resolution error: " << ex.what() << "\n";
    return kExitResolutionError;
  } catch (const nlohmann::json::exception& ex) {
    err << "usage error: " << ex.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& ex) {
    err << "internal error: " << ex.what() << "\n";
    return 70;
  }
}

}  // namespace wegnerlab
