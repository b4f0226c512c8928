// Acceptance suite: end-to-end checks with pinned tolerances, one verdict
// line per criterion. Exit code = number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "wegnerlab/certificate.hpp"
#include "wegnerlab/config.hpp"
#include "wegnerlab/errors.hpp"
#include "wegnerlab/hamiltonian.hpp"
#include "wegnerlab/ids.hpp"
#include "wegnerlab/io.hpp"
#include "wegnerlab/rng.hpp"
#include "wegnerlab/runner.hpp"

using namespace wegnerlab;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t0_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ =
      std::chrono::steady_clock::now();
};

void verdict(int id, const char* label, bool ok, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", ok ? "PASS" : "FAIL", id, label,
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

CovarianceModel triangular_model() {
  return CovarianceModel::autocorrelation_from_kernel({{-0.5, 0.5}, {1.0}});
}

CovarianceModel notched_model() {
  return CovarianceModel::autocorrelation_from_kernel(
      {{-3.0, -1.0, 1.0, 3.0}, {1.0, -0.25, 1.0}});
}

// independent oracle: composite Simpson rule for (f*C)(x)/f(x) of the
// triangular covariance, split at the integrand kinks
double simpson_ratio_triangular(double b, double x) {
  std::vector<double> nodes{-1.0, 0.0, 1.0};
  if (std::abs(x) < 1.0) nodes.push_back(x);
  std::sort(nodes.begin(), nodes.end());
  const auto f = [&](double z) {
    const double c = std::max(0.0, 1.0 - std::abs(z));
    return c * std::exp(b * (std::abs(x) - std::abs(x - z)));
  };
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < nodes.size(); ++s) {
    const double a = nodes[s], bb = nodes[s + 1];
    const int n = 2000;  // even
    const double h = (bb - a) / n;
    double acc = f(a) + f(bb);
    for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    total += acc * h / 3.0;
  }
  return total;
}

std::vector<double> linspace_step(double lo, double hi, double step) {
  std::vector<double> xs;
  for (double x = lo; x <= hi + 1e-12; x += step) xs.push_back(x);
  return xs;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("wegnerlab_acc_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------------------

void criterion_1_triangular_certificate() {
  const Timer timer;
  const auto model = triangular_model();
  const auto cert = build_certificate(model);
  const double b_want = 0.5 / std::numbers::e;
  const bool b_ok = std::abs(cert.b - b_want) <= 1e-12;

  CertificateGrid grid;
  grid.x_step = 1e-3;
  grid.x_max = 20.0;
  grid.z_step = 1.0 / 256.0;
  const auto rep =
      convolution_lower_bound(model, cert.summary, cert.b, grid);
  const bool ratio_ok = rep.min_ratio >= 0.5 - 1e-6;

  bool oracle_ok = true;
  for (double x : {0.0, 0.5, 3.0}) {
    const auto q = convolution_ratio(model, cert.b,
                                     std::span<const double>(&x, 1),
                                     1.0 / 1024.0);
    if (std::abs(q.value - simpson_ratio_triangular(cert.b, x)) > 1e-7)
      oracle_ok = false;
  }

  const double elapsed = timer.seconds();
  const bool ok = b_ok && ratio_ok && oracle_ok && elapsed < 5.0;
  verdict(1, "triangular certificate", ok,
          fmt("b = %.15g (|b - 1/(2e)| = %.2e), min ratio %.9f over |x| <= "
              "20 at step 1e-3 (threshold 0.5 - 1e-6), oracle agreement %s, "
              "%.2f s (< 5 s)",
              cert.b, std::abs(cert.b - b_want), rep.min_ratio,
              oracle_ok ? "yes" : "NO", elapsed));
}

void criterion_2_notched_certificate() {
  const Timer timer;
  const auto cert = build_certificate(notched_model());
  const bool cbar_ok = std::abs(cert.summary.cbar - 12.25) <= 1e-6;
  const bool c0_ok = std::abs(cert.summary.c0 - 4.125) <= 1e-9;
  const bool conv_ok = cert.convolution.pass;
  const double residual = cert.condition4.normalization_residual;
  const bool residual_ok = residual <= 1e-6 * cert.summary.c0;
  const bool margin_ok = cert.condition4.lower_bound_margin >=
                         -cert.condition4.margin_tolerance;
  const double elapsed = timer.seconds();
  const bool ok = cbar_ok && c0_ok && conv_ok && residual_ok && margin_ok &&
                  elapsed < 30.0;
  verdict(2, "notched-kernel certificate", ok,
          fmt("Cbar %.9f (+-1e-6 of 12.25), C0 %.12f, convolution pass %s "
              "(margin %.4f), residual %.2e <= 1e-6 C0, box margin %.3e >= "
              "-%.1e, %.2f s (< 30 s)",
              cert.summary.cbar, cert.summary.c0, conv_ok ? "yes" : "NO",
              cert.convolution.margin, residual,
              cert.condition4.lower_bound_margin,
              cert.condition4.margin_tolerance, elapsed));
}

void criterion_3_gauss_hermite_rejection() {
  const auto model = CovarianceModel::gauss_hermite(1.0, 1.0, 1);
  QuadratureSpec spec;
  spec.truncation_radius = 12.0;
  const auto s = summarize(model, spec);
  const double want = std::sqrt(2.0 * std::numbers::pi) * 21.0 / 32.0;
  const bool cbar_ok = std::abs(s.cbar - want) <= 1e-4;
  const bool positive_ok = s.cbar > 0.0;
  bool rejected = false;
  std::string message;
  try {
    build_certificate(model, spec);
  } catch (const ModelError& ex) {
    rejected = true;
    message = ex.what();
  }
  const bool ok = cbar_ok && positive_ok && rejected;
  verdict(3, "gauss-hermite integral and rejection", ok,
          fmt("Cbar %.6f vs %.6f (diff %.2e <= 1e-4), positive %s, "
              "certificate rejected %s (%s)",
              s.cbar, want, std::abs(s.cbar - want),
              positive_ok ? "yes" : "NO", rejected ? "yes" : "NO",
              message.c_str()));
}

void criterion_4_sampler_statistics() {
  const Timer timer;
  const auto model = triangular_model();
  const LatticeSpec lat{1, 8.0, 0.125};
  const EmbeddingOperator emb(model, lat, 1.0);
  const int k_real = 10000;
  const std::uint64_t master = 20260810;

  std::vector<FieldRealization> fields;
  fields.reserve(k_real);
  for (int k = 0; k < k_real; ++k)
    fields.push_back(emb.sample(derive_stream_seed(master, k)));

  double sum = 0.0, sum_sq = 0.0;
  for (const auto& f : fields) {
    double m = 0.0;
    for (double v : f.values) m += v;
    m /= static_cast<double>(f.values.size());
    sum += m;
    sum_sq += m * m;
  }
  const double mean = sum / k_real;
  const double mean_se =
      std::sqrt((sum_sq - sum * sum / k_real) / (k_real - 1.0) / k_real);
  const bool mean_ok = std::abs(mean) <= 3.0 * mean_se;

  const std::vector<std::vector<int>> lags{{0}, {1}, {4}, {8}, {16}};
  const auto est = empirical_covariance(fields, lags);
  bool lags_ok = true;
  double worst_z = 0.0;
  for (std::size_t i = 0; i < lags.size(); ++i) {
    const double want = model.evaluate1(lags[i][0] * lat.step);
    const double z = (est[i].mean - want) / est[i].std_error;
    worst_z = std::max(worst_z, std::abs(z));
    if (std::abs(z) > 3.0) lags_ok = false;
  }
  const double elapsed = timer.seconds();
  const bool ok = mean_ok && lags_ok && elapsed < 60.0;
  verdict(4, "sampler statistics (10^4 realizations)", ok,
          fmt("grand mean %.2e (|z| = %.2f <= 3), lags {0, h, 1/2, 1, 2} "
              "worst |z| = %.2f <= 3, %.2f s (< 60 s)",
              mean, std::abs(mean) / mean_se, worst_z, elapsed));
}

void criterion_5_count_exactness() {
  const Timer timer;
  std::mt19937_64 rng(505);
  std::normal_distribution<double> normal(0.0, 2.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  long mismatches = 0;
  long comparisons = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 10 + static_cast<int>(rng() % 391);  // up to 400
    const double step = 0.05 + 0.45 * uni(rng);
    const LatticeSpec lat{1, 0.5 * n * step, step};
    FieldRealization f;
    f.lattice = lat;
    f.values.resize(lat.size());
    for (auto& v : f.values) v = normal(rng);
    const auto bc = (trial % 2 == 0) ? BoundaryCondition::Dirichlet
                                     : BoundaryCondition::Neumann;
    const auto h = assemble(lat, f, bc);
    const auto ev = eigenvalues(h);
    const double lo = h.gershgorin_lower(), hi = h.gershgorin_upper();
    for (int j = 0; j < 20; ++j) {
      const double e = lo + (hi - lo) * uni(rng);
      const auto dense = std::count_if(ev.begin(), ev.end(),
                                       [&](double l) { return l <= e; });
      if (count_below(h, e).count != dense) ++mismatches;
      ++comparisons;
    }
  }

  // free-field eigenvalues against the closed form
  const LatticeSpec lat{1, 20.0, 0.1};  // n = 400
  FieldRealization zero;
  zero.lattice = lat;
  zero.values.assign(lat.size(), 0.0);
  const auto h = assemble(lat, zero, BoundaryCondition::Dirichlet);
  const auto ev = eigenvalues(h);
  double worst_rel = 0.0;
  const int n = lat.n_per_axis();
  for (int k = 1; k <= n; ++k) {
    const double want =
        2.0 / (lat.step * lat.step) *
        (1.0 - std::cos(k * std::numbers::pi / (n + 1)));
    worst_rel = std::max(worst_rel, std::abs(ev[k - 1] - want) / want);
  }
  const bool ok = mismatches == 0 && worst_rel <= 1e-10;
  verdict(5, "eigenvalue-count exactness", ok,
          fmt("%ld/%ld Sturm vs dense mismatches, free-spectrum worst "
              "relative error %.2e <= 1e-10, %.1f s",
              mismatches, comparisons, worst_rel, timer.seconds()));
}

void criterion_6_bracketing() {
  const auto model = triangular_model();
  const LatticeSpec lat{1, 8.0, 0.25};
  const auto energies = linspace_step(-6.0, 43.75, 0.25);  // 200 points
  const auto curves = estimate_ids(
      model, lat,
      {BoundaryCondition::Dirichlet, BoundaryCondition::Neumann}, energies,
      100, 606);
  long violations = 0;
  for (int r = 0; r < 100; ++r)
    for (std::size_t e = 0; e < energies.size(); ++e)
      if (curves[0].count_at(r, e) > curves[1].count_at(r, e)) ++violations;
  verdict(6, "dirichlet-neumann bracketing", violations == 0,
          fmt("%ld violations across 100 realizations x %zu energies",
              violations, energies.size()));
}

struct BulkProbe {
  std::vector<IDSCurve> curves;  // dirichlet, L = 16 then L = 32
  std::vector<EnergyWindow> windows;
  WegnerReport report;
  double center = 0.0;
};

BulkProbe criterion_7_wegner_linearity() {
  const Timer timer;
  BulkProbe probe;
  const auto model = notched_model();
  const auto energies = linspace_step(-10.0, 30.0, 0.025);
  const std::uint64_t master = 707;
  for (double half : {16.0, 32.0}) {
    const LatticeSpec lat{1, half, 0.25};
    auto c = estimate_ids(model, lat, {BoundaryCondition::Dirichlet},
                          energies, 500, master);
    probe.curves.push_back(std::move(c.front()));
  }
  const auto& big = probe.curves[1];

  // empirical 30% quantile of eigenvalues: first grid energy where the mean
  // count reaches 0.3 of the matrix dimension
  const double target = 0.3 * static_cast<double>(big.lattice.size());
  std::size_t idx = 0;
  while (idx + 1 < energies.size() && big.mean_counts[idx] < target) ++idx;
  probe.center = energies[idx];

  for (double delta : {0.05, 0.1, 0.2})
    probe.windows.push_back(
        {probe.center - 0.5 * delta, probe.center + 0.5 * delta});
  probe.report = wegner_report(probe.curves, probe.windows);

  // entries are curve-major: [L16 w0 w1 w2, L32 w0 w1 w2]
  const auto* l16 = &probe.report.entries[0];
  const auto* l32 = &probe.report.entries[3];
  bool width_ok = true;
  for (int i = 0; i < 3 && width_ok; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const double hw = std::max(1.96 * l32[i].std_error,
                                 1.96 * l32[j].std_error);
      if (std::abs(l32[i].c_emp - l32[j].c_emp) > 2.0 * hw) {
        width_ok = false;
        break;
      }
    }
  bool volume_ok = true;
  for (int i = 0; i < 3; ++i) {
    const double hw =
        1.96 * l16[i].std_error + 1.96 * l32[i].std_error;
    if (std::abs(l16[i].c_emp - l32[i].c_emp) > hw) volume_ok = false;
  }
  const double elapsed = timer.seconds();
  const bool ok = width_ok && volume_ok && elapsed < 600.0;
  verdict(7, "window-constant linearity probe", ok,
          fmt("center E* = %.3f, c_emp(L32) = {%.4f, %.4f, %.4f} for widths "
              "{0.05, 0.1, 0.2} mutually consistent %s, L16 vs L32 within CI "
              "%s, %.1f s (< 600 s)",
              probe.center, l32[0].c_emp, l32[1].c_emp, l32[2].c_emp,
              width_ok ? "yes" : "NO", volume_ok ? "yes" : "NO", elapsed));
  return probe;
}

void criterion_8_lipschitz_stability(const BulkProbe& probe) {
  const auto& small = probe.curves[0];
  const auto& big = probe.curves[1];
  const auto& energies = big.energies;
  const double lo = probe.center - 0.1, hi = probe.center + 0.1;

  double sup_diff = 0.0, sup_scale = 0.0;
  for (std::size_t e = 0; e < energies.size(); ++e) {
    if (energies[e] < lo - 1e-12 || energies[e] > hi + 1e-12) continue;
    sup_diff = std::max(sup_diff,
                        std::abs(small.normalized[e] - big.normalized[e]));
    sup_scale = std::max(sup_scale, big.normalized[e]);
  }
  const bool sup_ok = sup_diff < 0.05 * sup_scale;

  // slopes of the large box at spacing 0.05 inside the bulk window, against
  // the window-constant envelope
  const auto rep = lipschitz_probe(probe.curves, 2);
  double env = 0.0, env_hw = 0.0;
  for (int i = 0; i < 3; ++i) {
    env = std::max(env, probe.report.entries[3 + i].c_emp);
    env_hw = std::max(env_hw, 1.96 * probe.report.entries[3 + i].std_error);
  }
  bool slopes_ok = true;
  double worst_excess = -1e300;
  for (std::size_t i = 0; i < rep.slopes.size(); ++i) {
    const double e2 = rep.slope_energies[i];
    if (e2 < lo - 1e-12 || e2 > hi + 1e-12) continue;
    const double hw = 1.96 * rep.slope_std_errors[i];
    const double allowance = 2.0 * std::sqrt(hw * hw + env_hw * env_hw);
    worst_excess = std::max(worst_excess, rep.slopes[i] - env - allowance);
    if (rep.slopes[i] > env + allowance) slopes_ok = false;
  }
  const bool ok = sup_ok && slopes_ok;
  verdict(8, "normalized-curve stability across box sizes", ok,
          fmt("sup |n16 - n32| = %.5f < 5%% of %.5f over [%.3f, %.3f] %s, "
              "bulk slopes within envelope + 2 CI (worst excess %.2e) %s",
              sup_diff, sup_scale, lo, hi, sup_ok ? "yes" : "NO",
              worst_excess, slopes_ok ? "yes" : "NO"));
}

void criterion_9_determinism(const BulkProbe& probe) {
  const Timer timer;
  // sampler-statistics outputs through the command runner, 1 vs 4 threads
  const fs::path dir_a = fresh_dir("det_a");
  const fs::path dir_b = fresh_dir("det_b");
  ExperimentConfig config;
  config.model_doc = triangular_model().to_json();
  config.lattice_dimension = 1;
  config.half_sides = {8.0};
  config.lattice_step = 0.125;
  config.n_realizations = 10000;
  config.master_seed = 20260810;
  std::ostringstream log;
  config.output_dir = dir_a.string();
  config.overrides.threads = 1;
  const int code_a = run_sample_check(config, log);
  config.output_dir = dir_b.string();
  config.overrides.threads = 4;
  const int code_b = run_sample_check(config, log);
  const bool lag_ok = code_a == kExitOk && code_b == kExitOk &&
                      slurp(dir_a / "sample_check.csv") ==
                          slurp(dir_b / "sample_check.csv");

  // counting curves, 1 vs 4 threads, byte-compared as CSV
  const auto model = notched_model();
  const LatticeSpec lat{1, 32.0, 0.25};
  IdsOptions parallel;
  parallel.threads = 4;
  auto rerun = estimate_ids(model, lat, {BoundaryCondition::Dirichlet},
                            probe.curves[1].energies, 500, 707, parallel);
  const bool ids_ok =
      ids_curve_csv(rerun.front()) == ids_curve_csv(probe.curves[1]);

  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  verdict(9, "byte-identical reruns across thread counts", lag_ok && ids_ok,
          fmt("lag tables identical %s, counting curves identical %s, %.1f s",
              lag_ok ? "yes" : "NO", ids_ok ? "yes" : "NO",
              timer.seconds()));
}

}  // namespace

int main() {
  const Timer total;
  criterion_1_triangular_certificate();
  criterion_2_notched_certificate();
  criterion_3_gauss_hermite_rejection();
  criterion_4_sampler_statistics();
  criterion_5_count_exactness();
  criterion_6_bracketing();
  const BulkProbe probe = criterion_7_wegner_linearity();
  criterion_8_lipschitz_stability(probe);
  criterion_9_determinism(probe);
  std::printf("%d/9 criteria passed in %.1f s\n", 9 - g_failures,
              total.seconds());
  return g_failures;
}
