#include "wegnerlab/covariance.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstring>
#include <numbers>

#include "wegnerlab/errors.hpp"
#include "wegnerlab/fft.hpp"
#include "wegnerlab/quadrature.hpp"

namespace wegnerlab {

double sup_norm(std::span<const double> x) {
  double m = 0.0;
  for (double xi : x) m = std::max(m, std::abs(xi));
  return m;
}

double euclid_norm(std::span<const double> x) {
  double s = 0.0;
  for (double xi : x) s += xi * xi;
  return std::sqrt(s);
}

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

void hash_append(std::vector<unsigned char>& buf, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i)
    buf.push_back(static_cast<unsigned char>((bits >> (8 * i)) & 0xff));
}

double interval_overlap(double a1, double b1, double a2, double b2) {
  return std::max(0.0, std::min(b1, b2) - std::max(a1, a2));
}

// C(r) = sum_{i,j} v_i v_j |I_i ∩ (I_j - r)|  (autocorrelation of w)
double kernel_autocorrelation_at(const PiecewiseConstantKernel& w, double r) {
  KahanSum acc;
  const auto& t = w.breakpoints;
  const auto& v = w.values;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == 0.0) continue;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] == 0.0) continue;
      const double o = interval_overlap(t[i], t[i + 1], t[j] - r, t[j + 1] - r);
      if (o > 0.0) acc.add(v[i] * v[j] * o);
    }
  }
  return acc.value();
}

double lerp_profile(std::span<const double> xs, std::span<const double> ys,
                    double r) {
  if (std::isnan(r)) return r;
  if (r >= xs.back()) return 0.0;
  if (r <= xs.front()) return ys.front();
  const auto it = std::upper_bound(xs.begin(), xs.end(), r);
  const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  const std::size_t lo = hi - 1;
  const double theta = (r - xs[lo]) / (xs[hi] - xs[lo]);
  return ys[lo] + theta * (ys[hi] - ys[lo]);
}

}  // namespace

void PiecewiseConstantKernel::validate() const {
  if (values.empty() || breakpoints.size() != values.size() + 1)
    throw ModelError("degenerate kernel");
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
    if (!(breakpoints[i] < breakpoints[i + 1]))
      throw ModelError("kernel breakpoints must be strictly increasing");
  bool any = false;
  for (double v : values) {
    if (!std::isfinite(v)) throw ModelError("kernel values must be finite");
    if (v != 0.0) any = true;
  }
  if (!any) throw ModelError("degenerate kernel");
}

double PiecewiseConstantKernel::integral() const {
  KahanSum s;
  for (std::size_t i = 0; i < values.size(); ++i)
    s.add(values[i] * (breakpoints[i + 1] - breakpoints[i]));
  return s.value();
}

double PiecewiseConstantKernel::square_integral() const {
  KahanSum s;
  for (std::size_t i = 0; i < values.size(); ++i)
    s.add(values[i] * values[i] * (breakpoints[i + 1] - breakpoints[i]));
  return s.value();
}

double PiecewiseConstantKernel::support_width() const {
  return breakpoints.back() - breakpoints.front();
}

double PiecewiseConstantKernel::operator()(double x) const {
  if (x < breakpoints.front() || x >= breakpoints.back()) return 0.0;
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
  const std::size_t idx = static_cast<std::size_t>(it - breakpoints.begin());
  return values[idx - 1];
}

CovarianceModel CovarianceModel::autocorrelation_from_kernel(
    PiecewiseConstantKernel w) {
  w.validate();
  KernelData data;
  // Kink radii of the autocorrelation: nonnegative differences of kernel
  // breakpoints. Between consecutive differences C is linear.
  std::vector<double> diffs;
  for (double a : w.breakpoints)
    for (double b : w.breakpoints) {
      const double d = a - b;
      if (d >= 0.0) diffs.push_back(d);
    }
  std::sort(diffs.begin(), diffs.end());
  const double width = w.support_width();
  std::vector<double> kinks;
  for (double d : diffs) {
    if (kinks.empty() || d - kinks.back() > 1e-12 * width) kinks.push_back(d);
  }
  if (kinks.front() != 0.0) kinks.insert(kinks.begin(), 0.0);
  data.kink_r = kinks;
  data.kink_v.reserve(kinks.size());
  for (double r : kinks) data.kink_v.push_back(kernel_autocorrelation_at(w, r));
  data.kink_v.back() = 0.0;  // exact support edge
  data.kernel = std::move(w);

  CovarianceModel m;
  m.kind_ = ModelKind::KernelAutocorrelation;
  m.dimension_ = 1;
  m.data_ = std::move(data);
  m.finalize();
  if (!(m.at_zero() > 0.0)) throw ModelError("degenerate kernel");
  return m;
}

CovarianceModel CovarianceModel::gauss_hermite(double c0, double t,
                                               int dimension) {
  if (!(c0 > 0.0) || !std::isfinite(c0))
    throw ModelError("gauss-hermite: C0 must be positive");
  if (!(t > 0.0) || !std::isfinite(t))
    throw ModelError("gauss-hermite: t must be positive");
  if (dimension < 1) throw ModelError("dimension must be >= 1");
  CovarianceModel m;
  m.kind_ = ModelKind::GaussHermite;
  m.dimension_ = dimension;
  m.data_ = GaussHermiteData{c0, t};
  m.finalize();
  return m;
}

CovarianceModel CovarianceModel::tabulated_even(std::vector<double> radii,
                                                std::vector<double> values,
                                                int dimension) {
  if (radii.size() != values.size() || radii.size() < 2)
    throw ModelError("tabulated: need >= 2 samples with matching radii");
  if (radii.front() != 0.0)
    throw ModelError("tabulated: first sample must be at radius 0");
  for (std::size_t i = 0; i + 1 < radii.size(); ++i)
    if (!(radii[i] < radii[i + 1]))
      throw ModelError("tabulated: radii must be strictly increasing");
  for (double v : values)
    if (!std::isfinite(v)) throw ModelError("tabulated: non-finite sample");
  if (!(values.front() > 0.0))
    throw ModelError("tabulated: C(0) must be positive");
  if (dimension < 1) throw ModelError("dimension must be >= 1");
  CovarianceModel m;
  m.kind_ = ModelKind::TabulatedEven;
  m.dimension_ = dimension;
  m.discontinuous_ = values.back() != 0.0;
  m.data_ = TabulatedData{std::move(radii), std::move(values)};
  m.finalize();
  return m;
}

void CovarianceModel::finalize() {
  std::vector<unsigned char> buf;
  buf.push_back(static_cast<unsigned char>(kind_));
  buf.push_back(static_cast<unsigned char>(dimension_));
  switch (kind_) {
    case ModelKind::KernelAutocorrelation: {
      const auto& d = std::get<KernelData>(data_);
      for (double x : d.kernel.breakpoints) hash_append(buf, x);
      for (double x : d.kernel.values) hash_append(buf, x);
      break;
    }
    case ModelKind::GaussHermite: {
      const auto& d = std::get<GaussHermiteData>(data_);
      hash_append(buf, d.c0);
      hash_append(buf, d.t);
      break;
    }
    case ModelKind::TabulatedEven: {
      const auto& d = std::get<TabulatedData>(data_);
      for (double x : d.radii) hash_append(buf, x);
      for (double x : d.values) hash_append(buf, x);
      break;
    }
  }
  model_id_ = fnv1a64(buf);
}

double CovarianceModel::radial(double r) const {
  switch (kind_) {
    case ModelKind::KernelAutocorrelation: {
      const auto& d = std::get<KernelData>(data_);
      return lerp_profile(d.kink_r, d.kink_v, r);
    }
    case ModelKind::GaussHermite: {
      const auto& d = std::get<GaussHermiteData>(data_);
      const double s = (r / d.t) * (r / d.t);
      return d.c0 * std::exp(-0.5 * s) *
             (1.0 - 7.0 * s / 16.0 + s * s / 32.0);
    }
    case ModelKind::TabulatedEven: {
      const auto& d = std::get<TabulatedData>(data_);
      return lerp_profile(d.radii, d.values, r);
    }
  }
  return 0.0;
}

double CovarianceModel::evaluate(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(dimension_))
    throw ModelError("evaluate: dimension mismatch");
  const double r = kind_ == ModelKind::KernelAutocorrelation
                       ? std::abs(x[0])
                       : euclid_norm(x);
  return radial(r);
}

double CovarianceModel::evaluate1(double x) const {
  return evaluate(std::span<const double>(&x, 1));
}

bool CovarianceModel::has_finite_support() const {
  return kind_ != ModelKind::GaussHermite;
}

double CovarianceModel::support_radius() const {
  switch (kind_) {
    case ModelKind::KernelAutocorrelation:
      return std::get<KernelData>(data_).kink_r.back();
    case ModelKind::GaussHermite:
      return std::numeric_limits<double>::infinity();
    case ModelKind::TabulatedEven:
      return std::get<TabulatedData>(data_).radii.back();
  }
  return 0.0;
}

double CovarianceModel::at_zero() const { return radial(0.0); }

std::span<const double> CovarianceModel::profile_kinks() const {
  switch (kind_) {
    case ModelKind::KernelAutocorrelation:
      return std::get<KernelData>(data_).kink_r;
    case ModelKind::TabulatedEven:
      return std::get<TabulatedData>(data_).radii;
    case ModelKind::GaussHermite:
      return {};
  }
  return {};
}

double CovarianceModel::tail_envelope(double r) const {
  if (kind_ != ModelKind::GaussHermite)
    return r >= support_radius() ? 0.0 : radial(r);
  const auto& d = std::get<GaussHermiteData>(data_);
  const double s = (r / d.t) * (r / d.t);
  return d.c0 * std::exp(-0.5 * s) *
         (1.0 + 7.0 * s / 16.0 + s * s / 32.0);
}

double CovarianceModel::tail_integral_bound(double truncation, int dim) const {
  if (kind_ != ModelKind::GaussHermite) {
    return truncation >= support_radius() ? 0.0 : -1.0;
  }
  const auto& d = std::get<GaussHermiteData>(data_);
  if (truncation < 4.0 * d.t)
    throw ResolutionError("truncation radius below 4t: tail not certified");
  // |C|(r) <= C0 K exp(-r^2/(4 t^2)) for r >= 4t, with
  // K = sup_{s>=16} (1 + 7s/16 + s^2/32) exp(-s/4) = 16 e^{-4}.
  const double K = 16.0 * std::exp(-4.0);
  const double T = truncation;
  const double t2 = d.t * d.t;
  const double gauss = std::exp(-T * T / (4.0 * t2));
  if (dim == 1) return 2.0 * d.c0 * K * (2.0 * t2 / T) * gauss;
  if (dim == 2)
    return 2.0 * std::numbers::pi * d.c0 * K * 2.0 * t2 * gauss;
  throw ModelError("tail bound implemented for d <= 2 only");
}

const PiecewiseConstantKernel* CovarianceModel::kernel() const {
  if (kind_ != ModelKind::KernelAutocorrelation) return nullptr;
  return &std::get<KernelData>(data_).kernel;
}

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::KernelAutocorrelation:
      return "kernel";
    case ModelKind::GaussHermite:
      return "gauss-hermite";
    case ModelKind::TabulatedEven:
      return "tabulated";
  }
  return "?";
}

namespace {
void require_keys(const nlohmann::json& doc,
                  std::initializer_list<const char*> allowed,
                  const char* what) {
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
          return key == k;
        }) == allowed.end())
      throw ConfigError(std::string("unknown key \"") + key + "\" in " + what);
  }
}
}  // namespace

CovarianceModel CovarianceModel::from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("kind") || !doc["kind"].is_string())
    throw ConfigError("model document must be an object with a \"kind\"");
  const std::string kind = doc["kind"].get<std::string>();
  const int dim = doc.value("dimension", 1);
  if (kind == "kernel") {
    require_keys(doc, {"kind", "breakpoints", "values", "dimension"}, "model");
    if (!doc.contains("breakpoints") || !doc.contains("values"))
      throw ConfigError("kernel model requires breakpoints and values");
    if (dim != 1) throw ModelError("kernel models are one-dimensional");
    PiecewiseConstantKernel w;
    w.breakpoints = doc["breakpoints"].get<std::vector<double>>();
    w.values = doc["values"].get<std::vector<double>>();
    return autocorrelation_from_kernel(std::move(w));
  }
  if (kind == "gauss-hermite") {
    require_keys(doc, {"kind", "C0", "t", "dimension"}, "model");
    if (!doc.contains("C0") || !doc.contains("t"))
      throw ConfigError("gauss-hermite model requires C0 and t");
    return gauss_hermite(doc["C0"].get<double>(), doc["t"].get<double>(), dim);
  }
  if (kind == "tabulated") {
    require_keys(doc, {"kind", "samples", "dimension"}, "model");
    if (!doc.contains("samples") || !doc["samples"].is_array())
      throw ConfigError("tabulated model requires a samples array");
    std::vector<double> radii, values;
    for (const auto& pair : doc["samples"]) {
      if (!pair.is_array() || pair.size() != 2)
        throw ConfigError("tabulated samples must be [radius, value] pairs");
      radii.push_back(pair[0].get<double>());
      values.push_back(pair[1].get<double>());
    }
    return tabulated_even(std::move(radii), std::move(values), dim);
  }
  throw ConfigError("unknown model kind \"" + kind + "\"");
}

nlohmann::json CovarianceModel::to_json() const {
  nlohmann::json doc;
  doc["kind"] = to_string(kind_);
  doc["dimension"] = dimension_;
  switch (kind_) {
    case ModelKind::KernelAutocorrelation: {
      const auto& d = std::get<KernelData>(data_);
      doc["breakpoints"] = d.kernel.breakpoints;
      doc["values"] = d.kernel.values;
      break;
    }
    case ModelKind::GaussHermite: {
      const auto& d = std::get<GaussHermiteData>(data_);
      doc["C0"] = d.c0;
      doc["t"] = d.t;
      break;
    }
    case ModelKind::TabulatedEven: {
      const auto& d = std::get<TabulatedData>(data_);
      nlohmann::json samples = nlohmann::json::array();
      for (std::size_t i = 0; i < d.radii.size(); ++i)
        samples.push_back({d.radii[i], d.values[i]});
      doc["samples"] = samples;
      break;
    }
  }
  return doc;
}

double CovarianceModel::length_scale() const {
  if (kind_ == ModelKind::GaussHermite)
    return std::get<GaussHermiteData>(data_).t;
  return support_radius();
}

double QuadratureSpec::resolved_truncation(const CovarianceModel& m) const {
  if (m.has_finite_support()) return m.support_radius();
  if (truncation_radius > 0.0) return truncation_radius;
  return 8.0 * m.length_scale();
}

double QuadratureSpec::resolved_step(const CovarianceModel& m) const {
  if (step > 0.0) return step;
  return resolved_truncation(m) / 1024.0;
}

CovarianceSummary summarize(const CovarianceModel& model,
                            const QuadratureSpec& spec) {
  const int d = model.dimension();
  if (d > 2) throw ModelError("summary implemented for d <= 2 only");

  const double T = spec.resolved_truncation(model);
  if (!(T > 0.0))
    throw ModelError("infinite-support model requires a truncation radius");
  const double step = spec.step > 0.0 ? spec.step : T / 1024.0;
  if (!(step > 0.0)) throw ModelError("quadrature step must be positive");

  const auto kinks = model.profile_kinks();
  const auto nodes = segment_nodes(0.0, T, kinks);

  const auto weight = [&](double r) {
    return d == 1 ? 1.0 : 2.0 * std::numbers::pi * r;
  };
  const auto c_weighted = [&](double r) { return weight(r) * model.radial(r); };
  const auto abs_weighted = [&](double r) {
    return weight(r) * std::abs(model.radial(r));
  };

  const QuadResult cbar_q = midpoint_1d(c_weighted, nodes, step);
  const QuadResult l1_q = midpoint_1d(abs_weighted, nodes, step);
  const double factor = d == 1 ? 2.0 : 1.0;  // evenness in d = 1

  double tail = 0.0;
  if (!model.has_finite_support()) tail = model.tail_integral_bound(T, d);

  CovarianceSummary s;
  s.c0 = model.at_zero();
  s.cbar = factor * cbar_q.value;
  s.l1 = factor * l1_q.value;
  s.support_radius = model.support_radius();
  s.quadrature_error =
      factor * std::max(cbar_q.error_bound, l1_q.error_bound) + tail;
  s.step = step;
  s.truncation_radius = T;
  if (s.cbar <= s.quadrature_error)
    throw ResolutionError(
        "sign of the covariance integral not resolved at this resolution");
  s.certificate_eligible = model.has_finite_support() && s.cbar > 0.0;
  return s;
}

bool is_pointwise_nonnegative(const CovarianceModel& model,
                              const QuadratureSpec& spec, double tol) {
  if (model.dimension() > 2)
    throw ModelError("pointwise check implemented for d <= 2 only");
  const double T = spec.resolved_truncation(model);
  const double step = spec.step > 0.0 ? spec.step : T / 1024.0;
  if (tol <= 0.0) tol = 1e-12 * model.at_zero();
  const auto nodes = segment_nodes(0.0, T, model.profile_kinks());
  double min_v = model.radial(0.0);
  for (std::size_t s = 0; s + 1 < nodes.size(); ++s) {
    const double a = nodes[s];
    const double len = nodes[s + 1] - a;
    const long m =
        std::max(1L, static_cast<long>(std::ceil(len / step - 1e-9)));
    const double h = len / static_cast<double>(m);
    min_v = std::min(min_v, model.radial(nodes[s + 1]));
    for (long j = 0; j < m; ++j)
      min_v = std::min(
          min_v, model.radial(a + (static_cast<double>(j) + 0.5) * h));
  }
  return min_v >= -tol;
}

SpectralReport spectral_nonnegativity_check(const CovarianceModel& model,
                                            double period, double step) {
  const int d = model.dimension();
  if (d > 2)
    throw ModelError("spectral check implemented for d <= 2 only");
  const double domain = QuadratureSpec{}.resolved_truncation(model);
  if (period <= 0.0) period = 4.0 * domain;
  if (period < 2.0 * domain)
    throw ModelError("spectral check period must be >= twice the support");
  if (step <= 0.0) step = domain / 64.0;
  const int n = std::max(4, static_cast<int>(std::llround(period / step)));
  step = period / n;

  const auto periodized = [&](int j) {
    // representative in [-period/2, period/2)
    double x = static_cast<double>(j) * step;
    if (j > n / 2) x -= period;
    double c = 0.0;
    for (int m = -2; m <= 2; ++m) {
      const double r = std::abs(x + m * period);
      c += model.radial(r);
    }
    return c;
  };

  SpectralReport rep;
  rep.period = period;
  rep.step = step;
  if (d == 1) {
    std::vector<std::complex<double>> in(n), out(n);
    for (int j = 0; j < n; ++j) in[j] = periodized(j);
    Dft dft(n);
    dft.forward(in, out);
    double mn = out[0].real(), mx = out[0].real();
    for (const auto& z : out) {
      mn = std::min(mn, z.real());
      mx = std::max(mx, z.real());
    }
    rep.min_coefficient = mn * step;
    rep.max_coefficient = mx * step;
  } else {
    std::vector<std::complex<double>> in(static_cast<std::size_t>(n) * n),
        out(in.size());
    for (int j1 = 0; j1 < n; ++j1)
      for (int j2 = 0; j2 < n; ++j2) {
        double x1 = static_cast<double>(j1) * step;
        if (j1 > n / 2) x1 -= period;
        double x2 = static_cast<double>(j2) * step;
        if (j2 > n / 2) x2 -= period;
        // images beyond the first are negligible for supported models
        double c = 0.0;
        for (int m1 = -1; m1 <= 1; ++m1)
          for (int m2 = -1; m2 <= 1; ++m2)
            c += model.radial(std::hypot(x1 + m1 * period, x2 + m2 * period));
        in[static_cast<std::size_t>(j1) * n + j2] = c;
      }
    Dft dft(n, n);
    dft.forward(in, out);
    double mn = out[0].real(), mx = out[0].real();
    for (const auto& z : out) {
      mn = std::min(mn, z.real());
      mx = std::max(mx, z.real());
    }
    rep.min_coefficient = mn * step * step;
    rep.max_coefficient = mx * step * step;
  }
  rep.tolerance = 1e-9 * std::max(std::abs(rep.max_coefficient),
                                  std::abs(rep.min_coefficient));
  rep.pass = rep.min_coefficient >= -rep.tolerance;
  return rep;
}

}  // namespace wegnerlab
