#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace wegnerlab {

// sup-norm |x| used for boxes and weights
double sup_norm(std::span<const double> x);
// Euclidean norm ||x||
double euclid_norm(std::span<const double> x);

/// Piecewise-constant kernel w on consecutive intervals
/// [breakpoints[i], breakpoints[i+1]).
struct PiecewiseConstantKernel {
  std::vector<double> breakpoints;  // sorted, size = values.size() + 1
  std::vector<double> values;

  void validate() const;            // throws ModelError when degenerate
  double integral() const;          // ∫ w
  double square_integral() const;   // ∫ w²
  double support_width() const;     // breakpoints.back() - breakpoints.front()
  double operator()(double x) const;
};

enum class ModelKind { KernelAutocorrelation, GaussHermite, TabulatedEven };

std::string to_string(ModelKind k);

/// An even covariance function C on R^d with C(0) > 0.
///
/// Three families are supported:
///  - kernel autocorrelation (d = 1): C(x) = ∫ w(y) w(y+x) dy for a
///    piecewise-constant kernel w; C is piecewise linear with compact support
///    and is evaluated from its closed form;
///  - gauss-hermite: C(x) = C0 exp(-||x||²/(2t²)) (1 - 7||x||²/(16 t²)
///    + ||x||⁴/(32 t⁴)), infinite support;
///  - tabulated even: linear interpolation of samples of C over radii
///    [0, R] in ||x||, zero beyond R.
///
/// Evaluation is exactly even: all families evaluate through a nonnegative
/// radius, so C(x) == C(-x) bit for bit.
class CovarianceModel {
 public:
  static CovarianceModel autocorrelation_from_kernel(PiecewiseConstantKernel w);
  static CovarianceModel gauss_hermite(double c0, double t, int dimension);
  static CovarianceModel tabulated_even(std::vector<double> radii,
                                        std::vector<double> values,
                                        int dimension);
  static CovarianceModel from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

  double evaluate(std::span<const double> x) const;
  double evaluate1(double x) const;  // d == 1 convenience

  ModelKind kind() const { return kind_; }
  int dimension() const { return dimension_; }
  bool has_finite_support() const;
  // support radius in the sup-norm; +inf for gauss-hermite
  double support_radius() const;
  double at_zero() const;

  /// Kink radii of the radial profile (piecewise-linear families), used to
  /// align quadrature segments. Empty for smooth models.
  std::span<const double> profile_kinks() const;

  /// Radial profile value at r >= 0 (models are functions of a radius:
  /// |x| for kernel models in d = 1, ||x|| otherwise).
  double radial(double r) const;

  /// Decreasing upper envelope for |C| at radius >= r (tail control for the
  /// infinite-support family; 0 beyond R for compact models).
  double tail_envelope(double r) const;
  /// Bound on ∫_{|x| >= T} |C| over R^d (d <= 2); requires T >= 4t for the
  /// gauss-hermite family.
  double tail_integral_bound(double truncation, int dim) const;

  bool flagged_discontinuous() const { return discontinuous_; }
  std::uint64_t model_id() const { return model_id_; }

  /// Characteristic length: support radius for compact models, the width
  /// parameter t for gauss-hermite.
  double length_scale() const;

  const PiecewiseConstantKernel* kernel() const;

 private:
  struct KernelData {
    PiecewiseConstantKernel kernel;
    std::vector<double> kink_r;  // radii >= 0, ascending, last = support R
    std::vector<double> kink_v;  // C at those radii
  };
  struct GaussHermiteData {
    double c0 = 1.0;
    double t = 1.0;
  };
  struct TabulatedData {
    std::vector<double> radii;  // ascending from 0
    std::vector<double> values;
  };

  CovarianceModel() = default;
  void finalize();

  ModelKind kind_ = ModelKind::TabulatedEven;
  int dimension_ = 1;
  bool discontinuous_ = false;
  std::uint64_t model_id_ = 0;
  std::variant<KernelData, GaussHermiteData, TabulatedData> data_;
};

/// Quadrature request for the scalar functionals of a model.
struct QuadratureSpec {
  double step = 0.0;               // 0 -> domain/1024
  double truncation_radius = 0.0;  // 0 -> 8t (required only when R = inf)

  double resolved_truncation(const CovarianceModel& m) const;
  double resolved_step(const CovarianceModel& m) const;
};

/// Scalar functionals of a covariance with a quadrature error budget.
struct CovarianceSummary {
  double c0 = 0.0;    // C(0)
  double cbar = 0.0;  // ∫ C
  double l1 = 0.0;    // ∫ |C|
  double support_radius = 0.0;
  double quadrature_error = 0.0;
  double step = 0.0;
  double truncation_radius = 0.0;
  bool certificate_eligible = false;  // finite R and resolved cbar > 0
};

/// Computes C(0), ∫C, ∫|C| by segment-aligned composite midpoint quadrature
/// (radial in d = 2). Throws ResolutionError when the sign of ∫C is not
/// resolved by the error budget.
CovarianceSummary summarize(const CovarianceModel& model,
                            const QuadratureSpec& spec = {});

/// min over the quadrature grid of C >= -tol.
bool is_pointwise_nonnegative(const CovarianceModel& model,
                              const QuadratureSpec& spec = {},
                              double tol = 0.0);

struct SpectralReport {
  double period = 0.0;
  double step = 0.0;
  double min_coefficient = 0.0;  // in units of the continuum transform
  double max_coefficient = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Discrete Fourier coefficients of the periodized sampled covariance must
/// be nonnegative for an admissible covariance (folding only adds mass).
/// Reports the minimum coefficient; failure is carried, not thrown.
SpectralReport spectral_nonnegativity_check(const CovarianceModel& model,
                                            double period = 0.0,
                                            double step = 0.0);

std::uint64_t fnv1a64(std::span<const unsigned char> bytes);

}  // namespace wegnerlab
