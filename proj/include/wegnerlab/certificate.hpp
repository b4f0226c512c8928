#pragma once

#include <span>

#include "wegnerlab/covariance.hpp"
#include "wegnerlab/quadrature.hpp"

namespace wegnerlab {

/// Grid controls for the certificate quadratures. Zeros resolve to defaults
/// scaled by the support radius R and the decay rate b.
struct CertificateGrid {
  double x_step = 0.0;        // report grid spacing (default R/64)
  double z_step = 0.0;        // convolution step (default R/64; R/16 in d=2)
  double x_max = 0.0;         // report radius (default R + ln(1/eps)/b)
  double tail_epsilon = 0.0;  // default 1e-12 in d=1, 1e-6 in d=2
  double gamma_step = 0.0;    // box grid spacing (default box_radius/64)

  double resolved_z_step(const CovarianceModel& m) const;
  double resolved_x_step(const CovarianceModel& m) const;
  double resolved_tail_eps(const CovarianceModel& m) const;
  double resolved_x_max(const CovarianceModel& m, double b) const;
};

/// Pointwise verification of the convolution lower bound
/// (f*C)(x) >= (cbar/2) f(x) with f(x) = exp(-b|x|).
struct ConvolutionReport {
  double b = 0.0;
  double x_step = 0.0;
  double z_step = 0.0;
  double truncation_radius = 0.0;
  double min_ratio = 0.0;   // min over the grid of (f*C)(x)/f(x)
  double argmin = 0.0;      // sup-norm |x| at the minimum
  double threshold = 0.0;   // cbar/2
  double margin = 0.0;      // min_ratio - threshold
  double quadrature_error = 0.0;
  bool tail_certified = false;  // (e^{bR}-1) l1 <= cbar/2 covers |x| > x_max
  bool pass = false;
};

struct NormalizationResult {
  double alpha = 0.0;
  double pair_integral = 0.0;          // ∬ f(x) f(y) C(x-y) dx dy
  double pair_integral_refined = 0.0;  // recomputed at half step
  double quadrature_error = 0.0;
};

struct Condition4Report {
  double normalization_residual = 0.0;  // |alpha^2 * refined pair integral - C0|
  double lower_bound_margin = 0.0;      // min over box grid of mu*C - C0 gamma
  double residual_tolerance = 0.0;
  double margin_tolerance = 0.0;
  bool pass = false;
};

/// The full witness: mu(dx) = alpha e^{-b|x|} dx certifies the spectral
/// averaging hypothesis on the box of radius 1/b.
struct WegnerCertificate {
  double b = 0.0;
  double alpha = 0.0;
  double gamma = 0.0;
  double box_radius = 0.0;  // 1/b
  double pair_integral = 0.0;
  double pair_integral_refined = 0.0;  // consistency route
  CovarianceSummary summary;
  ConvolutionReport convolution;
  Condition4Report condition4;
};

/// Maximal admissible decay rate b = cbar / (2 e R l1).
/// Throws ModelError when the summary is not certificate-eligible.
double choose_decay_rate(const CovarianceSummary& summary);

/// Stable evaluation of (f*C)(x)/f(x) = ∫ C(z) e^{b(|x|-|x-z|)} dz.
/// The exponent is bounded by bR for every x, so no scaling issues arise.
QuadResult convolution_ratio(const CovarianceModel& model, double b,
                             std::span<const double> x, double z_step = 0.0);

ConvolutionReport convolution_lower_bound(const CovarianceModel& model,
                                          const CovarianceSummary& summary,
                                          double b,
                                          const CertificateGrid& grid = {});

/// alpha = sqrt(C0) / sqrt(∬ f f C); requires a passing convolution report.
NormalizationResult compute_normalization(const CovarianceModel& model,
                                          const CovarianceSummary& summary,
                                          double b,
                                          const CertificateGrid& grid = {});

Condition4Report verify_condition4(const CovarianceModel& model,
                                   const WegnerCertificate& cert,
                                   const CertificateGrid& grid = {});

/// choose_decay_rate -> convolution_lower_bound -> compute_normalization ->
/// gamma = alpha cbar / (2 e C0) -> verify_condition4. b_factor in (0, 1]
/// scales b below the maximal admissible value.
WegnerCertificate build_certificate(const CovarianceModel& model,
                                    const QuadratureSpec& quad = {},
                                    const CertificateGrid& grid = {},
                                    double b_factor = 1.0);

}  // namespace wegnerlab
