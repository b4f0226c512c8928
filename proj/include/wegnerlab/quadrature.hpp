#pragma once

#include <functional>
#include <span>
#include <vector>

namespace wegnerlab {

// Compensated accumulator for long quadrature sums.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - carry_;
    const double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

struct QuadResult {
  double value = 0.0;
  double error_bound = 0.0;
};

/// Sorted segment boundaries for a composite rule on [lo, hi]. Interior
/// points outside (lo, hi) are dropped, near-duplicates merged.
std::vector<double> segment_nodes(double lo, double hi,
                                  std::span<const double> interior);

/// Composite midpoint rule over consecutive segments [nodes[i], nodes[i+1]],
/// each subdivided uniformly to a step <= target_step.
///
/// The error bound is a second-difference sweep over the sampled values,
/// h^2/8 * sum |f(x-h) - 2 f(x) + f(x+h)| / h per panel triple, plus a
/// rounding floor. Splitting exactly at the nodes keeps integrand kinks on
/// panel boundaries, where the midpoint rule stays exact for piecewise
/// linear integrands.
QuadResult midpoint_1d(const std::function<double(double)>& f,
                       std::span<const double> nodes, double target_step);

}  // namespace wegnerlab
