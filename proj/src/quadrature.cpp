#include "wegnerlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wegnerlab {

std::vector<double> segment_nodes(double lo, double hi,
                                  std::span<const double> interior) {
  std::vector<double> nodes;
  nodes.reserve(interior.size() + 2);
  nodes.push_back(lo);
  for (double x : interior) {
    if (x > lo && x < hi) nodes.push_back(x);
  }
  nodes.push_back(hi);
  std::sort(nodes.begin(), nodes.end());
  const double scale = std::max(1.0, std::abs(hi - lo));
  std::vector<double> merged;
  merged.reserve(nodes.size());
  for (double x : nodes) {
    if (merged.empty() || x - merged.back() > 1e-12 * scale)
      merged.push_back(x);
  }
  if (merged.size() < 2) merged = {lo, hi};
  return merged;
}

QuadResult midpoint_1d(const std::function<double(double)>& f,
                       std::span<const double> nodes, double target_step) {
  KahanSum sum;
  KahanSum abs_sum;
  KahanSum tv;
  for (std::size_t s = 0; s + 1 < nodes.size(); ++s) {
    const double a = nodes[s];
    const double len = nodes[s + 1] - a;
    if (len <= 0.0) continue;
    const long m =
        std::max(1L, static_cast<long>(std::ceil(len / target_step - 1e-9)));
    const double h = len / static_cast<double>(m);
    double prev2 = 0.0, prev1 = 0.0;
    for (long j = 0; j < m; ++j) {
      const double x = a + (static_cast<double>(j) + 0.5) * h;
      const double v = f(x);
      sum.add(v * h);
      abs_sum.add(std::abs(v) * h);
      if (j >= 2) tv.add(std::abs(prev2 - 2.0 * prev1 + v) * (h / 8.0));
      prev2 = prev1;
      prev1 = v;
    }
  }
  QuadResult r;
  r.value = sum.value();
  const double eps = std::numeric_limits<double>::epsilon();
  r.error_bound = tv.value() + 32.0 * eps * abs_sum.value();
  return r;
}

}  // namespace wegnerlab
