#include "wegnerlab/ids.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

#include "wegnerlab/errors.hpp"
#include "wegnerlab/rng.hpp"

namespace wegnerlab {

double IDSCurve::volume() const {
  const double side = 2.0 * lattice.half_side;
  return lattice.dimension == 1 ? side : side * side;
}

std::vector<IDSCurve> estimate_ids(const CovarianceModel& model,
                                   const LatticeSpec& lattice,
                                   const std::vector<BoundaryCondition>& bcs,
                                   std::vector<double> energies,
                                   int n_realizations,
                                   std::uint64_t master_seed,
                                   const IdsOptions& options) {
  if (bcs.empty()) throw ModelError("at least one boundary condition");
  if (n_realizations < 2)
    throw ModelError("at least 2 realizations are required");
  if (energies.empty()) throw ModelError("empty energy grid");
  if (!std::is_sorted(energies.begin(), energies.end()))
    throw ModelError("energy grid must be ascending");

  double pad = options.pad;
  if (pad <= 0.0) {
    pad = model.has_finite_support() ? model.support_radius()
                                     : 8.0 * model.length_scale();
  }
  const EmbeddingOperator embedding(model, lattice, pad);

  const std::size_t ne = energies.size();
  std::vector<IDSCurve> curves(bcs.size());
  for (std::size_t c = 0; c < bcs.size(); ++c) {
    curves[c].energies = energies;
    curves[c].lattice = lattice;
    curves[c].bc = bcs[c];
    curves[c].n_realizations = n_realizations;
    curves[c].master_seed = master_seed;
    curves[c].model_id = model.model_id();
    curves[c].counts.resize(static_cast<std::size_t>(n_realizations) * ne);
  }

  const int threads = std::max(1, options.threads);
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::string error_message;
  std::mutex error_mutex;

  const auto worker = [&]() {
    try {
      for (;;) {
        const int k = next.fetch_add(1);
        if (k >= n_realizations || failed.load()) break;
        const FieldRealization field =
            embedding.sample(derive_stream_seed(master_seed, k));
        for (std::size_t c = 0; c < bcs.size(); ++c) {
          const HamiltonianMatrix h = assemble(lattice, field, bcs[c]);
          const auto counts = count_below_many(h, energies);
          auto* row = &curves[c].counts[static_cast<std::size_t>(k) * ne];
          for (std::size_t e = 0; e < ne; ++e)
            row[e] = static_cast<std::int32_t>(counts[e]);
        }
      }
    } catch (const std::exception& ex) {
      std::lock_guard<std::mutex> lock(error_mutex);
      failed.store(true);
      if (error_message.empty()) error_message = ex.what();
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) throw ResolutionError(error_message);

  for (auto& curve : curves) {
    curve.mean_counts.resize(ne);
    curve.normalized.resize(ne);
    curve.std_errors.resize(ne);
    const double k = static_cast<double>(n_realizations);
    const double vol = curve.volume();
    for (std::size_t e = 0; e < ne; ++e) {
      std::int64_t sum = 0, sum_sq = 0;
      for (int r = 0; r < n_realizations; ++r) {
        const std::int64_t c = curve.count_at(r, e);
        sum += c;
        sum_sq += c * c;
      }
      const double mean = static_cast<double>(sum) / k;
      const double var = std::max(
          0.0, (static_cast<double>(sum_sq) -
                static_cast<double>(sum) * static_cast<double>(sum) / k) /
                   (k - 1.0));
      curve.mean_counts[e] = mean;
      curve.normalized[e] = mean / vol;
      curve.std_errors[e] = std::sqrt(var / k) / vol;
    }
  }
  return curves;
}

namespace {

std::size_t snap_to_grid(const std::vector<double>& grid, double e) {
  const auto it = std::lower_bound(grid.begin(), grid.end(), e);
  if (it == grid.end()) return grid.size() - 1;
  std::size_t idx = static_cast<std::size_t>(it - grid.begin());
  if (idx > 0 && e - grid[idx - 1] < grid[idx] - e) --idx;
  return idx;
}

void check_aligned(std::span<const IDSCurve> curves) {
  if (curves.empty()) throw ModelError("no curves");
  for (const auto& c : curves) {
    if (c.bc != curves.front().bc ||
        c.lattice.step != curves.front().lattice.step ||
        c.model_id != curves.front().model_id ||
        c.energies != curves.front().energies)
      throw ModelError("curves must share model, bc, mesh and energy grid");
  }
}

}  // namespace

WegnerReport wegner_report(std::span<const IDSCurve> curves,
                           std::span<const EnergyWindow> windows) {
  check_aligned(curves);
  const auto& grid = curves.front().energies;
  WegnerReport rep;
  rep.entries.reserve(curves.size() * windows.size());

  for (const auto& curve : curves) {
    for (const auto& w : windows) {
      if (!(w.e1 < w.e2)) throw ModelError("window requires e1 < e2");
      if (w.e1 < grid.front() - 1e-12 || w.e2 > grid.back() + 1e-12)
        throw ModelError("window is wider than the energy grid");
      const std::size_t i1 = snap_to_grid(grid, w.e1);
      const std::size_t i2 = snap_to_grid(grid, w.e2);
      if (i1 >= i2)
        throw ModelError("window is narrower than the grid spacing");
      WindowEstimate est;
      est.e1 = grid[i1];
      est.e2 = grid[i2];
      est.half_side = curve.lattice.half_side;
      const double delta = est.e2 - est.e1;
      const double k = static_cast<double>(curve.n_realizations);
      std::int64_t sum = 0, sum_sq = 0;
      for (int r = 0; r < curve.n_realizations; ++r) {
        const std::int64_t d = curve.count_at(r, i2) - curve.count_at(r, i1);
        sum += d;
        sum_sq += d * d;
      }
      const double mean = static_cast<double>(sum) / k;
      const double var = std::max(
          0.0, (static_cast<double>(sum_sq) -
                static_cast<double>(sum) * static_cast<double>(sum) / k) /
                   (k - 1.0));
      const double scale = curve.volume() * delta;
      est.c_emp = mean / scale;
      est.std_error = std::sqrt(var / k) / scale;
      est.ci_low = est.c_emp - 1.96 * est.std_error;
      est.ci_high = est.c_emp + 1.96 * est.std_error;
      rep.entries.push_back(est);
    }
  }

  const std::size_t nw = windows.size();
  rep.window_max.assign(nw, 0.0);
  rep.growth_flag.assign(nw, false);
  for (std::size_t w = 0; w < nw; ++w) {
    double mx = 0.0;
    for (std::size_t c = 0; c < curves.size(); ++c)
      mx = std::max(mx, rep.entries[c * nw + w].c_emp);
    rep.window_max[w] = mx;
  }
  if (curves.size() >= 2) {
    // compare the smallest and largest box
    std::size_t c_small = 0, c_large = 0;
    for (std::size_t c = 1; c < curves.size(); ++c) {
      if (curves[c].lattice.half_side <
          curves[c_small].lattice.half_side)
        c_small = c;
      if (curves[c].lattice.half_side >
          curves[c_large].lattice.half_side)
        c_large = c;
    }
    for (std::size_t w = 0; w < nw; ++w) {
      const auto& a = rep.entries[c_small * nw + w];
      const auto& b = rep.entries[c_large * nw + w];
      const double hw_a = 1.96 * a.std_error;
      const double hw_b = 1.96 * b.std_error;
      rep.growth_flag[w] =
          b.c_emp - a.c_emp > 2.0 * std::sqrt(hw_a * hw_a + hw_b * hw_b);
    }
  }
  rep.envelope.assign(nw, 0.0);
  for (std::size_t w = 0; w < nw; ++w) {
    double env = 0.0;
    for (std::size_t v = 0; v < nw; ++v) {
      const std::size_t i2v = snap_to_grid(grid, windows[v].e2);
      const std::size_t i2w = snap_to_grid(grid, windows[w].e2);
      if (grid[i2v] <= grid[i2w]) env = std::max(env, rep.window_max[v]);
    }
    rep.envelope[w] = env;
  }
  return rep;
}

LipschitzReport lipschitz_probe(std::span<const IDSCurve> curves,
                                int slope_stride) {
  check_aligned(curves);
  if (curves.size() < 2)
    throw ModelError("lipschitz probe requires >= 2 box sizes");
  std::vector<std::size_t> order(curves.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return curves[a].lattice.half_side < curves[b].lattice.half_side;
  });

  LipschitzReport rep;
  const auto& grid = curves.front().energies;
  for (std::size_t p = 0; p + 1 < order.size(); ++p) {
    const auto& a = curves[order[p]];
    const auto& b = curves[order[p + 1]];
    LipschitzReport::PairDiff d;
    d.l_small = a.lattice.half_side;
    d.l_large = b.lattice.half_side;
    for (std::size_t e = 0; e < grid.size(); ++e) {
      d.sup_diff =
          std::max(d.sup_diff, std::abs(a.normalized[e] - b.normalized[e]));
      d.sup_scale = std::max(d.sup_scale, b.normalized[e]);
    }
    rep.pairs.push_back(d);
  }

  const auto& fine = curves[order.back()];
  const std::size_t stride = static_cast<std::size_t>(std::max(1, slope_stride));
  const double k = static_cast<double>(fine.n_realizations);
  for (std::size_t e = 0; e + stride < grid.size(); e += stride) {
    const std::size_t e2 = e + stride;
    const double delta = grid[e2] - grid[e];
    std::int64_t sum = 0, sum_sq = 0;
    for (int r = 0; r < fine.n_realizations; ++r) {
      const std::int64_t d = fine.count_at(r, e2) - fine.count_at(r, e);
      sum += d;
      sum_sq += d * d;
    }
    const double mean = static_cast<double>(sum) / k;
    const double var = std::max(
        0.0, (static_cast<double>(sum_sq) -
              static_cast<double>(sum) * static_cast<double>(sum) / k) /
                 (k - 1.0));
    const double scale = fine.volume() * delta;
    rep.slope_energies.push_back(grid[e2]);
    rep.slopes.push_back(mean / scale);
    rep.slope_std_errors.push_back(std::sqrt(var / k) / scale);
  }
  return rep;
}

}  // namespace wegnerlab
