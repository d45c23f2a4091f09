#include "xcav/topology.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "xcav/error.hpp"
#include "xcav/parallel.hpp"

namespace xcav {

BulkModel<cplx> extract_bulk(const Eigen::MatrixXcd& H, const BulkOptions& opts) {
  if (H.rows() != H.cols()) throw ContractError("extract_bulk needs a square matrix");
  if (opts.max_layer_distance < 1) throw ConfigError("coupling range must be >= 1 layer", "bulk.max_layer_distance");
  if (opts.edge_layers < 0) throw ConfigError("edge layer count must be >= 0", "bulk.edge_layers");
  const Eigen::Index M = H.rows();
  const Eigen::Index first = opts.edge_layers;
  const Eigen::Index cells = (M - 2 * first) / 2;
  const int R = (opts.max_layer_distance + 1) / 2;
  if (cells < 2 || cells <= R)
    throw ContractError("bulk extraction needs at least " + std::to_string(std::max(2, R + 1)) +
                        " unit cells after dropping " + std::to_string(first) + " layers per edge (M = " +
                        std::to_string(M) + ")");
  auto site = [&](Eigen::Index n, int a) { return first + 2 * n + a; };

  BulkModel<cplx> bm;
  bm.h.assign(static_cast<std::size_t>(R + 1), BulkModel<cplx>::Block::Zero());

  // means are taken relative to the first entry so that equal entries
  // average to themselves bit for bit
  auto mean_of = [](auto&& at, Eigen::Index count) {
    const cplx first = at(0);
    cplx acc{};
    for (Eigen::Index n = 1; n < count; ++n) acc += at(n) - first;
    return first + acc / static_cast<double>(count);
  };
  const cplx sum_a = mean_of([&](Eigen::Index n) { return H(site(n, 0), site(n, 0)); }, cells);
  const cplx sum_b = mean_of([&](Eigen::Index n) { return H(site(n, 1), site(n, 1)); }, cells);
  bm.onsite_mean = sum_a == sum_b ? sum_a : 0.5 * (sum_a + sum_b);
  bm.onsite_imbalance = std::abs(sum_a - sum_b);
  bm.mean_subtracted = true;

  for (int m = 0; m <= R; ++m) {
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const int dist = std::abs(2 * m + b - a);
        if (dist == 0 || dist > opts.max_layer_distance) continue;
        if (m == 0 && b < a) continue;  // filled from the transpose
        double sq = 0.0;
        const Eigen::Index pairs = cells - m;
        const cplx mean = mean_of([&](Eigen::Index n) { return H(site(n, a), site(n + m, b)); }, pairs);
        for (Eigen::Index n = 0; n < pairs; ++n) sq += std::norm(H(site(n, a), site(n + m, b)) - mean);
        bm.coupling_spread = std::max(bm.coupling_spread, std::sqrt(sq / static_cast<double>(pairs)));
        bm.h[static_cast<std::size_t>(m)](a, b) = mean;
        if (m == 0) bm.h[0](b, a) = mean;
      }
    }
  }
  return bm;
}

BandGrid band_grid(const BulkModel<cplx>& bm, int n_k) {
  if (n_k < 4) throw ConfigError("k-grid needs at least 4 points", "winding.n_k");
  BandGrid g;
  g.min_gap = std::numeric_limits<double>::infinity();
  Eigen::ComplexEigenSolver<Eigen::Matrix2cd> solver;
  for (int i = 0; i < n_k; ++i) {
    const double k = -std::numbers::pi + 2.0 * std::numbers::pi * i / n_k;
    // the trace part only shifts both energies; drop it before solving
    Eigen::Matrix2cd hk = bloch_hamiltonian(bm, k);
    const cplx centre = 0.5 * hk.trace();
    hk.diagonal().array() -= centre;
    solver.compute(hk);
    if (solver.info() != Eigen::Success) throw NumericError("2x2 eigensolver failed at k = " + std::to_string(k));
    const Eigen::Vector2cd ev = solver.eigenvalues().array() + centre;
    const Eigen::Matrix2cd right = solver.eigenvectors();
    g.min_gap = std::min(g.min_gap, std::abs(ev(0) - ev(1)));

    int first;  // column that continues band 0
    if (i == 0) {
      first = ev(0).real() <= ev(1).real() ? 0 : 1;
    } else {
      const cplx p0 = g.band[0].energy.back(), p1 = g.band[1].energy.back();
      first = std::abs(ev(0) - p0) + std::abs(ev(1) - p1) <= std::abs(ev(1) - p0) + std::abs(ev(0) - p1) ? 0 : 1;
    }
    const Eigen::FullPivLU<Eigen::Matrix2cd> lu(right);
    if (!lu.isInvertible()) {
      g.min_gap = 0.0;  // defective: eigenvectors coalesced
    }
    const Eigen::Matrix2cd left = lu.inverse();
    for (int b = 0; b < 2; ++b) {
      const int col = b == 0 ? first : 1 - first;
      g.band[b].k.push_back(k);
      g.band[b].energy.push_back(ev(col));
      g.band[b].right.push_back(right.col(col));
      g.band[b].left.push_back(left.row(col));
    }
  }
  const cplx s0 = g.band[0].energy.front(), s1 = g.band[1].energy.front();
  const cplx e0 = g.band[0].energy.back(), e1 = g.band[1].energy.back();
  g.band_swap = std::abs(e0 - s1) + std::abs(e1 - s0) < std::abs(e0 - s0) + std::abs(e1 - s1);
  return g;
}

cplx wilson_winding(const BandFrames& f) {
  const std::size_t n = f.right.size();
  if (n == 0 || f.left.size() != n) throw ContractError("band frames are empty or inconsistent");
  cplx phase{1.0};
  double log_mag = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    const cplx fwd = (f.left[i] * f.right[j]).value() / (f.left[i] * f.right[i]).value();
    const cplx bwd = (f.left[j] * f.right[i]).value() / (f.left[j] * f.right[j]).value();
    // fwd * bwd = 1 + O(dk^2) is gauge invariant and close to 1, so its
    // principal root is unambiguous; dividing it out centres the link.
    const cplx step = fwd / std::sqrt(fwd * bwd);
    const double a = std::abs(step);
    if (!(a > 0.0) || !std::isfinite(a)) throw NumericError("Wilson line broke down (vanishing overlap)");
    log_mag += std::log(a);
    phase *= step / a;
  }
  // (i/pi) log of the product; the real part is defined mod 2 and is mapped
  // into [-1/2, 3/2) so that values near 1 do not flip sign across the cut.
  double re = -std::arg(phase) / std::numbers::pi;
  if (re < -0.5) re += 2.0;
  return {re, log_mag / std::numbers::pi};
}

WindingResult winding_number(const BulkModel<cplx>& bm, const WindingOptions& opts) {
  const BandGrid g = band_grid(bm, opts.n_k);
  WindingResult r;
  r.model_norm = bm.norm();
  r.min_gap = g.min_gap;
  r.raw = wilson_winding(g.band[0]);
  r.raw_upper = wilson_winding(g.band[1]);
  r.value = static_cast<int>(std::lround(r.raw.real()));
  r.band = 0;
  r.ill_defined = g.band_swap || g.min_gap < opts.gap_tolerance * r.model_norm;
  return r;
}

WindingResult winding_at(const StackConfig& cfg, const ScatterContext& ctx, const PhaseDiagramOptions& opts,
                         const MaterialDatabase& db) {
  const LayerStack s = build_stack(cfg, db);
  return winding_number(extract_bulk(build_hamiltonian(s, ctx), opts.bulk), opts.winding);
}

std::vector<PhasePoint> phase_diagram(const StackConfig& tmpl, const ScatterContext& ctx,
                                      const std::vector<double>& d_v_grid, const std::vector<double>& d_w_grid,
                                      const PhaseDiagramOptions& opts, const MaterialDatabase& db) {
  std::vector<PhasePoint> out(d_v_grid.size() * d_w_grid.size());
  parallel_for(out.size(), opts.threads, [&](std::size_t idx) {
    StackConfig cfg = tmpl;
    cfg.d_v_nm = d_v_grid[idx / d_w_grid.size()];
    cfg.d_w_nm = d_w_grid[idx % d_w_grid.size()];
    out[idx] = {cfg.d_v_nm, cfg.d_w_nm, winding_at(cfg, ctx, opts, db)};
  });
  return out;
}

}  // namespace xcav
