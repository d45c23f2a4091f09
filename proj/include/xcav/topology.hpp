#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "xcav/greens.hpp"
#include "xcav/hamiltonian.hpp"

namespace xcav {

/// Two-site Bloch model: h[m] couples sites of cell n (rows) to cell n + m
/// (columns), m = 0..R, and h[-m] = h[m]^T is implied by complex symmetry.
template <typename Scalar>
struct BulkModel {
  using Block = Eigen::Matrix<Scalar, 2, 2>;

  std::vector<Block> h;
  Scalar onsite_mean{};           // removed from the diagonal of h[0]
  double onsite_imbalance = 0.0;  // |<H_AA> - <H_BB>| before symmetrisation
  double coupling_spread = 0.0;   // largest std. deviation over averaged bulk pairs
  bool mean_subtracted = false;

  int range() const { return static_cast<int>(h.size()) - 1; }

  /// Sum of the Frobenius norms of all harmonics.
  double norm() const {
    double s = 0.0;
    for (const auto& b : h) s += b.norm();
    return s;
  }

  template <typename Other>
  BulkModel<Other> cast() const {
    BulkModel<Other> out;
    for (const auto& b : h) out.h.push_back(b.template cast<Other>());
    out.onsite_mean = static_cast<Other>(onsite_mean);
    out.onsite_imbalance = onsite_imbalance;
    out.coupling_spread = coupling_spread;
    out.mean_subtracted = mean_subtracted;
    return out;
  }
};

/// Ideal SSH chain: intracell v, intercell w, uniform onsite energy.
template <typename Scalar>
BulkModel<Scalar> ssh_model(Scalar v, Scalar w, Scalar onsite = Scalar{}) {
  BulkModel<Scalar> bm;
  typename BulkModel<Scalar>::Block h0, h1;
  h0 << onsite, v, v, onsite;
  h1 << Scalar{}, Scalar{}, w, Scalar{};
  bm.h = {h0, h1};
  return bm;
}

/// H(k) = h_0 + sum_m (h_m e^{ikm} + h_m^T e^{-ikm}).
template <typename Scalar>
Eigen::Matrix<std::complex<typename Eigen::NumTraits<Scalar>::Real>, 2, 2> bloch_hamiltonian(
    const BulkModel<Scalar>& bm, double k) {
  using C = std::complex<typename Eigen::NumTraits<Scalar>::Real>;
  using Out = Eigen::Matrix<C, 2, 2>;
  Out out = bm.h.at(0).template cast<C>();
  for (std::size_t m = 1; m < bm.h.size(); ++m) {
    const C ph = std::polar<typename Eigen::NumTraits<Scalar>::Real>(1, k * static_cast<double>(m));
    const Out hm = bm.h[m].template cast<C>();
    out += hm * ph + hm.transpose() * std::conj(ph);
  }
  return out;
}

struct BulkOptions {
  /// Largest layer separation kept in the bulk model. 1 is the nearest-
  /// neighbour SSH chain; 3 keeps every coupling of the first two shells.
  int max_layer_distance = 1;
  /// Layers dropped at each end before pairing into cells.
  int edge_layers = 2;
};

/// Bulk Bloch model read off the interior of a real-space coupling matrix.
/// Equivalent pairs are averaged, the diagonal is replaced by its mean and
/// then removed. Requires at least two full cells (M >= 8 by default).
BulkModel<cplx> extract_bulk(const Eigen::MatrixXcd& matrix, const BulkOptions& opts = {});
inline BulkModel<cplx> extract_bulk(const NuclearHamiltonian& h, const BulkOptions& opts = {}) {
  return extract_bulk(h.matrix, opts);
}

/// Right eigenvectors and biorthogonal left partners of one band on a k-grid.
struct BandFrames {
  std::vector<double> k;
  std::vector<cplx> energy;
  std::vector<Eigen::Vector2cd> right;
  std::vector<Eigen::RowVector2cd> left;  // left[i] * right[i] = 1
};

struct BandGrid {
  BandFrames band[2];  // band[0] starts at the lower real part at k = -pi
  double min_gap = 0.0;
  bool band_swap = false;  // a band did not close on itself around the zone
};

BandGrid band_grid(const BulkModel<cplx>& bm, int n_k);

/// Discrete Wilson line of prod_i <lambda_i|psi_{i+1}> / <lambda_i|psi_i>,
/// closed periodically, with each link divided by the square root of its
/// forward-backward product. Returns (i/pi) log of the product with the real
/// part in [-1/2, 3/2).
cplx wilson_winding(const BandFrames& frames);

struct WindingResult {
  cplx raw;                 // lower band
  cplx raw_upper;           // other band, for comparison
  int value = 0;            // round(Re raw)
  int band = 0;
  double min_gap = 0.0;
  double model_norm = 0.0;
  bool ill_defined = false;
};

struct WindingOptions {
  int n_k = 2048;
  /// Gap below gap_tolerance * |h| flags the result.
  double gap_tolerance = 1e-6;
};

WindingResult winding_number(const BulkModel<cplx>& bm, const WindingOptions& opts = {});

template <typename Scalar>
WindingResult winding_number(const BulkModel<Scalar>& bm, const WindingOptions& opts = {}) {
  return winding_number(bm.template cast<cplx>(), opts);
}

struct PhasePoint {
  double d_v_nm;
  double d_w_nm;
  WindingResult winding;
};

struct PhaseDiagramOptions {
  WindingOptions winding{2048, 1e-3};
  BulkOptions bulk;
  unsigned threads = 0;
};

/// Winding number on the tensor grid d_v x d_w (row-major in d_v).
std::vector<PhasePoint> phase_diagram(const StackConfig& tmpl, const ScatterContext& ctx,
                                      const std::vector<double>& d_v_grid, const std::vector<double>& d_w_grid,
                                      const PhaseDiagramOptions& opts = {},
                                      const MaterialDatabase& db = MaterialDatabase::builtin());

/// Winding of a single geometry.
WindingResult winding_at(const StackConfig& cfg, const ScatterContext& ctx, const PhaseDiagramOptions& opts = {},
                         const MaterialDatabase& db = MaterialDatabase::builtin());

}  // namespace xcav
