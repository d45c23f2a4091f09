#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "xcav/hamiltonian.hpp"
#include "xcav/spectral.hpp"

namespace xcav {

/// Reflected amplitude B_out/B_in and reflectivity on a detuning grid (Gamma0).
struct ReflectivitySpectrum {
  Eigen::VectorXd detuning;
  Eigen::VectorXcd amplitude;
  Eigen::VectorXd reflectivity;
  std::vector<std::uint8_t> valid;  // 0 where the shifted system was singular
  cplx baseline;                    // electronic reflection amplitude
  bool used_linear_solve = false;

  /// Optional per-eigenstate terms -i Omega_j^2 / (lambda_j + Delta), one
  /// column per state, and their centres -Re(lambda_j).
  Eigen::MatrixXcd terms;
  Eigen::VectorXd centers;

  Eigen::Index size() const { return detuning.size(); }
};

/// Uniform grid of n points over [lo, hi].
Eigen::VectorXd detuning_grid(double lo = -200.0, double hi = 200.0, Eigen::Index n = 4001);

/// B_out/B_in = r - i sum_j (Omega_j^eig)^2 / (lambda_j + Delta_0 + Delta) over
/// the quasi-eigenbasis, Delta_0 being the detuning stored in `h`. Falls back
/// to linear_solve_spectrum when `es` is flagged exceptional.
ReflectivitySpectrum spectrum(const NuclearHamiltonian& h, const EigenSystem& es, const DriveVector& drive,
                              cplx electronic_r, const Eigen::VectorXd& grid, bool decompose = false);

/// Same contract, solving (K + Delta) S = -Omega at each point and using
/// B_out/B_in = r + i Omega^T S.
ReflectivitySpectrum linear_solve_spectrum(const NuclearHamiltonian& h, const DriveVector& drive, cplx electronic_r,
                                           const Eigen::VectorXd& grid);

/// Builds everything from the geometry.
ReflectivitySpectrum reflectivity(const LayerStack& stack, const ScatterContext& ctx, const Eigen::VectorXd& grid,
                                  bool decompose = false);

struct LorentzianFit {
  double baseline = 0.0;
  double amplitude = 0.0;
  double center = 0.0;
  double half_width = 0.0;
  double r_squared = 0.0;
  int lm_status = 0;
};

struct FeatureReport {
  std::vector<Eigen::Index> maxima;   // grid indices, ascending detuning
  std::vector<Eigen::Index> minima;   // interior minima between consecutive maxima
  std::optional<LorentzianFit> fit;   // single peak plus constant baseline

  bool has_interior_dip() const { return maxima.size() >= 2 && !minima.empty(); }
};

/// Local maxima with prominence above `min_prominence` times the spectral
/// range, the deepest minimum between each consecutive pair, and a single
/// Lorentzian-plus-baseline fit.
FeatureReport feature_extract(const ReflectivitySpectrum& rs, double min_prominence = 1e-3);

/// Least-squares fit of b + A / (1 + ((x - x0)/g)^2). Uses Levenberg-Marquardt.
LorentzianFit fit_lorentzian(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

}  // namespace xcav
