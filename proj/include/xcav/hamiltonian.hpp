#pragma once

#include <Eigen/Dense>

#include "xcav/greens.hpp"
#include "xcav/stack.hpp"

namespace xcav {

/// Single-excitation nucleus-nucleus coupling matrix in units of hbar Gamma0.
///
/// `matrix` holds K = (i/2) 1 + kappa G(z_j, z_l) at zero detuning, i.e. the
/// negative of the interaction Hamiltonian H_I(0); its eigenvalues are
/// J + i Gamma with Gamma > 0, and the nuclear response at detuning Delta is
/// governed by K + Delta 1. The detuning is kept as a separate scalar.
struct NuclearHamiltonian {
  Eigen::MatrixXcd matrix;
  double detuning = 0.0;    // Gamma0 units
  double gamma0_eV = 0.0;

  Eigen::Index size() const { return matrix.rows(); }
  /// K + Delta 1 for the stored detuning.
  Eigen::MatrixXcd shifted() const { return shifted(detuning); }
  Eigen::MatrixXcd shifted(double delta) const {
    return matrix + delta * Eigen::MatrixXcd::Identity(size(), size());
  }
  /// Matrix of the interaction Hamiltonian itself, -(K + Delta 1).
  Eigen::MatrixXcd interaction() const { return -shifted(); }
};

/// Per-layer Rabi frequencies in units of Gamma0.
///
/// The incident amplitude is normalised so that the input-output prefactor
/// mu0 omega^2 hbar / (2 p_src A B_in) equals one in these units; then
/// B_out/B_in = r - i Omega^T (K + Delta)^{-1} Omega and only ratios to B_in
/// ever appear.
struct DriveVector {
  Eigen::VectorXcd omega;
};

/// kappa = (N/A) mu0 k^2 |m|^2 / (hbar Gamma0) in 1/nm, the factor turning the
/// Green's function (nm) into couplings in units of Gamma0.
double coupling_constant(const NuclearParams& nuclear, double layer_thickness_nm, double energy_keV);

/// kappa for every resonant layer of the stack. Throws ConfigError if none.
Eigen::VectorXd coupling_constants(const LayerStack& stack, const ScatterContext& ctx);

NuclearHamiltonian build_hamiltonian(const LayerStack& stack, const ScatterContext& ctx, double detuning = 0.0);
NuclearHamiltonian build_hamiltonian(const LayerStack& stack, const GreensFunction1D& g, const ScatterContext& ctx,
                                     double detuning = 0.0);

/// Omega_j from G(z_j, z_src) with the line-source prefactor -2 i p_src.
DriveVector rabi_vector(const LayerStack& stack, const ScatterContext& ctx);
DriveVector rabi_vector(const LayerStack& stack, const GreensFunction1D& g, const ScatterContext& ctx);

/// Omega_j = sqrt(N) m B_1D(z_j) with the field taken from the Parratt
/// recursion instead of the Green's function.
DriveVector rabi_vector_via_field(const LayerStack& stack, const ScatterContext& ctx);

/// Off-diagonal coupling of a two-cavity stack whose cores are separated by a
/// spacer of width d (nm). Uses the core/cap/spacer of `tmpl`.
cplx coupling_curve(const StackConfig& tmpl, const ScatterContext& ctx, double d_nm,
                    const MaterialDatabase& db = MaterialDatabase::builtin());

}  // namespace xcav
