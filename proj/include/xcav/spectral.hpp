#pragma once

#include <vector>

#include <Eigen/Dense>

#include "xcav/hamiltonian.hpp"

namespace xcav {

/// Eigen-decomposition of a complex symmetric matrix with the unconjugated
/// (biorthogonal) normalisation phi_j^T phi_j = 1.
struct EigenSystem {
  Eigen::VectorXcd eigenvalues;        // J + i Gamma, sorted by descending real part
  Eigen::MatrixXcd right_vectors;      // columns phi_j, unit Euclidean norm
  Eigen::VectorXcd biortho_norms;      // phi_j^T phi_j before normalisation
  Eigen::MatrixXcd coefficients;       // (j, l) -> c_j^(l) = phi_j(l) / sqrt(phi_j^T phi_j)
  bool exceptional = false;            // some |phi_j^T phi_j| fell below kExceptionalThreshold
  double max_residual = 0.0;           // max_j |H phi_j - lambda_j phi_j| / |H|

  static constexpr double kExceptionalThreshold = 1e-6;

  Eigen::Index size() const { return eigenvalues.size(); }
};

EigenSystem eigensystem(const Eigen::MatrixXcd& matrix);
/// Decomposes the detuning-free matrix; the detuning is a pure eigenvalue shift.
EigenSystem eigensystem(const NuclearHamiltonian& h);

/// Omega^(eig)_j = sum_l c_j^(l) Omega_l.
Eigen::VectorXcd quasi_eigen_rabi(const EigenSystem& es, const DriveVector& drive);

/// sum |Omega^(eig)|^2 / sum |Omega|^2 - 1; zero for a normal matrix.
double non_normality(const EigenSystem& es, const DriveVector& drive);

struct EdgeReport {
  Eigen::MatrixXd weights;             // (state, layer), rows sum to 1
  Eigen::VectorXd edge_weight;         // weight on the first and last layer
  std::vector<Eigen::Index> mid_gap;   // the two states closest to the bulk self-coupling
  double reference_energy = 0.0;       // mean real interior diagonal used to pick mid-gap states
  double threshold = 0.6;

  /// States whose edge weight exceeds the threshold.
  std::vector<Eigen::Index> edge_states() const;
};

/// Localisation of every eigenstate. The reference energy is the mean real
/// part of the diagonal entries excluding the first and last layer.
EdgeReport edge_report(const EigenSystem& es, const Eigen::MatrixXcd& matrix, double threshold = 0.6);
EdgeReport edge_report(const EigenSystem& es, const NuclearHamiltonian& h, double threshold = 0.6);

}  // namespace xcav
