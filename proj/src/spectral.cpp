#include "xcav/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xcav/error.hpp"

namespace xcav {

namespace {

// Rotates v so that its largest component is real and positive.
template <typename V>
void fix_phase(V& v, bool sign_only) {
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  const cplx top = v(imax);
  if (std::abs(top) == 0.0) return;
  if (sign_only) {
    if (top.real() < 0.0 || (top.real() == 0.0 && top.imag() < 0.0)) v = -v;
  } else {
    v *= std::abs(top) / top;
    v(imax) = std::abs(top);
  }
}

}  // namespace

EigenSystem eigensystem(const Eigen::MatrixXcd& matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) throw ContractError("eigensystem needs a non-empty square matrix");
  if (!matrix.allFinite()) throw NumericError("matrix has non-finite entries");

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(matrix, true);
  if (solver.info() != Eigen::Success)
    throw NumericError("complex eigensolver did not converge for a " + std::to_string(matrix.rows()) + "x" +
                       std::to_string(matrix.rows()) + " matrix");

  const Eigen::Index M = matrix.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(M));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const Eigen::VectorXcd& ev = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return ev(a).real() > ev(b).real(); });

  EigenSystem es;
  es.eigenvalues.resize(M);
  es.right_vectors.resize(M, M);
  es.biortho_norms.resize(M);
  es.coefficients.resize(M, M);
  const double norm = matrix.norm();
  for (Eigen::Index j = 0; j < M; ++j) {
    const Eigen::Index src = order[static_cast<std::size_t>(j)];
    Eigen::VectorXcd phi = solver.eigenvectors().col(src);
    phi.normalize();
    fix_phase(phi, false);
    es.eigenvalues(j) = ev(src);
    es.right_vectors.col(j) = phi;
    const cplx b = phi.transpose() * phi;
    es.biortho_norms(j) = b;
    if (std::abs(b) < EigenSystem::kExceptionalThreshold) es.exceptional = true;
    Eigen::VectorXcd c = phi / std::sqrt(b);
    fix_phase(c, true);
    es.coefficients.row(j) = c.transpose();
    const double res = (matrix * phi - ev(src) * phi).norm() / (norm > 0.0 ? norm : 1.0);
    es.max_residual = std::max(es.max_residual, res);
  }
  return es;
}

EigenSystem eigensystem(const NuclearHamiltonian& h) { return eigensystem(h.matrix); }

Eigen::VectorXcd quasi_eigen_rabi(const EigenSystem& es, const DriveVector& drive) {
  if (drive.omega.size() != es.size())
    throw ContractError("drive has " + std::to_string(drive.omega.size()) + " entries, eigensystem has " +
                        std::to_string(es.size()));
  return es.coefficients * drive.omega;
}

double non_normality(const EigenSystem& es, const DriveVector& drive) {
  const double direct = drive.omega.squaredNorm();
  return direct > 0.0 ? quasi_eigen_rabi(es, drive).squaredNorm() / direct - 1.0 : 0.0;
}

std::vector<Eigen::Index> EdgeReport::edge_states() const {
  std::vector<Eigen::Index> out;
  for (Eigen::Index j = 0; j < edge_weight.size(); ++j)
    if (edge_weight(j) > threshold) out.push_back(j);
  return out;
}

EdgeReport edge_report(const EigenSystem& es, const Eigen::MatrixXcd& matrix, double threshold) {
  const Eigen::Index M = es.size();
  if (matrix.rows() != M) throw ContractError("matrix and eigensystem sizes differ");
  EdgeReport r;
  r.threshold = threshold;
  r.weights = es.right_vectors.cwiseAbs2().transpose();
  for (Eigen::Index j = 0; j < M; ++j) r.weights.row(j) /= r.weights.row(j).sum();
  r.edge_weight = r.weights.col(0);
  if (M > 1) r.edge_weight += r.weights.col(M - 1);

  const Eigen::VectorXcd diag = matrix.diagonal();
  r.reference_energy = M > 2 ? diag.segment(1, M - 2).real().mean() : diag.real().mean();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(M));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(es.eigenvalues(a).real() - r.reference_energy) < std::abs(es.eigenvalues(b).real() - r.reference_energy);
  });
  r.mid_gap.assign(order.begin(), order.begin() + std::min<Eigen::Index>(2, M));
  std::sort(r.mid_gap.begin(), r.mid_gap.end());
  return r;
}

EdgeReport edge_report(const EigenSystem& es, const NuclearHamiltonian& h, double threshold) {
  return edge_report(es, h.matrix, threshold);
}

}  // namespace xcav
