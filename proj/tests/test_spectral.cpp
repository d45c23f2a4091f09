#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "xcav/error.hpp"
#include "xcav/spectral.hpp"

using namespace xcav;

namespace {

NuclearHamiltonian paper_h(double dv, double dw = 3.5) {
  StackConfig c;
  c.d_v_nm = dv;
  c.d_w_nm = dw;
  return build_hamiltonian(build_stack(c), ScatterContext{});
}

void check_invariants(const Eigen::MatrixXcd& A, const EigenSystem& es) {
  const Eigen::Index M = A.rows();
  const Eigen::MatrixXcd& C = es.coefficients;
  CHECK(es.max_residual < 1e-10);
  for (Eigen::Index j = 0; j < M; ++j) {
    const Eigen::VectorXcd phi = es.right_vectors.col(j);
    CHECK((A * phi - es.eigenvalues(j) * phi).norm() / A.norm() < 1e-10);
    if (j > 0) CHECK(es.eigenvalues(j).real() <= es.eigenvalues(j - 1).real());
  }
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(M, M);
  CHECK((C * C.transpose() - id).cwiseAbs().maxCoeff() < 1e-8);  // biorthonormality
  CHECK((C.transpose() * C - id).cwiseAbs().maxCoeff() < 1e-8);  // completeness
  CHECK(std::abs(es.eigenvalues.sum() - A.trace()) <= 1e-10 * std::max(1.0, std::abs(A.trace())));
}

}  // namespace

TEST_CASE("2x2 closed form") {
  const cplx a{1.5, 0.3}, b{0.7, -0.2};
  Eigen::MatrixXcd A(2, 2);
  A << a, b, b, a;
  const EigenSystem es = eigensystem(A);
  CHECK(std::abs(es.eigenvalues(0) - (a + b)) < 1e-14);
  CHECK(std::abs(es.eigenvalues(1) - (a - b)) < 1e-14);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK((es.right_vectors.col(0) - Eigen::Vector2cd(r, r)).norm() < 1e-14);
  CHECK(std::abs(std::abs(es.right_vectors(0, 1)) - r) < 1e-14);
  CHECK(std::abs(es.right_vectors(0, 1) + es.right_vectors(1, 1)) < 1e-14);
  check_invariants(A, es);
}

TEST_CASE("random complex symmetric matrices match characteristic polynomial roots") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXcd A = oracle::random_symmetric(8, rng);
    const EigenSystem es = eigensystem(A);
    std::vector<cplx> roots = oracle::poly_roots(oracle::charpoly(A));
    REQUIRE(roots.size() == 8);
    for (Eigen::Index j = 0; j < 8; ++j) {
      auto it = std::min_element(roots.begin(), roots.end(), [&](cplx x, cplx y) {
        return std::abs(x - es.eigenvalues(j)) < std::abs(y - es.eigenvalues(j));
      });
      CHECK(std::abs(*it - es.eigenvalues(j)) < 1e-8 * std::max(1.0, std::abs(es.eigenvalues(j))));
      roots.erase(it);
    }
    check_invariants(A, es);
  }
}

TEST_CASE("canonical Hamiltonians satisfy the eigen invariants") {
  for (double dv : {2.8, 4.9}) {
    const NuclearHamiltonian h = paper_h(dv);
    const EigenSystem es = eigensystem(h);
    CHECK_FALSE(es.exceptional);
    check_invariants(h.matrix, es);
    for (Eigen::Index j = 0; j < es.size(); ++j) CHECK(es.eigenvalues(j).imag() > 0.0);
  }
}

TEST_CASE("a constant shift moves eigenvalues and keeps eigenvectors") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd(0.0, 30.0);
  for (double dv : {2.8, 4.9}) {
    const NuclearHamiltonian h = paper_h(dv);
    const EigenSystem es = eigensystem(h);
    for (int trial = 0; trial < 5; ++trial) {
      const cplx c{nd(rng), nd(rng)};
      const EigenSystem sh = eigensystem(Eigen::MatrixXcd(h.matrix + c * Eigen::MatrixXcd::Identity(10, 10)));
      for (Eigen::Index j = 0; j < 10; ++j) {
        CHECK(std::abs(sh.eigenvalues(j) - es.eigenvalues(j) - c) < 1e-10 * h.matrix.norm());
        const cplx overlap = es.right_vectors.col(j).dot(sh.right_vectors.col(j));
        CHECK(std::abs(std::abs(overlap) - 1.0) < 1e-8);
      }
    }
  }
}

TEST_CASE("trivial geometry has two separated bands of five") {
  const EigenSystem es = eigensystem(paper_h(2.8));
  const Eigen::VectorXd re = es.eigenvalues.real();
  const double gap = re(4) - re(5);
  double spread = 0.0;
  for (Eigen::Index j = 0; j + 1 < 10; ++j)
    if (j != 4) spread = std::max(spread, re(j) - re(j + 1));
  CHECK(gap > spread);
}

TEST_CASE("diagonal matrix leaves the drive unchanged") {
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(4, 4);
  A.diagonal() << cplx{3.0, 0.5}, cplx{-1.0, 0.7}, cplx{2.0, 0.1}, cplx{0.5, 2.0};
  const EigenSystem es = eigensystem(A);
  DriveVector d{Eigen::Vector4cd(cplx{1.0, 2.0}, cplx{-0.3, 0.1}, cplx{0.0, 1.0}, cplx{2.5, -1.0})};
  const Eigen::VectorXcd oe = quasi_eigen_rabi(es, d);
  for (Eigen::Index j = 0; j < 4; ++j) {
    Eigen::Index l = 0;
    es.right_vectors.col(j).cwiseAbs().maxCoeff(&l);
    CHECK(std::abs(oe(j) - d.omega(l)) < 1e-15);
  }
  CHECK(std::abs(non_normality(es, d)) < 1e-15);
}

TEST_CASE("topological edge states carry the largest quasi-eigen Rabi frequencies") {
  StackConfig c;
  c.d_v_nm = 4.9;
  const LayerStack s = build_stack(c);
  const NuclearHamiltonian h = build_hamiltonian(s, ScatterContext{});
  const EigenSystem es = eigensystem(h);
  const EdgeReport er = edge_report(es, h);
  const Eigen::VectorXd oe = quasi_eigen_rabi(es, rabi_vector(s, ScatterContext{})).cwiseAbs();
  std::vector<Eigen::Index> order(10);
  for (Eigen::Index j = 0; j < 10; ++j) order[static_cast<std::size_t>(j)] = j;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return oe(a) > oe(b); });
  std::vector<Eigen::Index> top{order[0], order[1]};
  std::sort(top.begin(), top.end());
  CHECK(top == er.mid_gap);
  MESSAGE("non-normality of the topological drive: " << non_normality(es, rabi_vector(s, ScatterContext{})));
}

TEST_CASE("edge localisation") {
  SUBCASE("topological") {
    const NuclearHamiltonian h = paper_h(4.9);
    const EigenSystem es = eigensystem(h);
    const EdgeReport er = edge_report(es, h);
    for (Eigen::Index j = 0; j < 10; ++j) CHECK(er.weights.row(j).sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(er.edge_states() == er.mid_gap);
    const double lo = std::min(es.eigenvalues(er.mid_gap[0]).real(), es.eigenvalues(er.mid_gap[1]).real());
    const double hi = std::max(es.eigenvalues(er.mid_gap[0]).real(), es.eigenvalues(er.mid_gap[1]).real());
    // four bulk states above and below the pair
    int above = 0, below = 0;
    for (Eigen::Index j = 0; j < 10; ++j) {
      if (es.eigenvalues(j).real() > hi) ++above;
      if (es.eigenvalues(j).real() < lo) ++below;
    }
    CHECK(above == 4);
    CHECK(below == 4);
  }
  SUBCASE("trivial") {
    const NuclearHamiltonian h = paper_h(2.8);
    const EdgeReport er = edge_report(eigensystem(h), h);
    CHECK(er.edge_weight.maxCoeff() < 0.5);
    CHECK(er.edge_states().empty());
  }
}

TEST_CASE("mirror-symmetric stacks give reflection-symmetric weights") {
  for (double dv : {2.8, 4.9}) {
    const NuclearHamiltonian h = paper_h(dv);
    const EigenSystem es = eigensystem(h);
    const EdgeReport er = edge_report(es, h);
    for (Eigen::Index j = 0; j < 10; ++j) {
      double sep = 1e300;
      for (Eigen::Index l = 0; l < 10; ++l)
        if (l != j) sep = std::min(sep, std::abs(es.eigenvalues(j) - es.eigenvalues(l)));
      if (sep < 1e-6) continue;
      for (Eigen::Index l = 0; l < 10; ++l) CHECK(std::abs(er.weights(j, l) - er.weights(j, 9 - l)) < 1e-6);
    }
  }
}

TEST_CASE("symmetric dimer") {
  StackConfig c;
  c.n_cavities = 2;
  c.d_v_nm = 3.5;
  const NuclearHamiltonian h = build_hamiltonian(build_stack(c), ScatterContext{});
  const EdgeReport er = edge_report(eigensystem(h), h);
  for (Eigen::Index j = 0; j < 2; ++j)
    for (Eigen::Index l = 0; l < 2; ++l) CHECK(er.weights(j, l) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("defective matrix is flagged exceptional") {
  Eigen::MatrixXcd A(2, 2);
  A << cplx{1.0, 0.0}, cplx{0.0, 1.0}, cplx{0.0, 1.0}, cplx{-1.0, 0.0};
  CHECK(eigensystem(A).exceptional);
}

TEST_CASE("bad input") {
  CHECK_THROWS_AS(eigensystem(Eigen::MatrixXcd(2, 3)), ContractError);
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(3, 3);
  A(1, 2) = A(2, 1) = std::nan("");
  CHECK_THROWS_AS(eigensystem(A), NumericError);
  const EigenSystem es = eigensystem(Eigen::MatrixXcd(Eigen::MatrixXcd::Identity(3, 3)));
  CHECK_THROWS_AS(quasi_eigen_rabi(es, DriveVector{Eigen::VectorXcd::Ones(4)}), ContractError);
}
