#include "xcav/reflectivity.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/LevenbergMarquardt>

#include "xcav/error.hpp"

namespace xcav {

namespace {

constexpr cplx I{0.0, 1.0};
// Below this reciprocal condition number a shifted system counts as singular.
constexpr double kSingularRcond = 1e-14;

ReflectivitySpectrum make_empty(const Eigen::VectorXd& grid, cplx r) {
  if (grid.size() == 0) throw ConfigError("detuning grid is empty", "reflectivity.grid");
  if (!grid.allFinite()) throw ConfigError("detuning grid has non-finite values", "reflectivity.grid");
  ReflectivitySpectrum rs;
  rs.detuning = grid;
  rs.amplitude.resize(grid.size());
  rs.reflectivity.resize(grid.size());
  rs.valid.assign(static_cast<std::size_t>(grid.size()), 1);
  rs.baseline = r;
  return rs;
}

struct LorentzFunctor : Eigen::DenseFunctor<double> {
  const Eigen::VectorXd& x;
  const Eigen::VectorXd& y;
  LorentzFunctor(const Eigen::VectorXd& x_, const Eigen::VectorXd& y_)
      : DenseFunctor<double>(4, static_cast<int>(x_.size())), x(x_), y(y_) {}

  int operator()(const InputType& p, ValueType& f) const {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double u = (x(i) - p(2)) / p(3);
      f(i) = p(0) + p(1) / (1.0 + u * u) - y(i);
    }
    return 0;
  }
  int df(const InputType& p, JacobianType& J) const {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double u = (x(i) - p(2)) / p(3);
      const double q = 1.0 / (1.0 + u * u);
      J(i, 0) = 1.0;
      J(i, 1) = q;
      J(i, 2) = p(1) * q * q * 2.0 * u / p(3);
      J(i, 3) = p(1) * q * q * 2.0 * u * u / p(3);
    }
    return 0;
  }
};

}  // namespace

Eigen::VectorXd detuning_grid(double lo, double hi, Eigen::Index n) {
  if (n < 2 || !(hi > lo)) throw ConfigError("detuning grid needs n >= 2 and hi > lo", "reflectivity.grid");
  return Eigen::VectorXd::LinSpaced(n, lo, hi);
}

ReflectivitySpectrum spectrum(const NuclearHamiltonian& h, const EigenSystem& es, const DriveVector& drive,
                              cplx electronic_r, const Eigen::VectorXd& grid, bool decompose) {
  if (es.size() != h.size() || drive.omega.size() != h.size())
    throw ContractError("Hamiltonian, eigensystem and drive sizes differ");
  if (es.exceptional) {
    ReflectivitySpectrum rs = linear_solve_spectrum(h, drive, electronic_r, grid);
    return rs;
  }
  ReflectivitySpectrum rs = make_empty(grid, electronic_r);
  const Eigen::VectorXcd w = quasi_eigen_rabi(es, drive).array().square();
  const Eigen::VectorXcd lambda = es.eigenvalues.array() + h.detuning;
  if (decompose) {
    rs.terms.resize(grid.size(), es.size());
    rs.centers = -lambda.real();
  }
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    cplx sum{};
    for (Eigen::Index j = 0; j < es.size(); ++j) {
      const cplx t = -I * w(j) / (lambda(j) + grid(i));
      if (decompose) rs.terms(i, j) = t;
      sum += t;
    }
    rs.amplitude(i) = electronic_r + sum;
    rs.reflectivity(i) = std::norm(rs.amplitude(i));
  }
  return rs;
}

ReflectivitySpectrum linear_solve_spectrum(const NuclearHamiltonian& h, const DriveVector& drive, cplx electronic_r,
                                           const Eigen::VectorXd& grid) {
  if (drive.omega.size() != h.size()) throw ContractError("Hamiltonian and drive sizes differ");
  ReflectivitySpectrum rs = make_empty(grid, electronic_r);
  rs.used_linear_solve = true;
  const Eigen::Index M = h.size();
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const Eigen::MatrixXcd A = h.matrix + (h.detuning + grid(i)) * Eigen::MatrixXcd::Identity(M, M);
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
    if (!(lu.rcond() > kSingularRcond)) {
      rs.valid[static_cast<std::size_t>(i)] = 0;
      rs.amplitude(i) = cplx{std::nan(""), std::nan("")};
      rs.reflectivity(i) = std::nan("");
      continue;
    }
    const Eigen::VectorXcd S = lu.solve(-drive.omega);
    rs.amplitude(i) = electronic_r + I * (drive.omega.transpose() * S).value();
    rs.reflectivity(i) = std::norm(rs.amplitude(i));
  }
  return rs;
}

ReflectivitySpectrum reflectivity(const LayerStack& stack, const ScatterContext& ctx, const Eigen::VectorXd& grid,
                                  bool decompose) {
  const GreensFunction1D g(stack, ctx);
  const NuclearHamiltonian h = build_hamiltonian(stack, g, ctx);
  return spectrum(h, eigensystem(h), rabi_vector(stack, g, ctx), g.electronic_reflectance(), grid, decompose);
}

LorentzianFit fit_lorentzian(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size() || x.size() < 5) throw ContractError("Lorentzian fit needs at least 5 matching points");
  Eigen::Index imax = 0;
  y.maxCoeff(&imax);
  // baseline guess from the ends of the window
  const double base = 0.5 * (y(0) + y(y.size() - 1));
  const double amp = y(imax) - base;
  double half = 0.0;
  for (Eigen::Index i = imax; i < x.size() && half == 0.0; ++i)
    if (y(i) - base < 0.5 * amp) half = x(i) - x(imax);
  for (Eigen::Index i = imax; i >= 0 && half == 0.0; --i)
    if (y(i) - base < 0.5 * amp) half = x(imax) - x(i);
  if (half <= 0.0) half = 0.1 * (x(x.size() - 1) - x(0));

  Eigen::VectorXd p(4);
  p << base, amp, x(imax), half;
  LorentzFunctor f(x, y);
  Eigen::LevenbergMarquardt<LorentzFunctor> lm(f);
  const auto status = lm.minimize(p);

  LorentzianFit fit;
  fit.baseline = p(0);
  fit.amplitude = p(1);
  fit.center = p(2);
  fit.half_width = std::abs(p(3));
  fit.lm_status = static_cast<int>(status);
  Eigen::VectorXd res(x.size());
  f(p, res);
  const double ss_tot = (y.array() - y.mean()).square().sum();
  fit.r_squared = ss_tot > 0.0 ? 1.0 - res.squaredNorm() / ss_tot : 1.0;
  return fit;
}

FeatureReport feature_extract(const ReflectivitySpectrum& rs, double min_prominence) {
  FeatureReport rep;
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < rs.size(); ++i)
    if (rs.valid[static_cast<std::size_t>(i)]) idx.push_back(i);
  if (idx.size() < 3) return rep;

  Eigen::VectorXd x(static_cast<Eigen::Index>(idx.size())), y(x.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    x(static_cast<Eigen::Index>(k)) = rs.detuning(idx[k]);
    y(static_cast<Eigen::Index>(k)) = rs.reflectivity(idx[k]);
  }
  const double range = y.maxCoeff() - y.minCoeff();
  if (!(range > 1e-12 * std::max(1.0, std::abs(y.maxCoeff())))) return rep;

  // candidate maxima (plateaus count once, at their left end)
  std::vector<Eigen::Index> cand;
  for (Eigen::Index i = 1; i + 1 < y.size(); ++i)
    if (y(i) > y(i - 1) && y(i) >= y(i + 1)) cand.push_back(i);

  // prominence: height above the higher of the lowest points separating the
  // peak from taller peaks (or the ends) on either side
  for (const Eigen::Index c : cand) {
    double left_min = y(c), right_min = y(c);
    for (Eigen::Index i = c - 1; i >= 0 && y(i) <= y(c); --i) left_min = std::min(left_min, y(i));
    for (Eigen::Index i = c + 1; i < y.size() && y(i) <= y(c); ++i) right_min = std::min(right_min, y(i));
    if (y(c) - std::max(left_min, right_min) > min_prominence * range) rep.maxima.push_back(c);
  }
  for (std::size_t k = 0; k + 1 < rep.maxima.size(); ++k) {
    Eigen::Index lo = rep.maxima[k];
    y.segment(rep.maxima[k], rep.maxima[k + 1] - rep.maxima[k] + 1).minCoeff(&lo);
    rep.minima.push_back(rep.maxima[k] + lo);
  }
  for (auto& m : rep.maxima) m = idx[static_cast<std::size_t>(m)];
  for (auto& m : rep.minima) m = idx[static_cast<std::size_t>(m)];

  if (!rep.maxima.empty() && x.size() >= 5) rep.fit = fit_lorentzian(x, y);
  return rep;
}

}  // namespace xcav
