#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "xcav/error.hpp"
#include "xcav/reflectivity.hpp"

using namespace xcav;

namespace {

LayerStack paper_stack(double dv) {
  StackConfig c;
  c.d_v_nm = dv;
  return build_stack(c);
}

ScatterContext at(double angle) {
  ScatterContext ctx;
  ctx.angle_mrad = angle;
  return ctx;
}

double max_rel(const ReflectivitySpectrum& a, const ReflectivitySpectrum& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a.amplitude(i) - b.amplitude(i)) / std::abs(b.amplitude(i)));
  return worst;
}

}  // namespace

TEST_CASE("eigenbasis and direct solve agree") {
  const Eigen::VectorXd grid = detuning_grid();
  for (double angle : {2.4067, 2.4157})
    for (double dv : {2.8, 4.9}) {
      const LayerStack s = paper_stack(dv);
      const ScatterContext ctx = at(angle);
      const GreensFunction1D g(s, ctx);
      const NuclearHamiltonian h = build_hamiltonian(s, g, ctx);
      const DriveVector d = rabi_vector(s, g, ctx);
      const ReflectivitySpectrum a = spectrum(h, eigensystem(h), d, g.electronic_reflectance(), grid);
      const ReflectivitySpectrum b = linear_solve_spectrum(h, d, g.electronic_reflectance(), grid);
      CHECK_FALSE(a.used_linear_solve);
      CHECK(b.used_linear_solve);
      CHECK(max_rel(a, b) < 1e-8);
      for (Eigen::Index i = 0; i < grid.size(); ++i) {
        CHECK(a.reflectivity(i) >= 0.0);
        CHECK(std::abs(a.reflectivity(i) - std::norm(a.amplitude(i))) < 1e-15);
      }
    }
}

TEST_CASE("full response matches a transfer matrix with resonant sheets") {
  for (double angle : {2.4067, 2.4157})
    for (double dv : {2.8, 4.9}) {
      const LayerStack s = paper_stack(dv);
      const ScatterContext ctx = at(angle);
      const Eigen::VectorXd kv = coupling_constants(s, ctx);
      const std::vector<double> kappa(kv.data(), kv.data() + kv.size());
      Eigen::VectorXd grid(9);
      grid << -150.0, -60.0, -20.5, -3.0, 0.0, 4.0, 35.0, 80.0, 400.0;
      const ReflectivitySpectrum rs = reflectivity(s, ctx, grid);
      for (Eigen::Index i = 0; i < grid.size(); ++i) {
        const cplx ref = oracle::sheet_reflection(s, ctx.energy_keV, ctx.angle_rad(), kappa, grid(i));
        CHECK(std::abs(rs.amplitude(i) - ref) < 1e-8 * std::abs(ref));
      }
    }
}

TEST_CASE("single resonant sheet in vacuum") {
  Material ghost = MaterialDatabase::builtin().at("Fe57");
  ghost.delta = ghost.beta = 0.0;
  const Material vac = MaterialDatabase::builtin().at("vacuum");
  const LayerStack s = LayerStack::from_layers(vac, {{vac, 10.0}, {ghost, 1.0}, {vac, 10.0}}, vac);
  const ScatterContext ctx;
  const double kz = oracle::k0(ctx.energy_keV) * std::sin(ctx.angle_rad());
  const double kappa = coupling_constants(s, ctx)(0);
  const double z1 = s.resonant_centers_nm[0];
  const Eigen::VectorXd grid = detuning_grid(-50.0, 50.0, 101);
  const ReflectivitySpectrum rs = reflectivity(s, ctx, grid);
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double q = kappa / (2.0 * kz);
    const cplx ref = -oracle::I * q * std::exp(2.0 * oracle::I * kz * z1) / (grid(i) + oracle::I * (0.5 + q));
    CHECK(std::abs(rs.amplitude(i) - ref) < 1e-12 * std::abs(ref));
  }
}

TEST_CASE("single cavity is one Lorentzian") {
  StackConfig c;
  c.n_cavities = 1;
  const LayerStack s = build_stack(c);
  const ScatterContext ctx;
  const GreensFunction1D g(s, ctx);
  const NuclearHamiltonian h = build_hamiltonian(s, g, ctx);
  const cplx om = rabi_vector(s, g, ctx).omega(0);
  const Eigen::VectorXd grid = detuning_grid();
  const ReflectivitySpectrum rs = reflectivity(s, ctx, grid);
  for (Eigen::Index i = 0; i < grid.size(); i += 50)
    CHECK(std::abs(rs.amplitude(i) - (g.reflection() - oracle::I * om * om / (h.matrix(0, 0) + grid(i)))) < 1e-12);
}

TEST_CASE("without nuclei the spectrum is the electronic baseline") {
  MaterialDatabase db = MaterialDatabase::builtin();
  Material fe = db.at("Fe57");
  fe.nuclear->number_density_m3 = 0.0;
  fe.nuclear->resolve();
  db.add(fe);
  StackConfig c;
  c.d_v_nm = 4.9;
  const LayerStack s = build_stack(c, db);
  const ScatterContext ctx;
  const ReflectivitySpectrum rs = reflectivity(s, ctx, detuning_grid());
  const double base = std::norm(electronic_reflectance(s, ctx));
  for (Eigen::Index i = 0; i < rs.size(); ++i) CHECK(rs.reflectivity(i) == doctest::Approx(base).epsilon(1e-14));
  CHECK(feature_extract(rs).maxima.empty());
}

TEST_CASE("baseline is the electronic reflectance") {
  for (double dv : {2.8, 4.9}) {
    const LayerStack s = paper_stack(dv);
    const ScatterContext ctx;
    CHECK(reflectivity(s, ctx, detuning_grid(-1.0, 1.0, 3)).baseline == electronic_reflectance(s, ctx));
  }
}

TEST_CASE("stored detuning acts as a grid shift") {
  const LayerStack s = paper_stack(4.9);
  const ScatterContext ctx;
  const GreensFunction1D g(s, ctx);
  const DriveVector d = rabi_vector(s, g, ctx);
  const NuclearHamiltonian h0 = build_hamiltonian(s, g, ctx);
  const NuclearHamiltonian h7 = build_hamiltonian(s, g, ctx, 7.0);
  const Eigen::VectorXd grid = detuning_grid(-100.0, 100.0, 201);
  const ReflectivitySpectrum a = linear_solve_spectrum(h0, d, g.reflection(), grid);
  const ReflectivitySpectrum b = linear_solve_spectrum(h7, d, g.reflection(), grid.array() - 7.0);
  const ReflectivitySpectrum c = spectrum(h7, eigensystem(h7), d, g.reflection(), grid.array() - 7.0);
  CHECK(max_rel(a, b) < 1e-12);
  CHECK(max_rel(a, c) < 1e-8);
}

TEST_CASE("each eigenstate term peaks at minus its energy") {
  for (double dv : {2.8, 4.9}) {
    const LayerStack s = paper_stack(dv);
    const Eigen::VectorXd grid = detuning_grid();
    const double step = grid(1) - grid(0);
    const ReflectivitySpectrum rs = reflectivity(s, ScatterContext{}, grid, true);
    REQUIRE(rs.terms.cols() == 10);
    for (Eigen::Index j = 0; j < 10; ++j) {
      if (rs.centers(j) < grid(1) || rs.centers(j) > grid(grid.size() - 2)) continue;
      Eigen::Index imax = 0;
      rs.terms.col(j).cwiseAbs().maxCoeff(&imax);
      CHECK(std::abs(grid(imax) - rs.centers(j)) <= step);
    }
    const Eigen::VectorXcd total = rs.terms.rowwise().sum().array() + rs.baseline;
    CHECK((total - rs.amplitude).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("exceptional eigensystems fall back to the direct solve") {
  Eigen::MatrixXcd K(2, 2);
  K << cplx{1.0, 0.0}, cplx{0.0, 1.0}, cplx{0.0, 1.0}, cplx{-1.0, 0.0};
  K += cplx{0.0, 2.0} * Eigen::MatrixXcd::Identity(2, 2);
  NuclearHamiltonian h{K, 0.0, 1.0};
  const EigenSystem es = eigensystem(h);
  REQUIRE(es.exceptional);
  const DriveVector d{Eigen::Vector2cd(1.0, 0.5)};
  const ReflectivitySpectrum rs = spectrum(h, es, d, 0.1, detuning_grid(-5.0, 5.0, 11));
  CHECK(rs.used_linear_solve);
  for (Eigen::Index i = 0; i < rs.size(); ++i) CHECK(std::isfinite(rs.reflectivity(i)));
}

TEST_CASE("singular points are marked invalid") {
  Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(2, 2);
  K(0, 0) = -2.0;
  K(1, 1) = cplx{1.0, 0.5};
  const NuclearHamiltonian h{K, 0.0, 1.0};
  const ReflectivitySpectrum rs = linear_solve_spectrum(h, DriveVector{Eigen::Vector2cd(1.0, 1.0)}, 0.0, detuning_grid(0.0, 4.0, 5));
  CHECK(rs.valid == std::vector<std::uint8_t>{1, 1, 0, 1, 1});
  CHECK(std::isnan(rs.reflectivity(2)));
  CHECK(feature_extract(rs).maxima.size() <= 1);
}

TEST_CASE("feature extraction") {
  SUBCASE("flat input has no peaks") {
    ReflectivitySpectrum rs;
    rs.detuning = detuning_grid(-10.0, 10.0, 201);
    rs.reflectivity = Eigen::VectorXd::Constant(201, 0.3);
    rs.amplitude = Eigen::VectorXcd::Constant(201, 0.3);
    rs.valid.assign(201, 1);
    const FeatureReport f = feature_extract(rs);
    CHECK(f.maxima.empty());
    CHECK_FALSE(f.fit.has_value());
  }
  SUBCASE("synthetic Lorentzian is recovered") {
    const Eigen::VectorXd x = detuning_grid(-100.0, 100.0, 801);
    const Eigen::VectorXd y = 0.2 + 0.7 / (1.0 + ((x.array() - 12.5) / 6.0).square());
    const LorentzianFit fit = fit_lorentzian(x, y);
    CHECK(fit.baseline == doctest::Approx(0.2).epsilon(1e-8));
    CHECK(fit.amplitude == doctest::Approx(0.7).epsilon(1e-8));
    CHECK(fit.center == doctest::Approx(12.5).epsilon(1e-8));
    CHECK(fit.half_width == doctest::Approx(6.0).epsilon(1e-8));
    CHECK(fit.r_squared > 0.999999);
  }
  SUBCASE("two peaks with a dip") {
    ReflectivitySpectrum rs;
    rs.detuning = detuning_grid(-100.0, 100.0, 801);
    const auto& x = rs.detuning.array();
    rs.reflectivity = 0.1 + 0.8 / (1.0 + ((x + 30.0) / 8.0).square()) + 0.2 / (1.0 + ((x - 40.0) / 5.0).square());
    rs.amplitude = rs.reflectivity.cast<cplx>();
    rs.valid.assign(801, 1);
    const FeatureReport f = feature_extract(rs);
    REQUIRE(f.maxima.size() == 2);
    CHECK(f.has_interior_dip());
    CHECK(rs.detuning(f.maxima[0]) == doctest::Approx(-30.0).epsilon(0.01));
    CHECK(rs.detuning(f.maxima[1]) == doctest::Approx(40.0).epsilon(0.01));
  }
}

TEST_CASE("trivial spectrum shows a second peak and a dip") {
  const ReflectivitySpectrum rs = reflectivity(paper_stack(2.8), at(2.4157), detuning_grid());
  const FeatureReport f = feature_extract(rs);
  CHECK(f.maxima.size() >= 2);
  CHECK(f.has_interior_dip());
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(detuning_grid(0.0, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(detuning_grid(1.0, 0.0, 10), ConfigError);
  CHECK_THROWS_AS(fit_lorentzian(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)), ContractError);
}

TEST_CASE("open: far-detuning limit approaches the electronic baseline within 1%") {
  for (double angle : {2.4067, 2.4157})
    for (double dv : {2.8, 4.9}) {
      const LayerStack s = paper_stack(dv);
      const ScatterContext ctx = at(angle);
      Eigen::VectorXd grid(2);
      grid << -1e3, 1e3;
      const ReflectivitySpectrum rs = reflectivity(s, ctx, grid);
      const double base = std::norm(rs.baseline);
      for (Eigen::Index i = 0; i < 2; ++i) {
        INFO("d_v = " << dv << " nm, angle = " << angle << " mrad, Delta = " << grid(i));
        CHECK(std::abs(rs.reflectivity(i) - base) <= 0.01 * base);
      }
    }
}
