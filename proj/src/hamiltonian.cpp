#include "xcav/hamiltonian.hpp"

#include <cmath>

#include "xcav/error.hpp"

namespace xcav {

namespace {
constexpr cplx I{0.0, 1.0};
}

double coupling_constant(const NuclearParams& n, double layer_thickness_nm, double energy_keV) {
  const double areal_m2 = n.number_density_m3 * layer_thickness_nm * 1e-9;
  const double k_per_m = wavenumber_per_nm(energy_keV) * 1e9;
  const double m = n.dipole_strength;
  const double kappa_per_m = areal_m2 * si::mu0 * k_per_m * k_per_m * m * m / (si::hbar * n.gamma0_per_s);
  return kappa_per_m * 1e-9;
}

Eigen::VectorXd coupling_constants(const LayerStack& stack, const ScatterContext& ctx) {
  const auto M = static_cast<Eigen::Index>(stack.resonant_count());
  if (M == 0) throw ConfigError("stack has no resonant layers", "stack.core");
  Eigen::VectorXd kappa(M);
  for (Eigen::Index j = 0; j < M; ++j) {
    const Layer& l = stack.layers[stack.resonant_layers[static_cast<std::size_t>(j)]];
    kappa(j) = coupling_constant(nuclear_constants(l.material), l.thickness_nm, ctx.energy_keV);
  }
  return kappa;
}

NuclearHamiltonian build_hamiltonian(const LayerStack& stack, const GreensFunction1D& g, const ScatterContext& ctx,
                                     double detuning) {
  const Eigen::VectorXd kappa = coupling_constants(stack, ctx);
  const Eigen::Index M = kappa.size();
  const auto& z = stack.resonant_centers_nm;

  NuclearHamiltonian h;
  h.detuning = detuning;
  h.gamma0_eV = nuclear_constants(stack.layers[stack.resonant_layers.front()].material).gamma0_eV;
  h.matrix.resize(M, M);
  for (Eigen::Index j = 0; j < M; ++j) {
    for (Eigen::Index l = j; l < M; ++l) {
      const cplx c = std::sqrt(kappa(j) * kappa(l)) * g(z[static_cast<std::size_t>(j)], z[static_cast<std::size_t>(l)]);
      h.matrix(j, l) = c;
      h.matrix(l, j) = c;
    }
    h.matrix(j, j) += 0.5 * I;
  }
  return h;
}

NuclearHamiltonian build_hamiltonian(const LayerStack& stack, const ScatterContext& ctx, double detuning) {
  return build_hamiltonian(stack, GreensFunction1D(stack, ctx), ctx, detuning);
}

DriveVector rabi_vector(const LayerStack& stack, const GreensFunction1D& g, const ScatterContext& ctx) {
  const Eigen::VectorXd kappa = coupling_constants(stack, ctx);
  const cplx p_src = g.kz_top() * g.weight_top();
  const double zs = g.source_z();
  const cplx source = -2.0 * I * p_src * std::exp(I * g.kz_top() * zs);
  DriveVector d;
  d.omega.resize(kappa.size());
  for (Eigen::Index j = 0; j < kappa.size(); ++j) {
    const double zj = stack.resonant_centers_nm[static_cast<std::size_t>(j)];
    d.omega(j) = std::sqrt(kappa(j) / (2.0 * p_src)) * source * g(zj, zs);
  }
  return d;
}

DriveVector rabi_vector(const LayerStack& stack, const ScatterContext& ctx) {
  return rabi_vector(stack, GreensFunction1D(stack, ctx), ctx);
}

DriveVector rabi_vector_via_field(const LayerStack& stack, const ScatterContext& ctx) {
  const Eigen::VectorXd kappa = coupling_constants(stack, ctx);
  const ParrattField field(stack, ctx);
  const cplx eps_top = stack.superstrate.permittivity();
  const cplx kz0 = ctx.kz(stack.superstrate, stack.superstrate);
  const cplx p_src = ctx.polarization == Polarization::s ? kz0 : kz0 / eps_top;
  DriveVector d;
  d.omega.resize(kappa.size());
  for (Eigen::Index j = 0; j < kappa.size(); ++j)
    d.omega(j) = std::sqrt(kappa(j) / (2.0 * p_src)) * field(stack.resonant_centers_nm[static_cast<std::size_t>(j)]);
  return d;
}

cplx coupling_curve(const StackConfig& tmpl, const ScatterContext& ctx, double d_nm, const MaterialDatabase& db) {
  if (!(d_nm > 0.0)) throw ConfigError("spacer width must be positive", "d_nm");
  StackConfig c = tmpl;
  c.n_cavities = 2;
  c.d_v_nm = d_nm;
  const LayerStack s = build_stack(c, db);
  if (s.resonant_count() != 2) throw ConfigError("core must contain exactly one resonant layer", "stack.core");
  return build_hamiltonian(s, ctx).matrix(0, 1);
}

}  // namespace xcav
