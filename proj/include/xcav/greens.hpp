#pragma once

#include <vector>

#include "xcav/stack.hpp"
#include "xcav/units.hpp"

namespace xcav {

enum class Polarization { s, p };

/// Probe parameters. Wavevector quantities are in 1/nm.
struct ScatterContext {
  double energy_keV = 14.413;
  double angle_mrad = 2.4067;
  Polarization polarization = Polarization::s;
  /// Distance of the line source above the top surface (z_src = -offset).
  double source_offset_nm = 0.1;

  double k0() const { return wavenumber_per_nm(energy_keV); }
  double angle_rad() const { return angle_mrad * 1e-3; }
  double source_z() const { return -source_offset_nm; }
  /// In-plane wavenumber p_rho = n_top k cos(phi).
  cplx p_rho(const Material& superstrate) const;
  /// z-wavenumber in `layer` for incidence from `superstrate`.
  cplx kz(const Material& layer, const Material& superstrate) const;
  void validate() const;
};

/// z-wavenumber sqrt(eps k^2 - p^2) on the branch Im >= 0.
cplx kz_branch(cplx eps, double k0, cplx p_rho);
/// Same quantity written as k0 sqrt(eps - eps_top cos^2 phi) without the
/// cancellation of the difference of squares.
cplx kz_branch(cplx eps, cplx eps_top, double k0, double angle_rad);

/// One homogeneous region of the scattering problem: the superstrate,
/// each layer, the substrate.
struct Region {
  double z_ref;       // top interface (0 for the superstrate)
  double thickness;   // +inf for the bounding media
  cplx eps;
  cplx kz;
  cplx weight;        // 1 for s, 1/eps for p
};

/// Value of a solution stored as mantissa * exp(log_scale).
struct Scaled {
  cplx mantissa;
  double log_scale = 0.0;
  cplx value() const { return mantissa * std::exp(log_scale); }
};

/// Scalar Green's function of d/dz(g d/dz G) + g kz^2 G = -delta(z - z'),
/// outgoing in the superstrate and the substrate.
///
/// Built from the two homogeneous solutions psi_top (outgoing upward) and
/// psi_bot (outgoing downward), each propagated away from the boundary it
/// satisfies, with amplitudes renormalised per region and the running
/// scale kept as a logarithm:
///
///   G(z, z') = -psi_top(z<) psi_bot(z>) / W,   W = g (psi_top psi_bot' - psi_top' psi_bot).
///
/// In a homogeneous medium this is i exp(i kz |z - z'|) / (2 g kz).
class GreensFunction1D {
public:
  GreensFunction1D(const LayerStack& stack, const ScatterContext& ctx);

  cplx operator()(double z, double z_prime) const;

  /// Fresnel-like reflection amplitude of the bare stack, referenced to z = 0.
  cplx reflection() const;
  /// Transmitted amplitude at the bottom surface for unit incidence at z = 0.
  cplx transmission() const;

  /// B_1D(z) / B_in built from G(z, z_src). Equals exp(i kz0 z) + r exp(-i kz0 z)
  /// in the superstrate.
  cplx cavity_field(double z) const;

  /// B_cav(z_src) / B_in with the incident phase at z_src divided out.
  cplx electronic_reflectance() const;

  const std::vector<Region>& regions() const { return regions_; }
  std::size_t region_of(double z) const;
  cplx p_rho() const { return p_rho_; }
  cplx kz_top() const { return regions_.front().kz; }
  cplx weight_top() const { return regions_.front().weight; }
  double source_z() const { return z_src_; }
  double total_thickness() const { return total_; }

  Scaled psi_top(double z) const { return eval(top_, z); }
  Scaled psi_bot(double z) const { return eval(bot_, z); }

private:
  struct Coef {
    cplx a;  // coefficient of exp(+i kz (z - z_ref))
    cplx b;  // coefficient of exp(-i kz (z - z_ref))
    double log_scale = 0.0;
  };

  Scaled eval(const std::vector<Coef>& table, double z) const;
  void check_domain(double z) const;

  std::vector<Region> regions_;
  std::vector<Coef> top_;
  std::vector<Coef> bot_;
  cplx p_rho_;
  double total_ = 0.0;
  double z_src_ = 0.0;
};

inline cplx greens(const GreensFunction1D& g, double z, double z_prime) { return g(z, z_prime); }

/// Free-standing helpers mirroring the module operations.
cplx electronic_reflectance(const LayerStack& stack, const ScatterContext& ctx);

struct FieldSample {
  double z_nm;
  cplx value;
};
std::vector<FieldSample> cavity_field(const LayerStack& stack, const ScatterContext& ctx, double z_min, double z_max,
                                      double step);

/// Plane-wave field of the bare stack by Parratt's recursion: ratios of up-
/// to down-going amplitudes are accumulated from the substrate up, then the
/// down-going amplitudes are carried from the surface down. Shares no code
/// with GreensFunction1D.
class ParrattField {
public:
  ParrattField(const LayerStack& stack, const ScatterContext& ctx);

  cplx reflection() const { return r_; }
  /// Total field normalised to unit incident amplitude at z = 0.
  cplx operator()(double z) const;

private:
  struct Amp {
    double z_ref;
    double thickness;
    cplx kz;
    cplx down;   // at z_ref
    cplx ratio;  // up/down at z_ref
  };
  std::vector<Amp> amps_;
  cplx r_;
};

}  // namespace xcav
