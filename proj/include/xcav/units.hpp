#pragma once

#include <complex>
#include <numbers>

namespace xcav {

using cplx = std::complex<double>;

namespace si {
inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double hbar_eV = 6.582119569e-16;     // eV s
inline constexpr double c = 299792458.0;               // m/s
inline constexpr double mu0 = 1.25663706212e-6;        // N/A^2
inline constexpr double eV = 1.602176634e-19;          // J
inline constexpr double hc_eV_nm = 1239.841984;        // eV nm
}  // namespace si

/// Vacuum wavenumber in 1/nm for a photon energy given in keV.
inline double wavenumber_per_nm(double energy_keV) {
  return 2.0 * std::numbers::pi * energy_keV * 1e3 / si::hc_eV_nm;
}

}  // namespace xcav
