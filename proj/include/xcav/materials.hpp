#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xcav/units.hpp"

namespace xcav {

/// Nuclear transition data of a Mössbauer isotope.
///
/// The stored inputs are the ones found in nuclear data tables (transition
/// energy, mean lifetime, internal conversion coefficient, number density);
/// everything else is derived on construction.
struct NuclearParams {
  double transition_energy_keV = 0.0;
  double lifetime_ns = 0.0;
  double internal_conversion = 0.0;   // alpha
  double number_density_m3 = 0.0;     // nuclei per m^3 of the resonant layer

  // derived
  double gamma0_eV = 0.0;             // total natural linewidth hbar/tau
  double gamma0_per_s = 0.0;          // 1/tau
  double omega0_per_s = 0.0;          // transition angular frequency
  double radiative_fraction = 0.0;    // 1/(1+alpha) unless overridden
  double dipole_strength = 0.0;       // |m| in A m^2, calibrated to the radiative width

  /// Nuclei per nm^2 for a layer of the given thickness.
  double areal_density_per_nm2(double thickness_nm) const {
    return number_density_m3 * thickness_nm * 1e-27;
  }

  /// Free-space magnetic-dipole decay rate implied by `dipole_strength` (1/s).
  double radiative_rate_from_dipole() const;

  /// Fills the derived fields. `radiative_fraction_override` replaces 1/(1+alpha)
  /// when set.
  void resolve(std::optional<double> radiative_fraction_override = std::nullopt);
};

struct Material {
  std::string name;
  double energy_keV = 0.0;
  double delta = 0.0;
  double beta = 0.0;
  std::optional<NuclearParams> nuclear;

  bool is_resonant() const { return nuclear.has_value(); }
  cplx refractive_index() const { return {1.0 - delta, beta}; }
  cplx permittivity() const {
    const cplx n = refractive_index();
    return n * n;
  }
};

/// Registry of materials resolved at one working photon energy.
class MaterialDatabase {
public:
  MaterialDatabase() = default;

  /// The database compiled into the library (Henke tabulation at 14.413 keV).
  static const MaterialDatabase& builtin();

  /// Reads a JSON materials file. Throws ConfigError / IoError.
  static MaterialDatabase load(const std::filesystem::path& path);
  static MaterialDatabase parse(const std::string& json_text, const std::string& origin = "<string>");

  /// Adds or replaces a material. Validates the invariants and returns
  /// human-readable warnings for soft violations.
  std::vector<std::string> add(Material m);

  const Material& at(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::vector<std::string> names() const;
  const std::vector<std::string>& warnings() const { return warnings_; }

  std::string to_json() const;

private:
  std::map<std::string, Material> materials_;
  std::map<std::string, std::string> aliases_;
  std::vector<std::string> warnings_;
};

/// 1 - delta + i beta. Throws LookupError for unknown names.
cplx refractive_index(const MaterialDatabase& db, const std::string& name);
inline cplx refractive_index(const Material& m) { return m.refractive_index(); }

/// Resolved nuclear constants. Throws ContractError for non-resonant materials.
const NuclearParams& nuclear_constants(const Material& m);

}  // namespace xcav
