#include "xcav/materials.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "xcav/error.hpp"

namespace xcav {

namespace detail {
extern const char* const builtin_materials_json;
}

using nlohmann::json;

void NuclearParams::resolve(std::optional<double> radiative_fraction_override) {
  if (!(transition_energy_keV > 0.0)) throw ConfigError("transition energy must be positive", "transition_energy_keV");
  if (!(lifetime_ns > 0.0)) throw ConfigError("lifetime must be positive", "lifetime_ns");
  if (!(internal_conversion >= 0.0)) throw ConfigError("internal conversion coefficient must be >= 0", "internal_conversion");
  if (!(number_density_m3 >= 0.0)) throw ConfigError("number density must be >= 0", "number_density_m3");

  gamma0_per_s = 1.0 / (lifetime_ns * 1e-9);
  gamma0_eV = si::hbar_eV * gamma0_per_s;
  omega0_per_s = transition_energy_keV * 1e3 / si::hbar_eV;
  radiative_fraction = radiative_fraction_override.value_or(1.0 / (1.0 + internal_conversion));
  if (!(radiative_fraction > 0.0 && radiative_fraction <= 1.0))
    throw ConfigError("radiative fraction must lie in (0, 1]", "radiative_fraction");

  // Magnetic-dipole emission rate: Gamma = mu0 omega^3 |m|^2 / (3 pi hbar c^3).
  const double gamma_rad = radiative_fraction * gamma0_per_s;
  const double w3 = omega0_per_s * omega0_per_s * omega0_per_s;
  dipole_strength = std::sqrt(3.0 * std::numbers::pi * si::hbar * si::c * si::c * si::c * gamma_rad / (si::mu0 * w3));
}

double NuclearParams::radiative_rate_from_dipole() const {
  const double w3 = omega0_per_s * omega0_per_s * omega0_per_s;
  return si::mu0 * w3 * dipole_strength * dipole_strength / (3.0 * std::numbers::pi * si::hbar * si::c * si::c * si::c);
}

namespace {

template <typename T>
T require(const json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key)) throw ConfigError(ctx + ": missing key '" + key + "'", ctx + "." + key);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(ctx + ": key '" + std::string(key) + "' has the wrong type", ctx + "." + key);
  }
}

Material material_from_json(const json& j, std::size_t index) {
  const std::string ctx = "materials[" + std::to_string(index) + "]";
  Material m;
  m.name = require<std::string>(j, "name", ctx);
  m.energy_keV = require<double>(j, "energy_keV", ctx);
  m.delta = require<double>(j, "delta", ctx);
  m.beta = require<double>(j, "beta", ctx);
  if (j.contains("nuclear")) {
    const json& n = j.at("nuclear");
    const std::string nctx = ctx + ".nuclear";
    NuclearParams p;
    p.transition_energy_keV = require<double>(n, "transition_energy_keV", nctx);
    p.lifetime_ns = require<double>(n, "lifetime_ns", nctx);
    p.internal_conversion = require<double>(n, "internal_conversion", nctx);
    p.number_density_m3 = require<double>(n, "number_density_m3", nctx);
    std::optional<double> frac;
    if (n.contains("radiative_fraction")) frac = require<double>(n, "radiative_fraction", nctx);
    p.resolve(frac);
    m.nuclear = p;
  }
  return m;
}

}  // namespace

std::vector<std::string> MaterialDatabase::add(Material m) {
  std::vector<std::string> warn;
  if (m.name.empty()) throw ConfigError("material name must not be empty", "name");
  if (!(m.beta >= 0.0)) throw ConfigError("material '" + m.name + "': beta must be >= 0 (passive media only)", "beta");
  if (!(m.delta >= 0.0 && m.delta < 1e-3))
    throw ConfigError("material '" + m.name + "': delta must lie in [0, 1e-3)", "delta");
  if (std::abs(m.refractive_index() - 1.0) >= 1e-4)
    warn.push_back("material '" + m.name + "': |n - 1| >= 1e-4, outside the hard x-ray regime");
  materials_[m.name] = std::move(m);
  warnings_.insert(warnings_.end(), warn.begin(), warn.end());
  return warn;
}

const Material& MaterialDatabase::at(const std::string& name) const {
  if (auto it = materials_.find(name); it != materials_.end()) return it->second;
  if (auto a = aliases_.find(name); a != aliases_.end()) return materials_.at(a->second);
  throw LookupError("unknown material '" + name + "'");
}

bool MaterialDatabase::contains(const std::string& name) const {
  return materials_.count(name) > 0 || aliases_.count(name) > 0;
}

std::vector<std::string> MaterialDatabase::names() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : materials_) out.push_back(k);
  return out;
}

MaterialDatabase MaterialDatabase::parse(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what(), "materials");
  }
  if (!j.contains("materials") || !j.at("materials").is_array())
    throw ConfigError(origin + ": expected a 'materials' array", "materials");

  MaterialDatabase db;
  std::size_t i = 0;
  for (const auto& entry : j.at("materials")) {
    Material m = material_from_json(entry, i);
    const std::string name = m.name;
    db.add(std::move(m));
    if (entry.contains("aliases")) {
      for (const auto& a : entry.at("aliases")) db.aliases_[a.get<std::string>()] = name;
    }
    ++i;
  }
  return db;
}

MaterialDatabase MaterialDatabase::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open materials file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

const MaterialDatabase& MaterialDatabase::builtin() {
  static const MaterialDatabase db = parse(detail::builtin_materials_json, "<builtin>");
  return db;
}

std::string MaterialDatabase::to_json() const {
  json arr = json::array();
  for (const auto& [name, m] : materials_) {
    json e{{"name", name}, {"energy_keV", m.energy_keV}, {"delta", m.delta}, {"beta", m.beta}};
    json al = json::array();
    for (const auto& [a, target] : aliases_)
      if (target == name) al.push_back(a);
    if (!al.empty()) e["aliases"] = al;
    if (m.nuclear) {
      const auto& n = *m.nuclear;
      e["nuclear"] = {{"transition_energy_keV", n.transition_energy_keV},
                      {"lifetime_ns", n.lifetime_ns},
                      {"internal_conversion", n.internal_conversion},
                      {"number_density_m3", n.number_density_m3},
                      {"radiative_fraction", n.radiative_fraction}};
    }
    arr.push_back(std::move(e));
  }
  return json{{"format", "xcav-materials/1"}, {"materials", arr}}.dump(2);
}

cplx refractive_index(const MaterialDatabase& db, const std::string& name) {
  return db.at(name).refractive_index();
}

const NuclearParams& nuclear_constants(const Material& m) {
  if (!m.nuclear) throw ContractError("material '" + m.name + "' has no nuclear resonance");
  return *m.nuclear;
}

}  // namespace xcav
