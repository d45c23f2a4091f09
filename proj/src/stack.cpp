#include "xcav/stack.hpp"

#include <cmath>

#include "xcav/error.hpp"

namespace xcav {

void StackConfig::validate() const {
  if (n_cavities < 1) throw ConfigError("n_cavities must be >= 1", "stack.n_cavities");
  if (core.empty()) throw ConfigError("core must contain at least one layer", "stack.core");
  for (std::size_t i = 0; i < core.size(); ++i) {
    if (!(core[i].thickness_nm > 0.0))
      throw ConfigError("core layer thickness must be positive", "stack.core[" + std::to_string(i) + "].thickness_nm");
  }
  if (!(cap_thickness_nm > 0.0)) throw ConfigError("cap thickness must be positive", "stack.cap_thickness_nm");
  if (n_cavities > 1) {
    if (!(d_v_nm > 0.0)) throw ConfigError("d_v must be positive", "stack.d_v_nm");
    if (n_cavities > 2 && !(d_w_nm > 0.0)) throw ConfigError("d_w must be positive", "stack.d_w_nm");
  }
}

double analytic_thickness_nm(const StackConfig& c) {
  double core = 0.0;
  for (const auto& l : c.core) core += l.thickness_nm;
  const int spacers = c.n_cavities - 1;
  const int nv = (spacers + 1) / 2;
  const int nw = spacers / 2;
  return 2.0 * c.cap_thickness_nm + c.n_cavities * core + nv * c.d_v_nm + nw * c.d_w_nm;
}

LayerStack LayerStack::from_layers(Material superstrate, std::vector<std::pair<Material, double>> layers,
                                   Material substrate) {
  LayerStack s;
  s.superstrate = std::move(superstrate);
  s.substrate = std::move(substrate);
  double z = 0.0;
  for (auto& [m, t] : layers) {
    if (!(t > 0.0)) throw ConfigError("layer '" + m.name + "' has non-positive thickness", "thickness_nm");
    Layer l{std::move(m), t, z, z + t};
    z = l.z_bottom_nm;
    if (l.material.is_resonant()) {
      s.resonant_layers.push_back(s.layers.size());
      s.resonant_centers_nm.push_back(0.5 * (l.z_top_nm + l.z_bottom_nm));
    }
    s.layers.push_back(std::move(l));
  }
  return s;
}

LayerStack build_stack(const StackConfig& c, const MaterialDatabase& db) {
  c.validate();
  std::vector<std::pair<Material, double>> seq;
  seq.emplace_back(db.at(c.cap_material), c.cap_thickness_nm);
  for (int i = 0; i < c.n_cavities; ++i) {
    for (const auto& l : c.core) seq.emplace_back(db.at(l.material), l.thickness_nm);
    if (i + 1 < c.n_cavities) seq.emplace_back(db.at(c.spacer_material), i % 2 == 0 ? c.d_v_nm : c.d_w_nm);
  }
  seq.emplace_back(db.at(c.cap_material), c.cap_thickness_nm);
  return LayerStack::from_layers(db.at(c.superstrate), std::move(seq), db.at(c.substrate));
}

bool mirror_check(const LayerStack& s) {
  if (s.superstrate.name != s.substrate.name) return false;
  const std::size_t n = s.layers.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    const Layer& a = s.layers[i];
    const Layer& b = s.layers[n - 1 - i];
    if (a.material.name != b.material.name) return false;
    if (std::abs(a.thickness_nm - b.thickness_nm) > 1e-12 * std::max(1.0, a.thickness_nm)) return false;
  }
  return true;
}

}  // namespace xcav
