#pragma once

#include <string>
#include <vector>

#include "xcav/materials.hpp"

namespace xcav {

struct LayerSpec {
  std::string material;
  double thickness_nm = 0.0;
};

/// Compact description of N stacked single-layer cavities.
///
/// Layout from the top surface down:
///   cap | core_1 | spacer(d_v) | core_2 | spacer(d_w) | core_3 | spacer(d_v) | ... | core_N | cap
/// so that cavities (1,2), (3,4), ... share the d_v spacer and form the
/// unit cells of the chain.
struct StackConfig {
  int n_cavities = 10;
  std::vector<LayerSpec> core{{"C", 19.5}, {"Fe57", 1.0}, {"C", 19.5}};
  std::string cap_material = "Pt";
  double cap_thickness_nm = 2.5;
  std::string spacer_material = "Pt";
  double d_v_nm = 4.9;
  double d_w_nm = 3.5;
  std::string superstrate = "vacuum";
  std::string substrate = "vacuum";

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct Layer {
  Material material;
  double thickness_nm = 0.0;
  double z_top_nm = 0.0;
  double z_bottom_nm = 0.0;
};

/// Resolved geometry; z increases downward from the top surface at z = 0.
struct LayerStack {
  Material superstrate;
  Material substrate;
  std::vector<Layer> layers;
  std::vector<std::size_t> resonant_layers;  // indices into `layers`
  std::vector<double> resonant_centers_nm;   // midplanes z_j, strictly increasing

  std::size_t resonant_count() const { return resonant_layers.size(); }
  double total_thickness_nm() const { return layers.empty() ? 0.0 : layers.back().z_bottom_nm; }

  /// Layers must be given top to bottom; coordinates are recomputed.
  static LayerStack from_layers(Material superstrate, std::vector<std::pair<Material, double>> layers,
                                Material substrate);
};

LayerStack build_stack(const StackConfig& config, const MaterialDatabase& db = MaterialDatabase::builtin());

/// True iff superstrate/layers/substrate read the same from either end.
bool mirror_check(const LayerStack& stack);

/// Closed-form total thickness 2 cap + n core + sum of spacers.
double analytic_thickness_nm(const StackConfig& config);

}  // namespace xcav
