#pragma once

#include <optional>
#include <string>
#include <vector>

#include "xcav/greens.hpp"
#include "xcav/stack.hpp"

namespace xcav {

struct GridSpec {
  double min = 0.0;
  double max = 0.0;
  int points = 1;

  std::vector<double> values() const;
};

/// Everything a CLI run needs. Physical keys in the JSON form carry their
/// unit as a suffix (_nm, _mrad, _keV, _gamma0).
struct RunConfig {
  std::optional<std::string> materials_path;
  std::optional<double> radiative_fraction;  // overrides every resonant material
  StackConfig stack;
  ScatterContext context;

  GridSpec phase_d_v{2.0, 7.0, 20};
  GridSpec phase_d_w{2.0, 7.0, 20};
  GridSpec dv_sweep{1.75, 7.0, 100};
  GridSpec detuning{-200.0, 200.0, 4001};
  double field_step_nm = 0.5;
  double field_margin_nm = 10.0;

  int n_k = 2048;
  int max_layer_distance = 1;
  double gap_tolerance = 1e-3;

  unsigned threads = 0;
};

/// Parses the JSON form. Unknown keys and wrong types throw ConfigError
/// naming the offending field.
RunConfig parse_run_config(const std::string& json_text, const std::string& origin = "<string>");
RunConfig load_run_config(const std::string& path);
std::string to_json(const RunConfig& cfg);

struct Diagnostic {
  enum class Level { warning, error } level;
  std::string field;
  std::string message;
};

struct ValidationReport {
  std::vector<Diagnostic> items;

  bool ok() const;
  std::string to_json() const;
};

/// Dry-run check of ranges, material references and files. Never throws for
/// bad input; everything ends up in the report.
ValidationReport validate(const RunConfig& cfg);

/// Material database for a run: the built-in one or the configured file,
/// with the radiative-fraction override applied.
MaterialDatabase resolve_materials(const RunConfig& cfg);

}  // namespace xcav
