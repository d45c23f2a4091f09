#include "xcav/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "xcav/error.hpp"

namespace xcav {

using json = nlohmann::json;

namespace {

// Reads one JSON object, remembering which keys were consumed so that
// leftovers (typos, missing unit suffixes) can be reported.
class Reader {
public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object", path_);
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(field(key) + " has the wrong type", field(key));
    }
  }

  template <typename T>
  void require(const char* key, T& out) {
    if (!j_.contains(key)) throw ConfigError("missing key " + field(key), field(key));
    get(key, out);
  }

  template <typename T>
  void get(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return;
    T v{};
    get(key, v);
    out = v;
  }

  std::optional<Reader> child(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    return Reader(j_.at(key), field(key));
  }

  const json* raw(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError("unknown key " + field(k.c_str()), field(k.c_str()));
  }

  std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

private:
  std::string where() const { return path_.empty() ? "config" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_grid(Reader& r, const char* lo, const char* hi, const char* n, GridSpec& g) {
  r.get(lo, g.min);
  r.get(hi, g.max);
  r.get(n, g.points);
}

Polarization parse_polarization(const std::string& s, const std::string& field) {
  if (s == "s") return Polarization::s;
  if (s == "p") return Polarization::p;
  throw ConfigError("polarization must be \"s\" or \"p\"", field);
}

}  // namespace

std::vector<double> GridSpec::values() const {
  if (points < 1) throw ConfigError("grid needs at least one point", "points");
  if (points == 1) return {min};
  if (!(max >= min)) throw ConfigError("grid maximum is below its minimum", "max");
  std::vector<double> v(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) v[static_cast<std::size_t>(i)] = min + (max - min) * i / (points - 1);
  return v;
}

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what(), "");
  }
  RunConfig c;
  Reader root(j, "");
  root.get("materials_file", c.materials_path);
  int threads = 0;
  root.get("threads", threads);
  if (threads < 0) throw ConfigError("threads must be >= 0", "threads");
  c.threads = static_cast<unsigned>(threads);

  if (auto n = root.child("nuclear")) {
    n->get("radiative_fraction", c.radiative_fraction);
    n->finish();
  }

  if (auto s = root.child("stack")) {
    StackConfig& st = c.stack;
    s->get("n_cavities", st.n_cavities);
    s->get("cap_material", st.cap_material);
    s->get("cap_thickness_nm", st.cap_thickness_nm);
    s->get("spacer_material", st.spacer_material);
    s->get("d_v_nm", st.d_v_nm);
    s->get("d_w_nm", st.d_w_nm);
    s->get("superstrate", st.superstrate);
    s->get("substrate", st.substrate);
    if (const json* core = s->raw("core")) {
      if (!core->is_array()) throw ConfigError("stack.core must be an array", "stack.core");
      st.core.clear();
      for (std::size_t i = 0; i < core->size(); ++i) {
        Reader l((*core)[i], "stack.core[" + std::to_string(i) + "]");
        LayerSpec spec;
        l.require("material", spec.material);
        l.require("thickness_nm", spec.thickness_nm);
        l.finish();
        st.core.push_back(spec);
      }
    }
    s->finish();
  }

  if (auto x = root.child("context")) {
    x->get("energy_keV", c.context.energy_keV);
    x->get("angle_mrad", c.context.angle_mrad);
    x->get("source_offset_nm", c.context.source_offset_nm);
    std::string pol = c.context.polarization == Polarization::s ? "s" : "p";
    x->get("polarization", pol);
    c.context.polarization = parse_polarization(pol, x->field("polarization"));
    x->finish();
  }

  if (auto p = root.child("phase_diagram")) {
    read_grid(*p, "d_v_min_nm", "d_v_max_nm", "d_v_points", c.phase_d_v);
    read_grid(*p, "d_w_min_nm", "d_w_max_nm", "d_w_points", c.phase_d_w);
    p->finish();
  }
  if (auto d = root.child("dv_sweep")) {
    read_grid(*d, "d_v_min_nm", "d_v_max_nm", "points", c.dv_sweep);
    d->finish();
  }
  if (auto r = root.child("reflectivity")) {
    read_grid(*r, "detuning_min_gamma0", "detuning_max_gamma0", "points", c.detuning);
    r->finish();
  }
  if (auto f = root.child("field")) {
    f->get("step_nm", c.field_step_nm);
    f->get("margin_nm", c.field_margin_nm);
    f->finish();
  }
  if (auto w = root.child("winding")) {
    w->get("n_k", c.n_k);
    w->get("max_layer_distance", c.max_layer_distance);
    w->get("gap_tolerance", c.gap_tolerance);
    w->finish();
  }
  root.finish();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path);
}

std::string to_json(const RunConfig& c) {
  json j;
  j["materials_file"] = c.materials_path ? json(*c.materials_path) : json(nullptr);
  j["nuclear"] = {{"radiative_fraction", c.radiative_fraction ? json(*c.radiative_fraction) : json(nullptr)}};
  json core = json::array();
  for (const auto& l : c.stack.core) core.push_back({{"material", l.material}, {"thickness_nm", l.thickness_nm}});
  j["stack"] = {{"n_cavities", c.stack.n_cavities},
                {"core", core},
                {"cap_material", c.stack.cap_material},
                {"cap_thickness_nm", c.stack.cap_thickness_nm},
                {"spacer_material", c.stack.spacer_material},
                {"d_v_nm", c.stack.d_v_nm},
                {"d_w_nm", c.stack.d_w_nm},
                {"superstrate", c.stack.superstrate},
                {"substrate", c.stack.substrate}};
  j["context"] = {{"energy_keV", c.context.energy_keV},
                  {"angle_mrad", c.context.angle_mrad},
                  {"polarization", c.context.polarization == Polarization::s ? "s" : "p"},
                  {"source_offset_nm", c.context.source_offset_nm}};
  j["phase_diagram"] = {{"d_v_min_nm", c.phase_d_v.min}, {"d_v_max_nm", c.phase_d_v.max},
                        {"d_v_points", c.phase_d_v.points}, {"d_w_min_nm", c.phase_d_w.min},
                        {"d_w_max_nm", c.phase_d_w.max}, {"d_w_points", c.phase_d_w.points}};
  j["dv_sweep"] = {{"d_v_min_nm", c.dv_sweep.min}, {"d_v_max_nm", c.dv_sweep.max}, {"points", c.dv_sweep.points}};
  j["reflectivity"] = {{"detuning_min_gamma0", c.detuning.min},
                       {"detuning_max_gamma0", c.detuning.max},
                       {"points", c.detuning.points}};
  j["field"] = {{"step_nm", c.field_step_nm}, {"margin_nm", c.field_margin_nm}};
  j["winding"] = {{"n_k", c.n_k}, {"max_layer_distance", c.max_layer_distance}, {"gap_tolerance", c.gap_tolerance}};
  j["threads"] = c.threads;
  return j.dump(2);
}

MaterialDatabase resolve_materials(const RunConfig& c) {
  MaterialDatabase db = c.materials_path ? MaterialDatabase::load(*c.materials_path) : MaterialDatabase::builtin();
  if (c.radiative_fraction) {
    for (const auto& name : db.names()) {
      Material m = db.at(name);
      if (!m.nuclear || m.name != name) continue;
      m.nuclear->resolve(c.radiative_fraction);
      db.add(std::move(m));
    }
  }
  return db;
}

bool ValidationReport::ok() const {
  for (const auto& d : items)
    if (d.level == Diagnostic::Level::error) return false;
  return true;
}

std::string ValidationReport::to_json() const {
  json j;
  j["ok"] = ok();
  j["diagnostics"] = json::array();
  for (const auto& d : items)
    j["diagnostics"].push_back({{"level", d.level == Diagnostic::Level::error ? "error" : "warning"},
                                {"field", d.field},
                                {"message", d.message}});
  return j.dump(2);
}

ValidationReport validate(const RunConfig& c) {
  ValidationReport rep;
  auto error = [&](std::string f, std::string m) {
    rep.items.push_back({Diagnostic::Level::error, std::move(f), std::move(m)});
  };
  auto warn = [&](std::string f, std::string m) {
    rep.items.push_back({Diagnostic::Level::warning, std::move(f), std::move(m)});
  };

  std::optional<MaterialDatabase> db;
  if (c.materials_path && !std::filesystem::exists(*c.materials_path)) {
    error("materials_file", "materials file '" + *c.materials_path + "' does not exist");
  } else {
    try {
      db = resolve_materials(c);
      for (const auto& w : db->warnings()) warn("materials_file", w);
    } catch (const ConfigError& e) {
      error(e.field().empty() ? "materials_file" : e.field(), e.what());
    } catch (const Error& e) {
      error("materials_file", e.what());
    }
  }

  try {
    c.stack.validate();
  } catch (const ConfigError& e) {
    error(e.field(), e.what());
  }
  if (db) {
    auto check = [&](const std::string& name, const std::string& field) {
      if (!db->contains(name)) error(field, "unknown material '" + name + "'");
    };
    check(c.stack.cap_material, "stack.cap_material");
    check(c.stack.spacer_material, "stack.spacer_material");
    check(c.stack.superstrate, "stack.superstrate");
    check(c.stack.substrate, "stack.substrate");
    int resonant = 0;
    for (std::size_t i = 0; i < c.stack.core.size(); ++i) {
      const std::string f = "stack.core[" + std::to_string(i) + "].material";
      check(c.stack.core[i].material, f);
      if (db->contains(c.stack.core[i].material) && db->at(c.stack.core[i].material).is_resonant()) ++resonant;
    }
    if (resonant == 0) error("stack.core", "core contains no resonant layer");
    if (resonant > 1) warn("stack.core", "core contains more than one resonant layer; sites no longer pair into SSH cells");
  }

  const double min_spacer = 2.0;
  if (c.stack.n_cavities > 1 && c.stack.d_v_nm > 0.0 && c.stack.d_v_nm < min_spacer)
    warn("stack.d_v_nm", "spacer below 2 nm: beyond-nearest-neighbour couplings become strong");
  if (c.stack.n_cavities > 2 && c.stack.d_w_nm > 0.0 && c.stack.d_w_nm < min_spacer)
    warn("stack.d_w_nm", "spacer below 2 nm: beyond-nearest-neighbour couplings become strong");
  if (c.stack.n_cavities < 8) warn("stack.n_cavities", "fewer than 8 cavities: winding tasks cannot extract a bulk");

  try {
    c.context.validate();
  } catch (const ConfigError& e) {
    error(e.field(), e.what());
  } catch (const ContractError& e) {
    error("context.source_offset_nm", e.what());
  }

  auto grid = [&](const GridSpec& g, const std::string& field, int min_points) {
    if (g.points < min_points) error(field + ".points", "needs at least " + std::to_string(min_points) + " points");
    if (g.points > 1 && !(g.max > g.min)) error(field, "maximum must exceed minimum");
  };
  grid(c.phase_d_v, "phase_diagram.d_v", 1);
  grid(c.phase_d_w, "phase_diagram.d_w", 1);
  grid(c.dv_sweep, "dv_sweep", 1);
  grid(c.detuning, "reflectivity.detuning", 2);
  for (const auto* g : {&c.phase_d_v, &c.phase_d_w}) {
    if (g->min <= 0.0) error("phase_diagram", "spacer widths must be positive");
    else if (g->min < min_spacer || g->max > 7.0)
      warn("phase_diagram", "grid leaves [2, 7] nm, where the two-band picture is not expected to hold");
  }
  if (c.dv_sweep.min <= 0.0) error("dv_sweep.d_v_min_nm", "spacer widths must be positive");
  if (!(c.field_step_nm > 0.0)) error("field.step_nm", "must be positive");
  if (!(c.field_margin_nm >= 0.0)) error("field.margin_nm", "must be non-negative");
  if (c.n_k < 4) error("winding.n_k", "needs at least 4 points");
  else if (c.n_k < 512) warn("winding.n_k", "fewer than 512 k-points; winding may be under-resolved");
  if (c.max_layer_distance < 1) error("winding.max_layer_distance", "must be >= 1");
  if (!(c.gap_tolerance > 0.0)) error("winding.gap_tolerance", "must be positive");
  return rep;
}

}  // namespace xcav
