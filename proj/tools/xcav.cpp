// xcav: command-line front end for the stacked-cavity simulator.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "xcav/config.hpp"
#include "xcav/error.hpp"
#include "xcav/parallel.hpp"
#include "xcav/reflectivity.hpp"
#include "xcav/spectral.hpp"
#include "xcav/topology.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace xcav;

namespace {

enum Exit { ok = 0, config_error = 2, numeric_error = 3, io_error = 4 };

// Shortest representation that reads back to the same double.
std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json cjson(cplx v) { return json::array({v.real(), v.imag()}); }

void write_atomic(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path.string() + "'");
  }
}

class Csv {
public:
  Csv(const std::string& task, const std::string& columns) {
    out_ << "# xcav " << XCAV_VERSION << " task=" << task << "\n" << columns << "\n";
  }
  template <typename... T>
  void row(const T&... cells) {
    std::size_t i = 0;
    ((out_ << (i++ ? "," : "") << cell(cells)), ...);
    out_ << "\n";
  }
  std::string str() const { return out_.str(); }

private:
  static std::string cell(double v) { return num(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(long v) { return std::to_string(v); }
  static std::string cell(long long v) { return std::to_string(v); }
  static std::string cell(unsigned long v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }
  std::ostringstream out_;
};

struct Options {
  std::string config_path;
  std::string materials_path;
  std::string out_dir = ".";
  std::string format = "csv";
  int threads = -1;
  double dv = 0, dw = 0, angle = 0;
  int n_cavities = 0;
};

struct Run {
  RunConfig cfg;
  MaterialDatabase db;
  fs::path out;
  bool csv = true;

  LayerStack stack() const { return build_stack(cfg.stack, db); }
  void emit(const std::string& name, const std::string& content) const { write_atomic(out / name, content); }
  void emit_json(const std::string& name, const json& j) const { emit(name, j.dump(2) + "\n"); }
};

json meta(const Run& r, const std::string& task) {
  return {{"tool", "xcav"}, {"version", XCAV_VERSION}, {"task", task}, {"config", json::parse(to_json(r.cfg))}};
}

void task_greens(const Run& r) {
  const LayerStack s = r.stack();
  const GreensFunction1D g(s, r.cfg.context);
  const auto& z = s.resonant_centers_nm;
  const auto field = cavity_field(s, r.cfg.context, -r.cfg.field_margin_nm,
                                  s.total_thickness_nm() + r.cfg.field_margin_nm, r.cfg.field_step_nm);
  if (r.csv) {
    Csv gm("greens-dump", "row,col,re,im");
    for (std::size_t j = 0; j < z.size(); ++j)
      for (std::size_t l = 0; l < z.size(); ++l) {
        const cplx v = g(z[j], z[l]);
        gm.row(j + 1, l + 1, v.real(), v.imag());
      }
    Csv f("greens-dump", "z_nm,re,im");
    for (const auto& p : field) f.row(p.z_nm, p.value.real(), p.value.imag());
    r.emit("greens.csv", gm.str());
    r.emit("field.csv", f.str());
  } else {
    json j = meta(r, "greens-dump");
    j["z_nm"] = z;
    j["greens"] = json::array();
    for (double zj : z) {
      json row = json::array();
      for (double zl : z) row.push_back(cjson(g(zj, zl)));
      j["greens"].push_back(row);
    }
    j["field"] = json::array();
    for (const auto& p : field) j["field"].push_back({p.z_nm, p.value.real(), p.value.imag()});
    j["reflection"] = cjson(g.reflection());
    r.emit_json("greens.json", j);
  }
}

void task_hamiltonian(const Run& r) {
  const LayerStack s = r.stack();
  const GreensFunction1D g(s, r.cfg.context);
  const NuclearHamiltonian h = build_hamiltonian(s, g, r.cfg.context);
  const DriveVector d = rabi_vector(s, g, r.cfg.context);
  if (r.csv) {
    Csv m("hamiltonian", "row,col,re,im,abs");
    for (Eigen::Index j = 0; j < h.size(); ++j)
      for (Eigen::Index l = 0; l < h.size(); ++l)
        m.row(j + 1, l + 1, h.matrix(j, l).real(), h.matrix(j, l).imag(), std::abs(h.matrix(j, l)));
    Csv o("hamiltonian", "layer,z_nm,re,im,abs");
    for (Eigen::Index j = 0; j < d.omega.size(); ++j)
      o.row(j + 1, s.resonant_centers_nm[static_cast<std::size_t>(j)], d.omega(j).real(), d.omega(j).imag(),
            std::abs(d.omega(j)));
    r.emit("hamiltonian.csv", m.str());
    r.emit("rabi.csv", o.str());
  } else {
    json j = meta(r, "hamiltonian");
    j["gamma0_eV"] = h.gamma0_eV;
    j["matrix"] = json::array();
    j["abs"] = json::array();
    for (Eigen::Index a = 0; a < h.size(); ++a) {
      json row = json::array(), arow = json::array();
      for (Eigen::Index b = 0; b < h.size(); ++b) {
        row.push_back(cjson(h.matrix(a, b)));
        arow.push_back(std::abs(h.matrix(a, b)));
      }
      j["matrix"].push_back(row);
      j["abs"].push_back(arow);
    }
    j["rabi"] = json::array();
    for (Eigen::Index a = 0; a < d.omega.size(); ++a) j["rabi"].push_back(cjson(d.omega(a)));
    r.emit_json("hamiltonian.json", j);
  }
}

void task_eigen(const Run& r) {
  const LayerStack s = r.stack();
  const GreensFunction1D g(s, r.cfg.context);
  const NuclearHamiltonian h = build_hamiltonian(s, g, r.cfg.context);
  const EigenSystem es = eigensystem(h);
  const EdgeReport er = edge_report(es, h);
  const Eigen::VectorXcd oe = quasi_eigen_rabi(es, rabi_vector(s, g, r.cfg.context));
  if (r.csv) {
    Csv e("eigen", "index,re,im,edge_weight,rabi_eig_abs");
    for (Eigen::Index j = 0; j < es.size(); ++j)
      e.row(j + 1, es.eigenvalues(j).real(), es.eigenvalues(j).imag(), er.edge_weight(j), std::abs(oe(j)));
    Csv w("eigen", "state,layer,weight");
    for (Eigen::Index j = 0; j < es.size(); ++j)
      for (Eigen::Index l = 0; l < es.size(); ++l) w.row(j + 1, l + 1, er.weights(j, l));
    r.emit("eigenvalues.csv", e.str());
    r.emit("weights.csv", w.str());
  } else {
    json j = meta(r, "eigen");
    j["eigenvalues"] = json::array();
    j["weights"] = json::array();
    for (Eigen::Index a = 0; a < es.size(); ++a) {
      j["eigenvalues"].push_back(cjson(es.eigenvalues(a)));
      json wr = json::array();
      for (Eigen::Index l = 0; l < es.size(); ++l) wr.push_back(er.weights(a, l));
      j["weights"].push_back(wr);
    }
    j["edge_weight"] = std::vector<double>(er.edge_weight.data(), er.edge_weight.data() + er.edge_weight.size());
    j["edge_states"] = er.edge_states();
    j["mid_gap"] = er.mid_gap;
    j["exceptional"] = es.exceptional;
    j["max_residual"] = es.max_residual;
    r.emit_json("eigen.json", j);
  }
}

PhaseDiagramOptions phase_options(const RunConfig& c) {
  PhaseDiagramOptions o;
  o.winding.n_k = c.n_k;
  o.winding.gap_tolerance = c.gap_tolerance;
  o.bulk.max_layer_distance = c.max_layer_distance;
  o.threads = c.threads;
  return o;
}

json winding_json(const WindingResult& w) {
  return {{"raw", cjson(w.raw)},         {"raw_upper_band", cjson(w.raw_upper)}, {"value", w.value},
          {"ill_defined", w.ill_defined}, {"min_gap", w.min_gap},                 {"model_norm", w.model_norm}};
}

void task_winding(const Run& r) {
  const NuclearHamiltonian h = build_hamiltonian(r.stack(), r.cfg.context);
  const auto opts = phase_options(r.cfg);
  const BulkModel<cplx> bm = extract_bulk(h, opts.bulk);
  const WindingResult w = winding_number(bm, opts.winding);
  if (r.csv) {
    Csv c("winding", "d_v_nm,d_w_nm,W_raw_re,W_raw_im,W_int,flag");
    c.row(r.cfg.stack.d_v_nm, r.cfg.stack.d_w_nm, w.raw.real(), w.raw.imag(), w.value,
          w.ill_defined ? "ill-defined" : "ok");
    r.emit("winding.csv", c.str());
  } else {
    json j = meta(r, "winding");
    j["winding"] = winding_json(w);
    j["bulk"] = {{"v", cjson(bm.h[0](0, 1))},
                 {"w", cjson(bm.h[1](1, 0))},
                 {"onsite_mean", cjson(bm.onsite_mean)},
                 {"onsite_imbalance", bm.onsite_imbalance},
                 {"coupling_spread", bm.coupling_spread}};
    r.emit_json("winding.json", j);
  }
}

void task_phase_diagram(const Run& r) {
  const auto pts = phase_diagram(r.cfg.stack, r.cfg.context, r.cfg.phase_d_v.values(), r.cfg.phase_d_w.values(),
                                 phase_options(r.cfg), r.db);
  if (r.csv) {
    Csv c("phase-diagram", "d_v_nm,d_w_nm,W_raw_re,W_raw_im,W_int,flag");
    for (const auto& p : pts)
      c.row(p.d_v_nm, p.d_w_nm, p.winding.raw.real(), p.winding.raw.imag(), p.winding.value,
            p.winding.ill_defined ? "ill-defined" : "ok");
    r.emit("phase_diagram.csv", c.str());
  } else {
    json j = meta(r, "phase-diagram");
    j["points"] = json::array();
    for (const auto& p : pts) {
      json e = winding_json(p.winding);
      e["d_v_nm"] = p.d_v_nm;
      e["d_w_nm"] = p.d_w_nm;
      j["points"].push_back(e);
    }
    r.emit_json("phase_diagram.json", j);
  }
}

void task_reflectivity(const Run& r) {
  const GridSpec& gs = r.cfg.detuning;
  const auto grid = detuning_grid(gs.min, gs.max, gs.points);
  const ReflectivitySpectrum rs = reflectivity(r.stack(), r.cfg.context, grid);
  const FeatureReport fr = feature_extract(rs);
  json feat = meta(r, "reflectivity");
  feat["baseline"] = {{"amplitude", cjson(rs.baseline)}, {"reflectivity", std::norm(rs.baseline)}};
  feat["linear_solve_fallback"] = rs.used_linear_solve;
  auto at = [&](const std::vector<Eigen::Index>& idx) {
    json a = json::array();
    for (auto i : idx) a.push_back({{"detuning_gamma0", rs.detuning(i)}, {"reflectivity", rs.reflectivity(i)}});
    return a;
  };
  feat["maxima"] = at(fr.maxima);
  feat["minima"] = at(fr.minima);
  if (fr.fit)
    feat["lorentzian_fit"] = {{"baseline", fr.fit->baseline},     {"amplitude", fr.fit->amplitude},
                              {"center_gamma0", fr.fit->center},  {"half_width_gamma0", fr.fit->half_width},
                              {"r_squared", fr.fit->r_squared}};
  if (r.csv) {
    Csv c("reflectivity", "delta_gamma0,R,re_amp,im_amp");
    for (Eigen::Index i = 0; i < rs.size(); ++i)
      c.row(rs.detuning(i), rs.reflectivity(i), rs.amplitude(i).real(), rs.amplitude(i).imag());
    r.emit("reflectivity.csv", c.str());
  } else {
    feat["spectrum"] = json::array();
    for (Eigen::Index i = 0; i < rs.size(); ++i)
      feat["spectrum"].push_back({rs.detuning(i), rs.reflectivity(i), rs.amplitude(i).real(), rs.amplitude(i).imag()});
  }
  r.emit_json("features.json", feat);
}

void task_dv_sweep(const Run& r) {
  const auto dvs = r.cfg.dv_sweep.values();
  struct Point {
    EigenSystem es;
    EdgeReport er;
    WindingResult w;
    bool has_w = false;
  };
  std::vector<Point> pts(dvs.size());
  const auto opts = phase_options(r.cfg);
  parallel_for(dvs.size(), r.cfg.threads, [&](std::size_t i) {
    StackConfig c = r.cfg.stack;
    c.d_v_nm = dvs[i];
    const NuclearHamiltonian h = build_hamiltonian(build_stack(c, r.db), r.cfg.context);
    pts[i].es = eigensystem(h);
    pts[i].er = edge_report(pts[i].es, h);
    if (h.size() >= 2 * (opts.bulk.edge_layers + 2)) {
      pts[i].w = winding_number(extract_bulk(h, opts.bulk), opts.winding);
      pts[i].has_w = true;
    }
  });
  const double dw = r.cfg.stack.d_w_nm;
  if (r.csv) {
    Csv e("dv-sweep", "d_v_nm,ratio,state,re,im,edge_weight");
    Csv w("dv-sweep", "d_v_nm,ratio,W_raw_re,W_raw_im,W_int,flag");
    for (std::size_t i = 0; i < dvs.size(); ++i) {
      for (Eigen::Index j = 0; j < pts[i].es.size(); ++j)
        e.row(dvs[i], dvs[i] / dw, j + 1, pts[i].es.eigenvalues(j).real(), pts[i].es.eigenvalues(j).imag(),
              pts[i].er.edge_weight(j));
      if (pts[i].has_w)
        w.row(dvs[i], dvs[i] / dw, pts[i].w.raw.real(), pts[i].w.raw.imag(), pts[i].w.value,
              pts[i].w.ill_defined ? "ill-defined" : "ok");
    }
    r.emit("dv_sweep.csv", e.str());
    r.emit("dv_sweep_winding.csv", w.str());
  } else {
    json j = meta(r, "dv-sweep");
    j["points"] = json::array();
    for (std::size_t i = 0; i < dvs.size(); ++i) {
      json p = {{"d_v_nm", dvs[i]}, {"ratio", dvs[i] / dw}};
      p["eigenvalues"] = json::array();
      for (Eigen::Index k = 0; k < pts[i].es.size(); ++k) p["eigenvalues"].push_back(cjson(pts[i].es.eigenvalues(k)));
      if (pts[i].has_w) p["winding"] = winding_json(pts[i].w);
      j["points"].push_back(p);
    }
    r.emit_json("dv_sweep.json", j);
  }
}

json error_json(const std::string& kind, const std::string& message, const std::string& field = {}) {
  json e = {{"kind", kind}, {"message", message}};
  if (!field.empty()) e["field"] = field;
  return {{"error", e}};
}

int fail(int code, const std::string& kind, const std::string& message, const std::string& field = {}) {
  std::cerr << error_json(kind, message, field).dump() << std::endl;
  return code;
}

RunConfig assemble(const Options& o) {
  RunConfig c = o.config_path.empty() ? RunConfig{} : load_run_config(o.config_path);
  if (!o.materials_path.empty()) c.materials_path = o.materials_path;
  if (o.threads >= 0) c.threads = static_cast<unsigned>(o.threads);
  if (o.dv != 0) c.stack.d_v_nm = o.dv;
  if (o.dw != 0) c.stack.d_w_nm = o.dw;
  if (o.angle != 0) c.context.angle_mrad = o.angle;
  if (o.n_cavities != 0) c.stack.n_cavities = o.n_cavities;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stacked thin-film x-ray cavity simulator"};
  app.set_version_flag("--version", std::string(XCAV_VERSION));
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  app.add_option("--config", o.config_path, "run configuration (JSON)");
  app.add_option("--materials", o.materials_path, "materials database (JSON), overrides the built-in one");
  app.add_option("--out", o.out_dir, "output directory")->capture_default_str();
  app.add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  app.add_option("--threads", o.threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("--dv", o.dv, "intracell spacer d_v (nm)");
  app.add_option("--dw", o.dw, "intercell spacer d_w (nm)");
  app.add_option("--angle-mrad", o.angle, "incidence angle (mrad)");
  app.add_option("--n-cavities", o.n_cavities, "number of cavities");

  using TaskFn = void (*)(const Run&);
  const std::vector<std::tuple<std::string, std::string, TaskFn>> tasks = {
      {"greens-dump", "G(z_j, z_l) and the cavity field profile", task_greens},
      {"hamiltonian", "coupling matrix and Rabi vector", task_hamiltonian},
      {"eigen", "eigenvalues and layer weights", task_eigen},
      {"winding", "winding number of one geometry", task_winding},
      {"phase-diagram", "winding number over a (d_v, d_w) grid", task_phase_diagram},
      {"reflectivity", "reflectivity spectrum and feature report", task_reflectivity},
      {"dv-sweep", "eigenvalues and winding along d_v at fixed d_w", task_dv_sweep},
  };
  for (const auto& [name, help, fn] : tasks) app.add_subcommand(name, help);
  auto* validate_cmd = app.add_subcommand("validate", "check a configuration without running it");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(config_error, "usage", e.what());
  }

  try {
    if (validate_cmd->parsed()) {
      ValidationReport rep;
      try {
        rep = validate(assemble(o));
      } catch (const ConfigError& e) {
        rep.items.push_back({Diagnostic::Level::error, e.field(), e.what()});
      } catch (const IoError& e) {
        rep.items.push_back({Diagnostic::Level::error, "config", e.what()});
      }
      std::cout << rep.to_json() << std::endl;
      return rep.ok() ? ok : config_error;
    }

    Run run{assemble(o), {}, o.out_dir, o.format == "csv"};
    const ValidationReport rep = validate(run.cfg);
    for (const auto& d : rep.items) {
      if (d.level == Diagnostic::Level::error) return fail(config_error, "config", d.message, d.field);
      std::cerr << json{{"warning", {{"field", d.field}, {"message", d.message}}}}.dump() << std::endl;
    }
    run.db = resolve_materials(run.cfg);
    for (const auto& [name, help, fn] : tasks)
      if (app.got_subcommand(name)) fn(run);
    return ok;
  } catch (const ConfigError& e) {
    return fail(config_error, "config", e.what(), e.field());
  } catch (const LookupError& e) {
    return fail(config_error, "config", e.what());
  } catch (const ContractError& e) {
    return fail(config_error, "contract", e.what());
  } catch (const IoError& e) {
    return fail(io_error, "io", e.what());
  } catch (const NumericError& e) {
    return fail(numeric_error, "numeric", e.what());
  } catch (const DomainError& e) {
    return fail(numeric_error, "numeric", e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(io_error, "io", e.what());
  } catch (const std::exception& e) {
    return fail(numeric_error, "internal", e.what());
  }
}
