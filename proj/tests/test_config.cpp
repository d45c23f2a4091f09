#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "xcav/config.hpp"
#include "xcav/error.hpp"
#include "xcav/hamiltonian.hpp"

using namespace xcav;

namespace {

std::string config_field(const std::string& text) {
  try {
    parse_run_config(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<accepted>";
}

bool has(const ValidationReport& r, Diagnostic::Level lvl, const std::string& field) {
  return std::any_of(r.items.begin(), r.items.end(), [&](const Diagnostic& d) { return d.level == lvl && d.field == field; });
}

}  // namespace

TEST_CASE("defaults describe the topological stack") {
  const RunConfig c = parse_run_config("{}");
  CHECK(c.stack.n_cavities == 10);
  CHECK(c.stack.d_v_nm == 4.9);
  CHECK(c.stack.d_w_nm == 3.5);
  CHECK(c.context.angle_mrad == 2.4067);
  CHECK(c.detuning.points == 4001);
}

TEST_CASE("round trip through JSON") {
  RunConfig c;
  c.stack.d_v_nm = 2.8;
  c.stack.n_cavities = 12;
  c.stack.core = {{"C", 18.0}, {"Fe57", 1.2}, {"C", 21.0}};
  c.context.angle_mrad = 2.4157;
  c.context.polarization = Polarization::p;
  c.radiative_fraction = 0.5;
  c.phase_d_v = {2.5, 6.5, 9};
  c.n_k = 1024;
  c.max_layer_distance = 3;
  c.threads = 3;
  const std::string text = to_json(c);
  const RunConfig back = parse_run_config(text);
  CHECK(to_json(back) == text);
  CHECK(back.stack.core[1].thickness_nm == 1.2);
  CHECK(back.context.polarization == Polarization::p);
  CHECK(back.radiative_fraction == 0.5);
}

TEST_CASE("unknown keys and wrong types name the field") {
  CHECK(config_field(R"({"stack":{"d_v":4.9}})") == "stack.d_v");
  CHECK(config_field(R"({"stak":{}})") == "stak");
  CHECK(config_field(R"({"stack":{"d_v_nm":"wide"}})") == "stack.d_v_nm");
  CHECK(config_field(R"({"context":{"polarization":"q"}})") == "context.polarization");
  CHECK(config_field(R"({"stack":{"core":[{"material":"C"}]}})") == "stack.core[0].thickness_nm");
  CHECK(config_field("{not json") != "<accepted>");
  CHECK_THROWS_AS(load_run_config("/nonexistent/run.json"), IoError);
}

TEST_CASE("grid values") {
  const GridSpec g{2.0, 7.0, 20};
  const auto v = g.values();
  REQUIRE(v.size() == 20);
  CHECK(v.front() == 2.0);
  CHECK(v.back() == 7.0);
  CHECK(GridSpec{3.0, 3.0, 1}.values() == std::vector<double>{3.0});
}

TEST_CASE("validation") {
  SUBCASE("canonical config is clean") {
    const ValidationReport r = validate(RunConfig{});
    CHECK(r.ok());
    CHECK(r.items.empty());
  }
  SUBCASE("thin spacer warns but passes") {
    RunConfig c;
    c.stack.d_v_nm = 1.0;
    const ValidationReport r = validate(c);
    CHECK(r.ok());
    CHECK(has(r, Diagnostic::Level::warning, "stack.d_v_nm"));
  }
  SUBCASE("missing materials file is an error") {
    RunConfig c;
    c.materials_path = "/nonexistent/materials.json";
    const ValidationReport r = validate(c);
    CHECK_FALSE(r.ok());
    CHECK(has(r, Diagnostic::Level::error, "materials_file"));
  }
  SUBCASE("unknown material and missing resonance") {
    RunConfig c;
    c.stack.spacer_material = "Au";
    c.stack.core = {{"C", 40.0}};
    const ValidationReport r = validate(c);
    CHECK_FALSE(r.ok());
    CHECK(has(r, Diagnostic::Level::error, "stack.spacer_material"));
    CHECK(has(r, Diagnostic::Level::error, "stack.core"));
  }
  SUBCASE("short stacks and coarse grids warn") {
    RunConfig c;
    c.stack.n_cavities = 4;
    c.n_k = 64;
    const ValidationReport r = validate(c);
    CHECK(r.ok());
    CHECK(has(r, Diagnostic::Level::warning, "stack.n_cavities"));
    CHECK(has(r, Diagnostic::Level::warning, "winding.n_k"));
  }
  SUBCASE("report is JSON") {
    RunConfig c;
    c.stack.d_w_nm = 1.5;
    const auto j = nlohmann::json::parse(validate(c).to_json());
    CHECK(j.contains("ok"));
    CHECK(j["diagnostics"].size() >= 1);
  }
}

TEST_CASE("radiative fraction override reaches the couplings") {
  RunConfig c;
  const double base = coupling_constant(nuclear_constants(resolve_materials(c).at("Fe57")), 1.0, 14.413);
  c.radiative_fraction = 1.0;
  const double full = coupling_constant(nuclear_constants(resolve_materials(c).at("Fe57")), 1.0, 14.413);
  CHECK(full / base == doctest::Approx(9.56).epsilon(1e-12));
}

TEST_CASE("materials file from disk") {
  const auto path = std::filesystem::temp_directory_path() / "xcav_test_materials.json";
  {
    std::ofstream out(path);
    out << MaterialDatabase::builtin().to_json();
  }
  RunConfig c;
  c.materials_path = path.string();
  CHECK(validate(c).ok());
  CHECK(resolve_materials(c).names() == MaterialDatabase::builtin().names());
  std::filesystem::remove(path);
}
