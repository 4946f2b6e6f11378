// Command-line front end: convergence studies, adaptive runs and the
// invariant verification suite for the node-centered finite volume solver
// with goal-oriented error estimation.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "fvdwr/config.hpp"
#include "fvdwr/errors.hpp"
#include "fvdwr/mesh.hpp"
#include "fvdwr/study.hpp"
#include "fvdwr/vtk_io.hpp"

namespace {

int with_config(const std::string& config_path, const std::vector<std::string>& overrides,
                fvdwr::RunMode mode_override, bool force_mode) {
  fvdwr::RunConfig config;
  try {
    if (!config_path.empty()) config = fvdwr::parse_config(config_path);
    for (const std::string& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw fvdwr::ConfigError("override must be key=value: " + kv);
      fvdwr::apply_override(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (force_mode) config.mode = mode_override;
  } catch (const fvdwr::ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return 2;
  }
  return fvdwr::run_from_config(config, std::cout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fvdwr: node-centered finite volume solver with dual-weighted "
               "goal-oriented error estimation"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;

  auto* run = app.add_subcommand("run", "run a convergence study or adaptive loop");
  run->add_option("-c,--config", config_path, "configuration file");
  run->add_option("-s,--set", overrides, "override a config key (section.key=value)");

  auto* verify = app.add_subcommand("verify", "run the invariant suite");
  verify->add_option("-c,--config", config_path, "configuration file");
  verify->add_option("-s,--set", overrides, "override a config key (section.key=value)");

  auto* mesh_cmd = app.add_subcommand("mesh", "generate or inspect a mesh");
  std::string mesh_out;
  std::string mesh_in;
  int mesh_n = 8;
  mesh_cmd->add_option("-n", mesh_n, "Friedrichs-Keller grid parameter");
  mesh_cmd->add_option("-o,--output", mesh_out, "write the mesh to this file");
  mesh_cmd->add_option("-i,--input", mesh_in, "inspect an existing mesh file");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return with_config(config_path, overrides, fvdwr::RunMode::uniform, false);
  if (verify->parsed()) return with_config(config_path, overrides, fvdwr::RunMode::verify, true);

  try {
    fvdwr::Mesh mesh = mesh_in.empty() ? fvdwr::friedrichs_keller(mesh_n)
                                       : fvdwr::load_mesh_file(mesh_in);
    const auto voronoi = fvdwr::validate_primary_mesh(mesh, fvdwr::DualKind::voronoi);
    std::cout << "vertices: " << mesh.num_vertices() << "\n"
              << "elements: " << mesh.num_elements() << "\n"
              << "boundary vertices: " << mesh.num_boundary_vertices() << "\n"
              << "interior vertices: " << mesh.num_interior_vertices() << "\n"
              << "max diameter: " << fvdwr::format_double(mesh.max_diameter()) << "\n"
              << "total area: " << fvdwr::format_double(mesh.total_area()) << "\n"
              << "self-centered: " << (voronoi.all_self_centered ? "yes" : "no") << "\n"
              << "delaunay: " << (voronoi.delaunay ? "yes" : "no") << "\n"
              << "min inradius/diameter: " << fvdwr::format_double(voronoi.min_inradius_ratio)
              << "\n";
    if (!mesh_out.empty()) {
      std::ofstream out(mesh_out);
      if (!out) throw fvdwr::IoError("cannot open " + mesh_out);
      fvdwr::save_mesh(mesh, out);
      std::cout << "mesh written to " << mesh_out << "\n";
    }
    return 0;
  } catch (const fvdwr::ParseError& err) {
    std::cerr << "parse error: " << err.what() << "\n";
    return 2;
  } catch (const fvdwr::Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 4;
  }
}
