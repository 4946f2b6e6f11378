#include "fvdwr/config.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include "fvdwr/errors.hpp"

namespace fvdwr {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "on" || value == "1") return true;
  if (value == "false" || value == "off" || value == "0") return false;
  throw ConfigError(key + ": expected a boolean, got '" + value + "'");
}

void set_key(RunConfig& c, const std::string& section, const std::string& key,
             const std::string& value) {
  const std::string path = section + "." + key;
  if (section == "run") {
    if (key == "mode") {
      if (value == "uniform")
        c.mode = RunMode::uniform;
      else if (value == "adaptive")
        c.mode = RunMode::adaptive;
      else if (value == "verify")
        c.mode = RunMode::verify;
      else
        throw ConfigError(path + ": unknown mode '" + value + "'");
    } else if (key == "problem") {
      c.problem = value;
    } else if (key == "goal") {
      c.goal = value;
    } else if (key == "goal_psi") {
      c.goal_psi = value;
    } else if (key == "dual") {
      if (value == "voronoi")
        c.dual = DualKind::voronoi;
      else if (value == "donald")
        c.dual = DualKind::donald;
      else
        throw ConfigError(path + ": unknown dual kind '" + value + "'");
    } else if (key == "scheme") {
      c.scheme = value;
    } else if (key == "scheme_m") {
      c.scheme_m = parse_double(path, value);
    } else if (key == "discretization") {
      if (value == "fv")
        c.discretization = DiscretizationMode::finite_volume;
      else if (value == "conforming")
        c.discretization = DiscretizationMode::conforming;
      else
        throw ConfigError(path + ": unknown discretization '" + value + "'");
    } else if (key == "dual_method") {
      if (value == "galerkin")
        c.dual_method = DualMethod::galerkin;
      else if (value == "fv")
        c.dual_method = DualMethod::finite_volume;
      else
        throw ConfigError(path + ": unknown dual method '" + value + "'");
    } else if (key == "divfree_variant") {
      if (value == "auto")
        c.divfree = DivfreeVariant::automatic;
      else if (value == "on")
        c.divfree = DivfreeVariant::on;
      else if (value == "off")
        c.divfree = DivfreeVariant::off;
      else
        throw ConfigError(path + ": unknown divfree variant '" + value + "'");
    } else if (key == "quad_degree") {
      c.quad_degree = parse_int(path, value);
      if (c.quad_degree != 2 && c.quad_degree != 5 && c.quad_degree != 8)
        throw ConfigError(path + ": supported quadrature degrees are 2, 5, 8");
    } else if (key == "mesh_n") {
      c.mesh_n = parse_int(path, value);
      if (c.mesh_n < 1) throw ConfigError(path + ": mesh_n must be positive");
    } else if (key == "mesh_file") {
      c.mesh_file = value;
    } else if (key == "levels") {
      c.levels = parse_int(path, value);
      if (c.levels < 1) throw ConfigError(path + ": levels must be positive");
    } else if (key == "seed") {
      c.seed = static_cast<unsigned>(parse_int(path, value));
    } else {
      throw ConfigError("unknown key: " + path);
    }
  } else if (section == "problem") {
    c.problem_params[key] = parse_double(path, value);
  } else if (section == "solver") {
    if (key == "atol")
      c.solver.atol = parse_double(path, value);
    else if (key == "rtol")
      c.solver.rtol = parse_double(path, value);
    else if (key == "max_iter")
      c.solver.max_iterations = parse_int(path, value);
    else if (key == "damping")
      c.solver.damping = parse_bool(path, value);
    else
      throw ConfigError("unknown key: " + path);
  } else if (section == "adaptive") {
    if (key == "max_cycles")
      c.max_cycles = parse_int(path, value);
    else if (key == "theta")
      c.theta = parse_double(path, value);
    else if (key == "goal_tol") {
      if (value == "inf") {
        c.goal_tolerance = std::numeric_limits<double>::infinity();
      } else {
        c.goal_tolerance = parse_double(path, value);
      }
    } else if (key == "voronoi_fallback")
      c.voronoi_fallback = parse_bool(path, value);
    else
      throw ConfigError("unknown key: " + path);
  } else if (section == "output") {
    if (key == "dir")
      c.output_dir = value;
    else if (key == "write_fields")
      c.write_fields = parse_bool(path, value);
    else if (key == "write_diagram")
      c.write_diagram = parse_bool(path, value);
    else
      throw ConfigError("unknown key: " + path);
  } else {
    throw ConfigError("unknown section: [" + section + "]");
  }
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  std::string section = "run";
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    set_key(config, section, key, value);
  }
  return config;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

void apply_override(RunConfig& config, const std::string& dotted_key, const std::string& value) {
  const auto dot = dotted_key.find('.');
  if (dot == std::string::npos)
    set_key(config, "run", dotted_key, value);
  else
    set_key(config, dotted_key.substr(0, dot), dotted_key.substr(dot + 1), value);
}

}  // namespace fvdwr
