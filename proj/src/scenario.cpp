#include "fplab/scenario.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace fplab {
namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& v) {
  const char* c = v.c_str();
  char* end = nullptr;
  double x = std::strtod(c, &end);
  if (end == c || *end != '\0') throw std::invalid_argument("not a number: '" + v + "'");
  return x;
}

long long to_int(const std::string& v) {
  const char* c = v.c_str();
  char* end = nullptr;
  long long x = std::strtoll(c, &end, 10);
  if (end == c || *end != '\0') throw std::invalid_argument("not an integer: '" + v + "'");
  return x;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  throw std::invalid_argument("not a boolean: '" + v + "'");
}

std::vector<double> to_list(const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double(item));
  }
  return out;
}

}  // namespace

void apply_assignment(Scenario& s, const std::string& key, const std::string& value) {
  if (key == "model") {
    s.model = value;
  } else if (key == "dimension") {
    s.dimension = (int)to_int(value);
  } else if (key == "half_width") {
    s.half_width = to_double(value);
  } else if (key == "n") {
    s.n = (int)to_int(value);
  } else if (key == "T") {
    s.horizon = to_double(value);
  } else if (key == "seed") {
    s.seed = (std::uint64_t)to_int(value);
  } else if (key == "time_step") {
    s.solver.time_step = to_double(value);
  } else if (key == "newton_tol") {
    s.solver.newton_tol = to_double(value);
  } else if (key == "newton_max_iter") {
    s.solver.newton_max_iter = (int)to_int(value);
  } else if (key == "damping") {
    s.solver.damping = to_double(value);
  } else if (key == "epsilon_reg") {
    s.solver.epsilon_reg = to_double(value);
  } else if (key == "mollifier_width") {
    s.solver.mollifier_width = to_double(value);
  } else if (key == "dealias") {
    s.solver.dealias = to_bool(value);
  } else if (key == "krylov_max_iter") {
    s.solver.krylov_max_iter = (int)to_int(value);
  } else if (key == "krylov_tol") {
    s.solver.krylov_tol = to_double(value);
  } else if (key == "initial") {
    if (value != "model" && value != "random")
      throw std::invalid_argument("initial must be 'model' or 'random'");
    s.initial = value;
  } else if (key == "initial_amplitude") {
    s.initial_amplitude = to_double(value);
  } else if (key == "initial_band") {
    s.initial_band = (int)to_int(value);
  } else if (key == "particles") {
    long long v = to_int(value);
    if (v < 1) throw std::invalid_argument("particles must be positive");
    s.particles = (std::size_t)v;
  } else if (key == "particle_dt") {
    s.particle_dt = to_double(value);
  } else if (key == "estimator") {
    if (value != "histogram" && value != "gaussian_kernel")
      throw std::invalid_argument("estimator must be 'histogram' or 'gaussian_kernel'");
    s.estimator = value;
  } else if (key == "bandwidth") {
    s.bandwidth = to_double(value);
  } else if (key == "snapshots") {
    s.snapshots = to_list(value);
  } else if (key == "checks") {
    s.checks = value;
  } else if (key == "output_stride") {
    int v = (int)to_int(value);
    if (v < 1) throw std::invalid_argument("output_stride must be positive");
    s.output_stride = v;
  } else {
    throw std::invalid_argument("unknown key '" + key + "'");
  }
}

Scenario parse_scenario_text(const std::string& text, const std::string& origin) {
  Scenario s;
  std::istringstream is(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    std::string line = raw;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ScenarioError(origin + ":" + std::to_string(line_no) + ": expected key = value",
                          line_no);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ScenarioError(origin + ":" + std::to_string(line_no) + ": empty key", line_no);
    try {
      apply_assignment(s, key, value);
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(origin + ":" + std::to_string(line_no) + ": " + e.what(), line_no);
    }
  }
  return s;
}

Scenario parse_scenario_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ScenarioError("cannot open scenario file: " + path, 0);
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_scenario_text(buf.str(), path);
}

}  // namespace fplab
