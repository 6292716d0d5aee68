#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fplab/pde.hpp"

namespace fplab {

struct ScenarioError : std::runtime_error {
  ScenarioError(const std::string& what, int line_) : std::runtime_error(what), line(line_) {}
  int line;  // 0 when the location is not a file line
};

/**
 * Flat key=value run description.  '#' starts a comment, blank lines are
 * skipped, unknown keys are hard errors carrying the line number, and a
 * repeated key keeps its last value.
 */
struct Scenario {
  std::string model = "LINEAR";
  int dimension = 1;
  double half_width = 10.0;
  int n = 256;
  double horizon = 0.25;  // key: T
  std::uint64_t seed = 1;
  SolverConfig solver;

  std::string initial = "model";  // model | random
  double initial_amplitude = 0.25;
  int initial_band = 6;

  std::size_t particles = 10000;
  double particle_dt = 1e-3;
  std::string estimator = "gaussian_kernel";  // histogram | gaussian_kernel
  double bandwidth = 0.0;

  std::vector<double> snapshots;  // empty means {T}
  std::string checks = "all";
  int output_stride = 1;
};

// Applies one key=value pair; throws std::invalid_argument on unknown keys
// or unparsable values (no line attached).
void apply_assignment(Scenario& s, const std::string& key, const std::string& value);

Scenario parse_scenario_text(const std::string& text, const std::string& origin);
Scenario parse_scenario_file(const std::string& path);

}  // namespace fplab
