#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/grid.hpp"

namespace fourtop::prob {

enum class Extrude { kNone, kX, kY };

// A configured benchmark: mesh with supports, loads and passive regions,
// plus per-problem defaults. Total applied load magnitude is 1 for every
// problem so compliances stay comparable across runs.
struct Problem {
  std::string name;
  fea::GridMesh mesh;
  Extrude extrude = Extrude::kNone;
  double nu = 0.3;
  double v_star_default = 0.5;
  double l_min_default = 6.0;
  double l_max_default = 30.0;
};

struct ProblemOverrides {
  std::optional<int> nelx;
  std::optional<int> nely;
  std::optional<double> h;
};

const std::vector<std::string>& problem_names();

// Supported names: mid_cantilever, tip_cantilever, mbb, michell, l_bracket,
// distributed_load, tensile_bar. Throws std::invalid_argument listing the
// valid names otherwise.
Problem make_problem(const std::string& name,
                     const ProblemOverrides& overrides = {});

}  // namespace fourtop::prob
