#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/materials.hpp"
#include "core/optimizer.hpp"

namespace fourtop::runner {

enum class Solver { kFourier, kAblation, kSimp };

std::string to_string(Solver s);

// Flat dotted-key configuration. Unset neural sizes fall back to the
// defaults (n_f 150, n_h 20, one hidden layer; four layers for the
// no-projection ablation); unset targets and length scales fall back to the
// selected problem's defaults.
struct RunConfig {
  Solver solver = Solver::kFourier;
  std::string problem = "mid_cantilever";
  std::optional<int> nelx, nely;
  std::optional<double> h;
  std::optional<double> v_star;
  std::optional<double> m_star;
  std::optional<double> l_min, l_max;
  std::optional<int> n_f, n_h, n_L;
  double leaky_slope = 0.01;
  bool freq_grid = false;  // lattice frequencies instead of sampled ones
  std::optional<std::string> checkpoint;
  std::vector<mat::Material> materials;  // solid candidates; void is implicit
  opt::OptConfig opt;
  double simp_r_min = 1.4;
  double simp_p = 3.0;
  int simp_max_iters = 200;
  int extract_s = 15;
  std::uint64_t seed = 0;
  std::string out_dir = "out";

  std::vector<std::string> set_keys;  // explicitly assigned keys
  std::vector<std::string> warnings;  // filled by validate()

  int eff_n_f() const { return n_f.value_or(150); }
  int eff_n_h() const { return n_h.value_or(20); }
  int eff_n_L() const {
    return n_L.value_or(solver == Solver::kAblation ? 4 : 1);
  }

  // Assigns one key; throws std::invalid_argument naming the key on unknown
  // keys, type mismatches or per-key constraint violations.
  void set(const std::string& key, const std::string& value);

  // Current value of a key as text: the explicit value, the config-level
  // default, or "" for unset problem-dependent keys.
  std::string get(const std::string& key) const;

  bool was_set(const std::string& key) const;

  // Cross-key invariants; collects warnings (e.g. neural keys under
  // solver=simp). Throws on violations.
  void validate();
};

// '#' comments, blank lines, `key = value` entries.
RunConfig parse_config_file(const std::string& path);

}  // namespace fourtop::runner
