#include "core/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fourtop::runner {

std::string to_string(Solver s) {
  switch (s) {
    case Solver::kFourier:
      return "fourier_tounn";
    case Solver::kAblation:
      return "tounn_ablation";
    case Solver::kSimp:
      return "simp";
  }
  return "?";
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw std::invalid_argument("config key '" + key + "': " + what);
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    bad(key, "expected a number, got '" + v + "'");
  }
  if (pos != v.size()) bad(key, "expected a number, got '" + v + "'");
  return x;
}

int parse_int(const std::string& key, const std::string& v) {
  const double x = parse_double(key, v);
  const int i = static_cast<int>(x);
  if (double(i) != x) bad(key, "expected an integer, got '" + v + "'");
  return i;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    bad(key, "expected a non-negative integer, got '" + v + "'");
  return x;
}

// label:E:lambda entries separated by ';'
std::vector<mat::Material> parse_materials(const std::string& key,
                                           const std::string& v) {
  std::vector<mat::Material> mats;
  std::stringstream ss(v);
  std::string entry;
  while (std::getline(ss, entry, ';')) {
    entry = trim(entry);
    if (entry.empty()) continue;
    std::stringstream es(entry);
    std::string label, e_str, l_str;
    if (!std::getline(es, label, ':') || !std::getline(es, e_str, ':') ||
        !std::getline(es, l_str, ':'))
      bad(key, "expected label:E:lambda entries separated by ';'");
    mat::Material m;
    m.label = trim(label);
    m.young = parse_double(key, trim(e_str));
    m.density = parse_double(key, trim(l_str));
    mats.push_back(std::move(m));
  }
  if (mats.empty()) bad(key, "no materials given");
  return mats;
}

}  // namespace

bool RunConfig::was_set(const std::string& key) const {
  return std::find(set_keys.begin(), set_keys.end(), key) != set_keys.end();
}

void RunConfig::set(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  auto pos = [&](double x, const char* what) {
    if (!(x > 0.0)) bad(key, std::string("must be positive ") + what);
    return x;
  };

  if (key == "solver") {
    if (value == "fourier_tounn")
      solver = Solver::kFourier;
    else if (value == "tounn_ablation")
      solver = Solver::kAblation;
    else if (value == "simp")
      solver = Solver::kSimp;
    else
      bad(key, "must be one of fourier_tounn, tounn_ablation, simp");
  } else if (key == "problem") {
    problem = value;
  } else if (key == "problem.nelx") {
    nelx = parse_int(key, value);
    if (*nelx < 1) bad(key, "must be >= 1");
  } else if (key == "problem.nely") {
    nely = parse_int(key, value);
    if (*nely < 1) bad(key, "must be >= 1");
  } else if (key == "problem.h") {
    h = pos(parse_double(key, value), "(element edge length)");
  } else if (key == "problem.v_star") {
    v_star = parse_double(key, value);
    if (!(*v_star > 0.0 && *v_star <= 1.0)) bad(key, "must lie in (0, 1]");
  } else if (key == "problem.m_star") {
    m_star = parse_double(key, value);
    if (!(*m_star > 0.0 && *m_star <= 1.0)) bad(key, "must lie in (0, 1]");
  } else if (key == "lengths.l_min") {
    l_min = pos(parse_double(key, value), "(length scale)");
  } else if (key == "lengths.l_max") {
    l_max = pos(parse_double(key, value), "(length scale)");
  } else if (key == "net.n_f") {
    n_f = parse_int(key, value);
    if (*n_f < 1) bad(key, "must be >= 1");
  } else if (key == "net.n_h") {
    n_h = parse_int(key, value);
    if (*n_h < 1) bad(key, "must be >= 1");
  } else if (key == "net.n_l") {
    n_L = parse_int(key, value);
    if (*n_L < 1) bad(key, "must be >= 1");
  } else if (key == "net.leaky_slope") {
    leaky_slope = parse_double(key, value);
    if (!(leaky_slope >= 0.0 && leaky_slope < 1.0))
      bad(key, "must lie in [0, 1)");
  } else if (key == "net.freq_sampling") {
    if (value == "uniform")
      freq_grid = false;
    else if (value == "grid")
      freq_grid = true;
    else
      bad(key, "must be 'uniform' or 'grid'");
  } else if (key == "net.checkpoint") {
    checkpoint = value;
  } else if (key == "materials") {
    materials = parse_materials(key, value);
  } else if (key == "opt.alpha0") {
    opt.alpha0 = pos(parse_double(key, value), "");
  } else if (key == "opt.d_alpha") {
    opt.d_alpha = parse_double(key, value);
    if (opt.d_alpha < 0.0) bad(key, "must be >= 0");
  } else if (key == "opt.alpha_max") {
    opt.alpha_max = pos(parse_double(key, value), "");
  } else if (key == "opt.p0") {
    opt.p0 = parse_double(key, value);
    if (opt.p0 < 1.0) bad(key, "must be >= 1");
  } else if (key == "opt.d_p") {
    opt.d_p = parse_double(key, value);
    if (opt.d_p < 0.0) bad(key, "must be >= 0");
  } else if (key == "opt.p_max") {
    opt.p_max = parse_double(key, value);
    if (opt.p_max < 1.0) bad(key, "must be >= 1");
  } else if (key == "opt.lr") {
    opt.lr = pos(parse_double(key, value), "");
  } else if (key == "opt.beta1") {
    opt.beta1 = parse_double(key, value);
  } else if (key == "opt.beta2") {
    opt.beta2 = parse_double(key, value);
  } else if (key == "opt.eps_adam") {
    opt.eps_adam = pos(parse_double(key, value), "");
  } else if (key == "opt.eps_g_star") {
    opt.eps_g_star = parse_double(key, value);
    if (!(opt.eps_g_star > 0.0 && opt.eps_g_star < 1.0))
      bad(key, "must lie in (0, 1)");
  } else if (key == "opt.min_epochs") {
    opt.min_epochs = parse_int(key, value);
    if (opt.min_epochs < 0) bad(key, "must be >= 0");
  } else if (key == "opt.max_epochs") {
    opt.max_epochs = parse_int(key, value);
    if (opt.max_epochs < 1) bad(key, "must be >= 1");
  } else if (key == "simp.r_min") {
    simp_r_min = pos(parse_double(key, value), "");
  } else if (key == "simp.p") {
    simp_p = parse_double(key, value);
    if (simp_p < 1.0) bad(key, "must be >= 1");
  } else if (key == "simp.max_iters") {
    simp_max_iters = parse_int(key, value);
    if (simp_max_iters < 1) bad(key, "must be >= 1");
  } else if (key == "extract.s") {
    extract_s = parse_int(key, value);
    if (extract_s < 1) bad(key, "must be >= 1");
  } else if (key == "seed") {
    seed = parse_u64(key, value);
  } else if (key == "out_dir") {
    if (value.empty()) bad(key, "must not be empty");
    out_dir = value;
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
  if (!was_set(key)) set_keys.push_back(key);
}

std::string RunConfig::get(const std::string& key) const {
  auto num = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return std::string(buf);
  };
  auto opt_num = [&](const auto& o) { return o ? num(double(*o)) : ""; };

  if (key == "solver") return to_string(solver);
  if (key == "problem") return problem;
  if (key == "problem.nelx") return opt_num(nelx);
  if (key == "problem.nely") return opt_num(nely);
  if (key == "problem.h") return opt_num(h);
  if (key == "problem.v_star") return opt_num(v_star);
  if (key == "problem.m_star") return opt_num(m_star);
  if (key == "lengths.l_min") return opt_num(l_min);
  if (key == "lengths.l_max") return opt_num(l_max);
  if (key == "net.n_f") return num(eff_n_f());
  if (key == "net.n_h") return num(eff_n_h());
  if (key == "net.n_l") return num(eff_n_L());
  if (key == "net.leaky_slope") return num(leaky_slope);
  if (key == "net.freq_sampling") return freq_grid ? "grid" : "uniform";
  if (key == "net.checkpoint") return checkpoint.value_or("");
  if (key == "materials") {
    std::string s;
    for (std::size_t i = 0; i < materials.size(); ++i) {
      if (i) s += ';';
      s += materials[i].label + ':' + num(materials[i].young) + ':' +
           num(materials[i].density);
    }
    return s;
  }
  if (key == "opt.alpha0") return num(opt.alpha0);
  if (key == "opt.d_alpha") return num(opt.d_alpha);
  if (key == "opt.alpha_max") return num(opt.alpha_max);
  if (key == "opt.p0") return num(opt.p0);
  if (key == "opt.d_p") return num(opt.d_p);
  if (key == "opt.p_max") return num(opt.p_max);
  if (key == "opt.lr") return num(opt.lr);
  if (key == "opt.beta1") return num(opt.beta1);
  if (key == "opt.beta2") return num(opt.beta2);
  if (key == "opt.eps_adam") return num(opt.eps_adam);
  if (key == "opt.eps_g_star") return num(opt.eps_g_star);
  if (key == "opt.min_epochs") return num(opt.min_epochs);
  if (key == "opt.max_epochs") return num(opt.max_epochs);
  if (key == "simp.r_min") return num(simp_r_min);
  if (key == "simp.p") return num(simp_p);
  if (key == "simp.max_iters") return num(simp_max_iters);
  if (key == "extract.s") return num(extract_s);
  if (key == "seed") return std::to_string(seed);
  if (key == "out_dir") return out_dir;
  throw std::invalid_argument("unknown config key '" + key + "'");
}

void RunConfig::validate() {
  warnings.clear();
  if (l_min && l_max && *l_min > *l_max)
    throw std::invalid_argument(
        "config: lengths.l_min must not exceed lengths.l_max");
  if (m_star && materials.empty())
    throw std::invalid_argument(
        "config: problem.m_star requires a materials list");
  if (!materials.empty() && !m_star)
    throw std::invalid_argument(
        "config: materials require a problem.m_star target");
  opt.validate();

  if (solver == Solver::kSimp) {
    static const char* neural[] = {"lengths.l_min",    "lengths.l_max",
                                   "net.n_f",          "net.n_h",
                                   "net.n_l",          "net.leaky_slope",
                                   "net.freq_sampling", "net.checkpoint",
                                   "materials"};
    for (const char* k : neural)
      if (was_set(k))
        warnings.push_back(std::string("solver=simp ignores key ") + k);
  }
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config: " + path);
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected 'key = value', got '" + t + "'");
    cfg.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return cfg;
}

}  // namespace fourtop::runner
