#include "skinpar/config.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "skinpar/errors.hpp"

namespace skinpar {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

long long to_integer(const std::string& s) {
  long long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw std::invalid_argument("not an integer: '" + s + "'");
  return v;
}

int to_int(const std::string& s) {
  const long long v = to_integer(s);
  if (v < INT32_MIN || v > INT32_MAX) throw std::invalid_argument("integer out of range: '" + s + "'");
  return static_cast<int>(v);
}

bool to_bool(const std::string& s) {
  if (s == "on" || s == "true" || s == "yes") return true;
  if (s == "off" || s == "false" || s == "no") return false;
  throw std::invalid_argument("expected on/off, got '" + s + "'");
}

std::string fmt(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

template <class T, class F>
std::string join(const std::vector<T>& v, F f) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + f(v[i]);
  return s;
}

template <class T, class Conv>
std::vector<T> list_of(const std::string& v, Conv conv) {
  std::vector<T> out;
  for (const auto& w : split(v)) out.push_back(conv(w));
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

template <std::size_t N, class T, class Conv>
std::array<T, N> triple_of(const std::string& v, Conv conv) {
  const auto w = split(v);
  if (w.size() != N) throw std::invalid_argument("expected " + std::to_string(N) + " values");
  std::array<T, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = conv(w[i]);
  return out;
}

struct Field {
  std::string section, key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define SKINPAR_DOUBLE(sec, name, member)                                              \
  Field{sec, name, [](ExperimentConfig& c, const std::string& v) { c.member = to_double(v); }, \
        [](const ExperimentConfig& c) { return fmt(c.member); }}
#define SKINPAR_INT(sec, name, member)                                              \
  Field{sec, name, [](ExperimentConfig& c, const std::string& v) { c.member = to_int(v); }, \
        [](const ExperimentConfig& c) { return std::to_string(c.member); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"problem", "cells",
            [](ExperimentConfig& c, const std::string& v) { c.problem.cells = triple_of<3, int>(v, to_int); },
            [](const ExperimentConfig& c) {
              return join(std::vector<int>(c.problem.cells.begin(), c.problem.cells.end()),
                          [](int x) { return std::to_string(x); });
            }},
      Field{"problem", "spacing",
            [](ExperimentConfig& c, const std::string& v) {
              c.problem.spacing = triple_of<3, double>(v, to_double);
            },
            [](const ExperimentConfig& c) {
              return join(std::vector<double>(c.problem.spacing.begin(), c.problem.spacing.end()), fmt);
            }},
      Field{"problem", "coefficients",
            [](ExperimentConfig& c, const std::string& v) {
              if (v == "brick_mortar") c.problem.coefficients = CoefficientKind::brick_mortar;
              else if (v == "uniform") c.problem.coefficients = CoefficientKind::uniform;
              else throw std::invalid_argument("expected brick_mortar or uniform");
            },
            [](const ExperimentConfig& c) {
              return std::string(c.problem.coefficients == CoefficientKind::uniform ? "uniform"
                                                                                   : "brick_mortar");
            }},
      SKINPAR_INT("problem", "layers", problem.geometry.layers),
      Field{"problem", "brick_extent",
            [](ExperimentConfig& c, const std::string& v) {
              c.problem.geometry.brick_extent = triple_of<3, double>(v, to_double);
            },
            [](const ExperimentConfig& c) {
              const auto& b = c.problem.geometry.brick_extent;
              return join(std::vector<double>(b.begin(), b.end()), fmt);
            }},
      SKINPAR_DOUBLE("problem", "mortar_width", problem.geometry.mortar_width),
      SKINPAR_DOUBLE("problem", "stagger_offset", problem.geometry.stagger_offset),
      SKINPAR_DOUBLE("problem", "d_cor", problem.geometry.d_cor),
      SKINPAR_DOUBLE("problem", "d_lip", problem.geometry.d_lip),
      SKINPAR_DOUBLE("problem", "uniform_d", problem.uniform_d),
      SKINPAR_DOUBLE("problem", "bc_top", problem.bc.top),
      SKINPAR_DOUBLE("problem", "bc_bottom", problem.bc.bottom),
      Field{"problem", "t_end",
            [](ExperimentConfig& c, const std::string& v) {
              if (v == "auto") c.problem.t_end.reset();
              else c.problem.t_end = to_double(v);
            },
            [](const ExperimentConfig& c) {
              return c.problem.t_end ? fmt(*c.problem.t_end) : std::string("auto");
            }},

      SKINPAR_DOUBLE("solver", "omega", solver.mg.omega),
      SKINPAR_INT("solver", "pre_smooth", solver.mg.pre_smooth),
      SKINPAR_INT("solver", "post_smooth", solver.mg.post_smooth),
      SKINPAR_INT("solver", "max_cycles", solver.mg.max_cycles),
      SKINPAR_DOUBLE("solver", "rel_tol", solver.mg.rel_tol),
      Field{"solver", "coarsest_max_unknowns",
            [](ExperimentConfig& c, const std::string& v) {
              const long long n = to_integer(v);
              if (n < 1) throw std::invalid_argument("must be >= 1");
              c.solver.mg.coarsest_max_unknowns = static_cast<std::size_t>(n);
            },
            [](const ExperimentConfig& c) { return std::to_string(c.solver.mg.coarsest_max_unknowns); }},

      SKINPAR_INT("parareal", "coarse_steps", time.coarse_steps),
      SKINPAR_INT("parareal", "fine_steps", time.fine_steps),
      Field{"parareal", "n_sub",
            [](ExperimentConfig& c, const std::string& v) { c.time.n_sub = list_of<int>(v, to_int); },
            [](const ExperimentConfig& c) {
              return join(c.time.n_sub, [](int x) { return std::to_string(x); });
            }},
      SKINPAR_INT("parareal", "max_iter", time.max_iter),
      Field{"parareal", "defect_tol",
            [](ExperimentConfig& c, const std::string& v) {
              if (v == "none") c.time.defect_tol.reset();
              else c.time.defect_tol = to_double(v);
            },
            [](const ExperimentConfig& c) {
              return c.time.defect_tol ? fmt(*c.time.defect_tol) : std::string("none");
            }},
      Field{"parareal", "retirement",
            [](ExperimentConfig& c, const std::string& v) { c.time.retirement = to_bool(v); },
            [](const ExperimentConfig& c) { return std::string(c.time.retirement ? "on" : "off"); }},
      Field{"parareal", "backend",
            [](ExperimentConfig& c, const std::string& v) { c.time.backend = parse_backend(v); },
            [](const ExperimentConfig& c) { return to_string(c.time.backend); }},

      Field{"experiment", "name",
            [](ExperimentConfig& c, const std::string& v) { c.experiment.name = v; },
            [](const ExperimentConfig& c) { return c.experiment.name; }},
      Field{"experiment", "output_dir",
            [](ExperimentConfig& c, const std::string& v) { c.experiment.output_dir = v; },
            [](const ExperimentConfig& c) { return c.experiment.output_dir; }},
      Field{"experiment", "seed",
            [](ExperimentConfig& c, const std::string& v) {
              const long long s = to_integer(v);
              if (s < 0) throw std::invalid_argument("seed must be non-negative");
              c.experiment.seed = static_cast<std::uint64_t>(s);
            },
            [](const ExperimentConfig& c) { return std::to_string(c.experiment.seed); }},
      Field{"experiment", "snapshot_fractions",
            [](ExperimentConfig& c, const std::string& v) {
              c.experiment.snapshot_fractions = list_of<double>(v, to_double);
            },
            [](const ExperimentConfig& c) { return join(c.experiment.snapshot_fractions, fmt); }},
      SKINPAR_INT("experiment", "refinement", experiment.refinement),
      Field{"experiment", "imbalance_b",
            [](ExperimentConfig& c, const std::string& v) {
              c.experiment.imbalance_b = list_of<double>(v, to_double);
            },
            [](const ExperimentConfig& c) { return join(c.experiment.imbalance_b, fmt); }},
      SKINPAR_INT("experiment", "imbalance_n_iter", experiment.imbalance_n_iter),
      SKINPAR_DOUBLE("experiment", "flag_below", experiment.flag_below),
      SKINPAR_INT("experiment", "cores", experiment.cores),

      SKINPAR_INT("weak_scaling", "rungs", weak_scaling.rungs),
  };
  return table;
}

#undef SKINPAR_DOUBLE
#undef SKINPAR_INT

const Field* find_field(const std::string& section, const std::string& key) {
  for (const auto& f : fields())
    if (f.section == section && f.key == key) return &f;
  return nullptr;
}

bool known_section(const std::string& s) {
  for (const auto& f : fields())
    if (f.section == s) return true;
  return false;
}

}  // namespace

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  for (int c : problem.cells)
    if (c < 2) fail("[problem] cells must be >= 2 along every axis");
  for (double h : problem.spacing)
    if (!(h > 0.0)) fail("[problem] spacing must be positive");
  if (!(problem.uniform_d > 0.0)) fail("[problem] uniform_d must be positive");
  if (!(problem.geometry.d_cor > 0.0) || !(problem.geometry.d_lip > 0.0)) {
    fail("[problem] coefficients must be positive");
  }
  if (problem.t_end && !(*problem.t_end > 0.0)) fail("[problem] t_end must be positive");
  try {
    solver.mg.validate();
  } catch (const std::invalid_argument& e) {
    fail(std::string("[solver] ") + e.what());
  }
  if (time.coarse_steps < 1 || time.fine_steps < 1) fail("[parareal] step counts must be >= 1");
  if (time.fine_steps % time.coarse_steps != 0) {
    fail("[parareal] fine_steps must be a multiple of coarse_steps");
  }
  for (int n : time.n_sub) {
    if (n < 1) fail("[parareal] n_sub entries must be >= 1");
    if (time.coarse_steps % n != 0) {
      fail("[parareal] coarse_steps " + std::to_string(time.coarse_steps) +
           " is not divisible by n_sub " + std::to_string(n));
    }
  }
  if (time.max_iter < 1) fail("[parareal] max_iter must be >= 1");
  if (time.defect_tol && !(*time.defect_tol > 0.0)) fail("[parareal] defect_tol must be positive");
  for (double f : experiment.snapshot_fractions)
    if (!(f >= 0.0 && f <= 1.0)) fail("[experiment] snapshot_fractions must lie in [0, 1]");
  if (experiment.refinement < 1) fail("[experiment] refinement must be >= 1");
  for (double b : experiment.imbalance_b)
    if (!(b >= 0.0 && b <= 1.0)) fail("[experiment] imbalance_b must lie in [0, 1]");
  if (experiment.imbalance_n_iter < 1) fail("[experiment] imbalance_n_iter must be >= 1");
  if (!(experiment.flag_below > 0.0 && experiment.flag_below <= 1.0)) {
    fail("[experiment] flag_below must lie in (0, 1]");
  }
  if (experiment.cores < 0) fail("[experiment] cores must be >= 0");
  if (weak_scaling.rungs < 1) fail("[weak_scaling] rungs must be >= 1");
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string section;
  std::set<std::pair<std::string, std::string>> seen;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
      section = trim(line.substr(1, line.size() - 2));
      if (!known_section(section)) throw ConfigError("unknown section [" + section + "]", line_no);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError("key '" + key + "' outside any section", line_no);
    const Field* f = find_field(section, key);
    if (!f) throw ConfigError("unknown key '" + key + "' in [" + section + "]", line_no);
    if (!seen.insert({section, key}).second) {
      throw ConfigError("duplicate key '" + key + "' in [" + section + "]", line_no);
    }
    try {
      f->set(cfg, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key + ": " + e.what(), line_no);
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in);
}

std::string emit_config(const ExperimentConfig& cfg) {
  std::string out, section;
  for (const auto& f : fields()) {
    if (f.section != section) {
      if (!section.empty()) out += '\n';
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += f.key + " = " + f.get(cfg) + "\n";
  }
  return out;
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : emit_config(cfg)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Grid3D problem_grid(const ProblemConfig& p) {
  Grid3D g;
  g.nx = p.cells[0], g.ny = p.cells[1], g.nz = p.cells[2];
  g.hx = p.spacing[0], g.hy = p.spacing[1], g.hz = p.spacing[2];
  validate_problem_grid(g);
  return g;
}

CoefficientField problem_field(const ProblemConfig& p) {
  const Grid3D g = problem_grid(p);
  return p.coefficients == CoefficientKind::uniform ? uniform_field(g, p.uniform_d)
                                                    : build_brick_mortar(p.geometry, g);
}

double resolve_t_end(const ProblemConfig& p, const CoefficientField& field) {
  if (p.t_end) return *p.t_end;
  const double height = field.grid.nz * field.grid.hz;
  return lag_time(height, effective_coefficient_1d(field));
}

PropagatorSpec coarse_spec(const ExperimentConfig& cfg, double t_end) {
  return {t_end / cfg.time.coarse_steps, cfg.solver.mg, "coarse"};
}

PropagatorSpec fine_spec(const ExperimentConfig& cfg, double t_end) {
  return {t_end / cfg.time.fine_steps, cfg.solver.mg, "fine"};
}

PararealConfig parareal_config(const ExperimentConfig& cfg, int n_sub, double t_end) {
  PararealConfig p;
  p.n_sub = n_sub;
  p.t_end = t_end;
  p.max_iter = std::min(cfg.time.max_iter, n_sub);
  p.defect_tol = cfg.time.defect_tol;
  p.backend = cfg.time.backend;
  p.retirement = cfg.time.retirement;
  return p;
}

}  // namespace skinpar
