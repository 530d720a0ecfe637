#include "nlfd/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "nlfd/error.hpp"
#include "nlfd/operator.hpp"
#include "nlfd/parallel.hpp"

namespace nlfd {

using nlohmann::json;

namespace {

namespace fs = std::filesystem;

/// Reads typed values out of a JSON object, collecting every problem instead of throwing.
class Reader {
 public:
  explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

  const json* section(const json& doc, const std::string& key) {
    if (!doc.contains(key)) return nullptr;
    const json& s = doc.at(key);
    if (!s.is_object()) {
      errors_.push_back(key + ": expected an object");
      return nullptr;
    }
    return &s;
  }

  void known_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (!allowed.count(it.key())) errors_.push_back(path + it.key() + ": unknown key");
    }
  }

  template <class T>
  void get(const json* obj, const std::string& path, const char* key, T& out) {
    if (obj == nullptr || !obj->contains(key)) return;
    const json& v = obj->at(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw std::runtime_error("");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer() && !v.is_number_unsigned()) throw std::runtime_error("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw std::runtime_error("");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw std::runtime_error("");
      }
      out = v.get<T>();
    } catch (const std::exception&) {
      errors_.push_back(path + key + ": wrong type");
    }
  }

  void get_optional(const json* obj, const std::string& path, const char* key,
                    std::optional<double>& out) {
    if (obj == nullptr || !obj->contains(key) || obj->at(key).is_null()) return;
    double v = 0.0;
    get(obj, path, key, v);
    out = v;
  }

  void get_point(const json* obj, const std::string& path, const char* key, Point& out) {
    if (obj == nullptr || !obj->contains(key)) return;
    const json& v = obj->at(key);
    if (v.is_number()) {
      out = {v.get<double>(), 0.0};
      return;
    }
    if (!v.is_array() || v.empty() || v.size() > 2 ||
        !std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); })) {
      errors_.push_back(path + key + ": expected a number or an array of 1 or 2 numbers");
      return;
    }
    out = {v[0].get<double>(), v.size() > 1 ? v[1].get<double>() : 0.0};
  }

  void get_list(const json* obj, const std::string& path, const char* key, std::vector<double>& out) {
    if (obj == nullptr || !obj->contains(key)) return;
    const json& v = obj->at(key);
    if (!v.is_array() || !std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); })) {
      errors_.push_back(path + key + ": expected an array of numbers");
      return;
    }
    out = v.get<std::vector<double>>();
  }

  template <class E, class F>
  void get_enum(const json* obj, const std::string& path, const char* key, E& out, F parse) {
    std::string name;
    bool present = obj != nullptr && obj->contains(key);
    if (!present) return;
    get(obj, path, key, name);
    try {
      out = parse(name);
    } catch (const Error&) {
      errors_.push_back(path + key + ": unknown id '" + name + "'");
    }
  }

  void require(bool ok, const std::string& message) {
    if (!ok) errors_.push_back(message);
  }

 private:
  std::vector<std::string>& errors_;
};

DatumKind datum_from_string(const std::string& name) {
  if (name == "bump") return DatumKind::bump;
  if (name == "gaussian") return DatumKind::gaussian;
  if (name == "barenblatt") return DatumKind::barenblatt;
  if (name == "two_bumps") return DatumKind::two_bumps;
  if (name == "from_file") return DatumKind::from_file;
  throw Error(ErrorCode::invalid_argument, "unknown initial datum '" + name + "'");
}

SnapshotMode snapshot_mode_from_string(const std::string& name) {
  if (name == "land") return SnapshotMode::land;
  if (name == "interpolate") return SnapshotMode::interpolate;
  throw Error(ErrorCode::invalid_argument, "unknown snapshot mode '" + name + "'");
}

json point_json(const Point& p, int dim) {
  return dim == 1 ? json::array({p[0]}) : json::array({p[0], p[1]});
}

/// Fraction of the cell centred at x with side h covered by the open ball.
double cell_coverage(const Point& x, double h, int dim, const Point& c, double radius) {
  if (dim == 1) {
    const double lo = std::max(x[0] - 0.5 * h, c[0] - radius);
    const double hi = std::min(x[0] + 0.5 * h, c[0] + radius);
    return std::max(hi - lo, 0.0) / h;
  }
  const double d = distance(x, c);
  const double half_diag = 0.5 * std::sqrt(2.0) * h;
  if (d + half_diag < radius) return 1.0;
  if (d - half_diag >= radius) return 0.0;
  constexpr int sub = 16;
  int inside = 0;
  for (int a = 0; a < sub; ++a) {
    for (int b = 0; b < sub; ++b) {
      const Point y{x[0] + ((a + 0.5) / sub - 0.5) * h, x[1] + ((b + 0.5) / sub - 0.5) * h};
      if (distance(y, c) < radius) ++inside;
    }
  }
  return static_cast<double>(inside) / (sub * sub);
}

void require_inside(const Grid& grid, const Point& c, double radius, const std::string& what) {
  const double L = grid.half_width();
  for (int d = 0; d < grid.dim(); ++d) {
    if (c[d] - radius < -L || c[d] + radius > L) {
      throw Error(ErrorCode::invalid_argument, what + " support exceeds the box");
    }
  }
}

void add_top_hat(Field& u, const Point& c, double radius, double height) {
  const Grid& g = u.grid;
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] += height * cell_coverage(g.center(i), g.spacing(), g.dim(), c, radius);
  }
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

const Snapshot& snapshot_at(const Trajectory& tr, double t) {
  for (const Snapshot& s : tr.snapshots) {
    if (std::abs(s.time - t) <= 1e-9 * std::max(1.0, t)) return s;
  }
  throw Error(ErrorCode::invalid_argument, "no snapshot at t = " + std::to_string(t));
}

double param(const json& p, const char* key, double fallback) {
  return p.contains(key) ? p.at(key).get<double>() : fallback;
}

std::vector<double> param_list(const json& p, const char* key, std::vector<double> fallback) {
  return p.contains(key) ? p.at(key).get<std::vector<double>>() : fallback;
}

Point param_point(const json& p, const char* key) {
  if (!p.contains(key)) return {0.0, 0.0};
  const json& v = p.at(key);
  if (v.is_number()) return {v.get<double>(), 0.0};
  return {v.at(0).get<double>(), v.size() > 1 ? v.at(1).get<double>() : 0.0};
}

/// Times a check needs to find among the snapshots.
std::vector<double> check_times(const CheckSpec& c) {
  if (c.id == "positivity_harnack" || c.id == "positivity_box" || c.id == "decay_rate" ||
      c.id == "elliptic_supersolution") {
    return {param(c.params, "t", 1.0)};
  }
  return {};
}

}  // namespace

const char* to_string(DatumKind kind) noexcept {
  switch (kind) {
    case DatumKind::bump:
      return "bump";
    case DatumKind::gaussian:
      return "gaussian";
    case DatumKind::barenblatt:
      return "barenblatt";
    case DatumKind::two_bumps:
      return "two_bumps";
    case DatumKind::from_file:
      return "from_file";
  }
  return "unknown";
}

const std::vector<std::string>& known_check_ids() {
  static const std::vector<std::string> ids{
      "mass_conservation", "smoothing",  "positivity_harnack", "positivity_box",
      "monotonicity",      "tail_control", "extinction",       "decay_rate",
      "elliptic_supersolution", "asymptotics"};
  return ids;
}

ScenarioConfig config_from_json(const json& doc) {
  std::vector<std::string> errors;
  Reader rd(errors);
  ScenarioConfig cfg;
  if (!doc.is_object()) throw ConfigError({"configuration root must be an object"});
  rd.known_keys(doc, "", {"grid", "kernel", "nonlinearity", "initial", "solver", "checks",
                          "output_dir", "seed"});

  if (const json* g = rd.section(doc, "grid")) {
    rd.known_keys(*g, "grid.", {"dim", "half_width", "points", "boundary"});
    rd.get(g, "grid.", "dim", cfg.grid.dim);
    rd.get(g, "grid.", "half_width", cfg.grid.half_width);
    rd.get(g, "grid.", "points", cfg.grid.points);
    rd.get_enum(g, "grid.", "boundary", cfg.grid.mode, boundary_mode_from_string);
  }
  rd.require(cfg.grid.dim == 1 || cfg.grid.dim == 2, "grid.dim: must be 1 or 2");
  rd.require(cfg.grid.half_width > 0.0, "grid.half_width: must be positive");
  rd.require(cfg.grid.points >= 16 && cfg.grid.points % 2 == 0,
             "grid.points: must be even and at least 16");

  if (const json* k = rd.section(doc, "kernel")) {
    rd.known_keys(*k, "kernel.", {"family", "sigma", "epsilon", "modulation"});
    rd.get_enum(k, "kernel.", "family", cfg.kernel.family, kernel_family_from_string);
    rd.get(k, "kernel.", "sigma", cfg.kernel.sigma);
    rd.get(k, "kernel.", "epsilon", cfg.kernel.epsilon);
    rd.get_enum(k, "kernel.", "modulation", cfg.kernel.modulation, modulation_from_string);
  }
  rd.require(cfg.kernel.sigma > 0.0 && cfg.kernel.sigma < 2.0,
             "kernel.sigma: must lie in the open interval (0, 2)");
  rd.require(cfg.kernel.epsilon >= 0.0 && cfg.kernel.epsilon < 1.0,
             "kernel.epsilon: must lie in [0, 1)");
  if (cfg.kernel.family == KernelFamily::midpoint_general) {
    rd.require(cfg.kernel.sigma < 1.0, "kernel.sigma: midpoint_general needs sigma < 1");
  }

  if (const json* n = rd.section(doc, "nonlinearity")) {
    rd.known_keys(*n, "nonlinearity.", {"family", "m", "epsilon", "A", "cap"});
    rd.get_enum(n, "nonlinearity.", "family", cfg.nonlinearity.family,
                nonlinearity_family_from_string);
    rd.get(n, "nonlinearity.", "m", cfg.nonlinearity.m);
    rd.get(n, "nonlinearity.", "epsilon", cfg.nonlinearity.epsilon);
    rd.get_optional(n, "nonlinearity.", "A", cfg.nonlinearity.A);
    rd.get_optional(n, "nonlinearity.", "cap", cfg.nonlinearity.cap);
  }
  rd.require(cfg.nonlinearity.m > 0.0 && cfg.nonlinearity.m < 1.0,
             "nonlinearity.m: fast diffusion needs 0 < m < 1 (phi' unbounded at 0)");
  rd.require(cfg.nonlinearity.epsilon >= 0.0, "nonlinearity.epsilon: must be nonnegative");
  if (cfg.nonlinearity.A) rd.require(*cfg.nonlinearity.A > 0.0, "nonlinearity.A: must be positive");
  if (cfg.nonlinearity.cap) rd.require(*cfg.nonlinearity.cap > 0.0, "nonlinearity.cap: must be positive");

  if (const json* d = rd.section(doc, "initial")) {
    rd.known_keys(*d, "initial.", {"kind", "center", "radius", "height", "scale", "mass", "t0",
                                   "center2", "radius2", "height2", "path"});
    InitialDatum& in = cfg.initial;
    rd.get_enum(d, "initial.", "kind", in.kind, datum_from_string);
    rd.get_point(d, "initial.", "center", in.center);
    rd.get(d, "initial.", "radius", in.radius);
    rd.get(d, "initial.", "height", in.height);
    rd.get(d, "initial.", "scale", in.scale);
    rd.get(d, "initial.", "mass", in.mass);
    rd.get(d, "initial.", "t0", in.t0);
    rd.get_point(d, "initial.", "center2", in.center2);
    rd.get(d, "initial.", "radius2", in.radius2);
    rd.get(d, "initial.", "height2", in.height2);
    rd.get(d, "initial.", "path", in.path);
  }
  {
    const InitialDatum& in = cfg.initial;
    rd.require(in.radius > 0.0 && in.radius2 > 0.0, "initial.radius: must be positive");
    rd.require(in.height >= 0.0 && in.height2 >= 0.0, "initial.height: must be nonnegative");
    rd.require(in.scale > 0.0, "initial.scale: must be positive");
    rd.require(in.mass > 0.0, "initial.mass: must be positive");
    rd.require(in.t0 > 0.0, "initial.t0: must be positive");
    if (in.kind == DatumKind::from_file) rd.require(!in.path.empty(), "initial.path: required for from_file");
    if (in.kind == DatumKind::barenblatt) {
      const double mc = critical_exponent(cfg.grid.dim, cfg.kernel.sigma);
      rd.require(cfg.nonlinearity.m > mc,
                 "initial.kind: barenblatt data need m > m_c = (N - sigma)_+ / N");
    }
  }

  if (const json* s = rd.section(doc, "solver")) {
    rd.known_keys(*s, "solver.", {"dt_initial", "dt_min", "dt_max", "dt_relative_max", "dt_growth",
                                  "t_end", "newton_tol", "newton_max_iter", "snapshot_times",
                                  "snapshot_mode", "extinction_floor", "dense_limit", "linear_tol"});
    SolverConfig& sc = cfg.solver;
    rd.get(s, "solver.", "dt_initial", sc.dt_initial);
    rd.get(s, "solver.", "dt_min", sc.dt_min);
    rd.get(s, "solver.", "dt_max", sc.dt_max);
    rd.get(s, "solver.", "dt_relative_max", sc.dt_relative_max);
    rd.get(s, "solver.", "dt_growth", sc.dt_growth);
    rd.get(s, "solver.", "t_end", sc.t_end);
    rd.get(s, "solver.", "newton_tol", sc.newton_tol);
    rd.get(s, "solver.", "newton_max_iter", sc.newton_max_iter);
    rd.get_list(s, "solver.", "snapshot_times", sc.snapshot_times);
    rd.get_enum(s, "solver.", "snapshot_mode", sc.snapshot_mode, snapshot_mode_from_string);
    rd.get(s, "solver.", "extinction_floor", sc.extinction_floor);
    rd.get(s, "solver.", "dense_limit", sc.dense_limit);
    rd.get(s, "solver.", "linear_tol", sc.linear_tol);
  }
  try {
    cfg.solver.validate();
  } catch (const Error& e) {
    errors.push_back(std::string("solver: ") + e.what());
  }

  if (doc.contains("checks")) {
    const json& list = doc.at("checks");
    if (!list.is_array()) {
      errors.push_back("checks: expected an array");
    } else {
      const auto& ids = known_check_ids();
      for (std::size_t i = 0; i < list.size(); ++i) {
        const json& item = list[i];
        CheckSpec c;
        if (item.is_string()) {
          c.id = item.get<std::string>();
        } else if (item.is_object() && item.contains("id") && item.at("id").is_string()) {
          c.id = item.at("id").get<std::string>();
          c.params = item;
          c.params.erase("id");
        } else {
          errors.push_back("checks[" + std::to_string(i) + "]: expected an id or an object with an id");
          continue;
        }
        if (std::find(ids.begin(), ids.end(), c.id) == ids.end()) {
          errors.push_back("checks[" + std::to_string(i) + "]: unknown check id '" + c.id + "'");
          continue;
        }
        for (auto it = c.params.begin(); it != c.params.end(); ++it) {
          const json& v = it.value();
          const bool numeric = v.is_number() || v.is_boolean() ||
                               (v.is_array() && std::all_of(v.begin(), v.end(),
                                                            [](const json& e) { return e.is_number(); }));
          if (!numeric) errors.push_back("checks." + c.id + "." + it.key() + ": expected numbers");
        }
        if (c.id == "positivity_harnack") {
          const double p = c.params.value("p", 1.0);
          const int N = cfg.grid.dim;
          const double upper = N > cfg.kernel.sigma ? N / (N - cfg.kernel.sigma) : HUGE_VAL;
          rd.require(p >= 1.0 && p < upper, "checks.positivity_harnack.p: outside the admissible range [1, N/(N-sigma)_+)");
        }
        if (c.id == "asymptotics") {
          rd.require(cfg.nonlinearity.m > critical_exponent(cfg.grid.dim, cfg.kernel.sigma),
                     "checks.asymptotics: requires m > m_c");
        }
        cfg.checks.push_back(std::move(c));
      }
    }
  }

  if (doc.contains("output_dir")) {
    rd.get(&doc, "", "output_dir", cfg.output_dir);
  }
  if (doc.contains("seed")) {
    rd.get(&doc, "", "seed", cfg.seed);
  }
  if (!errors.empty()) throw ConfigError(errors);
  return cfg;
}

json to_json(const ScenarioConfig& cfg) {
  json doc;
  const int dim = cfg.grid.dim;
  doc["grid"] = {{"dim", dim},
                 {"half_width", cfg.grid.half_width},
                 {"points", cfg.grid.points},
                 {"boundary", to_string(cfg.grid.mode)}};
  doc["kernel"] = {{"family", to_string(cfg.kernel.family)},
                   {"sigma", cfg.kernel.sigma},
                   {"epsilon", cfg.kernel.epsilon},
                   {"modulation", to_string(cfg.kernel.modulation)}};
  json nl = {{"family", to_string(cfg.nonlinearity.family)},
             {"m", cfg.nonlinearity.m},
             {"epsilon", cfg.nonlinearity.epsilon}};
  nl["A"] = cfg.nonlinearity.A ? json(*cfg.nonlinearity.A) : json(nullptr);
  nl["cap"] = cfg.nonlinearity.cap ? json(*cfg.nonlinearity.cap) : json(nullptr);
  doc["nonlinearity"] = nl;
  const InitialDatum& in = cfg.initial;
  doc["initial"] = {{"kind", to_string(in.kind)},       {"center", point_json(in.center, dim)},
                    {"radius", in.radius},              {"height", in.height},
                    {"scale", in.scale},                {"mass", in.mass},
                    {"t0", in.t0},                      {"center2", point_json(in.center2, dim)},
                    {"radius2", in.radius2},            {"height2", in.height2},
                    {"path", in.path}};
  const SolverConfig& s = cfg.solver;
  doc["solver"] = {{"dt_initial", s.dt_initial},
                   {"dt_min", s.dt_min},
                   {"dt_max", s.dt_max},
                   {"dt_relative_max", s.dt_relative_max},
                   {"dt_growth", s.dt_growth},
                   {"t_end", s.t_end},
                   {"newton_tol", s.newton_tol},
                   {"newton_max_iter", s.newton_max_iter},
                   {"snapshot_times", s.snapshot_times},
                   {"snapshot_mode", s.snapshot_mode == SnapshotMode::land ? "land" : "interpolate"},
                   {"extinction_floor", s.extinction_floor},
                   {"dense_limit", s.dense_limit},
                   {"linear_tol", s.linear_tol}};
  json checks = json::array();
  for (const CheckSpec& c : cfg.checks) {
    json item = c.params;
    item["id"] = c.id;
    checks.push_back(item);
  }
  doc["checks"] = checks;
  doc["output_dir"] = cfg.output_dir;
  doc["seed"] = cfg.seed;
  return doc;
}

json load_config_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open configuration file '" + path + "'"});
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError({"malformed configuration file '" + path + "': " + e.what()});
  }
  if (!doc.is_object()) throw ConfigError({"configuration file '" + path + "' is not an object"});
  return doc;
}

ScenarioConfig load_config(const std::string& path) {
  return config_from_json(load_config_document(path));
}

void save_config(const ScenarioConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write '" + path + "'");
  out << to_json(config).dump(2) << '\n';
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError({"override '" + assignment + "' is not of the form key=value"});
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &doc;
  std::stringstream parts(key);
  std::string part;
  std::vector<std::string> path;
  while (std::getline(parts, part, '.')) path.push_back(part);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    json& next = (*node)[path[i]];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) throw ConfigError({"override '" + key + "' traverses a non-object"});
    node = &next;
  }
  (*node)[path.back()] = value;
}

Grid build_grid(const ScenarioConfig& c) {
  return make_grid(c.grid.dim, c.grid.half_width, c.grid.points, c.grid.mode);
}

KernelSpec build_kernel(const ScenarioConfig& c) {
  const int N = c.grid.dim;
  switch (c.kernel.family) {
    case KernelFamily::fractional_power:
      return KernelSpec::fractional_power(N, c.kernel.sigma);
    case KernelFamily::convolution_modulated:
      return KernelSpec::convolution_modulated(N, c.kernel.sigma, c.kernel.epsilon, c.kernel.modulation);
    case KernelFamily::midpoint_general:
      return KernelSpec::midpoint_general(N, c.kernel.sigma, c.kernel.epsilon);
  }
  throw Error(ErrorCode::invalid_argument, "unknown kernel family");
}

NonlinearitySpec build_nonlinearity(const ScenarioConfig& c) {
  const NonlinearityConfig& n = c.nonlinearity;
  NonlinearitySpec spec = n.family == NonlinearityFamily::pure_power
                              ? NonlinearitySpec::pure_power(n.m, n.A)
                              : NonlinearitySpec::perturbed_power(n.m, n.epsilon, n.A);
  if (n.cap) spec = modify_for_boundedness(spec, *n.cap);
  return spec;
}

SelfSimilarParams build_self_similar_params(const ScenarioConfig& c, double M) {
  const KernelSpec kernel = build_kernel(c);
  const auto c1 = kernel.far_field_constant();
  if (!c1) {
    throw Error(ErrorCode::not_applicable, "kernel has no far-field limit constant");
  }
  return make_self_similar_params(c.grid.dim, c.nonlinearity.m, c.kernel.sigma, M, *c1,
                                  build_nonlinearity(c).c2());
}

Field materialize_initial_datum(const InitialDatum& spec, const Grid& grid,
                                const SelfSimilarParams* params) {
  Field u(grid);
  const int N = grid.dim();
  switch (spec.kind) {
    case DatumKind::bump:
      require_inside(grid, spec.center, spec.radius, "bump");
      add_top_hat(u, spec.center, spec.radius, spec.height);
      break;
    case DatumKind::two_bumps:
      require_inside(grid, spec.center, spec.radius, "first bump");
      require_inside(grid, spec.center2, spec.radius2, "second bump");
      add_top_hat(u, spec.center, spec.radius, spec.height);
      add_top_hat(u, spec.center2, spec.radius2, spec.height2);
      break;
    case DatumKind::gaussian: {
      // Reject data with more than 1e-6 of their mass outside the box.
      double inside = 1.0;
      const double L = grid.half_width();
      for (int d = 0; d < N; ++d) {
        const double s = spec.scale * std::sqrt(2.0);
        inside *= 0.5 * (std::erf((L - spec.center[d]) / s) + std::erf((L + spec.center[d]) / s));
      }
      if (inside < 1.0 - 1e-6) throw Error(ErrorCode::invalid_argument, "gaussian support exceeds the box");
      const double norm = spec.mass / std::pow(2.0 * M_PI * spec.scale * spec.scale, 0.5 * N);
      for (std::size_t i = 0; i < u.size(); ++i) {
        const double r = distance(grid.center(i), spec.center);
        u[i] = norm * std::exp(-0.5 * r * r / (spec.scale * spec.scale));
      }
      break;
    }
    case DatumKind::barenblatt: {
      if (params == nullptr) {
        throw Error(ErrorCode::invalid_argument, "barenblatt datum needs self-similar parameters");
      }
      SelfSimilarParams p = *params;
      p.M = spec.mass;
      const Grid work(grid.dim(), grid.half_width(), grid.points_per_axis(), BoundaryMode::exterior_zero);
      const ProfileResult res = compute_profile(p, work);
      const Field f = reconstruct(res.profile, work, spec.t0);
      u.values = f.values;
      break;
    }
    case DatumKind::from_file: {
      FieldFile file = read_field_binary(spec.path, grid.boundary_mode());
      if (file.field.grid != grid) throw Error(ErrorCode::grid_mismatch, "initial datum file grid differs");
      u = std::move(file.field);
      break;
    }
  }
  return u;
}

ScenarioOutcome run_scenario(const ScenarioConfig& config) {
  const Grid grid = build_grid(config);
  const KernelSpec kernel = build_kernel(config);
  const NonlinearitySpec phi = build_nonlinearity(config);
  AssemblyOptions assembly;
  assembly.validation_seed = config.seed;
  const DiscreteOperator op = DiscreteOperator::assemble_quadrature(grid, kernel, assembly);

  std::optional<SelfSimilarParams> params;
  if (config.initial.kind == DatumKind::barenblatt) {
    params = build_self_similar_params(config, config.initial.mass);
  }
  const Field u0 = materialize_initial_datum(config.initial, grid, params ? &*params : nullptr);

  SolverConfig solver = config.solver;
  for (const CheckSpec& c : config.checks) {
    for (double t : check_times(c)) solver.snapshot_times.push_back(t);
  }
  std::sort(solver.snapshot_times.begin(), solver.snapshot_times.end());
  solver.snapshot_times.erase(std::unique(solver.snapshot_times.begin(), solver.snapshot_times.end()),
                              solver.snapshot_times.end());

  ScenarioOutcome out;
  out.trajectory = run(op, phi, u0, solver);
  const Trajectory& tr = out.trajectory;
  DiagnosticsReport& report = out.report;
  report.set_metadata("grid", std::to_string(grid.dim()) + "D L=" + std::to_string(grid.half_width()) +
                                  " n=" + std::to_string(grid.points_per_axis()) + " " +
                                  to_string(grid.boundary_mode()));
  report.set_metadata("kernel", std::string(to_string(kernel.family())) +
                                    " sigma=" + std::to_string(kernel.sigma()) +
                                    " epsilon=" + std::to_string(kernel.epsilon()));
  report.set_metadata("nonlinearity", std::string(to_string(phi.family())) + " m=" +
                                          std::to_string(phi.m()) + " A=" + std::to_string(phi.A()));
  report.set_metadata("config_hash", hex(fnv1a(to_json(config).dump())));
  report.set_metadata("seed", std::to_string(config.seed));

  const int N = grid.dim();
  const double sigma = kernel.sigma();
  const double m = phi.m();
  const double mass = integrate(u0);
  for (const CheckSpec& c : config.checks) {
    const json& p = c.params;
    try {
      if (c.id == "mass_conservation") {
        MassOptions o;
        o.drift_tolerance = param(p, "drift_tolerance", o.drift_tolerance);
        o.leak_tolerance = param(p, "leak_tolerance", o.leak_tolerance);
        report.add(check_mass_conservation(tr, o));
      } else if (c.id == "smoothing") {
        SmoothingOptions o;
        o.tolerance = param(p, "tolerance", o.tolerance);
        o.min_decades = param(p, "min_decades", o.min_decades);
        report.add(check_smoothing(tr, m, sigma, N, o));
      } else if (c.id == "positivity_harnack") {
        HarnackOptions o;
        o.p = param(p, "p", 1.0);
        o.R = param(p, "R", 1.0);
        o.x0 = param_point(p, "x0");
        o.t = param(p, "t", 1.0);
        o.sigma = sigma;
        o.extinction_floor = solver.extinction_floor;
        o.on_solution = p.value("on_solution", false);
        report.add(check_positivity_harnack(snapshot_at(tr, o.t).field, phi, o));
      } else if (c.id == "positivity_box") {
        const double t = param(p, "t", 1.0);
        report.add(check_positive_on_box(snapshot_at(tr, t).field, param_point(p, "center"),
                                         param(p, "half_width", 10.0 * config.initial.radius),
                                         param(p, "floor", solver.extinction_floor)));
      } else if (c.id == "monotonicity") {
        report.add(check_monotonicity(tr, phi, solver.newton_tol));
      } else if (c.id == "tail_control") {
        TailOptions o;
        o.radii = param_list(p, "radii", {grid.half_width() / 16, grid.half_width() / 8, grid.half_width() / 4});
        o.t_min = param(p, "t_min", 0.0);
        o.t_max = param(p, "t_max", solver.t_end);
        o.N_over_alpha = N * (m - 1.0) + sigma;
        o.m = m;
        o.slope_tolerance = param(p, "slope_tolerance", o.slope_tolerance);
        o.center = param_point(p, "center");
        report.add(check_tail_control(tr, o));
      } else if (c.id == "extinction") {
        ExtinctionOptions o;
        o.extinction_floor = solver.extinction_floor;
        report.add(check_extinction(tr, m, sigma, N, o));
      } else if (c.id == "decay_rate") {
        const double t = param(p, "t", 1.0);
        report.add(check_decay_rate(snapshot_at(tr, t).field, mass,
                                    param_list(p, "radii", {1.0, 2.0, 4.0, 8.0}), sigma,
                                    param_point(p, "center")));
      } else if (c.id == "elliptic_supersolution") {
        const double t = param(p, "t", 1.0);
        report.add(check_elliptic_supersolution(op, snapshot_at(tr, t).field, phi, t,
                                                param(p, "tolerance", 1e-6)));
      } else if (c.id == "asymptotics") {
        const std::vector<double> ladder = param_list(p, "ladder", {1.0, 4.0, 16.0, 64.0, 256.0});
        SolverConfig fam = config.solver;
        fam.dt_relative_max = param(p, "dt_relative_max", fam.dt_relative_max > 0 ? fam.dt_relative_max : 0.02);
        const auto family = run_rescaled_family(config, ladder, fam);
        const SelfSimilarParams sp = build_self_similar_params(config, mass);
        ProfileOptions po;
        po.dt_max = param(p, "profile_dt_max", po.dt_max);
        const double profile_L = param(p, "profile_half_width", grid.half_width());
        const ProfileResult prof = compute_profile(
            sp, Grid(N, profile_L, grid.points_per_axis(), BoundaryMode::exterior_zero), po);
        AsymptoticOptions o;
        o.analysis_radius = param(p, "analysis_radius", o.analysis_radius);
        o.l1_fraction = param(p, "l1_fraction", o.l1_fraction);
        o.decreasing_from = static_cast<std::size_t>(param(p, "decreasing_from", 0.0));
        Field profile(grid, reconstruct(prof.profile, Grid(N, grid.half_width(), grid.points_per_axis(),
                                                           BoundaryMode::exterior_zero), 1.0).values);
        report.add(check_asymptotics(family, profile, mass, m, sigma, N, o));
      }
    } catch (const Error& e) {
      CheckRecord r;
      r.name = c.id;
      r.tag = "precondition";
      r.status = CheckStatus::fail;
      r.message = e.what();
      report.add(std::move(r));
    }
  }
  return out;
}

Field rescale_datum(const ScenarioConfig& config, const Field& u0, double k, double alpha) {
  const Grid& grid = u0.grid;
  const int N = grid.dim();
  const double a = std::pow(k, alpha);
  const double s = std::pow(k, alpha / N);
  InitialDatum d = config.initial;
  switch (d.kind) {
    case DatumKind::bump:
    case DatumKind::two_bumps:
      d.center = {d.center[0] / s, d.center[1] / s};
      d.center2 = {d.center2[0] / s, d.center2[1] / s};
      d.radius /= s;
      d.radius2 /= s;
      d.height *= a;
      d.height2 *= a;
      return materialize_initial_datum(d, grid);
    case DatumKind::gaussian:
      d.center = {d.center[0] / s, d.center[1] / s};
      d.scale /= s;
      return materialize_initial_datum(d, grid);
    case DatumKind::barenblatt: {
      d.t0 /= k;
      const SelfSimilarParams p = build_self_similar_params(config, d.mass);
      return materialize_initial_datum(d, grid, &p);
    }
    case DatumKind::from_file:
      return rescale_solution(u0, k, alpha, grid).field;
  }
  return u0;
}

std::vector<AsymptoticEntry> run_rescaled_family(const ScenarioConfig& config,
                                                 const std::vector<double>& ladder,
                                                 const SolverConfig& solver) {
  const Grid grid = build_grid(config);
  const KernelSpec kernel = build_kernel(config);
  const NonlinearitySpec phi = build_nonlinearity(config);
  const double alpha = similarity_exponent(grid.dim(), phi.m(), kernel.sigma());
  std::optional<SelfSimilarParams> params;
  if (config.initial.kind == DatumKind::barenblatt) {
    params = build_self_similar_params(config, config.initial.mass);
  }
  const Field u0 = materialize_initial_datum(config.initial, grid, params ? &*params : nullptr);
  SolverConfig sc = solver;
  sc.t_end = 1.0;
  sc.snapshot_times = {1.0};
  // Members of the family are independent runs sharing only immutable specs.
  std::vector<AsymptoticEntry> family(ladder.size(), AsymptoticEntry{0.0, Field(grid)});
  parallel_for(ladder.size(), [&](std::size_t idx) {
    const double k = ladder[idx];
    AssemblyOptions assembly;
    assembly.validation_seed = config.seed;
    const DiscreteOperator op =
        DiscreteOperator::assemble_quadrature(grid, rescale(kernel, k, alpha), assembly);
    const Field start = rescale_datum(config, u0, k, alpha);
    const Trajectory tr = run(op, rescale_phi(phi, k, alpha), start, sc);
    if (tr.partial) throw Error(ErrorCode::newton_failure, "rescaled run did not reach t = 1");
    family[idx] = {k, tr.snapshots.back().field};
  });
  return family;
}

json to_json(const CheckRecord& r) {
  json values = json::object();
  for (const auto& [k, v] : r.values) values[k] = std::isfinite(v) ? json(v) : json(std::to_string(v));
  json curves = json::array();
  for (const Curve& c : r.curves) curves.push_back(c.name);
  return {{"name", r.name},           {"tag", r.tag},
          {"status", to_string(r.status)}, {"passed", r.passed()},
          {"tolerance", r.tolerance}, {"values", values},
          {"curves", curves},         {"message", r.message}};
}

json to_json(const DiagnosticsReport& report) {
  json records = json::array();
  for (const CheckRecord& r : report.records()) records.push_back(to_json(r));
  return {{"metadata", report.metadata()}, {"all_passed", report.all_passed()}, {"records", records}};
}

void write_curve_csv(const Curve& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write '" + path + "'");
  out.precision(17);
  for (std::size_t i = 0; i < curve.columns.size(); ++i) out << (i ? "," : "") << curve.columns[i];
  out << '\n';
  for (const auto& row : curve.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

void write_artifacts(const ScenarioConfig& config, const ScenarioOutcome& outcome) {
  const fs::path root(config.output_dir);
  std::error_code ec;
  for (const char* sub : {"snapshots", "checks", "curves"}) {
    fs::create_directories(root / sub, ec);
    if (ec) throw Error(ErrorCode::io_error, "cannot create '" + (root / sub).string() + "'");
  }
  const Trajectory& tr = outcome.trajectory;
  json files = json::array();

  {
    std::ofstream mass(root / "mass.csv");
    if (!mass) throw Error(ErrorCode::io_error, "cannot write mass.csv");
    mass.precision(17);
    mass << "t,mass,leaked_mass,max_norm,dt,newton_iterations\n";
    if (!tr.snapshots.empty()) {
      const Snapshot& s = tr.snapshots.front();
      mass << s.time << ',' << integrate(s.field) << ',' << s.leaked_mass << ','
           << max_norm(s.field.view()) << ",0,0\n";
    }
    for (const StepRecord& h : tr.history) {
      mass << h.time << ',' << h.mass << ',' << h.leaked_mass << ',' << h.max_norm << ',' << h.dt
           << ',' << h.newton_iterations << '\n';
    }
    files.push_back("mass.csv");
  }
  for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "snap_%04zu.bin", k);
    write_field_binary(tr.snapshots[k].field, tr.snapshots[k].time, (root / "snapshots" / name).string());
    files.push_back(std::string("snapshots/") + name);
  }
  const auto& records = outcome.report.records();
  for (std::size_t k = 0; k < records.size(); ++k) {
    char prefix[16];
    std::snprintf(prefix, sizeof prefix, "%02zu_", k);
    const std::string base = prefix + records[k].name;
    std::ofstream out(root / "checks" / (base + ".json"));
    if (!out) throw Error(ErrorCode::io_error, "cannot write check record");
    out << to_json(records[k]).dump(2) << '\n';
    files.push_back("checks/" + base + ".json");
    for (const Curve& c : records[k].curves) {
      const std::string file = base + "_" + c.name + ".csv";
      write_curve_csv(c, (root / "curves" / file).string());
      files.push_back("curves/" + file);
    }
  }
  json events = json::array();
  for (const Event& e : tr.events) events.push_back({{"time", e.time}, {"kind", to_string(e.kind)}});
  json manifest = {{"config", to_json(config)},
                   {"report", to_json(outcome.report)},
                   {"events", events},
                   {"partial", tr.partial},
                   {"leaked_mass", tr.leaked_mass},
                   {"files", files}};
  std::ofstream out(root / "manifest.json");
  if (!out) throw Error(ErrorCode::io_error, "cannot write manifest.json");
  out << manifest.dump(2) << '\n';
}

}  // namespace nlfd
