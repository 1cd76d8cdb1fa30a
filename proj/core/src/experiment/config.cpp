#include "uan/experiment/config.hpp"

#include "uan/errors.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace uan::experiment {

namespace {

const std::set<std::string> kAlgorithms = {"km-admissible", "iterate-union", "cyclic-projections",
                                           "cyclic-dr",     "cadr",          "ppa",
                                           "forward-backward", "douglas-rachford"};

std::string escape_pointer(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

std::string join(const std::string& path, const std::string& key) {
  return path + "/" + escape_pointer(key);
}
std::string join(const std::string& path, std::size_t index) {
  return path + "/" + std::to_string(index);
}

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError("field " + (path.empty() ? std::string("/") : path) + ": " + msg);
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) fail(join(path, key), "unknown key");
  }
}

const json& need(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) fail(join(path, key), "missing required key");
  return j.at(key);
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(path, "expected a finite number");
  return d;
}

double number_or(const json& j, const std::string& path, const char* key, double def) {
  return j.contains(key) ? as_number(j.at(key), join(path, key)) : def;
}

std::size_t as_count(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0) fail(path, "expected a nonnegative integer");
  return v.get<std::size_t>();
}

std::size_t count_or(const json& j, const std::string& path, const char* key, std::size_t def) {
  return j.contains(key) ? as_count(j.at(key), join(path, key)) : def;
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

std::string string_or(const json& j, const std::string& path, const char* key, std::string def) {
  return j.contains(key) ? as_string(j.at(key), join(path, key)) : def;
}

bool bool_or(const json& j, const std::string& path, const char* key, bool def) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_boolean()) fail(join(path, key), "expected true or false");
  return j.at(key).get<bool>();
}

std::vector<double> as_list(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], join(path, i)));
  return out;
}

Vector as_vector(const json& v, const std::string& path) {
  const auto list = as_list(v, path);
  if (list.empty()) fail(path, "expected a nonempty array");
  return Eigen::Map<const Vector>(list.data(), static_cast<Index>(list.size()));
}

std::vector<std::vector<double>> as_rows(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of arrays");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_list(v[i], join(path, i)));
  return out;
}

Matrix as_matrix(const json& v, const std::string& path) {
  const auto rows = as_rows(v, path);
  if (rows.empty() || rows.front().empty()) fail(path, "expected a nonempty matrix");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) fail(join(path, i), "ragged matrix row");
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      m(static_cast<Index>(i), static_cast<Index>(k)) = rows[i][k];
    }
  }
  return m;
}

Index as_dim(const json& v, const std::string& path) {
  const std::size_t n = as_count(v, path);
  if (n == 0) fail(path, "dimension must be positive");
  return static_cast<Index>(n);
}

// Runs a catalog constructor and reports library errors against `path`.
template <class F>
auto guarded(const std::string& path, F&& make) -> decltype(make()) {
  try {
    return make();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
}

ConvexSetPiece build_convex(const json& j, const std::string& path) {
  const std::string kind = as_string(need(j, path, "kind"), join(path, "kind"));
  if (kind == "affine") {
    check_keys(j, path, {"kind", "A", "b"});
    const Matrix a = as_matrix(need(j, path, "A"), join(path, "A"));
    const Vector b = as_vector(need(j, path, "b"), join(path, "b"));
    return guarded(path, [&] { return convex::affine_solutions(a, b); });
  }
  if (kind == "box") {
    check_keys(j, path, {"kind", "lo", "hi"});
    Vector lo = as_vector(need(j, path, "lo"), join(path, "lo"));
    Vector hi = as_vector(need(j, path, "hi"), join(path, "hi"));
    return guarded(path, [&] { return convex::box(lo, hi); });
  }
  if (kind == "ball") {
    check_keys(j, path, {"kind", "center", "radius"});
    Vector c = as_vector(need(j, path, "center"), join(path, "center"));
    const double r = as_number(need(j, path, "radius"), join(path, "radius"));
    return guarded(path, [&] { return convex::ball(c, r); });
  }
  if (kind == "halfspace") {
    check_keys(j, path, {"kind", "a", "beta"});
    Vector a = as_vector(need(j, path, "a"), join(path, "a"));
    const double beta = as_number(need(j, path, "beta"), join(path, "beta"));
    return guarded(path, [&] { return convex::halfspace(a, beta); });
  }
  if (kind == "singleton") {
    check_keys(j, path, {"kind", "point"});
    Vector p = as_vector(need(j, path, "point"), join(path, "point"));
    return guarded(path, [&] { return convex::singleton(p); });
  }
  if (kind == "subspace") {
    check_keys(j, path, {"kind", "dim", "support"});
    const Index n = as_dim(need(j, path, "dim"), join(path, "dim"));
    std::vector<Index> support;
    const json& s = need(j, path, "support");
    if (!s.is_array()) fail(join(path, "support"), "expected an array of indices");
    for (std::size_t i = 0; i < s.size(); ++i) {
      support.push_back(static_cast<Index>(as_count(s[i], join(join(path, "support"), i))));
    }
    return guarded(path, [&] { return convex::coordinate_subspace(n, support); });
  }
  if (kind == "span") {
    check_keys(j, path, {"kind", "point", "directions"});
    const Vector p = as_vector(need(j, path, "point"), join(path, "point"));
    const auto dirs = as_rows(need(j, path, "directions"), join(path, "directions"));
    Matrix d(p.size(), static_cast<Index>(dirs.size()));
    for (std::size_t c = 0; c < dirs.size(); ++c) {
      if (static_cast<Index>(dirs[c].size()) != p.size()) {
        fail(join(join(path, "directions"), c), "direction dimension differs from point");
      }
      for (Index r = 0; r < p.size(); ++r) d(r, static_cast<Index>(c)) = dirs[c][static_cast<std::size_t>(r)];
    }
    return guarded(path, [&] { return convex::affine_span(p, d); });
  }
  if (kind == "whole-space") {
    check_keys(j, path, {"kind", "dim"});
    const Index n = as_dim(need(j, path, "dim"), join(path, "dim"));
    return convex::whole_space(n);
  }
  fail(join(path, "kind"), "unknown convex set kind '" + kind + "'");
}

ConvexPiece build_piece(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  const std::string kind = as_string(need(j, path, "kind"), join(path, "kind"));
  if (kind == "quadratic") {
    check_keys(j, path, {"kind", "Q", "b", "c"});
    const Matrix q = as_matrix(need(j, path, "Q"), join(path, "Q"));
    const Vector b = j.contains("b") ? as_vector(j.at("b"), join(path, "b")) : Vector::Zero(q.rows());
    const double c = number_or(j, path, "c", 0.0);
    return guarded(path, [&] { return pieces::quadratic(q, b, c); });
  }
  if (kind == "l1" || kind == "l2") {
    check_keys(j, path, {"kind", "dim", "weight"});
    const Index n = as_dim(need(j, path, "dim"), join(path, "dim"));
    const double w = number_or(j, path, "weight", 1.0);
    return guarded(path, [&] { return kind == "l1" ? pieces::l1_norm(n, w) : pieces::l2_norm(n, w); });
  }
  if (kind == "indicator") {
    check_keys(j, path, {"kind", "set"});
    return pieces::indicator(build_convex(need(j, path, "set"), join(path, "set")));
  }
  if (kind.rfind("indicator-", 0) == 0) {
    json set = j;
    set["kind"] = kind.substr(std::string("indicator-").size());
    return pieces::indicator(build_convex(set, path));
  }
  fail(join(path, "kind"), "unknown function piece kind '" + kind + "'");
}

void check_dim(Index got, Index& dim, const std::string& path) {
  if (dim == 0) {
    dim = got;
  } else if (got != dim) {
    fail(path, "dimension " + std::to_string(got) + " differs from " + std::to_string(dim));
  }
}

ScheduleSpec parse_schedule(const json& j, const std::string& path) {
  ScheduleSpec s;
  if (j.is_number()) {
    s.values = {as_number(j, path)};
    return s;
  }
  const std::string kind = as_string(need(j, path, "kind"), join(path, "kind"));
  if (kind == "constant") {
    check_keys(j, path, {"kind", "lambda", "eps"});
    s.values = {as_number(need(j, path, "lambda"), join(path, "lambda"))};
  } else if (kind == "cyclic") {
    check_keys(j, path, {"kind", "values", "eps"});
    s.values = as_list(need(j, path, "values"), join(path, "values"));
    if (s.values.empty()) fail(join(path, "values"), "expected at least one value");
  } else {
    fail(join(path, "kind"), "schedule kind must be constant or cyclic");
  }
  s.kind = kind;
  s.eps = number_or(j, path, "eps", s.eps);
  if (!(s.eps > 0.0)) fail(join(path, "eps"), "must be positive");
  return s;
}

json schedule_json(const ScheduleSpec& s) {
  if (s.kind == "constant") return {{"kind", "constant"}, {"lambda", s.values.front()}, {"eps", s.eps}};
  return {{"kind", "cyclic"}, {"values", s.values}, {"eps", s.eps}};
}

void one_of(const std::string& value, std::initializer_list<const char*> options,
            const std::string& path) {
  std::string list;
  for (const char* o : options) {
    if (value == o) return;
    list += (list.empty() ? "" : ", ") + std::string(o);
  }
  fail(path, "'" + value + "' is not one of: " + list);
}

std::string parse_error_location(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  const std::size_t end = std::min(text.size(), byte > 0 ? byte - 1 : 0);
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

Schedule make_schedule(const ScheduleSpec& s) {
  Schedule out = s.kind == "constant" ? Schedule::constant(s.values.front()) : Schedule::cyclic(s.values);
  out.eps = s.eps;
  return out;
}

void validate_algorithm(const ExperimentConfig& c, const Problem& p) {
  const std::string path = "/algorithm";
  const auto& a = c.algorithm;
  auto need_sets = [&](std::size_t n) {
    if (p.sets.size() < n) {
      fail("/sets", "algorithm '" + a.name + "' needs at least " + std::to_string(n) + " sets");
    }
  };
  auto need_fn = [&](const std::optional<MinConvexFn>& fn, const char* key) {
    if (!fn) fail(std::string("/") + key, "algorithm '" + a.name + "' needs '" + key + "'");
  };
  if (a.name == "cyclic-projections" || a.name == "cyclic-dr" || a.name == "cadr") need_sets(2);
  if (a.name == "km-admissible") {
    need_sets(1);
    for (std::size_t i = 0; i < p.sets.size(); ++i) {
      if (p.sets[i].size() != 1) fail(join("/sets", i), "km-admissible needs convex sets");
    }
  }
  if (a.name == "iterate-union") {
    if (a.op == "prox") {
      need_fn(p.f, "f");
    } else {
      need_sets(a.op == "dr" ? 2 : 1);
    }
  }
  if (a.name == "ppa") need_fn(p.f, "f");
  if (a.name == "douglas-rachford") {
    need_fn(p.f, "f");
    need_fn(p.g, "g");
  }
  if (a.name == "forward-backward") {
    need_fn(p.g, "g");
    if (!p.smooth) fail("/smooth", "forward-backward needs 'smooth'");
  }
  const bool uses_gamma = a.name == "ppa" || a.name == "forward-backward" ||
                          a.name == "douglas-rachford" ||
                          (a.name == "iterate-union" && a.op == "prox");
  if (uses_gamma && !(a.gamma > 0.0)) fail(join(path, "gamma"), "gamma must be > 0");

  // Building the operator checks step-size windows; schedules are periodic,
  // so one period covers the whole run.
  const UnionMap t = guarded(join(path, "gamma"), [&] { return driving_operator(c, p); });
  const bool scheduled = a.name == "km-admissible" || a.name == "iterate-union" ||
                         a.name == "forward-backward" || a.name == "douglas-rachford";
  if (scheduled) {
    const double bound = a.name == "km-admissible" ? 2.0 : 1.0 / t.alpha();
    guarded(join(path, "schedule"), [&] {
      check_schedule(make_schedule(a.schedule), bound, a.schedule.values.size(), a.name);
      return 0;
    });
  }
}

}  // namespace

UnionConvexSet build_set(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  const std::string kind = as_string(need(j, path, "kind"), join(path, "kind"));
  if (kind == "sparsity") {
    check_keys(j, path, {"kind", "n", "s"});
    const Index n = as_dim(need(j, path, "n"), join(path, "n"));
    const auto s = static_cast<Index>(as_count(need(j, path, "s"), join(path, "s")));
    return guarded(path, [&] { return sparsity_set(n, s); });
  }
  if (kind == "union") {
    check_keys(j, path, {"kind", "pieces"});
    const json& list = need(j, path, "pieces");
    if (!list.is_array() || list.empty()) fail(join(path, "pieces"), "expected a nonempty array");
    std::vector<ConvexSetPiece> pieces;
    for (std::size_t i = 0; i < list.size(); ++i) {
      pieces.push_back(build_convex(list[i], join(join(path, "pieces"), i)));
    }
    return guarded(path, [&] { return UnionConvexSet(std::move(pieces)); });
  }
  return UnionConvexSet(build_convex(j, path));
}

MinConvexFn build_function(const json& j, const std::string& path) {
  if (j.is_object() && j.contains("min")) {
    check_keys(j, path, {"min"});
    const json& list = j.at("min");
    if (!list.is_array() || list.empty()) fail(join(path, "min"), "expected a nonempty array");
    std::vector<ConvexPiece> pieces;
    for (std::size_t i = 0; i < list.size(); ++i) {
      pieces.push_back(build_piece(list[i], join(join(path, "min"), i)));
    }
    return guarded(path, [&] { return MinConvexFn(std::move(pieces)); });
  }
  return guarded(path, [&] { return MinConvexFn(build_piece(j, path)); });
}

SmoothFn build_smooth(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  const std::string kind = as_string(need(j, path, "kind"), join(path, "kind"));
  if (kind == "quadratic") {
    check_keys(j, path, {"kind", "Q", "b"});
    const Matrix q = as_matrix(need(j, path, "Q"), join(path, "Q"));
    const Vector b = j.contains("b") ? as_vector(j.at("b"), join(path, "b")) : Vector::Zero(q.rows());
    return guarded(path, [&] { return SmoothFn::quadratic(q, b); });
  }
  if (kind == "zero") {
    check_keys(j, path, {"kind", "dim"});
    return SmoothFn::zero(as_dim(need(j, path, "dim"), join(path, "dim")));
  }
  fail(join(path, "kind"), "smooth kind must be quadratic or zero");
}

Problem build_problem(const ExperimentConfig& c) {
  Problem p;
  if (!c.sets.is_array()) fail("/sets", "expected an array");
  for (std::size_t i = 0; i < c.sets.size(); ++i) {
    p.sets.push_back(build_set(c.sets[i], join("/sets", i)));
    check_dim(p.sets.back().dim(), p.dim, join("/sets", i));
  }
  if (!c.f.is_null()) {
    p.f = build_function(c.f, "/f");
    check_dim(p.f->dim(), p.dim, "/f");
  }
  if (!c.g.is_null()) {
    p.g = build_function(c.g, "/g");
    check_dim(p.g->dim(), p.dim, "/g");
  }
  if (!c.smooth.is_null()) {
    p.smooth = build_smooth(c.smooth, "/smooth");
    check_dim(p.smooth->dim, p.dim, "/smooth");
  }
  if (p.dim == 0) fail("/", "config defines no sets or functions");
  return p;
}

UnionMap driving_operator(const ExperimentConfig& c, const Problem& p) {
  const auto& a = c.algorithm;
  auto projectors = [&] {
    std::vector<UnionMap> maps;
    for (const auto& s : p.sets) maps.push_back(project_union(s));
    return maps;
  };
  if (a.name == "km-admissible") {
    std::vector<AveragedMap> maps;
    for (const auto& s : p.sets) maps.push_back(project_union(s).piece(0));
    const std::size_t m = maps.size();
    return UnionMap::from_pieces(std::move(maps), [m](const Vector&) {
      IndexSet all(m);
      for (std::size_t i = 0; i < m; ++i) all[i] = i;
      return all;
    }, "projectors");
  }
  if (a.name == "cyclic-projections") return compose(projectors());
  if (a.name == "cyclic-dr") {
    std::vector<UnionMap> stages;
    for (std::size_t j = 0; j < p.sets.size(); ++j) {
      stages.push_back(dr_operator(p.sets[j], p.sets[(j + 1) % p.sets.size()]));
    }
    return compose(stages);
  }
  if (a.name == "cadr") {
    const UnionConvexSet& anchor = a.anchor_first ? p.sets.front() : p.sets.back();
    std::vector<UnionMap> stages;
    for (std::size_t j = 0; j < p.sets.size(); ++j) {
      const bool is_anchor = a.anchor_first ? j == 0 : j + 1 == p.sets.size();
      if (!is_anchor) stages.push_back(dr_operator(anchor, p.sets[j]));
    }
    return stages.size() == 1 ? stages.front() : compose(stages);
  }
  if (a.name == "iterate-union") {
    if (a.op == "project") return project_union(p.sets.front());
    if (a.op == "reflect") return reflect_union(p.sets.front());
    if (a.op == "dr") return dr_operator(p.sets[0], p.sets[1]);
    return prox_union(*p.f, a.gamma);
  }
  if (a.name == "ppa") return prox_union(*p.f, a.gamma);
  if (a.name == "forward-backward") return forward_backward_operator(*p.smooth, *p.g, a.gamma);
  if (a.name == "douglas-rachford") return douglas_rachford_operator(*p.f, *p.g, a.gamma);
  throw ConfigError("field /algorithm/name: unknown algorithm '" + a.name + "'");
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["seed"] = c.seed;
  j["sets"] = c.sets;
  if (!c.f.is_null()) j["f"] = c.f;
  if (!c.g.is_null()) j["g"] = c.g;
  if (!c.smooth.is_null()) j["smooth"] = c.smooth;
  const auto& a = c.algorithm;
  j["algorithm"] = {{"name", a.name},          {"gamma", a.gamma},
                    {"schedule", schedule_json(a.schedule)},
                    {"policy", a.policy},      {"control", a.control},
                    {"anchor_first", a.anchor_first}, {"operator", a.op}};
  if (c.x0.sampled()) {
    j["x0"] = {{"center", c.x0.center}, {"radius", c.x0.radius}};
  } else {
    j["x0"] = c.x0.point;
  }
  const auto& s = c.stop;
  j["stop"] = {{"step_tol", s.step_tol},         {"max_iters", s.max_iters},
               {"residual", s.residual},         {"residual_tol", s.residual_tol},
               {"classify_tol", s.classify_tol}, {"guard_factor", s.guard_factor}};
  j["output"] = {{"trace", c.output.trace}, {"report", c.output.report}};
  if (c.verify) {
    const auto& v = *c.verify;
    j["verify"] = {{"pairs", v.pairs},
                   {"center", v.center},
                   {"half_width", v.half_width},
                   {"points", v.points},
                   {"radius_center", v.radius_center},
                   {"delta_max", v.delta_max},
                   {"radius_samples", v.radius_samples},
                   {"prox_points", v.prox_points},
                   {"grid", {{"lo", v.grid_lo}, {"hi", v.grid_hi}, {"k", v.grid_k}}}};
  }
  if (c.sweep) {
    const auto& w = *c.sweep;
    j["sweep"] = {{"starts", w.starts}, {"lo", w.lo}, {"hi", w.hi}, {"k", w.k},
                  {"cluster_tol", w.cluster_tol}};
  }
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  check_keys(j, "", {"name", "seed", "sets", "f", "g", "smooth", "algorithm", "x0", "stop",
                     "output", "verify", "sweep"});
  ExperimentConfig c;
  c.name = string_or(j, "", "name", c.name);
  if (c.name.empty() || c.name.find_first_of("/\\") != std::string::npos) {
    fail("/name", "must be a nonempty file-name-safe string");
  }
  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      fail("/seed", "expected a nonnegative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }
  if (j.contains("sets")) c.sets = j.at("sets");
  if (j.contains("f")) c.f = j.at("f");
  if (j.contains("g")) c.g = j.at("g");
  if (j.contains("smooth")) c.smooth = j.at("smooth");

  const json& a = need(j, "", "algorithm");
  check_keys(a, "/algorithm",
             {"name", "gamma", "schedule", "policy", "control", "anchor_first", "operator"});
  c.algorithm.name = as_string(need(a, "/algorithm", "name"), "/algorithm/name");
  if (!kAlgorithms.count(c.algorithm.name)) {
    fail("/algorithm/name", "unknown algorithm '" + c.algorithm.name + "'");
  }
  c.algorithm.gamma = number_or(a, "/algorithm", "gamma", c.algorithm.gamma);
  if (a.contains("schedule")) c.algorithm.schedule = parse_schedule(a.at("schedule"), "/algorithm/schedule");
  c.algorithm.policy = string_or(a, "/algorithm", "policy", c.algorithm.policy);
  one_of(c.algorithm.policy, {"lowest-index", "seeded-random", "round-robin"}, "/algorithm/policy");
  c.algorithm.control = string_or(a, "/algorithm", "control", c.algorithm.control);
  one_of(c.algorithm.control, {"cyclic", "random-admissible"}, "/algorithm/control");
  c.algorithm.anchor_first = bool_or(a, "/algorithm", "anchor_first", c.algorithm.anchor_first);
  c.algorithm.op = string_or(a, "/algorithm", "operator", c.algorithm.op);
  one_of(c.algorithm.op, {"project", "reflect", "dr", "prox"}, "/algorithm/operator");

  const json& x0 = need(j, "", "x0");
  if (x0.is_array()) {
    c.x0.point = as_list(x0, "/x0");
    if (c.x0.point.empty()) fail("/x0", "expected a nonempty array");
  } else {
    check_keys(x0, "/x0", {"center", "radius"});
    c.x0.center = as_list(need(x0, "/x0", "center"), "/x0/center");
    c.x0.radius = as_number(need(x0, "/x0", "radius"), "/x0/radius");
    if (c.x0.center.empty()) fail("/x0/center", "expected a nonempty array");
    if (!(c.x0.radius >= 0.0)) fail("/x0/radius", "must be >= 0");
  }

  if (j.contains("stop")) {
    const json& s = j.at("stop");
    check_keys(s, "/stop", {"step_tol", "max_iters", "residual", "residual_tol", "classify_tol",
                            "guard_factor"});
    auto& st = c.stop;
    st.step_tol = number_or(s, "/stop", "step_tol", st.step_tol);
    st.max_iters = count_or(s, "/stop", "max_iters", st.max_iters);
    st.residual = string_or(s, "/stop", "residual", st.residual);
    st.residual_tol = number_or(s, "/stop", "residual_tol", st.residual_tol);
    st.classify_tol = number_or(s, "/stop", "classify_tol", st.classify_tol);
    st.guard_factor = number_or(s, "/stop", "guard_factor", st.guard_factor);
    if (st.max_iters < 1) fail("/stop/max_iters", "must be >= 1");
    one_of(st.residual, {"none", "set-distance", "norm"}, "/stop/residual");
    if (!(st.step_tol >= 0.0)) fail("/stop/step_tol", "must be >= 0");
    if (!(st.classify_tol > 0.0)) fail("/stop/classify_tol", "must be > 0");
    if (!(st.guard_factor > 0.0)) fail("/stop/guard_factor", "must be > 0");
  }

  if (j.contains("output")) {
    const json& o = j.at("output");
    check_keys(o, "/output", {"trace", "report"});
    c.output.trace = string_or(o, "/output", "trace", "");
    c.output.report = string_or(o, "/output", "report", "");
  }
  if (c.output.trace.empty()) c.output.trace = c.name + ".trace.jsonl";
  if (c.output.report.empty()) c.output.report = c.name + ".verify.json";

  if (j.contains("verify")) {
    const json& v = j.at("verify");
    const std::string p = "/verify";
    check_keys(v, p, {"pairs", "center", "half_width", "points", "radius_center", "delta_max",
                      "radius_samples", "prox_points", "grid"});
    VerifySpec vs;
    vs.pairs = count_or(v, p, "pairs", vs.pairs);
    if (v.contains("center")) vs.center = as_list(v.at("center"), p + "/center");
    vs.half_width = number_or(v, p, "half_width", vs.half_width);
    if (v.contains("points")) vs.points = as_rows(v.at("points"), p + "/points");
    if (v.contains("radius_center")) vs.radius_center = as_list(v.at("radius_center"), p + "/radius_center");
    vs.delta_max = number_or(v, p, "delta_max", vs.delta_max);
    vs.radius_samples = count_or(v, p, "radius_samples", vs.radius_samples);
    if (v.contains("prox_points")) vs.prox_points = as_rows(v.at("prox_points"), p + "/prox_points");
    if (v.contains("grid")) {
      const json& g = v.at("grid");
      check_keys(g, p + "/grid", {"lo", "hi", "k"});
      vs.grid_lo = number_or(g, p + "/grid", "lo", vs.grid_lo);
      vs.grid_hi = number_or(g, p + "/grid", "hi", vs.grid_hi);
      vs.grid_k = count_or(g, p + "/grid", "k", vs.grid_k);
    }
    if (!(vs.half_width > 0.0)) fail(p + "/half_width", "must be > 0");
    if (!(vs.delta_max > 0.0)) fail(p + "/delta_max", "must be > 0");
    c.verify = vs;
  }

  if (j.contains("sweep")) {
    const json& w = j.at("sweep");
    const std::string p = "/sweep";
    check_keys(w, p, {"starts", "lo", "hi", "k", "cluster_tol"});
    SweepSpec ss;
    if (w.contains("starts")) ss.starts = as_rows(w.at("starts"), p + "/starts");
    if (w.contains("lo")) ss.lo = as_list(w.at("lo"), p + "/lo");
    if (w.contains("hi")) ss.hi = as_list(w.at("hi"), p + "/hi");
    ss.k = count_or(w, p, "k", ss.k);
    ss.cluster_tol = number_or(w, p, "cluster_tol", ss.cluster_tol);
    if (ss.lo.size() != ss.hi.size()) fail(p + "/hi", "lo and hi differ in length");
    if (!ss.lo.empty() && ss.k < 2) fail(p + "/k", "grid sweeps need k >= 2");
    if (ss.starts.empty() && ss.lo.empty()) fail(p, "needs 'starts' or a 'lo'/'hi'/'k' grid");
    c.sweep = ss;
  }

  const Problem problem = build_problem(c);
  auto check_len = [&](std::size_t n, const std::string& path) {
    if (n != static_cast<std::size_t>(problem.dim)) {
      fail(path, "expected " + std::to_string(problem.dim) + " entries, got " + std::to_string(n));
    }
  };
  check_len(c.x0.sampled() ? c.x0.center.size() : c.x0.point.size(),
            c.x0.sampled() ? "/x0/center" : "/x0");
  if (c.verify) {
    if (!c.verify->center.empty()) check_len(c.verify->center.size(), "/verify/center");
    if (!c.verify->radius_center.empty()) check_len(c.verify->radius_center.size(), "/verify/radius_center");
    for (std::size_t i = 0; i < c.verify->points.size(); ++i) {
      check_len(c.verify->points[i].size(), join("/verify/points", i));
    }
    for (std::size_t i = 0; i < c.verify->prox_points.size(); ++i) {
      check_len(c.verify->prox_points[i].size(), join("/verify/prox_points", i));
    }
  }
  if (c.sweep) {
    for (std::size_t i = 0; i < c.sweep->starts.size(); ++i) {
      check_len(c.sweep->starts[i].size(), join("/sweep/starts", i));
    }
    if (!c.sweep->lo.empty()) check_len(c.sweep->lo.size(), "/sweep/lo");
  }
  if (c.stop.residual == "set-distance" && problem.sets.empty()) {
    fail("/stop/residual", "set-distance needs sets");
  }
  validate_algorithm(c, problem);
  return c;
}

ExperimentConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError("syntax error at " + parse_error_location(text, e.byte) + ": " + e.what());
  }
  if (j.is_object() && j.contains("preset")) {
    if (!j.at("preset").is_string()) fail("/preset", "expected a preset name");
    json base = preset(j.at("preset").get<std::string>());
    j.erase("preset");
    base.merge_patch(j);
    j = std::move(base);
  }
  return config_from_json(j);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::vector<std::string> preset_names() {
  return {"sparse-affine-feasibility", "two-singleton-prox", "crossed-lines-feasibility",
          "quadratic-plus-two-points-fb", "quadratic-plus-two-points-dr", "two-quadratics-ppa"};
}

json preset(std::string_view name) {
  auto singleton = [](double v) {
    return json{{"kind", "indicator-singleton"}, {"point", {v}}};
  };
  if (name == "sparse-affine-feasibility") {
    // a.x = b with the 1-sparse solution (1.5, 0, 0, 0).
    return {{"name", "sparse-affine-feasibility"},
            {"seed", 0},
            {"sets", {{{"kind", "sparsity"}, {"n", 4}, {"s", 1}},
                      {{"kind", "affine"}, {"A", {{2.0, 1.0, -1.0, 0.5}}}, {"b", {3.0}}}}},
            {"algorithm", {{"name", "cyclic-projections"}}},
            {"x0", {{"center", {1.5, 0.0, 0.0, 0.0}}, {"radius", 0.01}}},
            {"stop", {{"max_iters", 1000}, {"residual", "set-distance"}, {"residual_tol", 1e-12}}},
            {"verify", {{"pairs", 2000}, {"center", {1.5, 0.0, 0.0, 0.0}}, {"half_width", 1.0},
                        {"points", {{1.5, 0.0, 0.0, 0.0}}}}}};
  }
  if (name == "two-singleton-prox") {
    return {{"name", "two-singleton-prox"},
            {"sets", json::array()},
            {"f", {{"min", {singleton(0.0), singleton(2.0)}}}},
            {"algorithm", {{"name", "ppa"}, {"gamma", 1.0}}},
            {"x0", {0.9}},
            {"stop", {{"max_iters", 100}}},
            {"verify", {{"points", {{0.0}, {1.0}, {2.0}}},
                        {"radius_center", {0.0}},
                        {"delta_max", 3.0},
                        {"prox_points", {{0.9}, {1.0}, {2.5}}},
                        {"grid", {{"lo", -1.0}, {"hi", 3.0}, {"k", 201}}}}},
            {"sweep", {{"lo", {-1.0}}, {"hi", {3.0}}, {"k", 41}}}};
  }
  if (name == "crossed-lines-feasibility") {
    // (x-axis U y-axis) meets the line x1 + x2 = 1 at (1,0) and (0,1); the
    // line is the convex anchor.
    return {{"name", "crossed-lines-feasibility"},
            {"sets", {{{"kind", "union"},
                       {"pieces", {{{"kind", "span"}, {"point", {0.0, 0.0}}, {"directions", {{1.0, 0.0}}}},
                                   {{"kind", "span"}, {"point", {0.0, 0.0}}, {"directions", {{0.0, 1.0}}}}}}},
                      {{"kind", "affine"}, {"A", {{1.0, 1.0}}}, {"b", {1.0}}}}},
            {"algorithm", {{"name", "cadr"}, {"anchor_first", false}}},
            {"x0", {0.9, 0.2}},
            {"stop", {{"max_iters", 2000}}},
            {"verify", {{"center", {0.5, 0.5}}, {"points", {{1.0, 0.0}}}}}};
  }
  if (name == "quadratic-plus-two-points-fb") {
    return {{"name", "quadratic-plus-two-points-fb"},
            {"sets", json::array()},
            {"smooth", {{"kind", "quadratic"}, {"Q", {{1.0}}}}},
            {"g", {{"min", {singleton(-1.0), singleton(1.0)}}}},
            {"algorithm", {{"name", "forward-backward"}, {"gamma", 0.5}, {"schedule", 1.0}}},
            {"x0", {-0.8}},
            {"stop", {{"max_iters", 200}}},
            {"verify", {{"points", {{-1.0}, {1.0}, {0.0}}}, {"radius_center", {-1.0}}, {"delta_max", 4.0}}},
            {"sweep", {{"lo", {-3.0}}, {"hi", {3.0}}, {"k", 25}}}};
  }
  if (name == "quadratic-plus-two-points-dr") {
    // Strong fixed points at x = +-1.5 with shadows +-1.
    return {{"name", "quadratic-plus-two-points-dr"},
            {"sets", json::array()},
            {"f", {{"kind", "quadratic"}, {"Q", {{1.0}}}}},
            {"g", {{"min", {singleton(-1.0), singleton(1.0)}}}},
            {"algorithm", {{"name", "douglas-rachford"}, {"gamma", 0.5}, {"schedule", 1.0}}},
            {"x0", {1.4}},
            {"stop", {{"max_iters", 200}}},
            {"verify", {{"points", {{1.5}, {-1.5}}}, {"radius_center", {1.5}}, {"delta_max", 4.0}}}};
  }
  if (name == "two-quadratics-ppa") {
    return {{"name", "two-quadratics-ppa"},
            {"sets", json::array()},
            {"f", {{"min", {{{"kind", "quadratic"}, {"Q", {{2.0}}}},
                            {{"kind", "quadratic"}, {"Q", {{2.0}}}, {"b", {-4.0}}, {"c", 4.0}}}}}},
            {"algorithm", {{"name", "ppa"}, {"gamma", 1.0}}},
            {"x0", {1.6}},
            {"stop", {{"max_iters", 500}}},
            {"verify", {{"points", {{0.0}, {2.0}}},
                        {"prox_points", {{1.6}, {0.3}}},
                        {"grid", {{"lo", -2.0}, {"hi", 4.0}, {"k", 601}}}}}};
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

}  // namespace uan::experiment
