#include "uan/experiment/runner.hpp"

#include "uan/experiment/trace_io.hpp"
#include "uan/errors.hpp"
#include "uan/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

namespace uan::experiment {

namespace {

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

Schedule make_schedule(const ScheduleSpec& s) {
  Schedule out = s.kind == "constant" ? Schedule::constant(s.values.front()) : Schedule::cyclic(s.values);
  out.eps = s.eps;
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

std::string trace_text(const ExperimentConfig& config, const IterationTrace& trace) {
  std::ostringstream os;
  write_trace(os, config, trace);
  return os.str();
}

json points_json(const std::vector<Vector>& pts) {
  json a = json::array();
  for (const auto& p : pts) a.push_back(vector_json(p));
  return a;
}

json inequality_check(const std::string& what, const UnionMap& t, double alpha,
                      const SampleRegion& region, std::size_t pairs, std::uint64_t seed) {
  const AveragednessReport r = sample_inequality(t, alpha, region, pairs, seed);
  return {{"check", "inequality"}, {"operator", what},        {"alpha", alpha},
          {"pieces", t.size()},    {"pairs_per_piece", pairs}, {"max_violation", r.max_violation},
          {"passed", r.passed}};
}

std::vector<Vector> sweep_starts(const SweepSpec& s) {
  std::vector<Vector> out;
  for (const auto& p : s.starts) out.push_back(to_vector(p));
  if (!s.lo.empty()) {
    const std::size_t d = s.lo.size();
    std::size_t total = 1;
    for (std::size_t a = 0; a < d; ++a) total *= s.k;
    for (std::size_t flat = 0; flat < total; ++flat) {
      Vector x(static_cast<Index>(d));
      std::size_t rest = flat;
      for (std::size_t a = 0; a < d; ++a) {
        const std::size_t i = rest % s.k;
        rest /= s.k;
        x[static_cast<Index>(a)] = s.lo[a] + (s.hi[a] - s.lo[a]) * static_cast<double>(i) /
                                                 static_cast<double>(s.k - 1);
      }
      out.push_back(x);
    }
  }
  return out;
}

}  // namespace

int exit_code(RunStatus status) {
  switch (status) {
    case RunStatus::kConverged: return kExitConverged;
    case RunStatus::kMaxIters: return kExitMaxIters;
    case RunStatus::kDivergedGuard: return kExitDiverged;
  }
  return kExitConfigError;
}

Vector resolve_start(const ExperimentConfig& config) {
  if (!config.x0.sampled()) return to_vector(config.x0.point);
  const Vector center = to_vector(config.x0.center);
  if (config.x0.radius == 0.0) return center;
  PointSampler sampler(config.seed);
  return sampler.in_ball(center, config.x0.radius);
}

StopRule make_stop_rule(const ExperimentConfig& config, const Problem& problem) {
  StopRule stop;
  const auto& s = config.stop;
  stop.step_tol = s.step_tol;
  stop.max_iters = s.max_iters;
  stop.residual_tol = s.residual_tol;
  stop.classify_tol = s.classify_tol;
  stop.guard_factor = s.guard_factor;
  if (s.residual == "set-distance") {
    stop.residual = [sets = problem.sets](const Vector& x) {
      double worst = 0.0;
      for (const auto& c : sets) worst = std::max(worst, c.distance(x));
      return worst;
    };
  } else if (s.residual == "norm") {
    stop.residual = [](const Vector& x) { return x.norm(); };
  }
  return stop;
}

SelectionPolicy make_policy(const ExperimentConfig& config) {
  const std::string& p = config.algorithm.policy;
  if (p == "seeded-random") return SelectionPolicy::seeded_random(config.seed);
  if (p == "round-robin") return SelectionPolicy::round_robin();
  return SelectionPolicy::lowest_index();
}

IterationTrace run_algorithm(const ExperimentConfig& config, const Problem& problem,
                             const Vector& x0) {
  const auto& a = config.algorithm;
  const StopRule stop = make_stop_rule(config, problem);
  const SelectionPolicy policy = make_policy(config);
  const Schedule schedule = make_schedule(a.schedule);
  if (a.name == "km-admissible") {
    std::vector<AveragedMap> maps;
    for (const auto& s : problem.sets) maps.push_back(project_union(s).piece(0));
    const ControlSequence control = a.control == "random-admissible"
                                        ? ControlSequence::random_admissible(maps.size(), config.seed)
                                        : ControlSequence::cyclic(maps.size());
    return km_admissible(maps, control, schedule, x0, stop);
  }
  if (a.name == "iterate-union") {
    return iterate_union(driving_operator(config, problem), schedule, policy, x0, stop);
  }
  if (a.name == "cyclic-projections") return cyclic_projections(problem.sets, policy, x0, stop);
  if (a.name == "cyclic-dr") return cyclic_dr(problem.sets, policy, x0, stop);
  if (a.name == "cadr") return cadr(problem.sets, a.anchor_first, policy, x0, stop);
  if (a.name == "ppa") return ppa(*problem.f, a.gamma, policy, x0, stop);
  if (a.name == "forward-backward") {
    return forward_backward(*problem.smooth, *problem.g, a.gamma, schedule, policy, x0, stop);
  }
  if (a.name == "douglas-rachford") {
    return douglas_rachford(*problem.f, *problem.g, a.gamma, schedule, policy, x0, stop);
  }
  throw ConfigError("field /algorithm/name: unknown algorithm '" + a.name + "'");
}

int run_experiment(const ExperimentConfig& config, const RunOptions& options, std::ostream& log) {
  const Problem problem = build_problem(config);
  IterationTrace trace;
  try {
    trace = run_algorithm(config, problem, resolve_start(config));
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  const auto path = options.out_dir / config.output.trace;
  write_file(path, trace_text(config, trace));
  if (!options.quiet) {
    log << config.name << ": " << to_string(trace.status) << " after " << trace.iterations()
        << " iterations, final point " << dump_compact(vector_json(trace.final_point)) << " is "
        << to_string(trace.classification) << "\n";
    if (trace.shadow) log << "  shadow " << dump_compact(vector_json(*trace.shadow)) << "\n";
    if (trace.local_min) log << "  local minimum: " << (*trace.local_min ? "yes" : "no") << "\n";
    log << "  trace written to " << path.string() << "\n";
  }
  return exit_code(trace.status);
}

json verify_report(const ExperimentConfig& config) {
  const Problem problem = build_problem(config);
  const VerifySpec spec = config.verify.value_or(VerifySpec{});
  const UnionMap t = driving_operator(config, problem);
  const double tol = config.stop.classify_tol;

  SampleRegion region;
  region.center = !spec.center.empty() ? to_vector(spec.center)
                  : config.x0.sampled() ? to_vector(config.x0.center)
                                        : to_vector(config.x0.point);
  region.half_width = spec.half_width;

  json checks = json::array();
  std::uint64_t seed = config.seed;
  for (std::size_t j = 0; j < problem.sets.size(); ++j) {
    checks.push_back(inequality_check("projector[" + std::to_string(j) + "] " + problem.sets[j].label(),
                                      project_union(problem.sets[j]), 0.5, region, spec.pairs, seed++));
  }
  checks.push_back(inequality_check("driving operator", t, t.alpha(), region, spec.pairs, seed++));

  for (const auto& p : spec.points) {
    const Vector x = to_vector(p);
    const FixedVerification v = verify_fixed_classification(t, x, tol);
    checks.push_back({{"check", "classification"},
                      {"point", vector_json(x)},
                      {"classification", to_string(v.classification)},
                      {"active", v.active},
                      {"witnesses", v.witnesses},
                      {"single_valued", v.single_valued},
                      {"passed", v.consistent}});
  }

  if (!spec.radius_center.empty()) {
    const Vector xs = to_vector(spec.radius_center);
    RadiusOptions ro;
    ro.seed = config.seed;
    const RadiusEstimate r = estimate_radius(t, xs, spec.delta_max, spec.radius_samples, ro);
    json c = {{"check", "radius"},      {"center", vector_json(xs)},
              {"radius", r.radius},     {"lower_estimate", r.lower_estimate},
              {"samples", r.samples},   {"reference", r.reference},
              {"passed", true}};
    if (r.counterexample) c["counterexample"] = vector_json(*r.counterexample);
    checks.push_back(c);
  }

  const std::optional<MinConvexFn>& fn = problem.f ? problem.f : problem.g;
  if (!spec.prox_points.empty()) {
    if (!fn || problem.dim > kMaxGridDim) {
      throw ConfigError("field /verify/prox_points: needs a function of dimension <= 3");
    }
    const GridSpec grid = GridSpec::cube(problem.dim, spec.grid_lo, spec.grid_hi, spec.grid_k);
    const UnionMap prox = prox_union(*fn, config.algorithm.gamma);
    for (const auto& p : spec.prox_points) {
      const Vector x = to_vector(p);
      const GridProxResult g = brute_force_prox(*fn, config.algorithm.gamma, x, grid);
      const Evaluation ev = prox.evaluate(x);
      const double gap = cluster_distance(ev.points, g);
      checks.push_back({{"check", "prox-grid"},
                        {"point", vector_json(x)},
                        {"prox", points_json(ev.points)},
                        {"grid", points_json(g.points)},
                        {"distance", gap},
                        {"cell_diameter", grid.cell_diameter()},
                        {"boundary_artifact", g.boundary_artifact},
                        {"passed", gap <= grid.cell_diameter()}});
    }
  }

  bool passed = true;
  for (const auto& c : checks) passed = passed && c.at("passed").get<bool>();
  return {{"name", config.name}, {"passed", passed}, {"checks", checks}};
}

int verify_experiment(const ExperimentConfig& config, const RunOptions& options, std::ostream& log) {
  json report;
  try {
    report = verify_report(config);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  const auto path = options.out_dir / config.output.report;
  write_file(path, dump_compact(report) + "\n");
  const bool passed = report.at("passed").get<bool>();
  if (!options.quiet) {
    for (const auto& c : report.at("checks")) {
      log << (c.at("passed").get<bool>() ? "pass " : "FAIL ") << c.at("check").get<std::string>();
      if (c.contains("operator")) {
        log << " " << c.at("operator").get<std::string>() << " max violation "
            << dump_compact(c.at("max_violation"));
      }
      if (c.contains("classification")) {
        log << " " << dump_compact(c.at("point")) << " " << c.at("classification").get<std::string>();
      }
      if (c.contains("radius")) {
        log << " estimate " << dump_compact(c.at("radius")) << " (lower estimate)";
      }
      if (c.contains("distance")) log << " " << dump_compact(c.at("point")) << " distance " << dump_compact(c.at("distance"));
      log << "\n";
    }
    log << config.name << ": verification " << (passed ? "passed" : "failed") << "; report written to "
        << path.string() << "\n";
  }
  return passed ? kExitConverged : kExitVerifyFailed;
}

json sweep_summary(const ExperimentConfig& config, const RunOptions& options) {
  if (!config.sweep) throw ConfigError("field /sweep: missing sweep section");
  const Problem problem = build_problem(config);
  const std::vector<Vector> starts = sweep_starts(*config.sweep);
  std::vector<IterationTrace> traces(starts.size());
  const auto dir = options.out_dir / (config.name + ".sweep");

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(starts.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < starts.size(); i = next++) {
      try {
        traces[i] = run_algorithm(config, problem, starts[i]);
        write_file(dir / (std::to_string(i) + ".trace.jsonl"), trace_text(config, traces[i]));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(starts.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < jobs; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<Vector> basin_points;
  std::vector<std::size_t> basin_counts;
  std::vector<std::string> basin_class;
  std::map<std::string, std::size_t> status_counts;
  json runs = json::array();
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto& t = traces[i];
    ++status_counts[to_string(t.status)];
    json r = {{"start", vector_json(starts[i])},
              {"status", to_string(t.status)},
              {"final", vector_json(t.final_point)},
              {"classification", to_string(t.classification)}};
    if (t.status == RunStatus::kConverged) {
      std::size_t b = 0;
      for (; b < basin_points.size(); ++b) {
        if ((basin_points[b] - t.final_point).lpNorm<Eigen::Infinity>() <= config.sweep->cluster_tol) break;
      }
      if (b == basin_points.size()) {
        basin_points.push_back(t.final_point);
        basin_counts.push_back(0);
        basin_class.push_back(to_string(t.classification));
      }
      ++basin_counts[b];
      r["basin"] = b;
    }
    runs.push_back(r);
  }
  json basins = json::array();
  for (std::size_t b = 0; b < basin_points.size(); ++b) {
    basins.push_back({{"point", vector_json(basin_points[b])},
                      {"count", basin_counts[b]},
                      {"classification", basin_class[b]}});
  }
  return {{"name", config.name},
          {"runs", starts.size()},
          {"status_counts", status_counts},
          {"basins", basins},
          {"details", runs}};
}

int sweep_experiment(const ExperimentConfig& config, const RunOptions& options, std::ostream& log) {
  json summary;
  try {
    summary = sweep_summary(config, options);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  const auto path = options.out_dir / (config.name + ".sweep.json");
  write_file(path, dump_compact(summary) + "\n");
  const std::size_t runs = summary.at("runs").get<std::size_t>();
  const auto& counts = summary.at("status_counts");
  const std::size_t converged = counts.contains("converged") ? counts.at("converged").get<std::size_t>() : 0;
  if (!options.quiet) {
    log << config.name << ": " << converged << "/" << runs << " runs converged\n";
    for (const auto& b : summary.at("basins")) {
      log << "  basin " << dump_compact(b.at("point")) << " (" << b.at("classification").get<std::string>()
          << "): " << b.at("count").get<std::size_t>() << " starts\n";
    }
    log << "  summary written to " << path.string() << "\n";
  }
  return converged == runs ? kExitConverged : kExitMaxIters;
}

}  // namespace uan::experiment
