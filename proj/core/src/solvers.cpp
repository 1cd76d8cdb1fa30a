#include "uan/solvers.hpp"

#include "uan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <utility>

namespace uan {

namespace {

std::mt19937_64 keyed_engine(std::uint64_t seed, std::uint64_t key) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
  return std::mt19937_64(seq);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void require_start(const Vector& x0, Index dim, const std::string& who) {
  require_dim(x0, dim, who);
  require_finite(x0, who);
}

void require_positive_gamma(double gamma, const std::string& who) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError(who + ": gamma must be > 0");
}

double guard_limit(const StopRule& stop, const Vector& x0) {
  if (stop.max_iters < 1) throw DomainError("StopRule: max_iters must be >= 1");
  return stop.guard_factor * (1.0 + x0.norm());
}

bool escaped(const Vector& x, double limit) { return !x.allFinite() || x.norm() > limit; }

IterationTrace start_trace(const std::string& algorithm, const Vector& x0) {
  IterationTrace t;
  t.algorithm = algorithm;
  t.dim = x0.size();
  t.x0 = x0;
  t.final_point = x0;
  return t;
}

void classify_final(IterationTrace& trace, const UnionMap& t, double tol) {
  if (!trace.final_point.allFinite()) return;
  const FixedPointInfo info = classify_fixed(t, trace.final_point, tol);
  trace.classification = info.classification;
  trace.active = info.active;
  trace.fixing = info.fixing;
}

using AuxFn = std::function<std::vector<Vector>(const Vector& x, std::size_t index)>;

// Relaxed iteration of a union map with branch selection.
IterationTrace run_union(const UnionMap& t, const Schedule& schedule,
                         const SelectionPolicy& policy, const Vector& x0, const StopRule& stop,
                         const std::string& algorithm, const AuxFn& aux = {}) {
  require_start(x0, t.dim(), algorithm);
  check_schedule(schedule, 1.0 / t.alpha(), stop.max_iters, algorithm);
  const double limit = guard_limit(stop, x0);
  IterationTrace trace = start_trace(algorithm, x0);
  Vector x = x0;
  for (std::size_t n = 0; n < stop.max_iters; ++n) {
    const std::vector<Branch> branches = t.branches(x);
    const Branch& b = branches[policy.choose(n, branches)];
    const double lambda = schedule(n);
    Vector next = lambda == 1.0 ? b.value : Vector((1.0 - lambda) * x + lambda * b.value);

    TraceStep s;
    s.n = n;
    s.x = x;
    s.index = b.index;
    s.index_label = t.index_label(b.index);
    s.lambda = lambda;
    s.step_norm = (next - x).norm();
    s.active_count = branches.size();
    if (aux) s.aux = aux(x, b.index);
    if (stop.residual) s.residual = stop.residual(next);
    trace.steps.push_back(std::move(s));
    x = std::move(next);

    if (escaped(x, limit)) {
      trace.status = RunStatus::kDivergedGuard;
      break;
    }
    const TraceStep& last = trace.steps.back();
    const bool done = stop.residual ? *last.residual <= stop.residual_tol
                                    : last.step_norm <= stop.step_tol;
    if (done) {
      trace.status = RunStatus::kConverged;
      break;
    }
  }
  trace.final_point = x;
  classify_final(trace, t, stop.classify_tol);
  return trace;
}

}  // namespace

Schedule Schedule::constant(double lambda) {
  Schedule s;
  s.lambda_at = [lambda](std::size_t) { return lambda; };
  s.lo = s.hi = lambda;
  s.description = "constant(" + fmt(lambda) + ")";
  return s;
}

Schedule Schedule::cyclic(std::vector<double> values) {
  if (values.empty()) throw DomainError("Schedule::cyclic: no values");
  Schedule s;
  s.lo = *std::min_element(values.begin(), values.end());
  s.hi = *std::max_element(values.begin(), values.end());
  std::string d = "cyclic(";
  for (std::size_t k = 0; k < values.size(); ++k) d += (k ? "," : "") + fmt(values[k]);
  s.description = d + ")";
  s.lambda_at = [v = std::move(values)](std::size_t n) { return v[n % v.size()]; };
  return s;
}

void check_schedule(const Schedule& schedule, double bound, std::size_t horizon,
                    const std::string& who) {
  if (!schedule.lambda_at) throw DomainError(who + ": empty schedule");
  const double slack = bound * (1.0 + 1e-12);
  for (std::size_t n = 0; n < horizon; ++n) {
    const double lambda = schedule(n);
    if (!(lambda > 0.0) || !(lambda <= slack)) {
      throw DomainError(who + ": lambda_" + std::to_string(n) + " = " + fmt(lambda) +
                        " outside (0, " + fmt(bound) + "]");
    }
    if (lambda * (bound - lambda) < schedule.eps) {
      throw DomainError(who + ": lambda_" + std::to_string(n) + " = " + fmt(lambda) +
                        " violates lambda (" + fmt(bound) + " - lambda) >= " +
                        fmt(schedule.eps));
    }
  }
}

ControlSequence::ControlSequence(Kind kind, std::size_t m, std::size_t window, NextFn next)
    : kind_(kind), m_(m), window_(window), next_(std::move(next)) {
  if (m_ == 0) throw DomainError("ControlSequence: needs at least one index");
  if (window_ < m_) throw DomainError("ControlSequence: window shorter than the index count");
}

ControlSequence ControlSequence::cyclic(std::size_t m) {
  return ControlSequence(Kind::kCyclic, m, m,
                         [m](std::size_t step, const std::vector<std::size_t>&) { return step % m; });
}

ControlSequence ControlSequence::random_admissible(std::size_t m, std::uint64_t seed) {
  auto next = [m, seed](std::size_t step, const std::vector<std::size_t>&) {
    auto engine = keyed_engine(seed, step / m);
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), engine);
    return perm[step % m];
  };
  return ControlSequence(Kind::kSeededRandomAdmissible, m, 2 * m, std::move(next));
}

ControlSequence ControlSequence::user(std::size_t m, std::size_t window, NextFn next) {
  if (!next) throw DomainError("ControlSequence::user: empty callable");
  return ControlSequence(Kind::kUser, m, window, std::move(next));
}

std::size_t ControlSequence::next(std::size_t step, const std::vector<std::size_t>& history) const {
  const std::size_t i = next_(step, history);
  if (i >= m_) {
    throw ContractViolation("ControlSequence: index " + std::to_string(i) + " out of range");
  }
  return i;
}

bool is_admissible(const std::vector<std::size_t>& history, std::size_t m, std::size_t window) {
  if (window == 0 || history.size() < window) return true;
  std::vector<std::size_t> count(m, 0);
  std::size_t present = 0;
  auto add = [&](std::size_t i) {
    if (i < m && count[i]++ == 0) ++present;
  };
  auto drop = [&](std::size_t i) {
    if (i < m && --count[i] == 0) --present;
  };
  for (std::size_t k = 0; k < window; ++k) add(history[k]);
  if (present != m) return false;
  for (std::size_t k = window; k < history.size(); ++k) {
    add(history[k]);
    drop(history[k - window]);
    if (present != m) return false;
  }
  return true;
}

SelectionPolicy::SelectionPolicy(Kind kind, std::uint64_t seed, UserFn fn)
    : kind_(kind), seed_(seed), fn_(std::move(fn)) {}

SelectionPolicy SelectionPolicy::lowest_index() { return {Kind::kLowestIndex, 0, {}}; }
SelectionPolicy SelectionPolicy::seeded_random(std::uint64_t seed) {
  return {Kind::kSeededRandom, seed, {}};
}
SelectionPolicy SelectionPolicy::round_robin() { return {Kind::kRoundRobin, 0, {}}; }
SelectionPolicy SelectionPolicy::user(UserFn fn) {
  if (!fn) throw DomainError("SelectionPolicy::user: empty callable");
  return {Kind::kUser, 0, std::move(fn)};
}

std::string SelectionPolicy::name() const {
  switch (kind_) {
    case Kind::kLowestIndex: return "lowest-index";
    case Kind::kSeededRandom: return "seeded-random";
    case Kind::kRoundRobin: return "round-robin";
    case Kind::kUser: return "user";
  }
  return "unknown";
}

std::size_t SelectionPolicy::choose(std::size_t step, const std::vector<Branch>& branches) const {
  if (branches.empty()) throw ContractViolation("SelectionPolicy: empty evaluation");
  std::size_t pos = 0;
  switch (kind_) {
    case Kind::kLowestIndex: pos = 0; break;
    case Kind::kSeededRandom: {
      if (branches.size() == 1) break;
      auto engine = keyed_engine(seed_, step);
      pos = std::uniform_int_distribution<std::size_t>(0, branches.size() - 1)(engine);
      break;
    }
    case Kind::kRoundRobin: pos = step % branches.size(); break;
    case Kind::kUser: pos = fn_(step, branches); break;
  }
  if (pos >= branches.size()) throw ContractViolation("SelectionPolicy: choice out of range");
  return pos;
}

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::kConverged: return "converged";
    case RunStatus::kMaxIters: return "max-iters";
    case RunStatus::kDivergedGuard: return "diverged-guard";
  }
  return "unknown";
}

IterationTrace km_admissible(const std::vector<AveragedMap>& maps, const ControlSequence& control,
                             const Schedule& schedule, const Vector& x0, const StopRule& stop) {
  const std::string who = "km_admissible";
  if (maps.empty()) throw DomainError(who + ": no maps");
  if (control.size() != maps.size()) {
    throw DomainError(who + ": control indexes " + std::to_string(control.size()) +
                      " maps, got " + std::to_string(maps.size()));
  }
  const Index dim = maps.front().dim();
  for (const auto& m : maps) {
    if (m.dim() != dim) throw DimensionError(who + ": map dimensions differ");
  }
  require_start(x0, dim, who);
  const double limit = guard_limit(stop, x0);

  // The control never looks at the iterates, so the whole horizon can be
  // validated against the schedule before the first step.
  std::vector<std::size_t> plan;
  plan.reserve(stop.max_iters);
  for (std::size_t n = 0; n < stop.max_iters; ++n) plan.push_back(control.next(n, plan));
  if (!schedule.lambda_at) throw DomainError(who + ": empty schedule");
  for (std::size_t n = 0; n < plan.size(); ++n) {
    const double bound = 1.0 / maps[plan[n]].alpha();
    const double lambda = schedule(n);
    if (!(lambda > 0.0) || !(lambda <= bound * (1.0 + 1e-12)) ||
        lambda * (bound - lambda) < schedule.eps) {
      throw DomainError(who + ": lambda_" + std::to_string(n) + " = " + fmt(lambda) +
                        " incompatible with map " + std::to_string(plan[n]) + " (alpha " +
                        fmt(maps[plan[n]].alpha()) + ", need lambda (" + fmt(bound) +
                        " - lambda) >= " + fmt(schedule.eps) + ")");
    }
  }

  IterationTrace trace = start_trace("km-admissible", x0);
  const std::size_t window = control.window();
  Vector x = x0;
  std::vector<std::size_t> history;
  for (std::size_t n = 0; n < stop.max_iters; ++n) {
    const std::size_t i = plan[n];
    history.push_back(i);
    const double lambda = schedule(n);
    const Vector tx = maps[i].apply_unchecked(x);
    Vector next = lambda == 1.0 ? tx : Vector((1.0 - lambda) * x + lambda * tx);

    TraceStep s;
    s.n = n;
    s.x = x;
    s.map = i;
    s.index = 0;
    s.index_label = maps[i].label();
    s.lambda = lambda;
    s.step_norm = (next - x).norm();
    if (stop.residual) s.residual = stop.residual(next);
    trace.steps.push_back(std::move(s));
    x = std::move(next);

    if (escaped(x, limit)) {
      trace.status = RunStatus::kDivergedGuard;
      break;
    }
    bool done = false;
    if (stop.residual) {
      done = *trace.steps.back().residual <= stop.residual_tol;
    } else if (trace.steps.size() >= window) {
      done = true;
      for (std::size_t k = trace.steps.size() - window; k < trace.steps.size(); ++k) {
        if (trace.steps[k].step_norm > stop.step_tol) {
          done = false;
          break;
        }
      }
    }
    if (done) {
      trace.status = RunStatus::kConverged;
      break;
    }
  }
  trace.final_point = x;
  trace.admissible = is_admissible(history, maps.size(), window);

  const std::size_t from = history.size() > window ? history.size() - window : 0;
  std::set<std::size_t> recurring(history.begin() + static_cast<std::ptrdiff_t>(from), history.end());
  trace.recurring.assign(recurring.begin(), recurring.end());
  if (x.allFinite()) {
    trace.active = trace.recurring;
    for (std::size_t i : trace.recurring) {
      if ((maps[i].apply_unchecked(x) - x).norm() <= stop.classify_tol) trace.fixing.push_back(i);
    }
    if (trace.fixing.empty()) {
      trace.classification = FixedPointClass::kNotFixed;
    } else if (trace.fixing.size() == trace.active.size()) {
      trace.classification = FixedPointClass::kStrongFixed;
    } else {
      trace.classification = FixedPointClass::kFixed;
    }
  }
  return trace;
}

IterationTrace iterate_union(const UnionMap& t, const Schedule& schedule,
                             const SelectionPolicy& policy, const Vector& x0, const StopRule& stop) {
  return run_union(t, schedule, policy, x0, stop, "iterate-union");
}

namespace {

IterationTrace run_cycle(const std::vector<UnionMap>& maps, const SelectionPolicy& policy,
                         const Vector& x0, const StopRule& stop, const std::string& algorithm) {
  if (maps.empty()) throw DomainError(algorithm + ": no maps");
  const Index dim = maps.front().dim();
  for (const auto& m : maps) {
    if (m.dim() != dim) throw DimensionError(algorithm + ": map dimensions differ");
  }
  require_start(x0, dim, algorithm);
  const double limit = guard_limit(stop, x0);
  const std::size_t m = maps.size();

  IterationTrace trace = start_trace(algorithm, x0);
  trace.sweep_points.push_back(x0);
  Vector x = x0;
  for (std::size_t n = 0; n < stop.max_iters; ++n) {
    const std::size_t j = n % m;
    const std::vector<Branch> branches = maps[j].branches(x);
    const Branch& b = branches[policy.choose(n, branches)];

    TraceStep s;
    s.n = n;
    s.x = x;
    s.map = j;
    s.index = b.index;
    s.index_label = maps[j].index_label(b.index);
    s.lambda = 1.0;
    s.step_norm = (b.value - x).norm();
    s.active_count = branches.size();
    if (stop.residual) s.residual = stop.residual(b.value);
    trace.steps.push_back(std::move(s));
    x = b.value;

    if (escaped(x, limit)) {
      trace.status = RunStatus::kDivergedGuard;
      break;
    }
    if (j + 1 == m) {
      const double sweep = (x - trace.sweep_points.back()).norm();
      trace.sweep_points.push_back(x);
      const bool done = stop.residual ? *trace.steps.back().residual <= stop.residual_tol
                                      : sweep <= stop.step_tol;
      if (done) {
        trace.status = RunStatus::kConverged;
        break;
      }
    }
  }
  trace.final_point = x;
  classify_final(trace, maps.size() == 1 ? maps.front() : compose(maps), stop.classify_tol);
  return trace;
}

void require_sets(const std::vector<UnionConvexSet>& sets, const std::string& who) {
  if (sets.size() < 2) throw DomainError(who + ": need at least two sets");
  for (const auto& s : sets) {
    if (s.dim() != sets.front().dim()) throw DimensionError(who + ": set dimensions differ");
  }
}

void record_memberships(IterationTrace& trace, const std::vector<UnionConvexSet>& sets,
                        const Vector& point, double tol) {
  trace.set_residuals.clear();
  if (!point.allFinite()) return;
  bool ok = true;
  for (const auto& s : sets) {
    const double d = s.distance(point);
    trace.set_residuals.push_back(d);
    ok = ok && d <= tol;
  }
  trace.memberships_ok = ok;
}

}  // namespace

IterationTrace cyclic_compose(const std::vector<UnionMap>& maps, const SelectionPolicy& policy,
                              const Vector& x0, const StopRule& stop) {
  return run_cycle(maps, policy, x0, stop, "cyclic-compose");
}

IterationTrace cyclic_projections(const std::vector<UnionConvexSet>& sets,
                                  const SelectionPolicy& policy, const Vector& x0,
                                  const StopRule& stop) {
  require_sets(sets, "cyclic_projections");
  std::vector<UnionMap> maps;
  for (const auto& s : sets) maps.push_back(project_union(s));
  IterationTrace trace = run_cycle(maps, policy, x0, stop, "cyclic-projections");
  record_memberships(trace, sets, trace.final_point, stop.classify_tol);
  return trace;
}

IterationTrace cyclic_dr(const std::vector<UnionConvexSet>& sets, const SelectionPolicy& policy,
                         const Vector& x0, const StopRule& stop) {
  require_sets(sets, "cyclic_dr");
  std::vector<UnionMap> stages;
  for (std::size_t j = 0; j < sets.size(); ++j) {
    stages.push_back(dr_operator(sets[j], sets[(j + 1) % sets.size()]));
  }
  return run_union(compose(stages), Schedule::constant(1.0), policy, x0, stop, "cyclic-dr");
}

IterationTrace cadr(const std::vector<UnionConvexSet>& sets, bool anchor_first,
                    const SelectionPolicy& policy, const Vector& x0, const StopRule& stop) {
  require_sets(sets, "cadr");
  const UnionConvexSet& anchor = anchor_first ? sets.front() : sets.back();
  std::vector<UnionMap> maps;
  for (std::size_t j = 0; j < sets.size(); ++j) {
    const bool is_anchor = anchor_first ? j == 0 : j + 1 == sets.size();
    if (!is_anchor) maps.push_back(dr_operator(anchor, sets[j]));
  }
  IterationTrace trace = run_cycle(maps, policy, x0, stop, "cadr");
  if (anchor.size() == 1 && trace.final_point.allFinite()) {
    trace.shadow = anchor.piece(0).project(trace.final_point);
    record_memberships(trace, sets, *trace.shadow, stop.classify_tol);
  } else {
    trace.notes.push_back("anchor is not convex; no shadow point");
  }
  return trace;
}

IterationTrace ppa(const MinConvexFn& f, double gamma, const SelectionPolicy& policy,
                   const Vector& x0, const StopRule& stop) {
  require_positive_gamma(gamma, "ppa");
  IterationTrace trace =
      run_union(prox_union(f, gamma), Schedule::constant(1.0), policy, x0, stop, "ppa");
  if (trace.status == RunStatus::kConverged) {
    const ExtendedReal v = f.value(trace.final_point);
    if (v.is_finite()) {
      trace.objective = v.value();
      trace.local_min = is_local_min(f, trace.final_point, stop.classify_tol);
    } else {
      trace.local_min = false;
    }
  }
  return trace;
}

SmoothFn SmoothFn::quadratic(const Matrix& q, const Vector& b) {
  const Index n = q.rows();
  if (q.cols() != n || b.size() != n) throw DimensionError("SmoothFn::quadratic: shapes disagree");
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, q.cwiseAbs().maxCoeff())) {
    throw DomainError("SmoothFn::quadratic: Q must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(q, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-12) {
    throw DomainError("SmoothFn::quadratic: Q must be positive semidefinite");
  }
  SmoothFn f;
  f.dim = n;
  f.value = [q, b](const Vector& x) { return 0.5 * x.dot(q * x) + b.dot(x); };
  f.grad = [q, b](const Vector& x) -> Vector { return q * x + b; };
  f.lipschitz = std::max(0.0, eig.eigenvalues().maxCoeff());
  return f;
}

SmoothFn SmoothFn::zero(Index dim) {
  SmoothFn f;
  f.dim = dim;
  f.value = [](const Vector&) { return 0.0; };
  f.grad = [](const Vector& x) -> Vector { return Vector::Zero(x.size()); };
  f.lipschitz = 0.0;
  return f;
}

UnionMap forward_backward_operator(const SmoothFn& f, const MinConvexFn& g, double gamma) {
  if (f.dim != g.dim()) throw DimensionError("forward_backward: f and g dimensions differ");
  if (!f.value || !f.grad) throw DomainError("forward_backward: smooth term is incomplete");
  if (!(f.lipschitz >= 0.0) || !std::isfinite(f.lipschitz)) {
    throw DomainError("forward_backward: L must be finite and >= 0");
  }
  const double upper = f.lipschitz > 0.0 ? 2.0 / f.lipschitz : std::numeric_limits<double>::infinity();
  if (!(gamma > 0.0) || !(gamma < upper) || !std::isfinite(gamma)) {
    throw DomainError("forward_backward: gamma = " + fmt(gamma) +
                      " must lie in (0, 2/L) = (0, " + fmt(upper) + ")");
  }
  // With L = 0 the gradient step is a translation, which is alpha-averaged
  // for every alpha in (0, 1).
  const double alpha = std::max(gamma * f.lipschitz / 2.0, std::numeric_limits<double>::min());
  AveragedMap step(f.dim, alpha, "grad-step",
                   [grad = f.grad, gamma](const Vector& x) -> Vector { return x - gamma * grad(x); });
  return compose({UnionMap::single(std::move(step)), prox_union(g, gamma)});
}

bool is_local_min(const SmoothFn& f, const MinConvexFn& g, const Vector& x, double gamma,
                  double tol) {
  require_positive_gamma(gamma, "is_local_min");
  const ExtendedReal gx = g.value(x);
  if (gx.is_infinite()) throw DomainError("is_local_min: g(x) = +inf");
  const Vector forward = x - gamma * f.grad(x);
  const double cutoff = gx.value() + tol * std::max(1.0, std::abs(gx.value()));
  for (const auto& p : g.pieces()) {
    const ExtendedReal v = p.value(x);
    if (v.is_infinite() || v.value() > cutoff) continue;
    if ((p.prox(gamma, forward) - x).norm() > tol) return false;
  }
  return true;
}

IterationTrace forward_backward(const SmoothFn& f, const MinConvexFn& g, double gamma,
                                const Schedule& schedule, const SelectionPolicy& policy,
                                const Vector& x0, const StopRule& stop) {
  const UnionMap t = forward_backward_operator(f, g, gamma);
  IterationTrace trace = run_union(t, schedule, policy, x0, stop, "forward-backward");
  if (trace.status == RunStatus::kConverged && trace.final_point.allFinite()) {
    const ExtendedReal gx = g.value(trace.final_point);
    if (gx.is_finite()) trace.objective = f.value(trace.final_point) + gx.value();
    if (trace.classification == FixedPointClass::kStrongFixed) {
      trace.local_min = gx.is_finite() &&
                        is_local_min(f, g, trace.final_point, gamma, stop.classify_tol);
    }
  }
  return trace;
}

UnionMap douglas_rachford_operator(const MinConvexFn& f, const MinConvexFn& g, double gamma) {
  require_positive_gamma(gamma, "douglas_rachford");
  if (f.dim() != g.dim()) throw DimensionError("douglas_rachford: f and g dimensions differ");
  const UnionMap rf = relax(prox_union(f, gamma), 2.0);
  const UnionMap rg = relax(prox_union(g, gamma), 2.0);
  return relax(compose({rf, rg}), 0.5);
}

IterationTrace douglas_rachford(const MinConvexFn& f, const MinConvexFn& g, double gamma,
                                const Schedule& schedule, const SelectionPolicy& policy,
                                const Vector& x0, const StopRule& stop) {
  const UnionMap t = douglas_rachford_operator(f, g, gamma);
  auto aux = [&f, &g, gamma](const Vector& x, std::size_t index) {
    const Vector y = f.piece(index % f.size()).prox(gamma, x);
    const Vector z = g.piece(index / f.size()).prox(gamma, 2.0 * y - x);
    return std::vector<Vector>{y, z};
  };
  IterationTrace trace = run_union(t, schedule, policy, x0, stop, "douglas-rachford", aux);
  if (trace.status != RunStatus::kConverged || f.size() != 1 || !trace.final_point.allFinite()) {
    if (f.size() != 1) trace.notes.push_back("f has several pieces; no shadow point");
    return trace;
  }
  const Vector& x = trace.final_point;
  const Vector y = f.piece(0).prox(gamma, x);
  trace.shadow = y;
  const ExtendedReal total = f.value(y) + g.value(y);
  if (total.is_finite()) trace.objective = total.value();
  if (trace.classification == FixedPointClass::kStrongFixed) {
    // y minimises f + g_i for every g_i attaining g(y): the pair
    // (y, prox_{gamma g_i}(2y - x)) is a DR fixed-point certificate.
    bool ok = total.is_finite();
    if (ok) {
      const double gy = g.value(y).value();
      const double cutoff = gy + stop.classify_tol * std::max(1.0, std::abs(gy));
      for (const auto& p : g.pieces()) {
        const ExtendedReal v = p.value(y);
        if (v.is_infinite() || v.value() > cutoff) continue;
        if ((p.prox(gamma, 2.0 * y - x) - y).norm() > stop.classify_tol) ok = false;
      }
    }
    trace.local_min = ok;
  }
  return trace;
}

}  // namespace uan
