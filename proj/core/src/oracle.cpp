#include "uan/oracle.hpp"

#include "uan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace uan {

GridSpec GridSpec::cube(Index dim, double lo, double hi, std::size_t k) {
  GridSpec g;
  g.lo.assign(static_cast<std::size_t>(dim), lo);
  g.hi.assign(static_cast<std::size_t>(dim), hi);
  g.k = k;
  validate(g);
  return g;
}

double GridSpec::spacing(Index axis) const {
  const auto a = static_cast<std::size_t>(axis);
  return (hi.at(a) - lo.at(a)) / static_cast<double>(k - 1);
}

double GridSpec::cell_diameter() const {
  double s = 0.0;
  for (Index a = 0; a < dim(); ++a) s += spacing(a) * spacing(a);
  return std::sqrt(s);
}

std::size_t GridSpec::node_count() const {
  std::size_t n = 1;
  for (Index a = 0; a < dim(); ++a) n *= k;
  return n;
}

Vector GridSpec::node(std::size_t flat) const {
  Vector y(dim());
  for (Index a = 0; a < dim(); ++a) {
    const std::size_t i = flat % k;
    flat /= k;
    y[a] = i + 1 == k ? hi[static_cast<std::size_t>(a)]
                      : lo[static_cast<std::size_t>(a)] + static_cast<double>(i) * spacing(a);
  }
  return y;
}

void validate(const GridSpec& grid) {
  if (grid.lo.size() != grid.hi.size()) throw DimensionError("GridSpec: lo and hi differ in size");
  if (grid.dim() < 1 || grid.dim() > kMaxGridDim) {
    throw DomainError("GridSpec: dimension must be in [1, 3]");
  }
  if (grid.k < 3) throw DomainError("GridSpec: need at least 3 points per axis");
  for (std::size_t a = 0; a < grid.lo.size(); ++a) {
    if (!(grid.lo[a] < grid.hi[a]) || !std::isfinite(grid.lo[a]) || !std::isfinite(grid.hi[a])) {
      throw DomainError("GridSpec: need finite lo < hi on every axis");
    }
  }
  double total = 1.0;
  for (Index a = 0; a < grid.dim(); ++a) total *= static_cast<double>(grid.k);
  if (total > static_cast<double>(kMaxGridEvaluations)) {
    throw DomainError("GridSpec: more than 1e7 grid evaluations");
  }
}

namespace {

// Flat indices of the grid neighbours (including diagonals) of a node.
std::vector<std::size_t> neighbours(const GridSpec& grid, std::size_t flat) {
  const auto d = static_cast<std::size_t>(grid.dim());
  std::vector<std::size_t> idx(d);
  std::size_t rest = flat;
  for (std::size_t a = 0; a < d; ++a) {
    idx[a] = rest % grid.k;
    rest /= grid.k;
  }
  std::vector<std::size_t> out;
  std::size_t combos = 1;
  for (std::size_t a = 0; a < d; ++a) combos *= 3;
  for (std::size_t c = 0; c < combos; ++c) {
    std::size_t code = c;
    std::size_t target = 0;
    std::size_t stride = 1;
    bool inside = true;
    bool self = true;
    for (std::size_t a = 0; a < d; ++a) {
      const int off = static_cast<int>(code % 3) - 1;
      code /= 3;
      if (off != 0) self = false;
      const auto i = static_cast<long long>(idx[a]) + off;
      if (i < 0 || i >= static_cast<long long>(grid.k)) {
        inside = false;
        break;
      }
      target += static_cast<std::size_t>(i) * stride;
      stride *= grid.k;
    }
    if (inside && !self) out.push_back(target);
  }
  return out;
}

bool on_boundary(const GridSpec& grid, std::size_t flat) {
  for (Index a = 0; a < grid.dim(); ++a) {
    const std::size_t i = flat % grid.k;
    flat /= grid.k;
    if (i == 0 || i + 1 == grid.k) return true;
  }
  return false;
}

}  // namespace

GridProxResult brute_force_prox(const MinConvexFn& f, double gamma, const Vector& x,
                                const GridSpec& grid) {
  validate(grid);
  if (grid.dim() != f.dim()) throw DimensionError("brute_force_prox: grid and f dimensions differ");
  require_dim(x, f.dim(), "brute_force_prox");
  if (!(gamma > 0.0)) throw DomainError("brute_force_prox: gamma must be > 0");

  const std::size_t n = grid.node_count();
  const std::size_t m = f.size();
  const double inf = std::numeric_limits<double>::infinity();
  // obj[i * n + j]: piece i's objective at node j.
  std::vector<double> obj(m * n, inf);
  std::vector<std::size_t> best(m, n);
  for (std::size_t j = 0; j < n; ++j) {
    const Vector y = grid.node(j);
    const double q = (x - y).squaredNorm() / (2.0 * gamma);
    for (std::size_t i = 0; i < m; ++i) {
      const ExtendedReal v = f.piece(i).value(y);
      if (v.is_infinite()) continue;
      double& o = obj[i * n + j];
      o = v.value() + q;
      if (best[i] == n || o < obj[i * n + best[i]]) best[i] = j;
    }
  }

  GridProxResult out;
  out.piece_minima.assign(m, inf);
  out.piece_resolution.assign(m, 0.0);
  double fmin = inf;
  for (std::size_t i = 0; i < m; ++i) {
    if (best[i] == n) continue;
    const double mi = obj[i * n + best[i]];
    double spread = 1e-12 * std::max(1.0, std::abs(mi));
    for (std::size_t nb : neighbours(grid, best[i])) {
      const double o = obj[i * n + nb];
      if (std::isfinite(o)) spread = std::max(spread, o - mi);
    }
    out.piece_minima[i] = mi;
    out.piece_resolution[i] = spread;
    fmin = std::min(fmin, mi);
  }
  if (!std::isfinite(fmin)) throw DomainError("brute_force_prox: f is +inf on every grid node");
  out.min_objective = fmin;

  // Pieces whose grid minimum is within their own resolution of the best
  // one, in increasing order of that minimum.
  std::vector<std::size_t> accepted;
  for (std::size_t i = 0; i < m; ++i) {
    if (best[i] != n && out.piece_minima[i] - out.piece_resolution[i] <= fmin) accepted.push_back(i);
  }
  std::stable_sort(accepted.begin(), accepted.end(), [&](std::size_t a, std::size_t b) {
    return out.piece_minima[a] < out.piece_minima[b];
  });

  // Near-minimal component of each accepted piece; components that share a
  // node are merged.
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> owner(n, kNone);
  std::vector<std::vector<std::size_t>> members;
  std::vector<std::size_t> reps;
  for (std::size_t i : accepted) {
    out.band_width = std::max(out.band_width, out.piece_resolution[i]);
    const double cutoff = out.piece_minima[i] + out.piece_resolution[i];
    std::vector<std::size_t> comp;
    std::vector<char> seen(n, 0);
    std::queue<std::size_t> todo;
    todo.push(best[i]);
    seen[best[i]] = 1;
    std::size_t merge_into = kNone;
    while (!todo.empty()) {
      const std::size_t c = todo.front();
      todo.pop();
      comp.push_back(c);
      if (owner[c] != kNone && merge_into == kNone) merge_into = owner[c];
      for (std::size_t nb : neighbours(grid, c)) {
        if (!seen[nb] && obj[i * n + nb] <= cutoff) {
          seen[nb] = 1;
          todo.push(nb);
        }
      }
    }
    std::size_t id = merge_into;
    if (id == kNone) {
      id = members.size();
      members.emplace_back();
      reps.push_back(best[i]);
    }
    for (std::size_t c : comp) {
      if (owner[c] == kNone) {
        owner[c] = id;
        members[id].push_back(c);
      }
    }
  }

  for (std::size_t c = 0; c < members.size(); ++c) {
    std::sort(members[c].begin(), members[c].end());
    std::vector<Vector> nodes;
    nodes.reserve(members[c].size());
    for (std::size_t j : members[c]) {
      nodes.push_back(grid.node(j));
      out.band.push_back(nodes.back());
    }
    out.points.push_back(grid.node(reps[c]));
    out.clusters.push_back(std::move(nodes));
    out.boundary_artifact = out.boundary_artifact || on_boundary(grid, reps[c]);
  }
  return out;
}

double cluster_distance(const std::vector<Vector>& points, const GridProxResult& result) {
  auto to_cluster = [](const Vector& p, const std::vector<Vector>& cluster) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& q : cluster) d = std::min(d, (p - q).norm());
    return d;
  };
  double worst = 0.0;
  for (const auto& p : points) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& c : result.clusters) d = std::min(d, to_cluster(p, c));
    worst = std::max(worst, d);
  }
  for (const auto& c : result.clusters) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& p : points) d = std::min(d, to_cluster(p, c));
    worst = std::max(worst, d);
  }
  return worst;
}

RadiusEstimate estimate_radius(const UnionMap& t, const Vector& xstar, double delta_max,
                               std::size_t samples, const RadiusOptions& options) {
  require_dim(xstar, t.dim(), "estimate_radius");
  if (!(delta_max > 0.0) || !std::isfinite(delta_max)) {
    throw DomainError("estimate_radius: delta_max must be positive and finite");
  }
  if (samples == 0) throw DomainError("estimate_radius: need at least one sample");

  RadiusEstimate est;
  est.reference = t.active(xstar);
  est.samples = samples;

  PointSampler sampler(options.seed);
  const Vector origin = Vector::Zero(t.dim());
  std::vector<Vector> unit;
  unit.reserve(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    unit.push_back(k % 2 == 0 ? sampler.in_ball(origin, 1.0) : sampler.on_sphere(origin, 1.0));
  }

  auto accept = [&](double delta) {
    for (const Vector& u : unit) {
      const Vector p = xstar + delta * u;
      const IndexSet s = t.active(p);
      if (!std::includes(est.reference.begin(), est.reference.end(), s.begin(), s.end())) {
        if (!est.counterexample) est.counterexample = p;
        return false;
      }
    }
    return true;
  };

  if (accept(delta_max)) {
    est.radius = delta_max;
    return est;
  }
  double lo = 0.0;
  double hi = delta_max;
  for (std::size_t s = 0; s < options.bisection_steps; ++s) {
    const double mid = 0.5 * (lo + hi);
    (accept(mid) ? lo : hi) = mid;
    ++est.bisection_steps;
  }
  est.radius = lo;
  return est;
}

AveragednessReport sample_inequality(const UnionMap& t, double alpha, const SampleRegion& region,
                                     std::size_t pairs, std::uint64_t seed, double tol) {
  require_alpha(alpha, "sample_inequality");
  require_dim(region.center, t.dim(), "sample_inequality");
  PointSampler sampler(seed);
  AveragednessReport report;
  report.alpha = alpha;
  for (std::size_t i = 0; i < t.size(); ++i) {
    PieceViolation pv;
    pv.index = i;
    pv.max_violation = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < pairs; ++k) {
      const Vector x = sampler.in_box(region.center, region.half_width);
      const Vector y = sampler.in_box(region.center, region.half_width);
      const Vector tx = t.apply(i, x);
      const Vector ty = t.apply(i, y);
      double v;
      if (alpha < 1.0) {
        const Vector rx = (1.0 - 1.0 / alpha) * x + tx / alpha;
        const Vector ry = (1.0 - 1.0 / alpha) * y + ty / alpha;
        v = alpha * ((rx - ry).squaredNorm() - (x - y).squaredNorm());
      } else {
        v = (tx - ty).norm() - (x - y).norm();
      }
      if (v > pv.max_violation) {
        pv.max_violation = v;
        pv.worst_x = x;
        pv.worst_y = y;
      }
    }
    if (pairs == 0) pv.max_violation = 0.0;
    report.max_violation = i == 0 ? pv.max_violation : std::max(report.max_violation, pv.max_violation);
    report.pieces.push_back(std::move(pv));
  }
  report.passed = report.max_violation <= tol;
  return report;
}

FixedVerification verify_fixed_classification(const UnionMap& t, const Vector& x, double tol) {
  const Evaluation ev = t.evaluate(x);
  FixedVerification out;
  for (const auto& b : ev.branches) {
    out.active.push_back(b.index);
    if ((b.value - x).norm() <= tol) out.witnesses.push_back(b.index);
  }
  out.single_valued = ev.single_valued();
  const bool fixed = !out.witnesses.empty();
  const bool all = out.witnesses.size() == out.active.size();
  out.classification = !fixed ? FixedPointClass::kNotFixed
                       : all  ? FixedPointClass::kStrongFixed
                              : FixedPointClass::kFixed;
  out.consistent = (out.classification == FixedPointClass::kStrongFixed) ==
                   (fixed && out.single_valued);
  return out;
}

LocalMinProbe brute_force_local_min(const Objective& objective, const Vector& x, double radius,
                                    std::size_t samples, std::uint64_t seed, double tol) {
  const ExtendedReal fx = objective(x);
  if (fx.is_infinite()) throw DomainError("brute_force_local_min: objective is +inf at x");
  if (!(radius > 0.0)) throw DomainError("brute_force_local_min: radius must be positive");
  PointSampler sampler(seed);
  LocalMinProbe probe;
  probe.best_value = fx.value();
  for (std::size_t k = 0; k < samples; ++k) {
    const Vector y = sampler.in_ball(x, radius);
    ++probe.samples;
    const ExtendedReal v = objective(y);
    if (v.is_finite() && v.value() < probe.best_value) {
      probe.best_value = v.value();
      if (v.value() < fx.value() - tol) probe.better = y;
    }
  }
  probe.passed = !probe.better.has_value();
  return probe;
}

}  // namespace uan
