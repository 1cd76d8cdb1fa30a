#pragma once

#include "uan/averagedness.hpp"
#include "uan/minconvex.hpp"
#include "uan/sampling.hpp"
#include "uan/union_map.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace uan {

inline constexpr Index kMaxGridDim = 3;
inline constexpr std::size_t kMaxGridEvaluations = 10'000'000;

/// Tensor grid with k points per axis on [lo_a, hi_a].
struct GridSpec {
  std::vector<double> lo;
  std::vector<double> hi;
  std::size_t k = 101;

  static GridSpec cube(Index dim, double lo, double hi, std::size_t k);

  Index dim() const { return static_cast<Index>(lo.size()); }
  double spacing(Index axis) const;
  /// Euclidean diameter of one grid cell.
  double cell_diameter() const;
  std::size_t node_count() const;
  Vector node(std::size_t flat) const;
};

/// Throws DomainError unless 1 <= dim <= 3, k >= 3, lo < hi per axis and the
/// grid has at most kMaxGridEvaluations nodes.
void validate(const GridSpec& grid);

struct GridProxResult {
  /// Best node of each cluster.
  std::vector<Vector> points;
  /// Near-minimal nodes around each grid minimiser, one list per cluster.
  std::vector<std::vector<Vector>> clusters;
  /// All cluster nodes.
  std::vector<Vector> band;
  double min_objective = 0.0;
  /// Largest resolution among the pieces that made it into a cluster.
  double band_width = 0.0;
  /// Per piece: grid minimum of f_i(y) + |x - y|^2 / (2 gamma) (+inf when
  /// f_i is +inf on every node) and its resolution, the objective spread
  /// over the grid neighbours of the minimising node.
  std::vector<double> piece_minima;
  std::vector<double> piece_resolution;
  /// Some representative lies on the grid boundary, so the true minimiser may
  /// lie outside the grid.
  bool boundary_artifact = false;
};

/// Minimises y -> f(y) + |x - y|^2 / (2 gamma) over the grid nodes, using
/// only values of the pieces. A piece is kept when its grid minimum is
/// within its own resolution of the overall minimum; each kept piece
/// contributes the connected set of its nodes within that resolution, and
/// sets sharing a node are merged into one cluster.
/// Throws DomainError when f is +inf on every node.
GridProxResult brute_force_prox(const MinConvexFn& f, double gamma, const Vector& x,
                                const GridSpec& grid);

/// Hausdorff-type distance between a finite point set and the clusters of a
/// grid result: the larger of max_p min_cluster dist(p, cluster) and
/// max_cluster min_p dist(p, cluster), with dist to a cluster taken over its
/// nodes.
double cluster_distance(const std::vector<Vector>& points, const GridProxResult& result);

struct RadiusEstimate {
  /// Largest accepted delta. Every delta below the true radius is accepted,
  /// so sampling misses can only push this above it (and more samples only
  /// bring it down); treat it as an estimate, not a certified bound.
  double radius = 0.0;
  bool lower_estimate = true;
  IndexSet reference;
  /// First sampled point whose active set was not contained in the reference.
  std::optional<Vector> counterexample;
  std::size_t samples = 0;
  std::size_t bisection_steps = 0;
};

struct RadiusOptions {
  std::uint64_t seed = 0;
  std::size_t bisection_steps = 30;
};

/// Bisection on delta in (0, delta_max]: delta is accepted when every sample
/// x* + delta u_k (u_k in the closed unit ball, half of them on the sphere)
/// has active set inside active(x*). Samples for a smaller count are a prefix
/// of those for a larger one, so the estimate never grows with `samples`.
RadiusEstimate estimate_radius(const UnionMap& t, const Vector& xstar, double delta_max,
                               std::size_t samples, const RadiusOptions& options = {});

/// Pairwise inequality sampling through the reflected form: with
/// R = (1 - 1/alpha) Id + (1/alpha) T_i, the averagedness inequality reads
/// alpha (|Rx - Ry|^2 - |x - y|^2) <= 0. For alpha = 1 the report holds
/// |T_i x - T_i y| - |x - y|.
AveragednessReport sample_inequality(const UnionMap& t, double alpha, const SampleRegion& region,
                                     std::size_t pairs, std::uint64_t seed, double tol = 1e-9);

struct FixedVerification {
  FixedPointClass classification = FixedPointClass::kNotFixed;
  IndexSet active;
  /// Indices whose piece fixes x within tol.
  IndexSet witnesses;
  bool single_valued = false;
  /// strong-fixed <=> (fixed and single-valued).
  bool consistent = true;
};

/// Classification from a direct evaluation of T at x.
FixedVerification verify_fixed_classification(const UnionMap& t, const Vector& x, double tol);

using Objective = std::function<ExtendedReal(const Vector&)>;

struct LocalMinProbe {
  bool passed = true;
  std::size_t samples = 0;
  /// Best sampled point when it beats x by more than tol.
  std::optional<Vector> better;
  double best_value = 0.0;
};

/// Samples the ball around x and looks for a point with a lower objective.
LocalMinProbe brute_force_local_min(const Objective& objective, const Vector& x, double radius,
                                    std::size_t samples, std::uint64_t seed, double tol = 1e-12);

}  // namespace uan
