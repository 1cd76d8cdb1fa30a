#pragma once

#include "uan/minconvex.hpp"
#include "uan/sets.hpp"
#include "uan/union_map.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace uan {

/// Relaxation parameters lambda_n.
struct Schedule {
  std::function<double(std::size_t)> lambda_at;
  /// Smallest and largest value the schedule takes.
  double lo = 1.0;
  double hi = 1.0;
  std::string description;
  /// Finite-horizon stand-in for liminf lambda_n (bound - lambda_n) > 0:
  /// every probed step must satisfy lambda_n (bound - lambda_n) >= eps.
  double eps = 1e-3;

  double operator()(std::size_t n) const { return lambda_at(n); }

  static Schedule constant(double lambda);
  /// values[n mod size].
  static Schedule cyclic(std::vector<double> values);
};

/// Throws DomainError unless 0 < lambda_n <= bound and
/// lambda_n (bound - lambda_n) >= schedule.eps for n < horizon.
void check_schedule(const Schedule& schedule, double bound, std::size_t horizon,
                    const std::string& who);

/// Index sequence (i_n) for km_admissible.
class ControlSequence {
 public:
  enum class Kind { kCyclic, kSeededRandomAdmissible, kUser };
  using NextFn = std::function<std::size_t(std::size_t step, const std::vector<std::size_t>& history)>;

  /// 0, 1, ..., m-1, 0, 1, ...; window m.
  static ControlSequence cyclic(std::size_t m);
  /// Concatenated random permutations of {0..m-1}, one per block of m steps;
  /// every index appears in every window of 2m steps.
  static ControlSequence random_admissible(std::size_t m, std::uint64_t seed);
  /// Caller-defined sequence, checked against the given window after the run.
  static ControlSequence user(std::size_t m, std::size_t window, NextFn next);

  Kind kind() const { return kind_; }
  std::size_t size() const { return m_; }
  std::size_t window() const { return window_; }
  std::size_t next(std::size_t step, const std::vector<std::size_t>& history) const;

 private:
  ControlSequence(Kind kind, std::size_t m, std::size_t window, NextFn next);

  Kind kind_;
  std::size_t m_;
  std::size_t window_;
  NextFn next_;
};

/// True when every index in [0, m) appears in every length-`window` block of
/// consecutive entries of `history` (vacuously true for short histories).
bool is_admissible(const std::vector<std::size_t>& history, std::size_t m, std::size_t window);

/// Picks one branch out of a multivalued evaluation.
class SelectionPolicy {
 public:
  enum class Kind { kLowestIndex, kSeededRandom, kRoundRobin, kUser };
  /// Returns a position into `branches`.
  using UserFn = std::function<std::size_t(std::size_t step, const std::vector<Branch>& branches)>;

  static SelectionPolicy lowest_index();
  static SelectionPolicy seeded_random(std::uint64_t seed);
  /// branches[step mod count].
  static SelectionPolicy round_robin();
  static SelectionPolicy user(UserFn fn);

  Kind kind() const { return kind_; }
  std::string name() const;
  /// Position of the chosen branch; a pure function of (step, branches).
  std::size_t choose(std::size_t step, const std::vector<Branch>& branches) const;

 private:
  SelectionPolicy(Kind kind, std::uint64_t seed, UserFn fn);

  Kind kind_;
  std::uint64_t seed_ = 0;
  UserFn fn_;
};

struct StopRule {
  double step_tol = 1e-10;
  std::size_t max_iters = 10000;
  /// When set, convergence means residual(x) <= residual_tol instead of the
  /// step test.
  std::function<double(const Vector&)> residual;
  double residual_tol = 1e-10;
  /// Tolerance used to classify the final point and check memberships.
  double classify_tol = 1e-8;
  /// Divergence guard: |x_n| > guard_factor (1 + |x_0|).
  double guard_factor = 1e8;
};

enum class RunStatus { kConverged, kMaxIters, kDivergedGuard };

const char* to_string(RunStatus s);

struct TraceStep {
  std::size_t n = 0;
  Vector x;  // x_n
  /// Map used at this step (control index, cycle position); 0 for one-map drivers.
  std::size_t map = 0;
  /// Chosen piece of that map and its printable name.
  std::size_t index = 0;
  std::string index_label;
  double lambda = 1.0;
  double step_norm = 0.0;  // |x_{n+1} - x_n|
  std::size_t active_count = 1;
  std::optional<double> residual;
  /// Driver-specific auxiliary points, e.g. (y_n, z_n) for splitting.
  std::vector<Vector> aux;
};

struct IterationTrace {
  std::string algorithm;
  Index dim = 0;
  Vector x0;
  std::vector<TraceStep> steps;
  Vector final_point;
  RunStatus status = RunStatus::kMaxIters;

  /// Fixed-point status of final_point for the driving operator.
  FixedPointClass classification = FixedPointClass::kNotFixed;
  IndexSet active;
  IndexSet fixing;

  /// x_{km} for cyclic drivers with m maps per sweep.
  std::vector<Vector> sweep_points;
  /// Control indices recurring in the last window (km_admissible).
  IndexSet recurring;
  std::optional<bool> admissible;

  std::optional<Vector> shadow;
  /// Distances to each constraint set (of the shadow when one exists).
  std::vector<double> set_residuals;
  std::optional<bool> memberships_ok;
  std::optional<bool> local_min;
  std::optional<double> objective;
  std::vector<std::string> notes;

  std::size_t iterations() const { return steps.size(); }
};

/// x_{n+1} = (1 - lambda_n) x_n + lambda_n T_{i_n}(x_n).
IterationTrace km_admissible(const std::vector<AveragedMap>& maps, const ControlSequence& control,
                             const Schedule& schedule, const Vector& x0, const StopRule& stop);

/// x_{n+1} in (1 - lambda_n) x_n + lambda_n T(x_n), the branch chosen by policy.
IterationTrace iterate_union(const UnionMap& t, const Schedule& schedule,
                             const SelectionPolicy& policy, const Vector& x0, const StopRule& stop);

/// x_{n+1} in T_{n mod m}(x_n); convergence is tested once per sweep.
IterationTrace cyclic_compose(const std::vector<UnionMap>& maps, const SelectionPolicy& policy,
                              const Vector& x0, const StopRule& stop);

IterationTrace cyclic_projections(const std::vector<UnionConvexSet>& sets,
                                  const SelectionPolicy& policy, const Vector& x0,
                                  const StopRule& stop);

/// Iterates T_{C_m,C_1} o ... o T_{C_1,C_2} with lambda = 1. No shadow point.
IterationTrace cyclic_dr(const std::vector<UnionConvexSet>& sets, const SelectionPolicy& policy,
                         const Vector& x0, const StopRule& stop);

/// Cyclically anchored Douglas-Rachford: x_{n+1} in T_{A, C_{i_n}}(x_n) over
/// the non-anchor sets. The anchor is sets.front() when anchor_first, else
/// sets.back(). With a convex anchor the shadow P_A(x) is reported.
IterationTrace cadr(const std::vector<UnionConvexSet>& sets, bool anchor_first,
                    const SelectionPolicy& policy, const Vector& x0, const StopRule& stop);

/// x_{n+1} in prox_{gamma f}(x_n); reports whether the limit is a local min.
IterationTrace ppa(const MinConvexFn& f, double gamma, const SelectionPolicy& policy,
                   const Vector& x0, const StopRule& stop);

/// Smooth convex term with L-Lipschitz gradient.
struct SmoothFn {
  Index dim = 0;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> grad;
  double lipschitz = 1.0;

  /// 1/2 x^T Q x + b^T x, with L = largest eigenvalue of Q.
  static SmoothFn quadratic(const Matrix& q, const Vector& b);
  static SmoothFn zero(Index dim);
};

/// T_FB = prox_{gamma g} o (Id - gamma grad f) as a union map.
UnionMap forward_backward_operator(const SmoothFn& f, const MinConvexFn& g, double gamma);

/// Local-min test for f + g with convex smooth f: every piece g_i with
/// g_i(x) <= g(x) + tol must satisfy x = prox_{gamma g_i}(x - gamma grad f(x)).
bool is_local_min(const SmoothFn& f, const MinConvexFn& g, const Vector& x, double gamma,
                  double tol);

IterationTrace forward_backward(const SmoothFn& f, const MinConvexFn& g, double gamma,
                                const Schedule& schedule, const SelectionPolicy& policy,
                                const Vector& x0, const StopRule& stop);

/// T_DR = (Id + R_g o R_f) / 2 with R = 2 prox_gamma - Id. Piece index
/// i_f + |f| i_g.
UnionMap douglas_rachford_operator(const MinConvexFn& f, const MinConvexFn& g, double gamma);

/// x_{n+1} = x_n + lambda_n (z_n - y_n), y_n in prox_{gamma f}(x_n),
/// z_n in prox_{gamma g}(2 y_n - x_n). Steps carry aux = {y_n, z_n}.
IterationTrace douglas_rachford(const MinConvexFn& f, const MinConvexFn& g, double gamma,
                                const Schedule& schedule, const SelectionPolicy& policy,
                                const Vector& x0, const StopRule& stop);

}  // namespace uan
