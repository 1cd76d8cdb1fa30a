#pragma once

#include "uan/averaged_map.hpp"
#include "uan/vector.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace uan {

inline constexpr double kDefaultTieTol = 1e-10;
inline constexpr double kDedupTol = 1e-12;

using IndexSet = std::vector<std::size_t>;

/// Active selector: maps a point to a nonempty set of piece indices.
using Selector = std::function<IndexSet(const Vector&)>;

/// One active piece and its value at the evaluation point.
struct Branch {
  std::size_t index;
  Vector value;
};

/// Result of evaluating a union map at a point.
///
/// `branches` keeps every active (index, value) pair in ascending index
/// order; `points` is the same data viewed as a set, with values closer
/// than kDedupTol merged.
struct Evaluation {
  std::vector<Branch> branches;
  std::vector<Vector> points;

  bool single_valued() const { return points.size() == 1; }
};

/// Set-valued operator x -> { T_i(x) : i in phi(x) } built from finitely
/// many averaged pieces and an active selector phi.
///
/// Values are immutable and cheap to copy (shared implementation), so the
/// same map can be evaluated concurrently from several threads. Composite
/// maps never materialise phi: their selectors are computed by chaining
/// evaluations through the stages.
class UnionMap {
 public:
  class Impl {
   public:
    virtual ~Impl() = default;
    virtual Index dim() const = 0;
    virtual double alpha() const = 0;
    virtual std::size_t size() const = 0;
    virtual std::string label() const = 0;
    virtual std::string index_label(std::size_t i) const = 0;
    /// Active branches at x; may be unsorted.
    virtual std::vector<Branch> branches(const Vector& x) const = 0;
    virtual Vector apply(std::size_t i, const Vector& x) const = 0;
  };

  explicit UnionMap(std::shared_ptr<const Impl> impl);

  /// Pieces plus selector. alpha is the largest piece alpha.
  static UnionMap from_pieces(std::vector<AveragedMap> pieces, Selector selector,
                              std::string label);
  /// A single-valued map viewed as a one-piece union map.
  static UnionMap single(AveragedMap map);

  Index dim() const { return impl_->dim(); }
  double alpha() const { return impl_->alpha(); }
  /// Number of pieces in the index set I.
  std::size_t size() const { return impl_->size(); }
  std::string label() const { return impl_->label(); }
  /// Human-readable name of a piece index, e.g. "(0,1)" for composites.
  std::string index_label(std::size_t i) const;

  IndexSet active(const Vector& x) const;
  std::vector<Branch> branches(const Vector& x) const;
  Evaluation evaluate(const Vector& x) const;

  /// Value of piece i at x, whether or not i is active there.
  Vector apply(std::size_t i, const Vector& x) const;
  /// Piece i as a standalone averaged map.
  AveragedMap piece(std::size_t i) const;

 private:
  std::shared_ptr<const Impl> impl_;
};

/// alpha of a union: max_j alpha_j.
double union_alpha(std::span<const double> alphas);
/// alpha of a convex combination: sum_j w_j alpha_j, or 1 when any alpha_j is 1.
double combination_alpha(std::span<const double> alphas, std::span<const double> weights);
/// alpha of a composition: (1 + (sum_j alpha_j / (1 - alpha_j))^{-1})^{-1},
/// or 1 when any alpha_j is 1.
double composition_alpha(std::span<const double> alphas);

/// x -> union of T_j(x). Pieces are indexed by (j, i) flattened with offsets.
UnionMap union_of(const std::vector<UnionMap>& maps);

/// x -> { sum_j w_j T_{j,i_j}(x) : (i_1..i_m) in phi_1(x) x ... x phi_m(x) }.
/// Weights must be positive and sum to one within 1e-12.
UnionMap convex_combination(const std::vector<UnionMap>& maps, std::span<const double> weights);

/// T_m o ... o T_1, with maps[0] applied first.
UnionMap compose(const std::vector<UnionMap>& maps);

/// (1 - lambda) Id + lambda T with lambda in (0, 1/alpha(T)].
UnionMap relax(const UnionMap& map, double lambda);

enum class FixedPointClass { kNotFixed, kFixed, kStrongFixed };

const char* to_string(FixedPointClass c);

struct FixedPointInfo {
  FixedPointClass classification = FixedPointClass::kNotFixed;
  IndexSet active;
  /// Active indices whose piece maps x to itself within tol.
  IndexSet fixing;
};

/// x is fixed when some active piece fixes it and strongly fixed when all do.
FixedPointInfo classify_fixed(const UnionMap& map, const Vector& x, double tol);

}  // namespace uan
