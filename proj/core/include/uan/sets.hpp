#pragma once

#include "uan/union_map.hpp"
#include "uan/vector.hpp"

#include <functional>
#include <string>
#include <vector>

namespace uan {

/// Default tolerance for set membership. Diagnostics only; no algorithm step
/// branches on it.
inline constexpr double kMembershipTol = 1e-9;

/// A nonempty closed convex set known through its nearest-point projector.
class ConvexSetPiece {
 public:
  using ProjectFn = std::function<Vector(const Vector&)>;

  ConvexSetPiece(Index dim, std::string label, ProjectFn project);

  Index dim() const { return dim_; }
  const std::string& label() const { return label_; }

  Vector project(const Vector& x) const;
  /// ||x - P(x)||.
  double distance(const Vector& x) const;
  bool contains(const Vector& x, double tol = kMembershipTol) const;

 private:
  Index dim_;
  std::string label_;
  ProjectFn project_;
};

/// Catalog of convex pieces with closed-form projectors.
namespace convex {

ConvexSetPiece whole_space(Index dim);
ConvexSetPiece singleton(Vector point);
ConvexSetPiece box(Vector lo, Vector hi);
ConvexSetPiece ball(Vector center, double radius);
/// { x : <a, x> <= beta }, a != 0.
ConvexSetPiece halfspace(Vector a, double beta);
/// { x : A x = b }. Throws DomainError if the system is inconsistent.
/// An orthonormal basis of the row space is computed once (QR).
ConvexSetPiece affine_solutions(const Matrix& a, const Vector& b);
/// point + span(columns of directions), orthonormalised once (QR).
ConvexSetPiece affine_span(const Vector& point, const Matrix& directions);
/// { x : x_k = 0 for k outside support }.
ConvexSetPiece coordinate_subspace(Index dim, std::vector<Index> support);

}  // namespace convex

/// A finite union of closed convex sets.
///
/// The active set of pieces at x defaults to the nearest pieces
/// { i : d(x, A_i) <= min_j d(x, A_j) + tie_tol }; structured sets (sparsity)
/// may install an equivalent closed-form selector.
class UnionConvexSet {
 public:
  using TieSelector = std::function<IndexSet(const Vector&, double tie_tol)>;

  explicit UnionConvexSet(std::vector<ConvexSetPiece> pieces, std::string label = {});
  UnionConvexSet(std::vector<ConvexSetPiece> pieces, TieSelector selector, std::string label);
  /// Single convex piece.
  UnionConvexSet(ConvexSetPiece piece);  // NOLINT

  Index dim() const { return dim_; }
  std::size_t size() const { return pieces_.size(); }
  bool is_convex() const { return pieces_.size() == 1; }
  const std::string& label() const { return label_; }
  const std::vector<ConvexSetPiece>& pieces() const { return pieces_; }
  const ConvexSetPiece& piece(std::size_t i) const { return pieces_.at(i); }
  /// A point of piece i, computed and verified at construction.
  const Vector& witness(std::size_t i) const { return witnesses_.at(i); }
  bool has_custom_selector() const { return static_cast<bool>(selector_); }

  double distance(const Vector& x) const;
  bool contains(const Vector& x, double tol = kMembershipTol) const;

  /// Nearest pieces by distance comparison.
  IndexSet nearest_pieces(const Vector& x, double tie_tol) const;
  /// Custom selector when installed, nearest_pieces otherwise.
  IndexSet active(const Vector& x, double tie_tol) const;

 private:
  std::vector<ConvexSetPiece> pieces_;
  std::vector<Vector> witnesses_;
  TieSelector selector_;
  std::string label_;
  Index dim_ = 0;
};

/// { x in R^n : ||x||_0 <= s } as the union of the C(n, s) coordinate
/// subspaces, with the magnitude-threshold selector
///   { I : min_{i in I} |x_i| >= max_{i not in I} |x_i| - tie_tol }.
/// Pieces are ordered lexicographically by support. Requires 0 <= s <= n-1.
UnionConvexSet sparsity_set(Index n, Index s);

/// Supports of sparsity_set(n, s) in piece order.
std::vector<std::vector<Index>> sparsity_supports(Index n, Index s);

enum class SelectorMode { kAuto, kDistance };

/// Multi-valued projector, union 1/2-averaged.
UnionMap project_union(const UnionConvexSet& set, double tie_tol = kDefaultTieTol,
                       SelectorMode mode = SelectorMode::kAuto);

/// Reflector 2 P_A - Id, union nonexpansive (alpha = 1 sentinel).
UnionMap reflect_union(const UnionConvexSet& set, double tie_tol = kDefaultTieTol);

/// Two-set Douglas-Rachford operator (Id + R_B R_A) / 2, union 1/2-averaged.
/// Piece (i, j) has flat index i + |A| * j and maps
///   x -> x + P_{B_j}(2 P_{A_i}(x) - x) - P_{A_i}(x).
UnionMap dr_operator(const UnionConvexSet& a, const UnionConvexSet& b,
                     double tie_tol = kDefaultTieTol);

}  // namespace uan
