#pragma once

#include "uan/extended_real.hpp"
#include "uan/sets.hpp"
#include "uan/union_map.hpp"
#include "uan/vector.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace uan {

/// A proper, lsc, convex function known through its value and its
/// (single-valued) proximity operator. Lower semicontinuity is part of the
/// contract and is not checked.
class ConvexPiece {
 public:
  using ValueFn = std::function<ExtendedReal(const Vector&)>;
  using ProxFn = std::function<Vector(double gamma, const Vector&)>;

  ConvexPiece(Index dim, std::string label, ValueFn value, ProxFn prox);

  Index dim() const { return dim_; }
  const std::string& label() const { return label_; }

  ExtendedReal value(const Vector& x) const;
  Vector prox(double gamma, const Vector& x) const;
  /// Moreau envelope f(p) + |x - p|^2 / (2 gamma) with p = prox(gamma, x).
  double envelope(double gamma, const Vector& x) const;

 private:
  Index dim_;
  std::string label_;
  ValueFn value_;
  ProxFn prox_;
};

/// Closed-form convex pieces.
namespace pieces {

/// Indicator of a convex set; points within `tol` of the set count as inside.
ConvexPiece indicator(ConvexSetPiece set, double tol = kMembershipTol);
/// 1/2 x^T Q x + b^T x + c with Q symmetric positive semidefinite.
ConvexPiece quadratic(Matrix q, Vector b, double c = 0.0);
/// weight * ||x||_1.
ConvexPiece l1_norm(Index dim, double weight);
/// weight * ||x||_2.
ConvexPiece l2_norm(Index dim, double weight);

}  // namespace pieces

/// f(x) = min_i f_i(x) over finitely many convex pieces.
class MinConvexFn {
 public:
  explicit MinConvexFn(std::vector<ConvexPiece> pieces);
  MinConvexFn(ConvexPiece piece);  // NOLINT

  Index dim() const { return dim_; }
  std::size_t size() const { return pieces_.size(); }
  const ConvexPiece& piece(std::size_t i) const { return pieces_.at(i); }
  const std::vector<ConvexPiece>& pieces() const { return pieces_; }

  /// min_i f_i(x); +inf only when every piece is +inf at x.
  ExtendedReal value(const Vector& x) const;
  std::vector<double> piece_envelopes(double gamma, const Vector& x) const;
  /// min_i of the piece envelopes; always finite.
  double envelope(double gamma, const Vector& x) const;

 private:
  std::vector<ConvexPiece> pieces_;
  Index dim_ = 0;
};

/// { i : env_i(x) <= env(x) + tie_tol }. Never empty.
IndexSet active_selector(const MinConvexFn& f, double gamma, const Vector& x,
                         double tie_tol = kDefaultTieTol);

/// prox_{gamma f} as a union 1/2-averaged map with pieces prox_{gamma f_i}
/// and the envelope-tie selector.
UnionMap prox_union(const MinConvexFn& f, double gamma, double tie_tol = kDefaultTieTol);

struct PointClassification {
  FixedPointClass classification = FixedPointClass::kNotFixed;
  IndexSet active;
  IndexSet fixing;
  /// env(x) - f(x); empty when f(x) = +inf.
  std::optional<double> envelope_gap;
  /// Whether "fixed" agrees with |env(x) - f(x)| <= tol (true when f(x) = +inf
  /// and x is not fixed).
  bool envelope_consistent = true;
};

/// Fixed-point status of x for prox_{gamma f}.
PointClassification classify_point(const MinConvexFn& f, double gamma, const Vector& x,
                                   double tol);

/// Local-minimum test: every piece with f_i(x) <= f(x) + tol must be
/// minimised at x, checked as prox_{f_i}(x) == x (gamma = 1).
/// Throws DomainError when f(x) = +inf.
bool is_local_min(const MinConvexFn& f, const Vector& x, double tol);

enum class SelectorKind {
  kValue,     // { i : f_i(x) = f(x) }, finite-valued samples only
  kEnvelope,  // active_selector
};

struct OscReport {
  std::size_t samples = 0;
  std::size_t evaluated = 0;
  std::size_t violations = 0;
  IndexSet reference;
  std::optional<Vector> counterexample;
  bool passed = true;
};

struct OscProbeOptions {
  SelectorKind kind = SelectorKind::kValue;
  double gamma = 1.0;
  double tie_tol = kDefaultTieTol;
  std::uint64_t seed = 0;
};

/// Samples points in the ball of `radius` around x and checks that the
/// selector there is contained in the selector at x.
OscReport osc_probe(const MinConvexFn& f, const Vector& x, double radius, std::size_t samples,
                    const OscProbeOptions& options = {});

}  // namespace uan
