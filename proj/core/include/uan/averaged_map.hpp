#pragma once

#include "uan/vector.hpp"

#include <functional>
#include <string>

namespace uan {

/// A single-valued operator together with its averagedness constant.
///
/// alpha lies in (0, 1]. alpha < 1 means the map is alpha-averaged
/// nonexpansive; alpha == 1 is the sentinel for "nonexpansive only".
/// The callable must be pure: the same input always yields the same output.
class AveragedMap {
 public:
  using Fn = std::function<Vector(const Vector&)>;

  AveragedMap(Index dim, double alpha, std::string label, Fn eval);

  Index dim() const { return dim_; }
  double alpha() const { return alpha_; }
  bool is_averaged() const { return alpha_ < 1.0; }
  const std::string& label() const { return label_; }

  /// Evaluates the map; throws DimensionError on a size mismatch.
  Vector operator()(const Vector& x) const;

  /// Evaluation without the dimension check, for inner loops that have
  /// already validated their input.
  Vector apply_unchecked(const Vector& x) const { return eval_(x); }

  static AveragedMap identity(Index dim, double alpha = 0.5);
  /// x -> c. Constant maps are firmly nonexpansive.
  static AveragedMap constant(Vector c);
  /// x -> M x + shift.
  static AveragedMap affine(Matrix m, Vector shift, double alpha, std::string label);

 private:
  Index dim_;
  double alpha_;
  std::string label_;
  Fn eval_;
};

/// Throws DomainError unless alpha is in (0, 1].
void require_alpha(double alpha, const std::string& who);

}  // namespace uan
