#pragma once

#include "uan/vector.hpp"

#include <cstdint>
#include <random>

namespace uan {

/// Seeded point generator. Streams are reproducible for a fixed seed and
/// build; nothing here touches global state.
class PointSampler {
 public:
  explicit PointSampler(std::uint64_t seed) : rng_(seed) {}

  /// Uniform in the axis-aligned box center +- half_width.
  Vector in_box(const Vector& center, double half_width);
  /// Uniform in the closed Euclidean ball.
  Vector in_ball(const Vector& center, double radius);
  /// Uniform on the sphere of the given radius.
  Vector on_sphere(const Vector& center, double radius);
  double uniform(double lo, double hi);
  std::size_t index(std::size_t n);

  std::mt19937_64& engine() { return rng_; }

 private:
  Vector direction(Index n);

  std::mt19937_64 rng_;
};

/// Axis-aligned sampling box for pairwise inequality checks.
struct SampleRegion {
  Vector center;
  double half_width = 1.0;
};

}  // namespace uan
