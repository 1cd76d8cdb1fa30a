#include "uan/sampling.hpp"

#include <cmath>

namespace uan {

Vector PointSampler::in_box(const Vector& center, double half_width) {
  std::uniform_real_distribution<double> u(-half_width, half_width);
  Vector x = center;
  for (Index k = 0; k < x.size(); ++k) x[k] += u(rng_);
  return x;
}

Vector PointSampler::direction(Index n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector d(n);
  do {
    for (Index k = 0; k < n; ++k) d[k] = g(rng_);
  } while (d.norm() == 0.0);
  return d / d.norm();
}

Vector PointSampler::in_ball(const Vector& center, double radius) {
  const Index n = center.size();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = radius * std::pow(u(rng_), 1.0 / static_cast<double>(n));
  return center + r * direction(n);
}

Vector PointSampler::on_sphere(const Vector& center, double radius) {
  return center + radius * direction(center.size());
}

double PointSampler::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng_);
}

std::size_t PointSampler::index(std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
}

}  // namespace uan
