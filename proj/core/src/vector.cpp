#include "uan/vector.hpp"

#include "uan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace uan {

Vector make_vector(std::initializer_list<double> entries) {
  return make_vector(std::span<const double>(entries.begin(), entries.size()));
}

Vector make_vector(std::span<const double> entries) {
  if (entries.empty()) {
    throw DimensionError("vector must have at least one entry");
  }
  Vector x(static_cast<Index>(entries.size()));
  std::copy(entries.begin(), entries.end(), x.data());
  require_finite(x, "vector");
  return x;
}

void require_finite(const Vector& x, std::string_view what) {
  if (!x.allFinite()) {
    throw DomainError(std::string(what) + ": entries must be finite");
  }
}

void require_dim(const Vector& x, Index dim, std::string_view what) {
  if (x.size() != dim) {
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(dim) +
                         ", got " + std::to_string(x.size()));
  }
}

bool nearly_equal(const Vector& a, const Vector& b, double tol) {
  if (a.size() != b.size()) return false;
  const double scale = std::max({1.0, a.lpNorm<Eigen::Infinity>(), b.lpNorm<Eigen::Infinity>()});
  return (a - b).lpNorm<Eigen::Infinity>() <= tol * scale;
}

std::vector<double> to_std(const Vector& x) { return {x.data(), x.data() + x.size()}; }

}  // namespace uan
