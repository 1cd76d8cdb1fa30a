#pragma once

#include <Eigen/Dense>

#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace uan {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Builds a vector and rejects NaN/Inf entries.
Vector make_vector(std::initializer_list<double> entries);
Vector make_vector(std::span<const double> entries);

/// Throws DomainError naming `what` if any entry is not finite.
void require_finite(const Vector& x, std::string_view what);

/// Throws DimensionError if x.size() != dim.
void require_dim(const Vector& x, Index dim, std::string_view what);

/// Scaled closeness used for point-set deduplication:
/// ||a - b||_inf <= tol * max(1, ||a||_inf, ||b||_inf).
bool nearly_equal(const Vector& a, const Vector& b, double tol);

std::vector<double> to_std(const Vector& x);

}  // namespace uan
