#include "uan/averaged_map.hpp"

#include "uan/errors.hpp"

#include <utility>

namespace uan {

void require_alpha(double alpha, const std::string& who) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw DomainError(who + ": alpha must lie in (0, 1], got " + std::to_string(alpha));
  }
}

AveragedMap::AveragedMap(Index dim, double alpha, std::string label, Fn eval)
    : dim_(dim), alpha_(alpha), label_(std::move(label)), eval_(std::move(eval)) {
  if (dim_ < 1) throw DimensionError("AveragedMap: dimension must be positive");
  require_alpha(alpha_, "AveragedMap '" + label_ + "'");
  if (!eval_) throw ContractViolation("AveragedMap '" + label_ + "': empty callable");
}

Vector AveragedMap::operator()(const Vector& x) const {
  require_dim(x, dim_, label_);
  return eval_(x);
}

AveragedMap AveragedMap::identity(Index dim, double alpha) {
  return AveragedMap(dim, alpha, "Id", [](const Vector& x) { return x; });
}

AveragedMap AveragedMap::constant(Vector c) {
  const Index n = c.size();
  return AveragedMap(n, 0.5, "const", [c = std::move(c)](const Vector&) { return c; });
}

AveragedMap AveragedMap::affine(Matrix m, Vector shift, double alpha, std::string label) {
  if (m.rows() != m.cols() || m.rows() != shift.size()) {
    throw DimensionError("AveragedMap::affine: matrix must be square and match the shift");
  }
  const Index n = m.rows();
  return AveragedMap(n, alpha, std::move(label),
                     [m = std::move(m), shift = std::move(shift)](const Vector& x) -> Vector {
                       return m * x + shift;
                     });
}

}  // namespace uan
