#include "uan/averagedness.hpp"

#include <limits>

namespace uan {

double averagedness_violation(const Vector& x, const Vector& y, const Vector& tx,
                              const Vector& ty, double alpha) {
  if (alpha >= 1.0) return (tx - ty).norm() - (x - y).norm();
  const double lhs = (tx - ty).squaredNorm() +
                     (1.0 - alpha) / alpha * ((x - tx) - (y - ty)).squaredNorm();
  return lhs - (x - y).squaredNorm();
}

AveragednessReport check_averaged(const UnionMap& map, double alpha, const SampleRegion& region,
                                  const AveragednessOptions& options) {
  require_alpha(alpha, "check_averaged");
  require_dim(region.center, map.dim(), "check_averaged region");
  AveragednessReport report;
  report.alpha = alpha;
  report.max_violation = -std::numeric_limits<double>::infinity();
  PointSampler sampler(options.seed);
  for (std::size_t i = 0; i < map.size(); ++i) {
    PieceViolation pv;
    pv.index = i;
    pv.max_violation = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < options.pairs; ++k) {
      const Vector x = sampler.in_box(region.center, region.half_width);
      const Vector y = sampler.in_box(region.center, region.half_width);
      const double v = averagedness_violation(x, y, map.apply(i, x), map.apply(i, y), alpha);
      if (v > pv.max_violation) {
        pv.max_violation = v;
        pv.worst_x = x;
        pv.worst_y = y;
      }
    }
    report.max_violation = std::max(report.max_violation, pv.max_violation);
    report.pieces.push_back(std::move(pv));
  }
  report.passed = report.max_violation <= options.tol;
  return report;
}

}  // namespace uan
