#pragma once

#include "uan/sampling.hpp"
#include "uan/union_map.hpp"

#include <cstdint>
#include <vector>

namespace uan {

struct AveragednessOptions {
  std::size_t pairs = 1000;  // per piece
  std::uint64_t seed = 0;
  double tol = 1e-9;
};

struct PieceViolation {
  std::size_t index = 0;
  double max_violation = 0.0;
  Vector worst_x;
  Vector worst_y;
};

struct AveragednessReport {
  double alpha = 1.0;
  std::vector<PieceViolation> pieces;
  double max_violation = 0.0;
  bool passed = true;
};

/// Signed violation of the averagedness inequality for one pair:
///   alpha < 1:  |Tx-Ty|^2 + (1-alpha)/alpha |(x-Tx)-(y-Ty)|^2 - |x-y|^2
///   alpha = 1:  |Tx-Ty| - |x-y|
double averagedness_violation(const Vector& x, const Vector& y, const Vector& tx,
                              const Vector& ty, double alpha);

/// Samples pairs in `region` and checks each piece against `alpha`, using the
/// same piece index at both points of a pair.
AveragednessReport check_averaged(const UnionMap& map, double alpha, const SampleRegion& region,
                                  const AveragednessOptions& options = {});

}  // namespace uan
