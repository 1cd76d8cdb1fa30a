#include "uan/sets.hpp"

#include "uan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace uan {

ConvexSetPiece::ConvexSetPiece(Index dim, std::string label, ProjectFn project)
    : dim_(dim), label_(std::move(label)), project_(std::move(project)) {
  if (dim_ < 1) throw DimensionError("ConvexSetPiece: dimension must be positive");
  if (!project_) throw ContractViolation("ConvexSetPiece '" + label_ + "': empty projector");
}

Vector ConvexSetPiece::project(const Vector& x) const {
  require_dim(x, dim_, label_);
  return project_(x);
}

double ConvexSetPiece::distance(const Vector& x) const { return (x - project(x)).norm(); }

bool ConvexSetPiece::contains(const Vector& x, double tol) const { return distance(x) <= tol; }

namespace convex {
namespace {

// Orthonormal basis for the column space of m, via column-pivoted QR.
Matrix orthonormal_columns(const Matrix& m) {
  Eigen::ColPivHouseholderQR<Matrix> qr(m);
  qr.setThreshold(1e-12);
  const Index rank = qr.rank();
  Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), rank);
  return q;
}

std::string support_label(const std::vector<Index>& support) {
  std::string out = "{";
  for (std::size_t k = 0; k < support.size(); ++k) {
    if (k) out += ',';
    out += std::to_string(support[k]);
  }
  return out + "}";
}

}  // namespace

ConvexSetPiece whole_space(Index dim) {
  return ConvexSetPiece(dim, "R^" + std::to_string(dim), [](const Vector& x) { return x; });
}

ConvexSetPiece singleton(Vector point) {
  require_finite(point, "singleton");
  const Index n = point.size();
  return ConvexSetPiece(n, "singleton", [p = std::move(point)](const Vector&) { return p; });
}

ConvexSetPiece box(Vector lo, Vector hi) {
  if (lo.size() != hi.size()) throw DimensionError("box: bound dimensions differ");
  if ((lo.array() > hi.array()).any()) throw DomainError("box: lo must not exceed hi");
  const Index n = lo.size();
  return ConvexSetPiece(n, "box", [lo = std::move(lo), hi = std::move(hi)](const Vector& x) -> Vector {
    return x.cwiseMax(lo).cwiseMin(hi);
  });
}

ConvexSetPiece ball(Vector center, double radius) {
  if (!(radius >= 0.0)) throw DomainError("ball: radius must be nonnegative");
  const Index n = center.size();
  return ConvexSetPiece(n, "ball", [c = std::move(center), radius](const Vector& x) -> Vector {
    const Vector d = x - c;
    const double r = d.norm();
    if (r <= radius) return x;
    return c + (radius / r) * d;
  });
}

ConvexSetPiece halfspace(Vector a, double beta) {
  const double a2 = a.squaredNorm();
  if (!(a2 > 0.0)) throw DomainError("halfspace: normal must be nonzero");
  const Index n = a.size();
  return ConvexSetPiece(n, "halfspace", [a = std::move(a), beta, a2](const Vector& x) -> Vector {
    const double excess = a.dot(x) - beta;
    if (excess <= 0.0) return x;
    return x - (excess / a2) * a;
  });
}

ConvexSetPiece affine_solutions(const Matrix& a, const Vector& b) {
  if (a.rows() != b.size()) throw DimensionError("affine_solutions: A and b disagree");
  const Index n = a.cols();
  const Vector particular = a.completeOrthogonalDecomposition().solve(b);
  if ((a * particular - b).norm() > 1e-9 * (1.0 + b.norm())) {
    throw DomainError("affine_solutions: A x = b has no solution");
  }
  Matrix rows = orthonormal_columns(a.transpose());
  return ConvexSetPiece(n, "affine", [rows = std::move(rows), particular](const Vector& x) -> Vector {
    return x - rows * (rows.transpose() * (x - particular));
  });
}

ConvexSetPiece affine_span(const Vector& point, const Matrix& directions) {
  if (directions.rows() != point.size()) throw DimensionError("affine_span: shapes disagree");
  const Index n = point.size();
  Matrix basis = orthonormal_columns(directions);
  return ConvexSetPiece(n, "span", [basis = std::move(basis), point](const Vector& x) -> Vector {
    return point + basis * (basis.transpose() * (x - point));
  });
}

ConvexSetPiece coordinate_subspace(Index dim, std::vector<Index> support) {
  std::sort(support.begin(), support.end());
  for (Index k : support) {
    if (k < 0 || k >= dim) throw DomainError("coordinate_subspace: support index out of range");
  }
  std::string label = "C" + support_label(support);
  Eigen::Array<bool, Eigen::Dynamic, 1> keep = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(dim, false);
  for (Index k : support) keep[k] = true;
  return ConvexSetPiece(dim, std::move(label), [keep](const Vector& x) -> Vector {
    return keep.select(x, Vector::Zero(x.size()));
  });
}

}  // namespace convex

UnionConvexSet::UnionConvexSet(std::vector<ConvexSetPiece> pieces, std::string label)
    : UnionConvexSet(std::move(pieces), TieSelector{}, std::move(label)) {}

UnionConvexSet::UnionConvexSet(ConvexSetPiece piece)
    : UnionConvexSet(std::vector<ConvexSetPiece>{piece}, piece.label()) {}

UnionConvexSet::UnionConvexSet(std::vector<ConvexSetPiece> pieces, TieSelector selector,
                               std::string label)
    : pieces_(std::move(pieces)), selector_(std::move(selector)), label_(std::move(label)) {
  if (pieces_.empty()) throw DomainError("UnionConvexSet: needs at least one piece");
  dim_ = pieces_.front().dim();
  for (const auto& p : pieces_) {
    if (p.dim() != dim_) throw DimensionError("UnionConvexSet: piece dimensions differ");
    Vector w = p.project(Vector::Zero(dim_));
    if (!w.allFinite() || !p.contains(w)) {
      throw ContractViolation("UnionConvexSet: piece '" + p.label() + "' has no valid witness");
    }
    witnesses_.push_back(std::move(w));
  }
  if (label_.empty()) {
    for (std::size_t i = 0; i < pieces_.size(); ++i) label_ += (i ? "|" : "") + pieces_[i].label();
  }
}

double UnionConvexSet::distance(const Vector& x) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : pieces_) best = std::min(best, p.distance(x));
  return best;
}

bool UnionConvexSet::contains(const Vector& x, double tol) const { return distance(x) <= tol; }

IndexSet UnionConvexSet::nearest_pieces(const Vector& x, double tie_tol) const {
  std::vector<double> d(pieces_.size());
  for (std::size_t i = 0; i < pieces_.size(); ++i) d[i] = pieces_[i].distance(x);
  const double best = *std::min_element(d.begin(), d.end());
  IndexSet out;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] <= best + tie_tol) out.push_back(i);
  }
  return out;
}

IndexSet UnionConvexSet::active(const Vector& x, double tie_tol) const {
  return selector_ ? selector_(x, tie_tol) : nearest_pieces(x, tie_tol);
}

std::vector<std::vector<Index>> sparsity_supports(Index n, Index s) {
  if (n < 1 || s < 0 || s > n - 1) {
    throw DomainError("sparsity_set: need 0 <= s <= n-1, got n=" + std::to_string(n) +
                      ", s=" + std::to_string(s));
  }
  std::vector<std::vector<Index>> out;
  std::vector<Index> current(static_cast<std::size_t>(s));
  for (Index k = 0; k < s; ++k) current[static_cast<std::size_t>(k)] = k;
  while (true) {
    out.push_back(current);
    // Next combination in lexicographic order.
    Index k = s - 1;
    while (k >= 0 && current[static_cast<std::size_t>(k)] == n - s + k) --k;
    if (k < 0) break;
    ++current[static_cast<std::size_t>(k)];
    for (Index j = k + 1; j < s; ++j) {
      current[static_cast<std::size_t>(j)] = current[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return out;
}

UnionConvexSet sparsity_set(Index n, Index s) {
  auto supports = sparsity_supports(n, s);
  std::vector<ConvexSetPiece> pieces;
  pieces.reserve(supports.size());
  for (const auto& sup : supports) pieces.push_back(convex::coordinate_subspace(n, sup));

  auto selector = [supports, n](const Vector& x, double tie_tol) {
    require_dim(x, n, "sparsity selector");
    const Eigen::ArrayXd mag = x.cwiseAbs().array();
    IndexSet out;
    std::vector<bool> inside(static_cast<std::size_t>(n));
    for (std::size_t p = 0; p < supports.size(); ++p) {
      std::fill(inside.begin(), inside.end(), false);
      double min_in = std::numeric_limits<double>::infinity();
      for (Index k : supports[p]) {
        inside[static_cast<std::size_t>(k)] = true;
        min_in = std::min(min_in, mag[k]);
      }
      double max_out = 0.0;
      for (Index k = 0; k < n; ++k) {
        if (!inside[static_cast<std::size_t>(k)]) max_out = std::max(max_out, mag[k]);
      }
      if (min_in >= max_out - tie_tol) out.push_back(p);
    }
    return out;
  };

  std::ostringstream label;
  label << "sparsity(" << n << "," << s << ")";
  return UnionConvexSet(std::move(pieces), std::move(selector), label.str());
}

UnionMap project_union(const UnionConvexSet& set, double tie_tol, SelectorMode mode) {
  std::vector<AveragedMap> maps;
  maps.reserve(set.size());
  for (const auto& p : set.pieces()) {
    maps.emplace_back(set.dim(), 0.5, "P" + p.label(), [p](const Vector& x) { return p.project(x); });
  }
  Selector selector;
  if (mode == SelectorMode::kDistance) {
    selector = [set, tie_tol](const Vector& x) { return set.nearest_pieces(x, tie_tol); };
  } else {
    selector = [set, tie_tol](const Vector& x) { return set.active(x, tie_tol); };
  }
  return UnionMap::from_pieces(std::move(maps), std::move(selector), "P[" + set.label() + "]");
}

UnionMap reflect_union(const UnionConvexSet& set, double tie_tol) {
  return relax(project_union(set, tie_tol), 2.0);
}

UnionMap dr_operator(const UnionConvexSet& a, const UnionConvexSet& b, double tie_tol) {
  if (a.dim() != b.dim()) throw DimensionError("dr_operator: set dimensions differ");
  return relax(compose({reflect_union(a, tie_tol), reflect_union(b, tie_tol)}), 0.5);
}

}  // namespace uan
