#include "uan/minconvex.hpp"

#include "uan/errors.hpp"
#include "uan/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace uan {

namespace {

void require_gamma(double gamma, const std::string& who) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw DomainError(who + ": gamma must be positive and finite");
  }
}

// Tolerance for comparing objective values of different magnitudes.
double value_tol(double tol, double scale) { return tol * std::max(1.0, std::abs(scale)); }

}  // namespace

ConvexPiece::ConvexPiece(Index dim, std::string label, ValueFn value, ProxFn prox)
    : dim_(dim), label_(std::move(label)), value_(std::move(value)), prox_(std::move(prox)) {
  if (dim_ < 1) throw DimensionError("ConvexPiece: dimension must be positive");
  if (!value_ || !prox_) throw ContractViolation("ConvexPiece '" + label_ + "': empty callable");
}

ExtendedReal ConvexPiece::value(const Vector& x) const {
  require_dim(x, dim_, label_);
  return value_(x);
}

Vector ConvexPiece::prox(double gamma, const Vector& x) const {
  require_gamma(gamma, label_);
  require_dim(x, dim_, label_);
  return prox_(gamma, x);
}

double ConvexPiece::envelope(double gamma, const Vector& x) const {
  const Vector p = prox(gamma, x);
  const ExtendedReal v = value_(p);
  if (v.is_infinite()) {
    throw ContractViolation("ConvexPiece '" + label_ + "': prox left the domain");
  }
  return v.value() + (x - p).squaredNorm() / (2.0 * gamma);
}

namespace pieces {

ConvexPiece indicator(ConvexSetPiece set, double tol) {
  const Index n = set.dim();
  std::string label = "i[" + set.label() + "]";
  auto value = [set, tol](const Vector& x) -> ExtendedReal {
    return set.contains(x, tol) ? ExtendedReal(0.0) : ExtendedReal::infinity();
  };
  auto prox = [set](double, const Vector& x) { return set.project(x); };
  return ConvexPiece(n, std::move(label), std::move(value), std::move(prox));
}

ConvexPiece quadratic(Matrix q, Vector b, double c) {
  const Index n = q.rows();
  if (q.cols() != n || b.size() != n) throw DimensionError("quadratic: Q and b disagree");
  if (!q.allFinite() || !b.allFinite() || !std::isfinite(c)) {
    throw DomainError("quadratic: coefficients must be finite");
  }
  const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw DomainError("quadratic: Q must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(q, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-12 * scale) {
    throw DomainError("quadratic: Q must be positive semidefinite");
  }
  auto value = [q, b, c](const Vector& x) -> ExtendedReal {
    return ExtendedReal(0.5 * x.dot(q * x) + b.dot(x) + c);
  };
  auto prox = [q, b](double gamma, const Vector& x) -> Vector {
    const Matrix m = Matrix::Identity(q.rows(), q.cols()) + gamma * q;
    return m.llt().solve(x - gamma * b);
  };
  return ConvexPiece(n, "quadratic", std::move(value), std::move(prox));
}

ConvexPiece l1_norm(Index dim, double weight) {
  if (!(weight >= 0.0) || !std::isfinite(weight)) throw DomainError("l1_norm: weight must be >= 0");
  auto value = [weight](const Vector& x) -> ExtendedReal { return weight * x.lpNorm<1>(); };
  auto prox = [weight](double gamma, const Vector& x) -> Vector {
    const double t = gamma * weight;
    return x.unaryExpr([t](double v) { return std::copysign(std::max(std::abs(v) - t, 0.0), v); });
  };
  return ConvexPiece(dim, "l1", std::move(value), std::move(prox));
}

ConvexPiece l2_norm(Index dim, double weight) {
  if (!(weight >= 0.0) || !std::isfinite(weight)) throw DomainError("l2_norm: weight must be >= 0");
  auto value = [weight](const Vector& x) -> ExtendedReal { return weight * x.norm(); };
  auto prox = [weight](double gamma, const Vector& x) -> Vector {
    const double t = gamma * weight;
    const double r = x.norm();
    if (r <= t) return Vector::Zero(x.size());
    return (1.0 - t / r) * x;
  };
  return ConvexPiece(dim, "l2", std::move(value), std::move(prox));
}

}  // namespace pieces

MinConvexFn::MinConvexFn(ConvexPiece piece) : MinConvexFn(std::vector<ConvexPiece>{std::move(piece)}) {}

MinConvexFn::MinConvexFn(std::vector<ConvexPiece> pieces) : pieces_(std::move(pieces)) {
  if (pieces_.empty()) throw DomainError("MinConvexFn: needs at least one piece");
  dim_ = pieces_.front().dim();
  for (const auto& p : pieces_) {
    if (p.dim() != dim_) throw DimensionError("MinConvexFn: piece dimensions differ");
    // prox maps into dom f_i, so a finite value there certifies properness.
    const Vector w = p.prox(1.0, Vector::Zero(dim_));
    if (!w.allFinite() || p.value(w).is_infinite()) {
      throw ContractViolation("MinConvexFn: piece '" + p.label() + "' is not proper");
    }
  }
}

ExtendedReal MinConvexFn::value(const Vector& x) const {
  require_dim(x, dim_, "MinConvexFn");
  ExtendedReal best = ExtendedReal::infinity();
  for (const auto& p : pieces_) best = min(best, p.value(x));
  return best;
}

std::vector<double> MinConvexFn::piece_envelopes(double gamma, const Vector& x) const {
  require_dim(x, dim_, "MinConvexFn");
  std::vector<double> out;
  out.reserve(pieces_.size());
  for (const auto& p : pieces_) out.push_back(p.envelope(gamma, x));
  return out;
}

double MinConvexFn::envelope(double gamma, const Vector& x) const {
  const auto env = piece_envelopes(gamma, x);
  return *std::min_element(env.begin(), env.end());
}

IndexSet active_selector(const MinConvexFn& f, double gamma, const Vector& x, double tie_tol) {
  const auto env = f.piece_envelopes(gamma, x);
  const double best = *std::min_element(env.begin(), env.end());
  IndexSet out;
  for (std::size_t i = 0; i < env.size(); ++i) {
    if (env[i] <= best + tie_tol) out.push_back(i);
  }
  return out;
}

UnionMap prox_union(const MinConvexFn& f, double gamma, double tie_tol) {
  require_gamma(gamma, "prox_union");
  std::vector<AveragedMap> maps;
  maps.reserve(f.size());
  for (const auto& p : f.pieces()) {
    maps.emplace_back(f.dim(), 0.5, "prox[" + p.label() + "]",
                      [p, gamma](const Vector& x) { return p.prox(gamma, x); });
  }
  Selector selector = [f, gamma, tie_tol](const Vector& x) {
    return active_selector(f, gamma, x, tie_tol);
  };
  return UnionMap::from_pieces(std::move(maps), std::move(selector), "prox");
}

PointClassification classify_point(const MinConvexFn& f, double gamma, const Vector& x,
                                   double tol) {
  const UnionMap prox = prox_union(f, gamma);
  const FixedPointInfo info = classify_fixed(prox, x, tol);
  PointClassification out;
  out.classification = info.classification;
  out.active = info.active;
  out.fixing = info.fixing;
  const bool fixed = info.classification != FixedPointClass::kNotFixed;
  const ExtendedReal fx = f.value(x);
  if (fx.is_finite()) {
    const double gap = f.envelope(gamma, x) - fx.value();
    out.envelope_gap = gap;
    out.envelope_consistent = fixed == (std::abs(gap) <= value_tol(tol, fx.value()));
  } else {
    out.envelope_consistent = !fixed;
  }
  return out;
}

bool is_local_min(const MinConvexFn& f, const Vector& x, double tol) {
  const ExtendedReal fx = f.value(x);
  if (fx.is_infinite()) throw DomainError("is_local_min: f(x) = +inf");
  const double cutoff = fx.value() + value_tol(tol, fx.value());
  for (const auto& p : f.pieces()) {
    const ExtendedReal v = p.value(x);
    if (v.is_infinite() || v.value() > cutoff) continue;
    if ((p.prox(1.0, x) - x).norm() > tol) return false;
  }
  return true;
}

namespace {

// Value-active pieces: { i : f_i(x) <= f(x) + tie_tol }; empty if f(x) = +inf.
IndexSet value_selector(const MinConvexFn& f, const Vector& x, double tie_tol) {
  std::vector<ExtendedReal> v;
  v.reserve(f.size());
  for (const auto& p : f.pieces()) v.push_back(p.value(x));
  ExtendedReal best = ExtendedReal::infinity();
  for (auto e : v) best = min(best, e);
  IndexSet out;
  if (best.is_infinite()) return out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i].is_finite() && v[i].value() <= best.value() + tie_tol) out.push_back(i);
  }
  return out;
}

}  // namespace

OscReport osc_probe(const MinConvexFn& f, const Vector& x, double radius, std::size_t samples,
                    const OscProbeOptions& options) {
  require_dim(x, f.dim(), "osc_probe");
  if (!(radius > 0.0)) throw DomainError("osc_probe: radius must be positive");
  auto select = [&](const Vector& p) {
    return options.kind == SelectorKind::kValue
               ? value_selector(f, p, options.tie_tol)
               : active_selector(f, options.gamma, p, options.tie_tol);
  };
  OscReport report;
  report.reference = select(x);
  if (report.reference.empty()) throw DomainError("osc_probe: f(x) = +inf");
  PointSampler sampler(options.seed);
  for (std::size_t k = 0; k < samples; ++k) {
    const Vector p = sampler.in_ball(x, radius);
    ++report.samples;
    const IndexSet s = select(p);
    if (s.empty()) continue;
    ++report.evaluated;
    const bool inside = std::includes(report.reference.begin(), report.reference.end(),
                                      s.begin(), s.end());
    if (!inside) {
      ++report.violations;
      if (!report.counterexample) report.counterexample = p;
    }
  }
  report.passed = report.violations == 0;
  return report;
}

}  // namespace uan
