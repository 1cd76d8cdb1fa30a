#include "uan/union_map.hpp"

#include "uan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

namespace uan {
namespace {

std::size_t checked_product(std::span<const std::size_t> sizes) {
  std::size_t total = 1;
  for (std::size_t s : sizes) {
    if (s != 0 && total > std::numeric_limits<std::size_t>::max() / s) {
      throw DomainError("composite index space overflows size_t");
    }
    total *= s;
  }
  return total;
}

// Mixed-radix decoding: index = i_0 + n_0 * (i_1 + n_1 * (...)).
std::vector<std::size_t> decode(std::size_t index, std::span<const std::size_t> radices) {
  std::vector<std::size_t> digits(radices.size());
  for (std::size_t j = 0; j < radices.size(); ++j) {
    digits[j] = index % radices[j];
    index /= radices[j];
  }
  return digits;
}

std::string tuple_label(const std::vector<std::string>& parts) {
  std::string out = "(";
  for (std::size_t j = 0; j < parts.size(); ++j) {
    if (j) out += ',';
    out += parts[j];
  }
  return out + ")";
}

Index common_dim(const std::vector<UnionMap>& maps, const char* who) {
  if (maps.empty()) throw DomainError(std::string(who) + ": need at least one map");
  const Index n = maps.front().dim();
  for (const auto& m : maps) {
    if (m.dim() != n) throw DimensionError(std::string(who) + ": operand dimensions differ");
  }
  return n;
}

class PieceUnion final : public UnionMap::Impl {
 public:
  PieceUnion(std::vector<AveragedMap> pieces, Selector selector, std::string label)
      : pieces_(std::move(pieces)), selector_(std::move(selector)), label_(std::move(label)) {
    if (pieces_.empty()) throw DomainError("UnionMap '" + label_ + "': no pieces");
    if (!selector_) throw ContractViolation("UnionMap '" + label_ + "': empty selector");
    dim_ = pieces_.front().dim();
    alpha_ = 0.0;
    for (const auto& p : pieces_) {
      if (p.dim() != dim_) throw DimensionError("UnionMap '" + label_ + "': piece dimensions differ");
      alpha_ = std::max(alpha_, p.alpha());
    }
  }

  Index dim() const override { return dim_; }
  double alpha() const override { return alpha_; }
  std::size_t size() const override { return pieces_.size(); }
  std::string label() const override { return label_; }
  std::string index_label(std::size_t i) const override { return std::to_string(i); }

  std::vector<Branch> branches(const Vector& x) const override {
    IndexSet active = selector_(x);
    std::sort(active.begin(), active.end());
    active.erase(std::unique(active.begin(), active.end()), active.end());
    if (active.empty()) {
      throw ContractViolation("UnionMap '" + label_ + "': selector returned no index");
    }
    std::vector<Branch> out;
    out.reserve(active.size());
    for (std::size_t i : active) {
      if (i >= pieces_.size()) {
        throw ContractViolation("UnionMap '" + label_ + "': selector returned index " +
                                std::to_string(i) + " out of range");
      }
      out.push_back({i, pieces_[i].apply_unchecked(x)});
    }
    return out;
  }

  Vector apply(std::size_t i, const Vector& x) const override {
    return pieces_.at(i).apply_unchecked(x);
  }

 private:
  std::vector<AveragedMap> pieces_;
  Selector selector_;
  std::string label_;
  Index dim_ = 0;
  double alpha_ = 0.0;
};

class UnionOfImpl final : public UnionMap::Impl {
 public:
  explicit UnionOfImpl(std::vector<UnionMap> maps) : maps_(std::move(maps)) {
    dim_ = common_dim(maps_, "union_of");
    std::vector<double> alphas;
    std::size_t offset = 0;
    for (const auto& m : maps_) {
      offsets_.push_back(offset);
      offset += m.size();
      alphas.push_back(m.alpha());
    }
    size_ = offset;
    alpha_ = union_alpha(alphas);
  }

  Index dim() const override { return dim_; }
  double alpha() const override { return alpha_; }
  std::size_t size() const override { return size_; }

  std::string label() const override {
    std::string out = "union[";
    for (std::size_t j = 0; j < maps_.size(); ++j) out += (j ? "," : "") + maps_[j].label();
    return out + "]";
  }

  std::string index_label(std::size_t i) const override {
    const auto [j, local] = locate(i);
    return tuple_label({std::to_string(j), maps_[j].index_label(local)});
  }

  std::vector<Branch> branches(const Vector& x) const override {
    std::vector<Branch> out;
    for (std::size_t j = 0; j < maps_.size(); ++j) {
      for (auto& b : maps_[j].branches(x)) out.push_back({offsets_[j] + b.index, std::move(b.value)});
    }
    return out;
  }

  Vector apply(std::size_t i, const Vector& x) const override {
    const auto [j, local] = locate(i);
    return maps_[j].apply(local, x);
  }

 private:
  std::pair<std::size_t, std::size_t> locate(std::size_t i) const {
    if (i >= size_) throw ContractViolation("union_of: index out of range");
    const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), i);
    const auto j = static_cast<std::size_t>(std::distance(offsets_.begin(), it)) - 1;
    return {j, i - offsets_[j]};
  }

  std::vector<UnionMap> maps_;
  std::vector<std::size_t> offsets_;
  std::size_t size_ = 0;
  Index dim_ = 0;
  double alpha_ = 0.0;
};

class CombinationImpl final : public UnionMap::Impl {
 public:
  CombinationImpl(std::vector<UnionMap> maps, std::vector<double> weights)
      : maps_(std::move(maps)), weights_(std::move(weights)) {
    dim_ = common_dim(maps_, "convex_combination");
    std::vector<double> alphas;
    for (const auto& m : maps_) {
      radices_.push_back(m.size());
      alphas.push_back(m.alpha());
    }
    size_ = checked_product(radices_);
    alpha_ = combination_alpha(alphas, weights_);
  }

  Index dim() const override { return dim_; }
  double alpha() const override { return alpha_; }
  std::size_t size() const override { return size_; }

  std::string label() const override {
    std::ostringstream os;
    os << "comb[";
    for (std::size_t j = 0; j < maps_.size(); ++j) {
      os << (j ? "," : "") << weights_[j] << "*" << maps_[j].label();
    }
    os << "]";
    return os.str();
  }

  std::string index_label(std::size_t i) const override {
    const auto digits = decode(i, radices_);
    std::vector<std::string> parts;
    for (std::size_t j = 0; j < digits.size(); ++j) parts.push_back(maps_[j].index_label(digits[j]));
    return tuple_label(parts);
  }

  std::vector<Branch> branches(const Vector& x) const override {
    // Minkowski sum over the product of the per-map active sets.
    std::vector<Branch> acc{{0, Vector::Zero(dim_)}};
    std::size_t stride = 1;
    for (std::size_t j = 0; j < maps_.size(); ++j) {
      const auto local = maps_[j].branches(x);
      std::vector<Branch> next;
      next.reserve(acc.size() * local.size());
      for (const auto& b : local) {
        for (const auto& a : acc) {
          next.push_back({a.index + stride * b.index, a.value + weights_[j] * b.value});
        }
      }
      acc = std::move(next);
      stride *= radices_[j];
    }
    return acc;
  }

  Vector apply(std::size_t i, const Vector& x) const override {
    const auto digits = decode(i, radices_);
    Vector out = Vector::Zero(dim_);
    for (std::size_t j = 0; j < maps_.size(); ++j) out += weights_[j] * maps_[j].apply(digits[j], x);
    return out;
  }

 private:
  std::vector<UnionMap> maps_;
  std::vector<double> weights_;
  std::vector<std::size_t> radices_;
  std::size_t size_ = 0;
  Index dim_ = 0;
  double alpha_ = 0.0;
};

class CompositionImpl final : public UnionMap::Impl {
 public:
  explicit CompositionImpl(std::vector<UnionMap> maps) : maps_(std::move(maps)) {
    dim_ = common_dim(maps_, "compose");
    std::vector<double> alphas;
    for (const auto& m : maps_) {
      radices_.push_back(m.size());
      alphas.push_back(m.alpha());
    }
    size_ = checked_product(radices_);
    alpha_ = composition_alpha(alphas);
  }

  Index dim() const override { return dim_; }
  double alpha() const override { return alpha_; }
  std::size_t size() const override { return size_; }

  std::string label() const override {
    std::string out;
    for (std::size_t j = maps_.size(); j-- > 0;) {
      out += maps_[j].label();
      if (j) out += " o ";
    }
    return out;
  }

  std::string index_label(std::size_t i) const override {
    const auto digits = decode(i, radices_);
    std::vector<std::string> parts;
    for (std::size_t j = 0; j < digits.size(); ++j) parts.push_back(maps_[j].index_label(digits[j]));
    return tuple_label(parts);
  }

  std::vector<Branch> branches(const Vector& x) const override {
    // Stage j's selector is evaluated at the output of the chosen stage j-1
    // piece, so admissible tuples are discovered by chaining.
    std::vector<Branch> acc{{0, x}};
    std::size_t stride = 1;
    for (std::size_t j = 0; j < maps_.size(); ++j) {
      std::vector<Branch> next;
      for (const auto& a : acc) {
        for (auto& b : maps_[j].branches(a.value)) {
          next.push_back({a.index + stride * b.index, std::move(b.value)});
        }
      }
      acc = std::move(next);
      stride *= radices_[j];
    }
    return acc;
  }

  Vector apply(std::size_t i, const Vector& x) const override {
    const auto digits = decode(i, radices_);
    Vector y = x;
    for (std::size_t j = 0; j < maps_.size(); ++j) y = maps_[j].apply(digits[j], y);
    return y;
  }

 private:
  std::vector<UnionMap> maps_;
  std::vector<std::size_t> radices_;
  std::size_t size_ = 0;
  Index dim_ = 0;
  double alpha_ = 0.0;
};

class RelaxedImpl final : public UnionMap::Impl {
 public:
  RelaxedImpl(UnionMap inner, double lambda) : inner_(std::move(inner)), lambda_(lambda) {
    alpha_ = std::min(1.0, lambda_ * inner_.alpha());
  }

  Index dim() const override { return inner_.dim(); }
  double alpha() const override { return alpha_; }
  std::size_t size() const override { return inner_.size(); }

  std::string label() const override {
    std::ostringstream os;
    os << "relax(" << inner_.label() << "," << lambda_ << ")";
    return os.str();
  }

  std::string index_label(std::size_t i) const override { return inner_.index_label(i); }

  std::vector<Branch> branches(const Vector& x) const override {
    auto out = inner_.branches(x);
    for (auto& b : out) b.value = (1.0 - lambda_) * x + lambda_ * b.value;
    return out;
  }

  Vector apply(std::size_t i, const Vector& x) const override {
    return (1.0 - lambda_) * x + lambda_ * inner_.apply(i, x);
  }

 private:
  UnionMap inner_;
  double lambda_;
  double alpha_ = 0.0;
};

}  // namespace

UnionMap::UnionMap(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {
  if (!impl_) throw ContractViolation("UnionMap: null implementation");
}

UnionMap UnionMap::from_pieces(std::vector<AveragedMap> pieces, Selector selector,
                               std::string label) {
  return UnionMap(
      std::make_shared<const PieceUnion>(std::move(pieces), std::move(selector), std::move(label)));
}

UnionMap UnionMap::single(AveragedMap map) {
  std::string label = map.label();
  std::vector<AveragedMap> pieces;
  pieces.push_back(std::move(map));
  return from_pieces(std::move(pieces), [](const Vector&) { return IndexSet{0}; },
                     std::move(label));
}

std::string UnionMap::index_label(std::size_t i) const {
  if (i >= size()) throw ContractViolation("UnionMap::index_label: index out of range");
  return impl_->index_label(i);
}

IndexSet UnionMap::active(const Vector& x) const {
  IndexSet out;
  for (const auto& b : branches(x)) out.push_back(b.index);
  return out;
}

std::vector<Branch> UnionMap::branches(const Vector& x) const {
  require_dim(x, dim(), label());
  auto out = impl_->branches(x);
  if (out.empty()) throw ContractViolation("UnionMap '" + label() + "': empty evaluation");
  std::sort(out.begin(), out.end(), [](const Branch& a, const Branch& b) { return a.index < b.index; });
  return out;
}

Evaluation UnionMap::evaluate(const Vector& x) const {
  Evaluation ev;
  ev.branches = branches(x);
  for (const auto& b : ev.branches) {
    const bool seen = std::any_of(ev.points.begin(), ev.points.end(),
                                  [&](const Vector& p) { return nearly_equal(p, b.value, kDedupTol); });
    if (!seen) ev.points.push_back(b.value);
  }
  return ev;
}

Vector UnionMap::apply(std::size_t i, const Vector& x) const {
  require_dim(x, dim(), label());
  if (i >= size()) throw ContractViolation("UnionMap::apply: index out of range");
  return impl_->apply(i, x);
}

AveragedMap UnionMap::piece(std::size_t i) const {
  if (i >= size()) throw ContractViolation("UnionMap::piece: index out of range");
  return AveragedMap(dim(), alpha(), label() + "#" + impl_->index_label(i),
                     [impl = impl_, i](const Vector& x) { return impl->apply(i, x); });
}

double union_alpha(std::span<const double> alphas) {
  if (alphas.empty()) throw DomainError("union_alpha: empty input");
  return *std::max_element(alphas.begin(), alphas.end());
}

double combination_alpha(std::span<const double> alphas, std::span<const double> weights) {
  if (alphas.size() != weights.size() || alphas.empty()) {
    throw DomainError("combination_alpha: need one weight per alpha");
  }
  if (std::any_of(alphas.begin(), alphas.end(), [](double a) { return a >= 1.0; })) return 1.0;
  double alpha = 0.0;
  for (std::size_t j = 0; j < alphas.size(); ++j) alpha += weights[j] * alphas[j];
  return alpha;
}

double composition_alpha(std::span<const double> alphas) {
  if (alphas.empty()) throw DomainError("composition_alpha: empty input");
  if (std::any_of(alphas.begin(), alphas.end(), [](double a) { return a >= 1.0; })) return 1.0;
  double ratio_sum = 0.0;
  for (double a : alphas) ratio_sum += a / (1.0 - a);
  return 1.0 / (1.0 + 1.0 / ratio_sum);
}

UnionMap union_of(const std::vector<UnionMap>& maps) {
  return UnionMap(std::make_shared<const UnionOfImpl>(maps));
}

UnionMap convex_combination(const std::vector<UnionMap>& maps, std::span<const double> weights) {
  if (weights.size() != maps.size()) {
    throw DomainError("convex_combination: need one weight per map");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw DomainError("convex_combination: weights must be strictly positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DomainError("convex_combination: weights must sum to 1");
  }
  return UnionMap(std::make_shared<const CombinationImpl>(
      maps, std::vector<double>(weights.begin(), weights.end())));
}

UnionMap compose(const std::vector<UnionMap>& maps) {
  return UnionMap(std::make_shared<const CompositionImpl>(maps));
}

UnionMap relax(const UnionMap& map, double lambda) {
  const double hi = 1.0 / map.alpha();
  if (!(lambda > 0.0 && lambda <= hi)) {
    std::ostringstream os;
    os << "relax: lambda must lie in (0, " << hi << "], got " << lambda;
    throw DomainError(os.str());
  }
  if (lambda == 1.0) return map;
  return UnionMap(std::make_shared<const RelaxedImpl>(map, lambda));
}

const char* to_string(FixedPointClass c) {
  switch (c) {
    case FixedPointClass::kNotFixed: return "not-fixed";
    case FixedPointClass::kFixed: return "fixed";
    case FixedPointClass::kStrongFixed: return "strong-fixed";
  }
  return "?";
}

FixedPointInfo classify_fixed(const UnionMap& map, const Vector& x, double tol) {
  FixedPointInfo info;
  for (const auto& b : map.branches(x)) {
    info.active.push_back(b.index);
    if ((b.value - x).norm() <= tol) info.fixing.push_back(b.index);
  }
  if (info.fixing.empty()) {
    info.classification = FixedPointClass::kNotFixed;
  } else if (info.fixing.size() == info.active.size()) {
    info.classification = FixedPointClass::kStrongFixed;
  } else {
    info.classification = FixedPointClass::kFixed;
  }
  return info;
}

}  // namespace uan
