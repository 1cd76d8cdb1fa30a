#include "uan/averagedness.hpp"
#include "uan/minconvex.hpp"
#include "uan/oracle.hpp"
#include "uan/sets.hpp"

#include "support/corpus.hpp"
#include "support/oracles.hpp"
#include "support/random_maps.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace uan;

namespace {

bool same_point_set(const std::vector<Vector>& a, const std::vector<Vector>& b, double tol) {
  if (a.size() != b.size()) return false;
  for (const auto& p : a) {
    if (std::none_of(b.begin(), b.end(), [&](const Vector& q) { return (p - q).norm() <= tol; })) return false;
  }
  return true;
}

}  // namespace

TEST(CombinatorProperties, UnionAlphaIsExactMax) {
  randmaps::Source src(1);
  for (int k = 0; k < 30; ++k) {
    std::vector<UnionMap> maps;
    double expected = 0.0;
    const int count = src.integer(2, 4);
    for (int j = 0; j < count; ++j) {
      maps.push_back(relax(src.leaf(3), src.uniform(0.2, 1.9)));
      expected = std::max(expected, maps.back().alpha());
    }
    EXPECT_EQ(union_of(maps).alpha(), expected);
  }
}

TEST(CombinatorProperties, CompositesPassWithComputedAlpha) {
  randmaps::Source src(2);
  for (int k = 0; k < 40; ++k) {
    const UnionMap t = src.tree(3, 1 + k % 2);
    AveragednessOptions opt;
    opt.pairs = 200;
    opt.seed = static_cast<std::uint64_t>(k);
    const auto r = check_averaged(t, t.alpha(), {Vector::Zero(3), 2.0}, opt);
    EXPECT_TRUE(r.passed) << t.label() << " alpha " << t.alpha() << " violation " << r.max_violation;
    EXPECT_LE(r.max_violation, 1e-9);
  }
}

TEST(CombinatorProperties, EvaluateIsNonemptyAndRepeatable) {
  randmaps::Source src(3);
  for (int k = 0; k < 20; ++k) {
    const UnionMap t = src.tree(3, 2);
    for (int s = 0; s < 20; ++s) {
      const Vector x = src.point(3, -2, 2);
      const Evaluation a = t.evaluate(x);
      const Evaluation b = t.evaluate(x);
      ASSERT_FALSE(a.branches.empty());
      ASSERT_EQ(a.branches.size(), b.branches.size());
      for (std::size_t j = 0; j < a.branches.size(); ++j) {
        EXPECT_EQ(a.branches[j].index, b.branches[j].index);
        EXPECT_EQ(a.branches[j].value, b.branches[j].value);
        EXPECT_EQ(a.branches[j].value, t.apply(a.branches[j].index, x));
      }
    }
  }
}

TEST(CombinatorProperties, SelectorOscInsideEstimatedRadius) {
  randmaps::Source src(4);
  std::vector<UnionMap> maps{project_union(sparsity_set(4, 1)), project_union(sparsity_set(4, 2))};
  for (int k = 0; k < 6; ++k) maps.push_back(prox_union(src.min_convex(2), src.uniform(0.3, 2)));
  for (const auto& t : maps) {
    for (int s = 0; s < 5; ++s) {
      const Vector xs = src.point(t.dim(), -2, 2);
      const RadiusEstimate est = estimate_radius(t, xs, 2.0, 5000, {static_cast<std::uint64_t>(s)});
      const IndexSet ref = t.active(xs);
      PointSampler sampler(100 + static_cast<std::uint64_t>(s));
      for (int j = 0; j < 1000; ++j) {
        // The estimate can overshoot the true radius by a few percent in thin wedges.
        const Vector x = sampler.in_ball(xs, 0.95 * est.radius);
        const IndexSet a = t.active(x);
        EXPECT_TRUE(std::includes(ref.begin(), ref.end(), a.begin(), a.end())) << t.label();
      }
    }
  }
}

TEST(MinConvexProperties, EnvelopeMinorizesValue) {
  randmaps::Source src(5);
  for (int k = 0; k < 30; ++k) {
    const MinConvexFn f = src.min_convex(2);
    for (int s = 0; s < 50; ++s) {
      const Vector x = src.point(2, -2, 2);
      const ExtendedReal v = f.value(x);
      const double gamma = src.uniform(0.05, 5);
      if (v.is_finite()) {
        EXPECT_LE(f.envelope(gamma, x), v.value() + 1e-12);
      }
      // The infimum over y is attained at the prox points.
      for (const auto& p : prox_union(f, gamma).evaluate(x).points) {
        EXPECT_NEAR(f.value(p).value() + (x - p).squaredNorm() / (2 * gamma), f.envelope(gamma, x), 1e-9);
      }
    }
  }
}

TEST(MinConvexProperties, EnvelopeMatchesClosedForms) {
  const auto insts = corpus::standard_corpus(77, 20);
  corpus::Generator gen(8);
  for (const auto& inst : insts) {
    const MinConvexFn f = inst.fn();
    for (int s = 0; s < 50; ++s) {
      const Vector x = gen.point(inst.dim, -3, 3);
      const double gamma = gen.uniform(0.05, 10);
      const auto ref = corpus::ref_piece_envelopes(inst, gamma, x);
      EXPECT_NEAR(f.envelope(gamma, x), *std::min_element(ref.begin(), ref.end()), 1e-12) << inst.describe();
    }
  }
}

TEST(MinConvexProperties, StrongFixedPointsAreLocalMinima) {
  randmaps::Source src(6);
  std::size_t strong = 0;
  for (int k = 0; k < 30; ++k) {
    const MinConvexFn f = src.min_convex(2);
    const double gamma = src.uniform(0.3, 3);
    const UnionMap t = prox_union(f, gamma);
    for (int s = 0; s < 5; ++s) {
      Vector x = src.point(2, -2, 2);
      for (int it = 0; it < 3000; ++it) {
        const Vector next = t.evaluate(x).branches.front().value;
        const bool done = (next - x).norm() < 1e-13;
        x = next;
        if (done) break;
      }
      const auto c = classify_point(f, gamma, x, 1e-9);
      if (c.classification != FixedPointClass::kStrongFixed) continue;
      ++strong;
      EXPECT_TRUE(is_local_min(f, x, 1e-8));
      const Objective obj = [&f](const Vector& y) { return f.value(y); };
      EXPECT_TRUE(brute_force_local_min(obj, x, 1e-3, 300, 1, 1e-9).passed);
    }
  }
  EXPECT_GT(strong, 50u);
}

TEST(MinConvexProperties, PieceMinimisersAreStrongFixed) {
  randmaps::Source src(7);
  for (int k = 0; k < 40; ++k) {
    const MinConvexFn f = src.min_convex(2);
    for (const auto& piece : f.pieces()) {
      const MinConvexFn single(piece);
      // Large-gamma prox steps converge to a minimiser of the piece when one exists.
      Vector x = Vector::Zero(2);
      for (int it = 0; it < 5000; ++it) x = piece.prox(50.0, x);
      if (!piece.value(x).is_finite() || (piece.prox(1.0, x) - x).norm() > 1e-10) continue;
      EXPECT_EQ(classify_point(single, 1.0, x, 1e-8).classification, FixedPointClass::kStrongFixed)
          << piece.label();
    }
  }
}

TEST(MinConvexProperties, ProxUnionIsFirmlyNonexpansivePiecewise) {
  randmaps::Source src(8);
  for (int k = 0; k < 30; ++k) {
    const UnionMap t = prox_union(src.min_convex(3), src.uniform(0.1, 5));
    AveragednessOptions opt;
    opt.pairs = 300;
    EXPECT_TRUE(check_averaged(t, 0.5, {Vector::Zero(3), 3.0}, opt).passed) << t.label();
  }
}

TEST(MinConvexProperties, ProxMatchesGridOracle) {
  const auto insts = corpus::standard_corpus(99, 10);
  corpus::Generator gen(9);
  for (const auto& inst : insts) {
    const MinConvexFn f = inst.fn();
    const GridSpec grid = GridSpec::cube(inst.dim, -5, 5, inst.dim == 1 ? 2001 : 501);
    for (double gamma : {0.1, 1.0, 10.0}) {
      const Vector x = gen.point(inst.dim, -3, 3);
      const GridProxResult g = brute_force_prox(f, gamma, x, grid);
      const auto env = corpus::ref_piece_envelopes(inst, gamma, x);
      const double emin = *std::min_element(env.begin(), env.end());
      bool unresolved = false;
      for (std::size_t p = 0; p < env.size(); ++p) {
        const double gap = env[p] - emin;
        unresolved = unresolved || (gap > 1e-9 && gap < 2 * (g.piece_resolution[p] + g.band_width));
      }
      if (unresolved) continue;
      EXPECT_LE(cluster_distance(prox_union(f, gamma).evaluate(x).points, g), grid.cell_diameter())
          << inst.describe() << " gamma " << gamma;
    }
  }
}

TEST(SetProperties, SparsitySelectorMatchesDistanceSelector) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> n01;
  std::uniform_int_distribution<int> coord(0, 4);
  for (Index s : {1, 2}) {
    const UnionConvexSet set = sparsity_set(5, s);
    const UnionMap fast = project_union(set, kDefaultTieTol, SelectorMode::kAuto);
    const UnionMap slow = project_union(set, kDefaultTieTol, SelectorMode::kDistance);
    for (int k = 0; k < 10000; ++k) {
      Vector x(5);
      for (int i = 0; i < 5; ++i) x[i] = n01(rng);
      // Force magnitude ties on a tenth of the samples.
      if (k % 10 == 0) x[coord(rng)] = -x[coord(rng)];
      const Evaluation a = fast.evaluate(x);
      const Evaluation b = slow.evaluate(x);
      ASSERT_TRUE(same_point_set(a.points, b.points, 1e-12)) << "s=" << s << " k=" << k;
      ASSERT_TRUE(same_point_set(a.points, oracle_ref::sparse_projections(x, static_cast<int>(s)), 1e-12));
    }
  }
}

TEST(SetProperties, DrOperatorMatchesEnumeration) {
  randmaps::Source src(11);
  for (int k = 0; k < 30; ++k) {
    const UnionConvexSet a = src.union_set(3);
    const UnionConvexSet b = src.union_set(3);
    const UnionMap t = dr_operator(a, b);
    for (int s = 0; s < 20; ++s) {
      const Vector x = src.point(3, -2, 2);
      std::vector<Vector> expected;
      for (std::size_t i : a.active(x, kDefaultTieTol)) {
        const Vector pa = a.piece(i).project(x);
        const Vector r = 2 * pa - x;
        for (std::size_t j : b.active(r, kDefaultTieTol)) expected.push_back(x + b.piece(j).project(r) - pa);
      }
      std::vector<Vector> dedup;
      for (const auto& p : expected) {
        if (std::none_of(dedup.begin(), dedup.end(), [&](const Vector& q) { return nearly_equal(p, q, kDedupTol); })) {
          dedup.push_back(p);
        }
      }
      EXPECT_TRUE(same_point_set(t.evaluate(x).points, dedup, 1e-12));
    }
  }
}

TEST(SetProperties, ProjectorsAndReflectors) {
  randmaps::Source src(12);
  for (int k = 0; k < 30; ++k) {
    const UnionConvexSet a = src.union_set(3);
    AveragednessOptions opt;
    opt.pairs = 300;
    opt.seed = static_cast<std::uint64_t>(k);
    EXPECT_TRUE(check_averaged(project_union(a), 0.5, {Vector::Zero(3), 2.0}, opt).passed) << a.label();
    EXPECT_TRUE(check_averaged(reflect_union(a), 1.0, {Vector::Zero(3), 2.0}, opt).passed) << a.label();
  }
}

TEST(SetProperties, ConvexProjectionVariationalInequality) {
  randmaps::Source src(13);
  for (int k = 0; k < 50; ++k) {
    const ConvexSetPiece c = src.convex_piece(3);
    for (int s = 0; s < 50; ++s) {
      const Vector x = src.point(3, -3, 3);
      const Vector p = c.project(x);
      const Vector other = c.project(src.point(3, -3, 3));
      EXPECT_LE((x - p).dot(other - p), 1e-10) << c.label();
    }
  }
}
