#include "uan/errors.hpp"
#include "uan/minconvex.hpp"
#include "uan/sets.hpp"

#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace uan;

namespace {

ConvexPiece point_indicator(double c) { return pieces::indicator(convex::singleton(make_vector({c}))); }

// min(ind{0}, ind{2})
MinConvexFn two_points() { return MinConvexFn({point_indicator(0), point_indicator(2)}); }

// min(x^2, (x-2)^2)
MinConvexFn two_quadratics() {
  Matrix q(1, 1);
  q << 2.0;
  return MinConvexFn({pieces::quadratic(q, make_vector({0}), 0.0),
                      pieces::quadratic(q, make_vector({-4}), 4.0)});
}

Vector v1(double x) { return make_vector({x}); }

}  // namespace

TEST(MinConvexValue, Examples) {
  EXPECT_EQ(two_points().value(v1(0)).value(), 0.0);
  EXPECT_DOUBLE_EQ(two_quadratics().value(v1(1)).value(), 1.0);
  EXPECT_TRUE(two_points().value(v1(1)).is_infinite());
}

TEST(MinConvexEnvelope, Examples) {
  EXPECT_NEAR(two_quadratics().envelope(1.0, v1(0)), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(two_points().envelope(1.0, v1(1)), 0.5);
  const MinConvexFn single(pieces::indicator(convex::singleton(make_vector({1, -2}))));
  const Vector x = make_vector({4, 2});
  for (double gamma : {0.1, 1.0, 7.0}) {
    EXPECT_NEAR(single.envelope(gamma, x), (x - make_vector({1, -2})).squaredNorm() / (2 * gamma), 1e-12);
  }
}

TEST(MinConvexEnvelope, MatchesDirectMinimisation) {
  const MinConvexFn f = two_quadratics();
  for (double gamma : {0.3, 1.0, 2.5}) {
    for (double x : {-1.7, 0.0, 0.4, 1.0, 1.3, 3.1}) {
      const auto obj = [&](double y) {
        return std::min(y * y, (y - 2) * (y - 2)) + (x - y) * (x - y) / (2 * gamma);
      };
      const double y = oracle_ref::argmin_1d(obj, -5, 7);
      EXPECT_NEAR(f.envelope(gamma, v1(x)), obj(y), 1e-10) << "gamma=" << gamma << " x=" << x;
    }
  }
}

TEST(MinConvexEnvelope, PieceProxMatchesDirectMinimisation) {
  const ConvexPiece l1 = pieces::l1_norm(1, 0.7);
  for (double x : {-2.0, -0.3, 0.5, 1.9}) {
    const double gamma = 1.3;
    const auto obj = [&](double y) { return 0.7 * std::abs(y) + (x - y) * (x - y) / (2 * gamma); };
    EXPECT_NEAR(l1.prox(gamma, v1(x))[0], oracle_ref::argmin_1d(obj, -4, 4), 1e-7);
  }
  const ConvexPiece l2 = pieces::l2_norm(2, 1.0);
  EXPECT_LT((l2.prox(1.0, make_vector({0.3, 0.4}))).norm(), 1e-15);
  EXPECT_NEAR((l2.prox(1.0, make_vector({3, 4})) - make_vector({2.4, 3.2})).norm(), 0.0, 1e-14);
}

TEST(MinConvexEnvelope, NeverExceedsValue) {
  const MinConvexFn f = two_quadratics();
  for (double x = -3; x <= 5; x += 0.25) {
    EXPECT_LE(f.envelope(0.8, v1(x)), f.value(v1(x)).value() + 1e-15);
  }
}

TEST(ActiveSelector, Examples) {
  EXPECT_EQ(active_selector(two_points(), 1.0, v1(1)), (IndexSet{0, 1}));
  EXPECT_EQ(active_selector(two_points(), 1.0, v1(0.9)), (IndexSet{0}));
  const MinConvexFn single(pieces::l1_norm(1, 1.0));
  for (double x : {-3.0, 0.0, 8.0}) EXPECT_EQ(active_selector(single, 1.0, v1(x)), (IndexSet{0}));
}

TEST(ProxUnion, Examples) {
  const Evaluation tie = prox_union(two_points(), 1.0).evaluate(v1(1));
  ASSERT_EQ(tie.points.size(), 2u);
  EXPECT_EQ(tie.points[0], v1(0));
  EXPECT_EQ(tie.points[1], v1(2));
  const Evaluation near = prox_union(two_points(), 1.0).evaluate(v1(0.9));
  ASSERT_EQ(near.points.size(), 1u);
  EXPECT_EQ(near.points[0], v1(0));
  const Evaluation q = prox_union(two_quadratics(), 1.0).evaluate(v1(1));
  ASSERT_EQ(q.points.size(), 2u);
  EXPECT_NEAR(q.points[0][0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(q.points[1][0], 5.0 / 3.0, 1e-15);
  EXPECT_EQ(prox_union(two_quadratics(), 1.0).alpha(), 0.5);
}

TEST(ProxUnion, GammaMustBePositive) {
  EXPECT_THROW(prox_union(two_points(), 0.0), DomainError);
  EXPECT_THROW(two_points().envelope(-1.0, v1(0)), DomainError);
}

TEST(ClassifyPoint, Examples) {
  const auto a = classify_point(two_points(), 1.0, v1(0), 1e-12);
  EXPECT_EQ(a.classification, FixedPointClass::kStrongFixed);
  EXPECT_EQ(a.active, (IndexSet{0}));
  EXPECT_TRUE(a.envelope_consistent);
  EXPECT_EQ(classify_point(two_points(), 1.0, v1(1), 1e-12).classification, FixedPointClass::kNotFixed);
  const auto c = classify_point(two_quadratics(), 1.0, v1(1), 1e-12);
  EXPECT_EQ(c.classification, FixedPointClass::kNotFixed);
  ASSERT_TRUE(c.envelope_gap.has_value());
  // env(1) = 1/3 while f(1) = 1.
  EXPECT_NEAR(*c.envelope_gap, 1.0 / 3.0 - 1.0, 1e-15);
  EXPECT_TRUE(c.envelope_consistent);
}

TEST(IsLocalMin, Examples) {
  EXPECT_TRUE(is_local_min(two_points(), v1(2), 1e-12));
  EXPECT_TRUE(is_local_min(two_quadratics(), v1(0), 1e-12));
  EXPECT_FALSE(is_local_min(two_quadratics(), v1(1), 1e-12));
  EXPECT_THROW(is_local_min(two_points(), v1(1), 1e-12), DomainError);
}

TEST(OscProbe, Examples) {
  for (double x : {-1.0, 0.3, 1.0, 2.0}) {
    EXPECT_TRUE(osc_probe(two_quadratics(), v1(x), 0.5, 500).passed) << x;
  }
  const OscReport ind = osc_probe(two_points(), v1(0), 0.5, 500);
  EXPECT_TRUE(ind.passed);
  OscProbeOptions env;
  env.kind = SelectorKind::kEnvelope;
  for (double x : {0.0, 0.7, 1.0}) {
    EXPECT_TRUE(osc_probe(two_points(), v1(x), 0.3, 500, env).passed) << x;
  }
}

TEST(OscProbe, DetectsNonOscSelector) {
  // Value selector of min(x, -x) with linear pieces built from a quadratic
  // with Q = 0: at 0 both pieces are active, so nearby points (one piece)
  // are contained. A selector reference at x = 0.5 but radius 1 sees x < 0,
  // where piece 1 is no longer active; that must be flagged.
  Matrix zero(1, 1);
  zero << 0.0;
  const MinConvexFn f({pieces::quadratic(zero, v1(1), 0.0), pieces::quadratic(zero, v1(-1), 0.0)});
  EXPECT_TRUE(osc_probe(f, v1(0), 1.0, 200).passed);
  const OscReport r = osc_probe(f, v1(0.5), 1.0, 200);
  EXPECT_FALSE(r.passed);
  ASSERT_TRUE(r.counterexample.has_value());
  EXPECT_LT((*r.counterexample)[0], 0.0);
}

TEST(MinConvexFn, RejectsBadPieces) {
  Matrix asym(2, 2);
  asym << 1, 2, 0, 1;
  EXPECT_THROW(pieces::quadratic(asym, Vector::Zero(2)), DomainError);
  Matrix neg(1, 1);
  neg << -1;
  EXPECT_THROW(pieces::quadratic(neg, v1(0)), DomainError);
  EXPECT_THROW(MinConvexFn(std::vector<ConvexPiece>{}), DomainError);
  EXPECT_THROW(MinConvexFn({point_indicator(0), pieces::l1_norm(2, 1.0)}), DimensionError);
}
