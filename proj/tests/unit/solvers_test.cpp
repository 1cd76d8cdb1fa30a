#include "uan/errors.hpp"
#include "uan/minconvex.hpp"
#include "uan/sets.hpp"
#include "uan/solvers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace uan;

namespace {

Vector v1(double x) { return make_vector({x}); }

AveragedMap axis_projector(Index keep) {
  Matrix p = Matrix::Zero(2, 2);
  p(keep, keep) = 1.0;
  return AveragedMap::affine(p, Vector::Zero(2), 0.5, keep == 0 ? "Px" : "Py");
}

AveragedMap line_projector(double angle) {
  Vector d(2);
  d << std::cos(angle), std::sin(angle);
  return AveragedMap::affine(d * d.transpose(), Vector::Zero(2), 0.5, "line");
}

ConvexPiece point_indicator(double c) { return pieces::indicator(convex::singleton(v1(c))); }

MinConvexFn two_points(double a, double b) { return MinConvexFn({point_indicator(a), point_indicator(b)}); }

MinConvexFn two_quadratics() {
  Matrix q(1, 1);
  q << 2.0;
  return MinConvexFn({pieces::quadratic(q, v1(0), 0.0), pieces::quadratic(q, v1(-4), 4.0)});
}

UnionConvexSet line_set(double angle) {
  Matrix d(2, 1);
  d << std::cos(angle), std::sin(angle);
  return UnionConvexSet(convex::affine_span(Vector::Zero(2), d));
}

std::vector<Vector> iterates(const IterationTrace& t) {
  std::vector<Vector> out;
  for (const auto& s : t.steps) out.push_back(s.x);
  out.push_back(t.final_point);
  return out;
}

}  // namespace

TEST(Schedule, CheckRejectsIncompatibleLambda) {
  EXPECT_THROW(check_schedule(Schedule::constant(2.5), 2.0, 10, "t"), DomainError);
  // lambda at the bound gives lambda (bound - lambda) = 0.
  EXPECT_THROW(check_schedule(Schedule::constant(2.0), 2.0, 10, "t"), DomainError);
  EXPECT_THROW(check_schedule(Schedule::cyclic({1.0, 0.0}), 2.0, 10, "t"), DomainError);
  EXPECT_NO_THROW(check_schedule(Schedule::constant(1.0), 2.0, 10, "t"));
  Schedule s = Schedule::constant(1.999);
  s.eps = 1e-2;
  EXPECT_THROW(check_schedule(s, 2.0, 10, "t"), DomainError);
  EXPECT_EQ(Schedule::cyclic({0.5, 1.5})(3), 1.5);
}

TEST(KmAdmissible, AlternatingAxisProjectors) {
  StopRule stop;
  stop.step_tol = 1e-14;
  const auto t = km_admissible({axis_projector(0), axis_projector(1)}, ControlSequence::cyclic(2),
                               Schedule::constant(0.5), make_vector({1, 1}), stop);
  EXPECT_EQ(t.status, RunStatus::kConverged);
  EXPECT_LT(t.final_point.norm(), 1e-12);
  const auto xs = iterates(t);
  for (std::size_t k = 1; k < xs.size(); ++k) EXPECT_LE(xs[k].norm(), xs[k - 1].norm());
  EXPECT_EQ(t.classification, FixedPointClass::kStrongFixed);
  ASSERT_TRUE(t.admissible.has_value());
  EXPECT_TRUE(*t.admissible);
}

TEST(KmAdmissible, IdentityStopsImmediately) {
  const auto t = km_admissible({AveragedMap::identity(2)}, ControlSequence::cyclic(1),
                               Schedule::constant(1.0), make_vector({3, 4}), StopRule{});
  EXPECT_EQ(t.status, RunStatus::kConverged);
  EXPECT_EQ(t.iterations(), 1u);
  EXPECT_EQ(t.final_point, make_vector({3, 4}));
}

TEST(KmAdmissible, CommonFixedPointIsConstant) {
  const Vector p = make_vector({0, 0});
  const auto t = km_admissible({axis_projector(0), axis_projector(1), line_projector(0.3)},
                               ControlSequence::random_admissible(3, 4), Schedule::constant(1.0), p,
                               StopRule{});
  for (const auto& x : iterates(t)) EXPECT_EQ(x, p);
}

TEST(KmAdmissible, RejectsScheduleBeforeStepping) {
  EXPECT_THROW(km_admissible({axis_projector(0)}, ControlSequence::cyclic(1), Schedule::constant(2.0),
                             make_vector({1, 1}), StopRule{}),
               DomainError);
  EXPECT_THROW(km_admissible({axis_projector(0)}, ControlSequence::cyclic(1), Schedule::constant(1.0),
                             make_vector({1, 1, 1}), StopRule{}),
               DimensionError);
}

TEST(ControlSequence, RandomAdmissibleWindow) {
  const ControlSequence c = ControlSequence::random_admissible(5, 9);
  EXPECT_EQ(c.window(), 10u);
  std::vector<std::size_t> h;
  for (std::size_t n = 0; n < 500; ++n) h.push_back(c.next(n, h));
  EXPECT_TRUE(is_admissible(h, 5, 10));
  // Each block of 5 is a permutation.
  for (std::size_t b = 0; b < 100; ++b) {
    std::set<std::size_t> block(h.begin() + 5 * b, h.begin() + 5 * b + 5);
    EXPECT_EQ(block.size(), 5u);
  }
  EXPECT_FALSE(is_admissible({0, 0, 0, 1}, 2, 2));
  EXPECT_TRUE(is_admissible({0, 1, 0, 1, 0}, 2, 2));
}

TEST(ControlSequence, UserControlIsChecked) {
  const ControlSequence lazy = ControlSequence::user(2, 4, [](std::size_t, const auto&) { return 0u; });
  StopRule stop;
  stop.max_iters = 20;
  stop.step_tol = 0.0;
  const auto t = km_admissible({axis_projector(0), axis_projector(1)}, lazy, Schedule::constant(1.0),
                               make_vector({1, 1}), stop);
  ASSERT_TRUE(t.admissible.has_value());
  EXPECT_FALSE(*t.admissible);
}

TEST(SelectionPolicy, PureAndNamed) {
  const std::vector<Branch> b{{0, v1(0)}, {1, v1(1)}, {4, v1(2)}};
  const SelectionPolicy r = SelectionPolicy::seeded_random(42);
  for (std::size_t n = 0; n < 50; ++n) {
    EXPECT_EQ(r.choose(n, b), SelectionPolicy::seeded_random(42).choose(n, b));
    EXPECT_LT(r.choose(n, b), b.size());
  }
  EXPECT_EQ(SelectionPolicy::lowest_index().choose(7, b), 0u);
  EXPECT_EQ(SelectionPolicy::round_robin().choose(7, b), 1u);
  EXPECT_EQ(SelectionPolicy::lowest_index().name(), "lowest-index");
  EXPECT_EQ(SelectionPolicy::seeded_random(1).name(), "seeded-random");
  EXPECT_EQ(SelectionPolicy::round_robin().name(), "round-robin");
}

TEST(IterateUnion, PpaOperatorExamples) {
  const UnionMap t = prox_union(two_points(0, 2), 1.0);
  const auto a = iterate_union(t, Schedule::constant(1.0), SelectionPolicy::lowest_index(), v1(0.9), StopRule{});
  EXPECT_EQ(a.status, RunStatus::kConverged);
  ASSERT_GE(a.steps.size(), 1u);
  EXPECT_EQ(a.steps[0].x, v1(0.9));
  EXPECT_EQ(a.final_point, v1(0));
  EXPECT_EQ(a.steps[1 - 1].step_norm, 0.9);

  const auto tie = iterate_union(t, Schedule::constant(1.0), SelectionPolicy::lowest_index(), v1(1), StopRule{});
  EXPECT_EQ(tie.final_point, v1(0));
  EXPECT_EQ(tie.steps[0].active_count, 2u);

  std::set<double> limits;
  for (std::uint64_t seed = 0; seed < 16; ++seed) {
    const auto r = iterate_union(t, Schedule::constant(1.0), SelectionPolicy::seeded_random(seed), v1(1), StopRule{});
    EXPECT_EQ(r.classification, FixedPointClass::kStrongFixed);
    limits.insert(r.final_point[0]);
  }
  EXPECT_EQ(limits, (std::set<double>{0.0, 2.0}));
}

TEST(IterateUnion, StrongFixedStartIsConstant) {
  const UnionMap t = project_union(sparsity_set(3, 1));
  const auto tr = iterate_union(t, Schedule::constant(0.7), SelectionPolicy::lowest_index(),
                                make_vector({0, -2, 0}), StopRule{});
  for (const auto& x : iterates(tr)) EXPECT_EQ(x, make_vector({0, -2, 0}));
}

TEST(IterateUnion, DivergenceGuardAndMaxIters) {
  const UnionMap bad = UnionMap::single(AveragedMap(1, 0.5, "3x", [](const Vector& x) -> Vector { return 3 * x; }));
  const auto d = iterate_union(bad, Schedule::constant(1.0), SelectionPolicy::lowest_index(), v1(1), StopRule{});
  EXPECT_EQ(d.status, RunStatus::kDivergedGuard);
  EXPECT_STREQ(to_string(d.status), "diverged-guard");
  const UnionMap nan = UnionMap::single(AveragedMap(1, 0.5, "nan", [](const Vector& x) -> Vector {
    return Vector::Constant(x.size(), std::nan(""));
  }));
  EXPECT_EQ(iterate_union(nan, Schedule::constant(1.0), SelectionPolicy::lowest_index(), v1(1), StopRule{}).status,
            RunStatus::kDivergedGuard);
  Matrix rot(2, 2);
  rot << 0, -1, 1, 0;
  const UnionMap r = UnionMap::single(AveragedMap::affine(rot, Vector::Zero(2), 1.0, "rot"));
  StopRule stop;
  stop.max_iters = 3;
  const auto m = iterate_union(r, Schedule::constant(0.5), SelectionPolicy::lowest_index(), make_vector({1, 0}), stop);
  EXPECT_EQ(m.status, RunStatus::kMaxIters);
  EXPECT_EQ(m.iterations(), 3u);
  EXPECT_STREQ(to_string(m.status), "max-iters");
}

TEST(IterateUnion, ResidualOverridesStepTest) {
  const UnionMap t = UnionMap::single(AveragedMap::constant(v1(0)));
  StopRule stop;
  stop.residual = [](const Vector& x) { return std::abs(x[0]); };
  stop.residual_tol = 1e-3;
  const auto tr = iterate_union(t, Schedule::constant(0.5), SelectionPolicy::lowest_index(), v1(1), stop);
  EXPECT_EQ(tr.status, RunStatus::kConverged);
  EXPECT_EQ(tr.iterations(), 10u);  // 2^-10 < 1e-3 < 2^-9
  ASSERT_TRUE(tr.steps.back().residual.has_value());
}

TEST(CyclicCompose, CrossingLines) {
  StopRule stop;
  stop.step_tol = 1e-13;
  stop.max_iters = 100000;
  const auto t = cyclic_compose({UnionMap::single(line_projector(0.0)), UnionMap::single(line_projector(1.0))},
                                SelectionPolicy::lowest_index(), make_vector({2, 1}), stop);
  EXPECT_EQ(t.status, RunStatus::kConverged);
  EXPECT_LT(t.final_point.norm(), 1e-12);
  EXPECT_FALSE(t.sweep_points.empty());
}

TEST(CyclicCompose, SingleMapMatchesIterateUnion) {
  const UnionMap t = prox_union(two_quadratics(), 0.7);
  const auto a = cyclic_compose({t}, SelectionPolicy::lowest_index(), v1(1.3), StopRule{});
  const auto b = iterate_union(t, Schedule::constant(1.0), SelectionPolicy::lowest_index(), v1(1.3), StopRule{});
  const auto xa = iterates(a);
  const auto xb = iterates(b);
  ASSERT_EQ(xa.size(), xb.size());
  for (std::size_t k = 0; k < xa.size(); ++k) EXPECT_EQ(xa[k], xb[k]);
}

TEST(CyclicProjections, SparseAffineFeasibility) {
  Matrix a(1, 4);
  a << 2, 1, -1, 0.5;
  const UnionConvexSet aff(convex::affine_solutions(a, v1(3)));
  const Vector noise = make_vector({0.004, -0.006, 0.003, 0.005});
  const Vector x0 = make_vector({1.5, 0, 0, 0}) + noise;
  StopRule stop;
  stop.step_tol = 1e-13;
  const auto t = cyclic_projections({sparsity_set(4, 1), aff}, SelectionPolicy::lowest_index(), x0, stop);
  EXPECT_EQ(t.status, RunStatus::kConverged);
  EXPECT_LE(std::abs((a * t.final_point)[0] - 3.0), 1e-9);
  EXPECT_LE((t.final_point.array().abs() > 1e-9).count(), 1);
  EXPECT_EQ(t.memberships_ok, std::optional<bool>(true));
  ASSERT_EQ(t.set_residuals.size(), 2u);
}

TEST(CyclicProjections, IdenticalConvexSetsOneSweep) {
  const UnionConvexSet c(convex::ball(make_vector({0, 0}), 1.0));
  const auto t = cyclic_projections({c, c}, SelectionPolicy::lowest_index(), make_vector({3, 4}), StopRule{});
  // sweep_points[0] is x0.
  ASSERT_GE(t.sweep_points.size(), 2u);
  EXPECT_EQ(t.sweep_points[0], make_vector({3, 4}));
  EXPECT_LT((t.sweep_points[1] - make_vector({0.6, 0.8})).norm(), 1e-15);
  EXPECT_LT((t.final_point - make_vector({0.6, 0.8})).norm(), 1e-15);
}

TEST(CyclicProjections, StartInIntersectionIsConstant) {
  const Vector p = make_vector({1, 0, 0});
  const auto t = cyclic_projections({sparsity_set(3, 1), UnionConvexSet(convex::coordinate_subspace(3, {0, 1}))},
                                    SelectionPolicy::lowest_index(), p, StopRule{});
  for (const auto& x : iterates(t)) EXPECT_EQ(x, p);
}

TEST(CyclicDr, CrossingLinesNearOrigin) {
  StopRule stop;
  stop.max_iters = 100000;
  stop.step_tol = 1e-14;
  const auto t = cyclic_dr({line_set(0.0), line_set(1.0)}, SelectionPolicy::lowest_index(),
                           make_vector({0.05, -0.02}), stop);
  EXPECT_EQ(t.status, RunStatus::kConverged);
  EXPECT_NE(t.classification, FixedPointClass::kNotFixed);
  EXPECT_LT(t.final_point.norm(), 1e-8);
  EXPECT_FALSE(t.shadow.has_value());
}

TEST(CyclicDr, RepeatedSetFixesItsPoints) {
  const UnionConvexSet c = sparsity_set(2, 1);
  const auto t = cyclic_dr({c, c}, SelectionPolicy::lowest_index(), make_vector({0, 3}), StopRule{});
  for (const auto& x : iterates(t)) EXPECT_EQ(x, make_vector({0, 3}));
}

TEST(Cadr, LocalIntersectionPoint) {
  const UnionConvexSet line(convex::coordinate_subspace(2, {0}));
  const UnionConvexSet pts({convex::singleton(make_vector({0, 0})), convex::singleton(make_vector({5, 5}))});
  StopRule stop;
  stop.step_tol = 1e-14;
  const auto t = cadr({line, pts}, true, SelectionPolicy::lowest_index(), make_vector({0.3, -0.2}), stop);
  EXPECT_EQ(t.status, RunStatus::kConverged);
  ASSERT_TRUE(t.shadow.has_value());
  EXPECT_LT(t.shadow->norm(), 1e-12);
  EXPECT_EQ(t.memberships_ok, std::optional<bool>(true));
}

TEST(Cadr, AnchorLastUsesLastSet) {
  const UnionConvexSet line(convex::coordinate_subspace(2, {0}));
  const UnionConvexSet pts({convex::singleton(make_vector({0, 0})), convex::singleton(make_vector({5, 5}))});
  const auto first = cadr({line, pts}, true, SelectionPolicy::lowest_index(), make_vector({0.3, -0.2}), StopRule{});
  const auto last = cadr({pts, line}, false, SelectionPolicy::lowest_index(), make_vector({0.3, -0.2}), StopRule{});
  const auto xa = iterates(first);
  const auto xb = iterates(last);
  ASSERT_EQ(xa.size(), xb.size());
  for (std::size_t k = 0; k < xa.size(); ++k) EXPECT_EQ(xa[k], xb[k]);
}

TEST(Cadr, EqualConvexSets) {
  const UnionConvexSet c(convex::box(make_vector({0, 0}), make_vector({1, 1})));
  const auto t = cadr({c, c, c}, true, SelectionPolicy::lowest_index(), make_vector({3, 0.5}), StopRule{});
  EXPECT_EQ(t.status, RunStatus::kConverged);
  ASSERT_TRUE(t.shadow.has_value());
  EXPECT_TRUE(c.contains(*t.shadow));
  EXPECT_EQ(t.classification, FixedPointClass::kStrongFixed);
}

TEST(Ppa, Examples) {
  const auto a = ppa(two_points(0, 2), 1.0, SelectionPolicy::lowest_index(), v1(0.9), StopRule{});
  EXPECT_EQ(a.final_point, v1(0));
  EXPECT_EQ(a.local_min, std::optional<bool>(true));
  StopRule stop;
  stop.step_tol = 1e-14;
  const auto b = ppa(two_quadratics(), 1.0, SelectionPolicy::lowest_index(), v1(1.6), stop);
  EXPECT_NEAR(b.final_point[0], 2.0, 1e-12);
  for (const auto& s : b.steps) EXPECT_EQ(s.index, 1u);
  EXPECT_EQ(b.local_min, std::optional<bool>(true));
  const auto c = ppa(two_points(0, 2), 1.0, SelectionPolicy::lowest_index(), v1(2), StopRule{});
  for (const auto& x : iterates(c)) EXPECT_EQ(x, v1(2));
}

TEST(ForwardBackward, TwoPointExample) {
  Matrix q(1, 1);
  q << 1.0;
  const SmoothFn f = SmoothFn::quadratic(q, v1(0));
  EXPECT_EQ(f.lipschitz, 1.0);
  const auto t = forward_backward(f, two_points(-1, 1), 0.5, Schedule::constant(1.0),
                                  SelectionPolicy::lowest_index(), v1(-0.8), StopRule{});
  EXPECT_EQ(t.status, RunStatus::kConverged);
  EXPECT_EQ(t.final_point, v1(-1));
  EXPECT_EQ(t.classification, FixedPointClass::kStrongFixed);
  EXPECT_EQ(t.local_min, std::optional<bool>(true));
  ASSERT_TRUE(t.objective.has_value());
  EXPECT_DOUBLE_EQ(*t.objective, 0.5);
}

TEST(ForwardBackward, GammaWindow) {
  Matrix q(1, 1);
  q << 1.0;
  try {
    forward_backward_operator(SmoothFn::quadratic(q, v1(0)), two_points(-1, 1), 3.0);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("2/L"), std::string::npos) << e.what();
  }
  EXPECT_NO_THROW(forward_backward_operator(SmoothFn::zero(1), two_points(-1, 1), 100.0));
}

TEST(ForwardBackward, ZeroSmoothTermIsPpa) {
  const auto fb = forward_backward(SmoothFn::zero(1), two_quadratics(), 0.8, Schedule::constant(1.0),
                                   SelectionPolicy::lowest_index(), v1(1.4), StopRule{});
  const auto pp = ppa(two_quadratics(), 0.8, SelectionPolicy::lowest_index(), v1(1.4), StopRule{});
  const auto xa = iterates(fb);
  const auto xb = iterates(pp);
  ASSERT_EQ(xa.size(), xb.size());
  for (std::size_t k = 0; k < xa.size(); ++k) EXPECT_NEAR(xa[k][0], xb[k][0], 1e-15);
}

TEST(ForwardBackward, StrongFixedStartIsConstant) {
  Matrix q(1, 1);
  q << 1.0;
  const auto t = forward_backward(SmoothFn::quadratic(q, v1(0)), two_points(-1, 1), 0.5, Schedule::constant(1.0),
                                  SelectionPolicy::lowest_index(), v1(1), StopRule{});
  for (const auto& x : iterates(t)) EXPECT_EQ(x, v1(1));
}

TEST(DouglasRachford, CrossingAxes) {
  const MinConvexFn f(pieces::indicator(convex::coordinate_subspace(2, {0})));
  const MinConvexFn g(pieces::indicator(convex::coordinate_subspace(2, {1})));
  const auto t = douglas_rachford(f, g, 1.0, Schedule::constant(1.0), SelectionPolicy::lowest_index(),
                                  make_vector({3, -2}), StopRule{});
  ASSERT_GE(t.steps.size(), 1u);
  EXPECT_LT(t.steps.size() > 1 ? t.steps[1].x.norm() : t.final_point.norm(), 1e-15);
  ASSERT_TRUE(t.shadow.has_value());
  EXPECT_LT(t.shadow->norm(), 1e-15);
  ASSERT_EQ(t.steps[0].aux.size(), 2u);
}

TEST(DouglasRachford, QuadraticPlusTwoPoints) {
  // With gamma = 1, 2 prox_f(x) - x = 0 for f = x^2/2, so the g-step is a
  // permanent tie; piece order decides which point is reached.
  const MinConvexFn f(pieces::quadratic(Matrix::Identity(1, 1), v1(0)));
  const auto t = douglas_rachford(f, two_points(1, -1), 1.0, Schedule::constant(1.0),
                                  SelectionPolicy::lowest_index(), v1(1.8), StopRule{});
  EXPECT_EQ(t.status, RunStatus::kConverged);
  ASSERT_TRUE(t.shadow.has_value());
  EXPECT_NEAR((*t.shadow)[0], 1.0, 1e-9);
  ASSERT_TRUE(t.objective.has_value());
  EXPECT_NEAR(*t.objective, 0.5, 1e-9);

  // gamma = 1/2 has an isolated strong fixed point at x = 3/2 with shadow 1.
  const auto h = douglas_rachford(f, two_points(-1, 1), 0.5, Schedule::constant(1.0),
                                  SelectionPolicy::lowest_index(), v1(1.4), StopRule{});
  EXPECT_NEAR(h.final_point[0], 1.5, 1e-9);
  EXPECT_EQ(h.classification, FixedPointClass::kStrongFixed);
  EXPECT_NEAR((*h.shadow)[0], 1.0, 1e-9);
  EXPECT_EQ(h.local_min, std::optional<bool>(true));
}

TEST(DouglasRachford, SameSingletonShadow) {
  const MinConvexFn f(pieces::indicator(convex::singleton(make_vector({2, 1}))));
  const auto t = douglas_rachford(f, f, 0.7, Schedule::constant(1.0), SelectionPolicy::lowest_index(),
                                  make_vector({-5, 4}), StopRule{});
  for (const auto& s : t.steps) EXPECT_EQ(s.aux[0], make_vector({2, 1}));
  EXPECT_EQ(*t.shadow, make_vector({2, 1}));
}

TEST(Solvers, ReproducibleTraces) {
  const UnionMap t = prox_union(two_points(0, 2), 1.0);
  const auto a = iterate_union(t, Schedule::constant(0.5), SelectionPolicy::seeded_random(3), v1(1), StopRule{});
  const auto b = iterate_union(t, Schedule::constant(0.5), SelectionPolicy::seeded_random(3), v1(1), StopRule{});
  ASSERT_EQ(a.iterations(), b.iterations());
  for (std::size_t k = 0; k < a.iterations(); ++k) {
    EXPECT_EQ(a.steps[k].x, b.steps[k].x);
    EXPECT_EQ(a.steps[k].index, b.steps[k].index);
  }
}
