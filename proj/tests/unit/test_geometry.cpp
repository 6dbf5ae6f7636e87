#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "profile_forge/geometry.hpp"
#include "profile_forge/vm.hpp"

using namespace pforge;

namespace {

constexpr int kTrials = 1000;
constexpr double kResidual = 1e-9;

struct Rand {
    std::mt19937_64 rng;
    explicit Rand(std::uint64_t s) : rng(s) {}
    double uni(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
    Point2 point() { return {uni(-0.5, 0.5), uni(-0.5, 0.5)}; }
    DirectedLine line() { return {uni(0, kTwoPi), uni(-0.5, 0.5)}; }
    OrientedCircle circle() { return {point(), uni(0.05, 0.5), uni(0, 1) < 0.5}; }
};

// plain formula, independent of DirectedLine's members
double sd(const DirectedLine& l, Point2 p) { return -std::sin(l.phi) * p.x + std::cos(l.phi) * p.y - l.d; }

double dir_gap(double a, double b)
{
    return std::abs(std::remainder(a - b, kTwoPi));
}

}  // namespace

TEST(Kernel, LineXLineLiesOnBothLines)
{
    Rand r(1);
    for (int i = 0; i < kTrials; ++i) {
        const auto a = r.line(), b = r.line();
        if (std::abs(std::sin(a.phi - b.phi)) < 1e-3) continue;
        const Point2 p = line_x_line(a, b);
        EXPECT_LT(std::abs(sd(a, p)), kResidual);
        EXPECT_LT(std::abs(sd(b, p)), kResidual);
    }
}

TEST(Kernel, LineXLineParallelHasNoSolution)
{
    EXPECT_THROW(line_x_line({0.3, 0.1}, {0.3, 0.2}), NoSolution);
    EXPECT_THROW(line_x_line({0.3, 0.1}, {0.3 + kPi, 0.2}), NoSolution);
}

TEST(Kernel, LineXCirclePointsAreOnLineAndCircleInLineOrder)
{
    Rand r(2);
    int hits = 0;
    for (int i = 0; i < kTrials; ++i) {
        const auto l = r.line();
        const auto c = r.circle();
        if (std::abs(sd(l, c.center)) > c.radius) {
            EXPECT_THROW(line_x_circle(l, c), NoSolution);
            continue;
        }
        const auto pts = line_x_circle(l, c);
        ++hits;
        for (Point2 p : pts) {
            EXPECT_LT(std::abs(sd(l, p)), kResidual);
            EXPECT_LT(std::abs(std::hypot(p.x - c.center.x, p.y - c.center.y) - c.radius), kResidual);
        }
        ASSERT_EQ(pts.size(), 2u);
        const Point2 t{std::cos(l.phi), std::sin(l.phi)};
        EXPECT_LT(pts[0].x * t.x + pts[0].y * t.y, pts[1].x * t.x + pts[1].y * t.y);
    }
    EXPECT_GT(hits, kTrials / 4);
}

TEST(Kernel, LineXCircleTangentGivesOnePoint)
{
    const OrientedCircle c{{0.1, 0.2}, 0.25, true};
    const auto pts = line_x_circle({0.0, 0.2 - 0.25}, c);
    ASSERT_EQ(pts.size(), 1u);
    EXPECT_NEAR(pts[0].x, 0.1, 1e-12);
    EXPECT_NEAR(pts[0].y, -0.05, 1e-12);
}

TEST(Kernel, LineOffsetMovesByExactlyTheOffset)
{
    Rand r(3);
    for (int i = 0; i < kTrials; ++i) {
        const auto l = r.line();
        const double o = r.uni(-1, 1);
        const auto m = line_offset_line(l, o);
        EXPECT_LT(dir_gap(m.phi, l.phi), kResidual);
        // a point on l sits o to the right of m
        const Point2 p{-l.d * std::sin(l.phi), l.d * std::cos(l.phi)};
        EXPECT_LT(std::abs(sd(m, p) + o), kResidual);
    }
}

TEST(Kernel, CircleOffsetShrinksCcwGrowsCw)
{
    Rand r(4);
    for (int i = 0; i < kTrials; ++i) {
        const auto c = r.circle();
        const double o = r.uni(0.001, 0.3);
        if (c.ccw && o >= c.radius) {
            EXPECT_THROW(circle_offset_circle(c, o), NoSolution);
            continue;
        }
        const auto m = circle_offset_circle(c, o);
        EXPECT_LT(std::abs(std::abs(m.radius - c.radius) - o), kResidual);
        EXPECT_EQ(m.ccw, c.ccw);
        EXPECT_EQ(m.radius < c.radius, c.ccw);
    }
}

TEST(Kernel, ReversalIsAnInvolution)
{
    Rand r(5);
    for (int i = 0; i < kTrials; ++i) {
        const auto l = r.line();
        const auto rl = line_reverse(l);
        EXPECT_LT(std::abs(dir_gap(rl.phi, l.phi) - kPi), kResidual);
        const auto back = line_reverse(rl);
        EXPECT_LT(dir_gap(back.phi, l.phi), kResidual);
        EXPECT_LT(std::abs(back.d - l.d), kResidual);
        const auto c = r.circle();
        EXPECT_EQ(circle_reverse(circle_reverse(c)), c);
        EXPECT_NE(circle_reverse(c).ccw, c.ccw);
    }
}

TEST(Kernel, PointReflectionIsAnInvolutionAcrossTheLine)
{
    Rand r(6);
    for (int i = 0; i < kTrials; ++i) {
        const auto s = r.line();
        const Point2 p = r.point();
        const Point2 q = point_sym_point(p, s);
        EXPECT_LT(std::abs(sd(s, p) + sd(s, q)), kResidual);
        const Point2 mid{(p.x + q.x) / 2, (p.y + q.y) / 2};
        EXPECT_LT(std::abs(sd(s, mid)), kResidual);
        const Point2 back = point_sym_point(q, s);
        EXPECT_LT(std::hypot(back.x - p.x, back.y - p.y), kResidual);
    }
}

TEST(Kernel, LineReflectionMapsPointsOntoReflectedLine)
{
    Rand r(7);
    for (int i = 0; i < kTrials; ++i) {
        const auto s = r.line(), l = r.line();
        const auto m = line_sym_line(l, s);
        for (double t : {-0.7, 0.0, 0.4}) {
            const Point2 p{-l.d * std::sin(l.phi) + t * std::cos(l.phi), l.d * std::cos(l.phi) + t * std::sin(l.phi)};
            EXPECT_LT(std::abs(sd(m, point_sym_point(p, s))), kResidual);
        }
        const auto back = line_sym_line(m, s);
        EXPECT_LT(dir_gap(back.phi, l.phi), kResidual);
        EXPECT_LT(std::abs(back.d - l.d), kResidual);
    }
}

TEST(Kernel, AxisRotationKeepsPivotDistance)
{
    Rand r(8);
    for (int i = 0; i < kTrials; ++i) {
        const auto l = r.line();
        const Point2 pivot = r.point();
        const double a = r.uni(-kPi, kPi);
        const auto m = line_axis_rotated_line(l, pivot, a);
        EXPECT_LT(dir_gap(m.phi, l.phi + a), kResidual);
        EXPECT_LT(std::abs(sd(m, pivot) - sd(l, pivot)), kResidual);
    }
}

TEST(Kernel, DatumParallelPassesThroughDatum)
{
    Rand r(9);
    for (int i = 0; i < kTrials; ++i) {
        const auto l = r.line();
        const Point2 p = r.point();
        const auto m = line_datum_parallel_line(l, p);
        EXPECT_LT(std::abs(sd(m, p)), kResidual);
        EXPECT_LT(dir_gap(m.phi, l.phi), kResidual);
    }
}

TEST(Kernel, CircleParallelIsTangentWithCircleOnTheLeft)
{
    Rand r(10);
    for (int i = 0; i < kTrials; ++i) {
        const auto l = r.line();
        const auto c = r.circle();
        const auto m = line_circle_parallel_line(l, c);
        EXPECT_LT(std::abs(sd(m, c.center) - c.radius), kResidual);
        EXPECT_LT(dir_gap(m.phi, l.phi), kResidual);
    }
}

TEST(Kernel, SymmetricOffsetsFaceEachOther)
{
    Rand r(11);
    for (int i = 0; i < kTrials; ++i) {
        const auto s = r.line();
        const double o = r.uni(0.001, 0.5);
        const auto [a, b] = sym_line_offset_line_line(s, o);
        const Point2 p{-s.d * std::sin(s.phi), s.d * std::cos(s.phi)};
        EXPECT_LT(std::abs(sd(a, p) + o), kResidual);
        EXPECT_LT(std::abs(sd(b, p) + o), kResidual);
        EXPECT_LT(std::abs(dir_gap(a.phi, b.phi) - kPi), kResidual);
    }
    EXPECT_THROW(sym_line_offset_line_line({0, 0}, 0.0), NoSolution);
}

TEST(Kernel, PointRadiusCircle)
{
    const auto c = point_radius_circle({0.1, -0.2}, 0.3, false);
    EXPECT_EQ(c.center, (Point2{0.1, -0.2}));
    EXPECT_EQ(c.radius, 0.3);
    EXPECT_FALSE(c.ccw);
    EXPECT_THROW(point_radius_circle({0, 0}, -0.1, true), NoSolution);
}

TEST(Kernel, CirclePointPointArcMidIsOnCircleBetweenEnds)
{
    Rand r(12);
    for (int i = 0; i < kTrials; ++i) {
        const auto c = r.circle();
        const double a0 = r.uni(0, kTwoPi), a1 = r.uni(0, kTwoPi);
        const Point2 s = c.center + c.radius * unit_at(a0), e = c.center + c.radius * unit_at(a1);
        if (distance(s, e) < 1e-6) continue;
        const auto arc = circle_point_point_arc(c, s, e);
        EXPECT_LT(std::abs(distance(arc.mid, c.center) - c.radius), kResidual);
        // travel s -> m -> e turns the same way as the circle
        EXPECT_EQ(oracle::orient(s, arc.mid, e) > 0, c.ccw);
        // the mid point halves the swept angle
        const double sweep = c.ccw ? normalize_angle(a1 - a0) : normalize_angle(a0 - a1);
        const double am = std::atan2(arc.mid.y - c.center.y, arc.mid.x - c.center.x);
        const double half = c.ccw ? normalize_angle(am - a0) : normalize_angle(a0 - am);
        EXPECT_LT(std::abs(half - sweep / 2), 1e-9);
    }
}

TEST(Kernel, FilletIsTangentToBothLines)
{
    Rand r(13);
    int done = 0;
    for (int i = 0; i < kTrials; ++i) {
        const auto a = r.line(), b = r.line();
        if (std::abs(std::sin(a.phi - b.phi)) < 1e-2) continue;
        const double rad = r.uni(0.01, 0.3);
        const auto f = line_line_fillet(a, b, rad);
        EXPECT_LT(oracle::fillet_residual(a, b, f.start, f.mid, f.end, rad), kResidual);
        EXPECT_GT(oracle::orient(f.start, f.mid, f.end), 0.0);
        ++done;
    }
    EXPECT_GT(done, kTrials / 2);
}

TEST(Kernel, FilletOfARightAngleCorner)
{
    // x axis going right, then the line x = 1 going up
    const DirectedLine l1{0.0, 0.0}, l2{kPi / 2, -1.0};
    const auto f = line_line_fillet(l1, l2, 0.25);
    EXPECT_NEAR(f.start.x, 0.75, 1e-12);
    EXPECT_NEAR(f.start.y, 0.0, 1e-12);
    EXPECT_NEAR(f.end.x, 1.0, 1e-12);
    EXPECT_NEAR(f.end.y, 0.25, 1e-12);
    EXPECT_NEAR(f.mid.x, 0.75 + 0.25 * std::sqrt(0.5), 1e-12);
}

TEST(Kernel, ExecuteStepMatchesSignatures)
{
    // every step kind produces the output types its signature declares
    const Point2 p{0.1, 0.1};
    const DirectedLine l{0.2, 0.05}, l2{1.4, -0.1};
    const OrientedCircle c{{0.0, 0.0}, 0.3, true};
    auto val = [&](Slot s) -> Value {
        switch (s) {
        case Slot::Point: return Point2{0.3 * std::cos(0.2), 0.3 * std::sin(0.2)};
        case Slot::Line: return l;
        case Slot::Circle: return c;
        case Slot::Length: return 0.1;
        case Slot::Angle: return 0.3;
        }
        return 0.0;
    };
    for (StepKind k : kAllStepKinds) {
        const auto& sig = signature(k);
        std::vector<Value> in;
        int lines = 0;
        for (Slot s : sig.inputs) {
            if (s == Slot::Line && lines++ == 1)
                in.emplace_back(l2);
            else
                in.push_back(val(s));
        }
        if (k == StepKind::CirclePointPointArc) in[2] = Point2{0.3 * std::cos(1.2), 0.3 * std::sin(1.2)};
        if (k == StepKind::PointRadiusCircle || k == StepKind::PointLineSymPoint) in[0] = p;
        std::vector<Geometry> out;
        ASSERT_NO_THROW(out = detail::execute_step(Step{k, {}, {}, true}, in)) << step_name(k);
        ASSERT_EQ(out.size(), sig.outputs.size()) << step_name(k);
        for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(geom_type(out[i]), sig.outputs[i]) << step_name(k);
    }
}
