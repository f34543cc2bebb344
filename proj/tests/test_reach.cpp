#include <cmath>
#include <random>

#include "doctest.h"
#include "safekern/matrix_exp.hpp"
#include "safekern/reach.hpp"

using namespace safekern;

namespace {

Ellipsoid interval(double center, double radius) {
    Vector c(1);
    c << center;
    Matrix s(1, 1);
    s << radius * radius;
    return Ellipsoid(c, s);
}

LtiSystem scalar_system(double a, double b, double g) {
    Matrix am(1, 1), bm(1, 1), gm(1, 1);
    am << a;
    bm << b;
    gm << g;
    return LtiSystem{am, bm, gm};
}

// int_0^d e^{-a s} ds, stable near a = 0
double decay_integral(double a, double d) {
    if (std::abs(a) < 1e-12) return d;
    return -std::expm1(-a * d) / a;
}

// Closed-form 1-D robust backward reach: center and radius of the start
// interval for target [ct - rt, ct + rt].
std::pair<double, double> backward_interval(double a, double b, double g,
                                            double uc, double ur, double vc,
                                            double vr, double ct, double rt,
                                            double d) {
    const double phi = std::exp(-a * d);
    const double integ = decay_integral(a, d);
    const double c0 = phi * ct - integ * (b * uc + g * vc);
    const double r0 =
        phi * rt + integ * (std::abs(b) * ur - std::abs(g) * vr);
    return {c0, r0};
}

}  // namespace

TEST_CASE("adjoint direction curve") {
    std::vector<double> grid = {0.0, 0.25, 0.5, 0.75, 1.0};
    Vector l(2);
    l << 1, 0;

    auto constant = adjoint_directions(Matrix::Zero(2, 2), l, grid, 1.0);
    for (const Vector& v : constant) CHECK((v - l).norm() < 1e-14);

    Matrix skew(2, 2);
    skew << 0, 2, -2, 0;
    Vector ltau(2);
    ltau << 1, 1;
    ltau.normalize();
    auto curve = adjoint_directions(skew, ltau, grid, 1.0);
    CHECK((curve.back() - ltau).norm() < 1e-12);
    for (const Vector& v : curve) CHECK(v.norm() == doctest::Approx(1.0));

    Matrix sa(1, 1);
    sa << 0.5;
    Vector sl(1);
    sl << 1;
    auto scalar = adjoint_directions(sa, sl, {0.0, 1.0}, 1.0);
    CHECK(scalar.front()(0) == doctest::Approx(std::exp(0.5)));
}

TEST_CASE("1-D segment matches the interval closed form") {
    InputBounds bounds;
    bounds.control = interval(0.0, 1.0);
    bounds.disturbance = Ellipsoid::point(Vector::Zero(1));
    Vector l(1);
    l << 1;

    auto seg = reach_tube_segment(scalar_system(0, 1, 0), interval(0, 1),
                                  bounds, 0.0, 0.5, 0.1, l);
    CHECK(seg.start_ellipsoid().center()(0) == doctest::Approx(0.0));
    CHECK(std::sqrt(seg.start_ellipsoid().shape()(0, 0)) ==
          doctest::Approx(1.5));

    bounds.disturbance = interval(0.0, 0.1);
    auto seg2 = reach_tube_segment(scalar_system(0, 1, 1), interval(0, 1),
                                   bounds, 0.0, 0.5, 0.1, l);
    CHECK(std::sqrt(seg2.start_ellipsoid().shape()(0, 0)) ==
          doctest::Approx(1.45));
}

TEST_CASE("terminal sample equals the target") {
    InputBounds bounds;
    bounds.control = interval(0.2, 1.0);
    bounds.disturbance = interval(-0.05, 0.1);
    Vector l(1);
    l << 1;
    const Ellipsoid target = interval(0.3, 0.8);
    auto seg = reach_tube_segment(scalar_system(-0.4, 1, 1), target, bounds,
                                  0.2, 0.7, 0.05, l);
    CHECK((seg.terminal_ellipsoid().center() - target.center()).norm() <
          1e-9);
    CHECK((seg.terminal_ellipsoid().shape() - target.shape()).norm() < 1e-9);
    CHECK(seg.grid.front() == doctest::Approx(0.2));
    CHECK(seg.grid.back() == doctest::Approx(0.7));
}

TEST_CASE("pure-control segment support along the terminal direction") {
    // A = 0, B = I, G = 0, target unit ball: going backward the control set
    // enters negated (x0 = x1 - delta B u), so the start support along l is
    // 1 + delta * h_U(-l).
    InputBounds bounds;
    Matrix ushape(2, 2);
    ushape << 0.9, 0.2, 0.2, 0.5;
    Vector ucenter(2);
    ucenter << 0.1, -0.3;
    bounds.control = Ellipsoid(ucenter, ushape);
    bounds.disturbance = Ellipsoid::point(Vector::Zero(2));
    LtiSystem sys{Matrix::Zero(2, 2), Matrix::Identity(2, 2),
                  Matrix::Zero(2, 2)};
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 10; ++trial) {
        Vector l(2);
        l << gauss(rng), gauss(rng);
        l.normalize();
        const double delta = 0.3;
        auto seg = reach_tube_segment(
            sys, Ellipsoid::ball(Vector::Zero(2), 1.0), bounds, 0.0, delta,
            delta / 10, l);
        const double expect = 1.0 + delta * bounds.control.support((-l).eval());
        CHECK(seg.start_ellipsoid().support(l) ==
              doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("disturbance-dominated segment degenerates") {
    InputBounds bounds;
    bounds.control = interval(0.0, 0.1);
    bounds.disturbance = interval(0.0, 1.0);
    Vector l(1);
    l << 1;
    CHECK_THROWS_AS(
        reach_tube_segment(scalar_system(0, 1, 1), interval(0, 0.05), bounds,
                           0.0, 1.0, 0.05, l),
        SegmentDegenerateError);
}

TEST_CASE("dynamics bound") {
    InputBounds zero;
    zero.control = Ellipsoid::point(Vector::Zero(1));
    zero.disturbance = Ellipsoid::point(Vector::Zero(1));
    LtiSystem none{Matrix::Zero(2, 2), Matrix::Zero(2, 1),
                   Matrix::Zero(2, 1)};
    CHECK(dynamics_bound(none, Ellipsoid::ball(Vector::Zero(2), 1.0), zero) ==
          doctest::Approx(0.0));

    InputBounds unit;
    unit.control = interval(0.0, 1.0);
    unit.disturbance = Ellipsoid::point(Vector::Zero(1));
    CHECK(dynamics_bound(scalar_system(0, 1, 0), interval(0, 2), unit) ==
          doctest::Approx(1.0));
}

TEST_CASE("dynamics bound dominates sampled dynamics") {
    // planar study system
    Matrix a(2, 2), b(2, 1), g(2, 1);
    a << 0, 2, -2, 0;
    b << 1, 0.5;
    g << 1, 1;
    LtiSystem sys{a, b, g};
    Matrix kshape(2, 2);
    kshape << 0.25, 0, 0, 4.0;
    Ellipsoid k(Vector::Zero(2), kshape);
    InputBounds bounds;
    bounds.control = interval(0.0, 1.0);
    bounds.disturbance = interval(0.0, 0.1);
    const double m = dynamics_bound(sys, k, bounds);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    double sampled = 0.0;
    for (int s = 0; s < 200000; ++s) {
        Vector w(2);
        w << unif(rng), unif(rng);
        if (w.norm() > 1.0) continue;
        Vector x(2);
        x << 0.5 * w(0), 2.0 * w(1);
        Vector u(1), v(1);
        u << unif(rng);
        v << 0.1 * unif(rng);
        sampled = std::max(sampled,
                           (sys.A * x + sys.B * u + sys.G * v).norm());
    }
    CHECK(m >= sampled);
}

TEST_CASE("random 1-D segments match the closed form") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const double a = 2.0 * unif(rng);
        const double b = 1.0 + 0.5 * unif(rng);
        const double g = 0.5 * unif(rng);
        const double uc = 0.3 * unif(rng), ur = 0.5 + 0.4 * unif(rng);
        const double vc = 0.1 * unif(rng), vr = 0.1 * (1.0 + unif(rng));
        const double ct = unif(rng), rt = 1.0 + 0.5 * unif(rng);
        const double d = 0.1 + 0.3 * std::abs(unif(rng));

        InputBounds bounds;
        bounds.control = interval(uc, ur);
        bounds.disturbance = interval(vc, vr);
        Vector l(1);
        l << (unif(rng) > 0 ? 1.0 : -1.0);
        ReachSegment seg;
        try {
            seg = reach_tube_segment(scalar_system(a, b, g), interval(ct, rt),
                                     bounds, 0.0, d, d / 8, l);
        } catch (const SegmentDegenerateError&) {
            continue;  // disturbance dominated; nothing to compare
        }
        auto [c0, r0] =
            backward_interval(a, b, g, uc, ur, vc, vr, ct, rt, d);
        if (r0 <= 0.0) continue;
        CHECK(seg.start_ellipsoid().center()(0) == doctest::Approx(c0).epsilon(1e-6));
        CHECK(std::sqrt(seg.start_ellipsoid().shape()(0, 0)) ==
              doctest::Approx(r0).epsilon(1e-6));
        ++checked;
    }
    CHECK(checked >= 60);
}

TEST_CASE("tube interpolation stays between samples") {
    InputBounds bounds;
    bounds.control = interval(0.0, 1.0);
    bounds.disturbance = interval(0.0, 0.1);
    Vector l(1);
    l << 1;
    auto seg = reach_tube_segment(scalar_system(0.3, 1, 1), interval(0, 1),
                                  bounds, 0.0, 0.4, 0.1, l);
    seg.prepare_interpolation();
    for (double s : {0.0, 0.05, 0.17, 0.33, 0.4}) {
        const Ellipsoid e = seg.at(s);
        CHECK(std::isfinite(e.center()(0)));
        CHECK(e.shape()(0, 0) > 0.0);
    }
    // sample points reproduce exactly
    CHECK((seg.at(seg.grid[1]).center() - seg.centers[1]).norm() < 1e-9);
}
