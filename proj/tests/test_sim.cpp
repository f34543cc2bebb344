#include <cmath>
#include <random>

#include "doctest.h"
#include "safekern/simulate.hpp"

using namespace safekern;

namespace {

Ellipsoid interval(double center, double radius) {
    Vector c(1);
    c << center;
    Matrix s(1, 1);
    s << radius * radius;
    return Ellipsoid(c, s);
}

// Kleinman policy iteration: P_{i+1} solves the Lyapunov equation of the
// closed loop under gain_i; quadratically convergent from any stabilizing
// start. Independent of the production solver.
Matrix kleinman_gain(const Matrix& a, const Matrix& b, const Matrix& q,
                     const Matrix& r, const Matrix& gain0) {
    const int n = static_cast<int>(a.rows());
    Matrix gain = gain0;
    Matrix p = Matrix::Zero(n, n);
    for (int it = 0; it < 60; ++it) {
        const Matrix acl = a - b * gain;
        // solve acl' P + P acl = -(q + gain' r gain) by Kronecker product
        const Matrix rhs = -(q + gain.transpose() * r * gain);
        Matrix big = Matrix::Zero(n * n, n * n);
        const Matrix eye = Matrix::Identity(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    big(i * n + j, k * n + j) += acl(k, i);
                    big(i * n + j, i * n + k) += acl(k, j);
                }
        Vector vec(n * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) vec(i * n + j) = rhs(i, j);
        Vector sol = big.fullPivLu().solve(vec);
        Matrix pn(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) pn(i, j) = sol(i * n + j);
        pn = 0.5 * (pn + pn.transpose()).eval();
        const Matrix gn = r.llt().solve(b.transpose() * pn);
        if ((gn - gain).norm() < 1e-12) return gn;
        gain = gn;
        p = pn;
    }
    return gain;
}

}  // namespace

TEST_CASE("worst-case disturbance attains the support") {
    const Ellipsoid vball = Ellipsoid::ball(Vector::Zero(2), 1.0);
    Vector l(2);
    l << 1, 0;
    Vector v = worst_case_disturbance(l, Matrix::Identity(2, 2), vball);
    CHECK((v - l).norm() < 1e-12);
    CHECK(worst_case_disturbance(Vector::Zero(2), Matrix::Identity(2, 2),
                                 vball)
              .norm() == 0.0);

    Matrix g(2, 1);
    g << 1, 1;
    Vector vp = worst_case_disturbance(l, g, interval(0.0, 0.1));
    CHECK(vp(0) == doctest::Approx(0.1));

    // support attainment on random instances
    std::mt19937_64 rng(6);
    std::normal_distribution<double> gauss;
    Matrix vshape(2, 2);
    vshape << 0.5, 0.1, 0.1, 0.3;
    Vector vcenter(2);
    vcenter << 0.05, -0.02;
    const Ellipsoid vset(vcenter, vshape);
    Matrix gm(3, 2);
    gm << 1, 0, 0, 1, 1, 1;
    for (int t = 0; t < 50; ++t) {
        Vector ll(3);
        ll << gauss(rng), gauss(rng), gauss(rng);
        const Vector vv = worst_case_disturbance(ll, gm, vset);
        CHECK(vset.quadratic(vv) <= 1.0 + 1e-9);
        const double attained = ll.dot(gm * vv);
        const Vector gl = gm.transpose() * ll;
        const double support =
            gl.dot(vset.center()) + std::sqrt(gl.dot(vset.shape() * gl));
        CHECK(attained == doctest::Approx(support).epsilon(1e-10));
    }
}

TEST_CASE("input saturation") {
    const Ellipsoid uball = Ellipsoid::ball(Vector::Zero(2), 1.0);
    Vector inside(2);
    inside << 0.3, 0.2;
    CHECK((saturate(inside, uball) - inside).norm() == 0.0);
    Vector big(2);
    big << 5, 0;
    CHECK((saturate(big, uball) - (Vector(2) << 1, 0).finished()).norm() <
          1e-12);

    // UAV input set: thrust/torque box inscribed ellipsoid about the hover
    const QuadrotorModel m = quadrotor_model();
    Vector raw(4);
    raw << 10, 0, 0, 0;
    const Vector sat = saturate(raw, m.bounds.control);
    CHECK(m.bounds.control.quadratic(sat) == doctest::Approx(1.0));
    CHECK(sat(0) == doctest::Approx(2.45));  // boundary along +thrust
    CHECK(std::abs(sat(1)) < 1e-12);
}

TEST_CASE("lqr closed forms") {
    Matrix one(1, 1);
    one << 1.0;
    // scalar xdot = u, q = r = 1: p = 1, gain = 1
    const Matrix g1 = lqr_gain(Matrix::Zero(1, 1), one, one, one);
    CHECK(g1(0, 0) == doctest::Approx(1.0));

    // stable A with zero B column and q = 0: gain = 0
    Matrix astab(1, 1);
    astab << -1.0;
    const Matrix g0 =
        lqr_gain(astab, Matrix::Zero(1, 1), Matrix::Zero(1, 1), one);
    CHECK(std::abs(g0(0, 0)) < 1e-9);
}

TEST_CASE("lqr matches the policy-iteration oracle") {
    Matrix a(2, 2), b(2, 1);
    a << 0, 1, 0, 0;
    b << 0, 1;
    const Matrix q = Matrix::Identity(2, 2);
    Matrix r(1, 1);
    r << 1.0;
    const Matrix gain = lqr_gain(a, b, q, r);
    Matrix gain0(1, 2);
    gain0 << 1, 2;  // stabilizing start for the double integrator
    const Matrix oracle = kleinman_gain(a, b, q, r, gain0);
    CHECK((gain - oracle).norm() < 1e-6);

    // closed loop is stable
    const Eigen::EigenSolver<Matrix> es(a - b * gain);
    for (int i = 0; i < 2; ++i) CHECK(es.eigenvalues()(i).real() < 0.0);
}

TEST_CASE("lqr copes with badly scaled weights") {
    const QuadrotorModel m = quadrotor_model();
    const Matrix gain = lqr_gain(m.sys.A, m.sys.B, m.q_lqr, m.r_lqr);
    const Eigen::EigenSolver<Matrix> es(m.sys.A - m.sys.B * gain);
    for (int i = 0; i < 12; ++i) CHECK(es.eigenvalues()(i).real() < 1e-10);
}

TEST_CASE("lqr rejects non-stabilizable pairs") {
    Matrix a(1, 1);
    a << 1.0;  // unstable, no control authority
    Matrix one(1, 1);
    one << 1.0;
    CHECK_THROWS_AS(lqr_gain(a, Matrix::Zero(1, 1), one, one), Error);
}

TEST_CASE("quadrotor model structure") {
    const QuadrotorModel m = quadrotor_model();
    CHECK(m.sys.A.rows() == 12);
    CHECK(m.sys.A.cols() == 12);
    CHECK(m.sys.B.rows() == 12);
    CHECK(m.sys.B.cols() == 4);  // four actuators for six degrees of freedom
    CHECK(m.sys.G.rows() == 12);
    CHECK(m.sys.G.cols() == 1);
    CHECK(Eigen::FullPivLU<Matrix>(m.sys.B).rank() == 4);

    // gravity coupling of the hover linearization
    CHECK(m.sys.A(3, 7) == doctest::Approx(9.81));
    CHECK(m.sys.A(4, 6) == doctest::Approx(-9.81));
    // wind drives the three velocity states only
    for (int i = 0; i < 12; ++i) {
        CHECK(m.sys.G(i, 0) == ((i >= 3 && i <= 5) ? 1.0 : 0.0));
    }
    // position envelope: ball of radius 3 about (0, 0, 4)
    CHECK(m.constraint.center()(2) == doctest::Approx(4.0));
    CHECK(m.constraint.shape()(0, 0) == doctest::Approx(9.0));
    CHECK(m.constraint.shape()(3, 3) == doctest::Approx(25.0));
    // disturbance: wind uniform over [0, 0.1]
    CHECK(m.bounds.disturbance.center()(0) == doctest::Approx(0.05));
    CHECK(std::sqrt(m.bounds.disturbance.shape()(0, 0)) ==
          doctest::Approx(0.05));
    CHECK(m.constraint.contains(m.x0));
}

TEST_CASE("policy constructors validate") {
    CHECK_THROWS_AS(DisturbancePolicy::adversarial_switching(0, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(DisturbancePolicy::fixed({}), std::invalid_argument);
    CHECK_THROWS_AS(PerfPolicy::fixed({}), std::invalid_argument);
}

TEST_CASE("rk4 reproduces the closed-form scalar flow") {
    // xdot = -x + u with constant u = 1 from x0 = 0: x(t) = 1 - e^{-t}.
    LtiSystem sys{(Matrix(1, 1) << -1.0).finished(),
                  (Matrix(1, 1) << 1.0).finished(), Matrix::Zero(1, 1)};
    KernelApprox approx;
    approx.sys = sys;
    approx.bounds.control = interval(0.0, 2.0);
    approx.bounds.disturbance = Ellipsoid::point(Vector::Zero(1));
    approx.constraint = interval(0.0, 10.0);
    approx.eroded = approx.constraint;
    approx.partition = make_uniform_partition(1.0, 1);
    ControllerConfig cfg;
    cfg.enabled = false;  // open loop: perf input passes through
    auto traj = simulate_closed_loop(
        sys, approx, cfg, PerfPolicy::constant((Vector(1) << 1.0).finished()),
        DisturbancePolicy::none(), Vector::Zero(1), 1.0, 1e-3);
    const double expect = 1.0 - std::exp(-1.0);
    CHECK(traj.states.back()(0) == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("simulation is deterministic under a fixed seed") {
    LtiSystem sys{(Matrix(1, 1) << 0.0).finished(),
                  (Matrix(1, 1) << 1.0).finished(),
                  (Matrix(1, 1) << 1.0).finished()};
    KernelApprox approx;
    approx.sys = sys;
    approx.bounds.control = interval(0.0, 1.0);
    approx.bounds.disturbance = interval(0.0, 0.1);
    approx.constraint = interval(0.0, 2.0);
    approx.eroded = approx.constraint;
    approx.partition = make_uniform_partition(1.0, 1);
    ControllerConfig cfg;
    cfg.enabled = false;
    auto run = [&]() {
        return simulate_closed_loop(
            sys, approx, cfg,
            PerfPolicy::constant((Vector(1) << 0.2).finished()),
            DisturbancePolicy::uniform_random(42), Vector::Zero(1), 0.5,
            1e-3);
    };
    auto t1 = run();
    auto t2 = run();
    REQUIRE(t1.states.size() == t2.states.size());
    for (std::size_t i = 0; i < t1.states.size(); ++i) {
        CHECK((t1.states[i] - t2.states[i]).norm() == 0.0);
    }
    for (std::size_t i = 0; i < t1.disturbances.size(); ++i) {
        CHECK(approx.bounds.disturbance.quadratic(t1.disturbances[i]) <=
              1.0 + 1e-9);
    }
}
