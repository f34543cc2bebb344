#include <cmath>
#include <random>

#include "doctest.h"
#include "safekern/ellipsoid.hpp"
#include "safekern/matrix_exp.hpp"

using namespace safekern;

namespace {

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

Matrix diag2(double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

Ellipsoid random_ellipsoid(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif(0.3, 2.5);
    Matrix a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = gauss(rng);
    Matrix shape = a * a.transpose() + unif(rng) * Matrix::Identity(dim, dim);
    Vector c(dim);
    for (int i = 0; i < dim; ++i) c(i) = gauss(rng);
    return Ellipsoid(c, shape);
}

Vector boundary_sample(const Ellipsoid& e, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    Vector w(e.dim());
    for (int i = 0; i < e.dim(); ++i) w(i) = gauss(rng);
    w.normalize();
    return e.support_vector(w);
}

}  // namespace

TEST_CASE("membership quadratic") {
    const Ellipsoid ball = Ellipsoid::ball(Vector::Zero(2), 1.0);
    CHECK(ball.contains(Vector::Zero(2)));
    CHECK(ball.contains(vec2(1, 0)));  // boundary counts
    CHECK(!ball.contains(vec2(1.001, 0)));

    const Ellipsoid k(Vector::Zero(2), diag2(0.25, 4.0));
    CHECK(k.quadratic(vec2(0.3, -0.7)) == doctest::Approx(0.4825));
    CHECK(k.contains(vec2(0.3, -0.7)));
}

TEST_CASE("degenerate shape must be flagged") {
    CHECK_THROWS_AS(Ellipsoid(Vector::Zero(2), diag2(1.0, 0.0)),
                    InvalidEllipsoidError);
    const Ellipsoid flat(Vector::Zero(2), diag2(1.0, 0.0), true);
    CHECK(flat.degenerate());
    CHECK_THROWS_AS(flat.quadratic(vec2(0, 0)), InvalidEllipsoidError);
}

TEST_CASE("support function and vector") {
    const Ellipsoid ball = Ellipsoid::ball(Vector::Zero(2), 1.0);
    CHECK(ball.support(vec2(1, 0)) == doctest::Approx(1.0));
    CHECK(ball.support(Vector::Zero(2)) == doctest::Approx(0.0));

    const Ellipsoid k(Vector::Zero(2), diag2(0.25, 4.0));
    CHECK(k.support(vec2(0, 1)) == doctest::Approx(2.0));
    CHECK((k.support_vector(vec2(1, 0)) - vec2(0.5, 0)).norm() < 1e-12);

    // scale invariance of the support vector
    CHECK((ball.support_vector(vec2(2, 0)) - vec2(1, 0)).norm() < 1e-12);

    // homogeneity of the support function
    CHECK(k.support(vec2(3, -5)) == doctest::Approx(3.0 * k.support(vec2(1, -5.0 / 3))));
}

TEST_CASE("point-ellipsoid distance") {
    const Ellipsoid ball = Ellipsoid::ball(Vector::Zero(2), 1.0);
    CHECK(point_ellipsoid_distance(vec2(2, 0), ball) == doctest::Approx(1.0));
    CHECK(point_ellipsoid_distance(Vector::Zero(2), ball) ==
          doctest::Approx(-1.0));
    const Ellipsoid e(Vector::Zero(2), diag2(4.0, 1.0));
    CHECK(point_ellipsoid_distance(vec2(3, 0), e) == doctest::Approx(1.0));
}

TEST_CASE("distance agrees with brute-force boundary search") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 50; ++trial) {
        const Ellipsoid e = random_ellipsoid(3, rng);
        Vector x(3);
        for (int i = 0; i < 3; ++i) x(i) = 3.0 * gauss(rng);
        // coarse sampling of boundary normals, then a local stochastic
        // refinement of the best one
        double brute = std::numeric_limits<double>::infinity();
        Vector wbest(3);
        for (int s = 0; s < 2000; ++s) {
            Vector w(3);
            for (int i = 0; i < 3; ++i) w(i) = gauss(rng);
            w.normalize();
            const double v = (x - e.support_vector(w)).norm();
            if (v < brute) {
                brute = v;
                wbest = w;
            }
        }
        double step = 0.3;
        for (int s = 0; s < 4000; ++s) {
            Vector w = wbest;
            for (int i = 0; i < 3; ++i) w(i) += step * gauss(rng);
            w.normalize();
            const double v = (x - e.support_vector(w)).norm();
            if (v < brute) {
                brute = v;
                wbest = w;
            }
            step = std::max(1e-5, step * 0.999);
        }
        const double d = point_ellipsoid_distance(x, e);
        // the sampled minimum is always an upper bound on |distance|
        CHECK(std::abs(d) <= brute + 1e-9);
        CHECK(std::abs(d) >= brute - 5e-3 * (1.0 + brute));
    }
}

TEST_CASE("ellipsoid containment") {
    const Ellipsoid ball = Ellipsoid::ball(Vector::Zero(2), 1.0);
    CHECK(contains_ellipsoid(ball.scaled(0.5), ball));
    CHECK(!contains_ellipsoid(ball, ball.scaled(0.5)));
    // touching from inside
    const Ellipsoid inner(vec2(0.5, 0), diag2(0.25, 0.25));
    CHECK(contains_ellipsoid(inner, ball));
    const Ellipsoid poking(vec2(0.51, 0), diag2(0.25, 0.25));
    CHECK(!contains_ellipsoid(poking, ball));
}

TEST_CASE("max quadratic over ellipsoid") {
    const Ellipsoid ball = Ellipsoid::ball(Vector::Zero(2), 1.0);
    // max over unit ball of x' diag(4,1) x = 4 at (+-1, 0)
    CHECK(max_quadratic_over_ellipsoid(ball, Vector::Zero(2), diag2(4, 1)) ==
          doctest::Approx(4.0));
    // shifted: max (x - (2,0))' I (x - (2,0)) over unit ball = 9
    CHECK(max_quadratic_over_ellipsoid(ball, vec2(2, 0), diag2(1, 1)) ==
          doctest::Approx(9.0));
}

TEST_CASE("fusion basic cases") {
    const Ellipsoid ball = Ellipsoid::ball(Vector::Zero(2), 1.0);
    auto same = fusion_intersect_ia(ball, ball);
    REQUIRE(same.has_value());
    CHECK(same->volume() == doctest::Approx(ball.volume()).epsilon(1e-6));

    auto nested = fusion_intersect_ia(ball, ball.scaled(2.0));
    REQUIRE(nested.has_value());
    CHECK(nested->volume() == doctest::Approx(ball.volume()).epsilon(1e-6));

    auto empty = fusion_intersect_ia(
        Ellipsoid::ball(vec2(5, 0), 1.0), Ellipsoid::ball(vec2(-5, 0), 1.0));
    CHECK(!empty.has_value());
}

TEST_CASE("fusion of offset balls stays inside both") {
    const Ellipsoid e1 = Ellipsoid::ball(vec2(-0.5, 0), 1.0);
    const Ellipsoid e2 = Ellipsoid::ball(vec2(0.5, 0), 1.0);
    auto fused = fusion_intersect_ia(e1, e2);
    REQUIRE(fused.has_value());
    std::mt19937_64 rng(3);
    for (int s = 0; s < 10000; ++s) {
        const Vector x = boundary_sample(*fused, rng);
        CHECK(e1.quadratic(x) <= 1.0 + 1e-7);
        CHECK(e2.quadratic(x) <= 1.0 + 1e-7);
    }
    // lens volume upper bound (two unit-circle caps of half-angle pi/3)
    const double lens = 2.0 * (M_PI / 3 - std::sin(M_PI / 3) * 0.5);
    CHECK(fused->volume() <= lens + 1e-9);
    CHECK(fused->volume() > 0.5 * lens);
}

TEST_CASE("1-D fusion is exact interval intersection") {
    Vector c1(1), c2(1);
    c1 << 0.0;
    c2 << 1.5;
    Matrix s1(1, 1), s2(1, 1);
    s1 << 1.0;   // [-1, 1]
    s2 << 1.0;   // [0.5, 2.5]
    auto f = fusion_intersect_ia(Ellipsoid(c1, s1), Ellipsoid(c2, s2));
    REQUIRE(f.has_value());
    CHECK(f->center()(0) == doctest::Approx(0.75));
    CHECK(std::sqrt(f->shape()(0, 0)) == doctest::Approx(0.25));
}

TEST_CASE("erosion") {
    const Ellipsoid ball = Ellipsoid::ball(Vector::Zero(2), 1.0);
    auto half = erode_by_ball(ball, 0.5);
    REQUIRE(half.has_value());
    CHECK(half->shape()(0, 0) == doctest::Approx(0.25));
    auto same = erode_by_ball(ball, 0.0);
    CHECK(same->shape()(0, 0) == doctest::Approx(1.0));
    const Ellipsoid k(Vector::Zero(2), diag2(0.25, 4.0));
    auto shrunk = erode_by_ball(k, 0.1);
    REQUIRE(shrunk.has_value());
    CHECK(shrunk->shape()(0, 0) == doctest::Approx(0.16));
    CHECK(shrunk->shape()(1, 1) == doctest::Approx(2.56));
    CHECK(!erode_by_ball(ball, 1.0).has_value());
    CHECK_THROWS_AS(erode_by_ball(ball, -0.1), std::invalid_argument);
}

TEST_CASE("volume") {
    CHECK(Ellipsoid::ball(Vector::Zero(2), 1.0).volume() ==
          doctest::Approx(M_PI));
    CHECK(Ellipsoid(Vector::Zero(2), diag2(0.25, 4.0)).volume() ==
          doctest::Approx(M_PI));
    CHECK(Ellipsoid::point(Vector::Zero(3)).volume() == doctest::Approx(0.0));
}

TEST_CASE("inscribed ellipsoid of a box") {
    HyperRectangle unit;
    unit.lower = vec2(-1, -1);
    unit.upper = vec2(1, 1);
    const Ellipsoid b = mvie_box(unit);
    CHECK((b.center() - Vector::Zero(2)).norm() < 1e-12);
    CHECK(b.shape()(0, 0) == doctest::Approx(1.0));

    HyperRectangle u;  // thrust x torque box of the UAV study
    u.lower = Vector(4);
    u.upper = Vector(4);
    u.lower << 0.5, -0.5, -0.5, -0.5;
    u.upper << 5.4, 0.5, 0.5, 0.5;
    const Ellipsoid ue = mvie_box(u);
    CHECK(ue.center()(0) == doctest::Approx(2.95));
    CHECK(ue.shape()(0, 0) == doctest::Approx(2.45 * 2.45));
    CHECK(ue.shape()(1, 1) == doctest::Approx(0.25));

    HyperRectangle r;
    r.lower = vec2(0, 0);
    r.upper = vec2(2, 4);
    const Ellipsoid re = mvie_box(r);
    CHECK(re.center()(0) == doctest::Approx(1.0));
    CHECK(re.center()(1) == doctest::Approx(2.0));
    CHECK(re.shape()(0, 0) == doctest::Approx(1.0));
    CHECK(re.shape()(1, 1) == doctest::Approx(4.0));
}

TEST_CASE("error gap is a nonnegative volume bound") {
    const Ellipsoid e1 = Ellipsoid::ball(vec2(-0.5, 0), 1.0);
    const Ellipsoid e2 = Ellipsoid::ball(vec2(0.5, 0), 1.0);
    auto fused = fusion_intersect_ia(e1, e2);
    REQUIRE(fused.has_value());
    CHECK(error_gap_estimate(e1, e2, *fused) >= 0.0);
}

TEST_CASE("matrix exponential") {
    CHECK((matrix_exponential(Matrix::Zero(3, 3), 2.0) -
           Matrix::Identity(3, 3))
              .norm() < 1e-14);
    Matrix nil(2, 2);
    nil << 0, 1, 0, 0;
    Matrix expect(2, 2);
    expect << 1, 1, 0, 1;
    CHECK((matrix_exponential(nil, 1.0) - expect).norm() < 1e-14);
    Matrix rot(2, 2);
    rot << 0, 2, -2, 0;
    Matrix quarter(2, 2);
    quarter << 0, 1, -1, 0;
    CHECK((matrix_exponential(rot, M_PI / 4) - quarter).norm() < 1e-12);
}

TEST_CASE("matrix exponential integral identity") {
    Matrix a(2, 2);
    a << 0.3, 1.0, -0.7, 0.2;
    const double h = 0.37;
    // A * int_0^h e^{As} ds = e^{Ah} - I
    const Matrix lhs = a * matrix_exponential_integral(a, h);
    const Matrix rhs = matrix_exponential(a, h) - Matrix::Identity(2, 2);
    CHECK((lhs - rhs).norm() < 1e-12);
}

TEST_CASE("randomized geometry invariants") {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> gauss;
    std::uniform_int_distribution<int> dims(1, 4);
    int fusions = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = dims(rng);
        const Ellipsoid e1 = random_ellipsoid(n, rng);
        const Ellipsoid e2 = random_ellipsoid(n, rng);

        // fusion containment + volume bound
        auto fused = fusion_intersect_ia(e1, e2);
        if (fused) {
            ++fusions;
            for (int s = 0; s < 60; ++s) {
                const Vector x = boundary_sample(*fused, rng);
                CHECK(e1.quadratic(x) <= 1.0 + 1e-6);
                CHECK(e2.quadratic(x) <= 1.0 + 1e-6);
            }
            CHECK(fused->volume() <=
                  std::min(e1.volume(), e2.volume()) * (1.0 + 1e-9));
        }

        // erosion guarantee: eroded + r-ball inside original (support check)
        const double r = 0.2;
        auto er = erode_by_ball(e1, r);
        if (er) {
            for (int s = 0; s < 30; ++s) {
                Vector l(n);
                for (int i = 0; i < n; ++i) l(i) = gauss(rng);
                l.normalize();
                CHECK(er->support(l) + r <= e1.support(l) + 1e-9);
            }
        }

        // containment test vs sampling
        const bool inside = contains_ellipsoid(e2, e1);
        bool sampled_inside = true;
        for (int s = 0; s < 200; ++s) {
            if (e1.quadratic(boundary_sample(e2, rng)) > 1.0 + 1e-6) {
                sampled_inside = false;
                break;
            }
        }
        if (inside) CHECK(sampled_inside);
    }
    CHECK(fusions > 20);  // the generator must exercise the nontrivial path
}
