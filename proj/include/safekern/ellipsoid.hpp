#pragma once

#include <Eigen/Dense>
#include <optional>

#include "safekern/errors.hpp"
#include "safekern/tolerances.hpp"

namespace safekern {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Volume of the Euclidean unit ball in R^n.
double unit_ball_volume(int n);

/// Ellipsoid E(q, Q) = { x | (x-q)' Q^{-1} (x-q) <= 1 } with symmetric
/// positive (semi)definite shape matrix Q. Degenerate (flat or point) sets
/// must be flagged explicitly at construction.
class Ellipsoid {
  public:
    /// Zero-dimensional placeholder so that aggregates holding ellipsoids
    /// are default-constructible; any geometric query on it throws.
    Ellipsoid() : center_(0), shape_(0, 0), degenerate_(true) {}

    Ellipsoid(Vector center, Matrix shape, bool allow_degenerate = false);

    /// Zero-shape (single point) ellipsoid.
    static Ellipsoid point(Vector center);

    /// Euclidean ball of radius r about c.
    static Ellipsoid ball(Vector center, double radius);

    const Vector& center() const { return center_; }
    const Matrix& shape() const { return shape_; }
    int dim() const { return static_cast<int>(center_.size()); }
    bool degenerate() const { return degenerate_; }

    /// (x-q)' Q^{-1} (x-q); throws InvalidEllipsoidError on singular shape.
    double quadratic(const Vector& x) const;

    bool contains(const Vector& x) const;

    /// Support function <l,q> + sqrt(<l,Ql>).
    double support(const Vector& l) const;

    /// Boundary point attaining the support function in direction l.
    Vector support_vector(const Vector& l) const;

    double volume() const;

    /// E(q, c^2 Q): uniform scaling about the center.
    Ellipsoid scaled(double c) const;

    /// Solve Q y = rhs through the cached Cholesky factor.
    Vector shape_solve(const Vector& rhs) const;
    Matrix shape_inverse() const;
    double min_shape_eigenvalue() const;

  private:
    Vector center_;
    Matrix shape_;
    bool degenerate_ = false;
    std::optional<Eigen::LLT<Matrix>> llt_;  // present iff shape is PD
};

/// Axis-aligned box, lower <= upper componentwise.
struct HyperRectangle {
    Vector lower;
    Vector upper;
};

/// Signed distance of x from E: Euclidean distance outside, negative distance
/// to the boundary inside. Exact, via the secular equation of the projection.
double point_ellipsoid_distance(const Vector& x, const Ellipsoid& e);

/// max over x in e of (x - q)' P (x - q), P symmetric PSD (a trust-region
/// subproblem solved by eigendecomposition plus a secular-equation search).
double max_quadratic_over_ellipsoid(const Ellipsoid& e, const Vector& q,
                                    const Matrix& P);

/// true iff inner is contained in outer (up to the containment tolerance).
bool contains_ellipsoid(const Ellipsoid& inner, const Ellipsoid& outer);

/// Large-volume ellipsoid inscribed in e1 ∩ e2, from the convex-combination
/// fusion family with volume maximized over the mixing weight. Empty when the
/// intersection is empty or lower-dimensional.
std::optional<Ellipsoid> fusion_intersect_ia(const Ellipsoid& e1,
                                             const Ellipsoid& e2);

/// Inner approximation of the erosion of e by a ball of radius r: uniform
/// scaling c = 1 - r / sqrt(lambda_min(Q)). Empty when c <= 0.
std::optional<Ellipsoid> erode_by_ball(const Ellipsoid& e, double r);

/// Maximum volume inscribed ellipsoid of an axis-aligned box: centered, with
/// semi-axes equal to the half-widths.
Ellipsoid mvie_box(const HyperRectangle& rect);

/// Upper bound on the volume lost in one fusion step:
/// min(vol(e1), vol(e2)) - vol(fused).
double error_gap_estimate(const Ellipsoid& e1, const Ellipsoid& e2,
                          const Ellipsoid& fused);

}  // namespace safekern
