#pragma once

#include "safekern/lti.hpp"

namespace safekern {

/// Adjoint direction curve l(t) = exp(A'(t_end - t)) l_end, sampled on grid.
std::vector<Vector> adjoint_directions(const Matrix& a, const Vector& l_end,
                                       const std::vector<double>& grid,
                                       double t_end);

/// One terminal direction's internally-approximating robust backward reach
/// tube over a single partition sub-interval [t_begin, t_end]. Samples are
/// stored on an ascending grid; the last sample equals the target ellipsoid.
struct ReachSegment {
    int direction_id = -1;
    Vector terminal_direction;  // adjoint direction at t_end, unit norm
    double t_begin = 0.0;
    double t_end = 0.0;
    std::vector<double> grid;
    std::vector<Vector> ell;      // adjoint direction at each sample
    std::vector<Vector> centers;
    std::vector<Matrix> shapes;

    const Vector& start_center() const { return centers.front(); }
    Ellipsoid start_ellipsoid() const {
        return Ellipsoid(centers.front(), shapes.front());
    }
    Ellipsoid terminal_ellipsoid() const {
        return Ellipsoid(centers.back(), shapes.back());
    }

    /// Tube ellipsoid at pseudo-time sigma in [t_begin, t_end]: linear
    /// interpolation of centers, log-Euclidean interpolation of shapes.
    Ellipsoid at(double sigma) const;

    /// Adjoint direction at sigma (piecewise-linear, renormalized).
    Vector direction_at(double sigma) const;

    /// Precompute matrix logs of the shape samples (called automatically by
    /// at() on first use; call explicitly before sharing across threads).
    void prepare_interpolation() const;

  private:
    mutable std::vector<Matrix> log_shapes_;
};

/// Internal ellipsoidal approximation of the robust maximal backward
/// reachable tube for the target over [t_begin, t_end], tight along the
/// adjoint curve of l_terminal (the direction at t_end). step must divide
/// the interval length. Throws SegmentDegenerateError when the disturbance
/// dominates and the shape loses positive definiteness.
ReachSegment reach_tube_segment(const LtiSystem& sys, const Ellipsoid& target,
                                const InputBounds& bounds, double t_begin,
                                double t_end, double step,
                                const Vector& l_terminal,
                                int direction_id = -1);

/// Upper bound M on sup ||Ax + Bu + Gv|| over K x U x V.
double dynamics_bound(const LtiSystem& sys, const Ellipsoid& k,
                      const InputBounds& bounds);

/// Matrix log / exp for symmetric positive definite matrices.
Matrix spd_log(const Matrix& m);
Matrix spd_exp(const Matrix& m);

}  // namespace safekern
