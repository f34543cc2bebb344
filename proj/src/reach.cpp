#include "safekern/reach.hpp"

#include <cmath>
#include <random>

#include "safekern/matrix_exp.hpp"

namespace safekern {

DirectionSet DirectionSet::random(int dim, int count, std::uint64_t seed,
                                  bool include_axes) {
    if (dim <= 0 || count < 0) {
        throw std::invalid_argument("DirectionSet: bad dimensions");
    }
    DirectionSet out;
    out.seed = seed;
    if (include_axes) {
        for (int i = 0; i < dim; ++i) {
            Vector e = Vector::Zero(dim);
            e(i) = 1.0;
            out.directions.push_back(e);
            out.directions.push_back(-e);
        }
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    while (static_cast<int>(out.directions.size()) <
           count + (include_axes ? 2 * dim : 0)) {
        Vector v(dim);
        for (int i = 0; i < dim; ++i) v(i) = gauss(rng);
        const double n = v.norm();
        if (n < 1e-8) continue;
        out.directions.push_back(v / n);
    }
    if (out.directions.empty()) {
        throw std::invalid_argument("DirectionSet: empty");
    }
    return out;
}

std::vector<Vector> adjoint_directions(const Matrix& a, const Vector& l_end,
                                       const std::vector<double>& grid,
                                       double t_end) {
    std::vector<Vector> out;
    out.reserve(grid.size());
    for (double t : grid) {
        out.push_back(matrix_exponential(a.transpose(), t_end - t) * l_end);
    }
    return out;
}

Matrix spd_log(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    if (es.eigenvalues().minCoeff() <= 0.0) {
        throw InvalidEllipsoidError("spd_log: matrix not PD");
    }
    return es.eigenvectors() *
           es.eigenvalues().array().log().matrix().asDiagonal() *
           es.eigenvectors().transpose();
}

Matrix spd_exp(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    return es.eigenvectors() *
           es.eigenvalues().array().exp().matrix().asDiagonal() *
           es.eigenvectors().transpose();
}

void ReachSegment::prepare_interpolation() const {
    if (!log_shapes_.empty()) return;
    log_shapes_.reserve(shapes.size());
    for (const Matrix& s : shapes) log_shapes_.push_back(spd_log(s));
}

namespace {

std::pair<int, double> locate(const std::vector<double>& grid, double sigma) {
    const double lo = grid.front(), hi = grid.back();
    const double slack = 1e-9 * std::max(1.0, std::abs(hi));
    if (sigma < lo - slack || sigma > hi + slack) {
        throw std::invalid_argument("ReachSegment: sigma outside interval");
    }
    const double s = std::clamp(sigma, lo, hi);
    int i = static_cast<int>(
        std::upper_bound(grid.begin(), grid.end(), s) - grid.begin());
    i = std::clamp(i, 1, static_cast<int>(grid.size()) - 1);
    const double w = (s - grid[i - 1]) / (grid[i] - grid[i - 1]);
    return {i, std::clamp(w, 0.0, 1.0)};
}

}  // namespace

Ellipsoid ReachSegment::at(double sigma) const {
    prepare_interpolation();
    auto [i, w] = locate(grid, sigma);
    if (w == 0.0) return Ellipsoid(centers[i - 1], shapes[i - 1]);
    if (w == 1.0) return Ellipsoid(centers[i], shapes[i]);
    const Vector c = (1.0 - w) * centers[i - 1] + w * centers[i];
    const Matrix s =
        spd_exp((1.0 - w) * log_shapes_[i - 1] + w * log_shapes_[i]);
    return Ellipsoid(c, s);
}

Vector ReachSegment::direction_at(double sigma) const {
    auto [i, w] = locate(grid, sigma);
    Vector l = (1.0 - w) * ell[i - 1] + w * ell[i];
    const double n = l.norm();
    return n > 0.0 ? Vector(l / n) : l;
}

namespace {

// Orthogonal matrix mapping unit vector u onto unit vector w.
Matrix align_rotation(const Vector& u, const Vector& w) {
    const int n = static_cast<int>(u.size());
    Vector z = u + w;
    if (z.norm() < 1e-8) {
        return Matrix::Identity(n, n) - 2.0 * u * u.transpose();
    }
    z.normalize();
    const Matrix hz = Matrix::Identity(n, n) - 2.0 * z * z.transpose();
    const Matrix hw = Matrix::Identity(n, n) - 2.0 * w * w.transpose();
    return hw * hz;  // maps u -> w
}

Matrix sym_sqrt_psd(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    return es.eigenvectors() *
           es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
           es.eigenvectors().transpose();
}

}  // namespace

ReachSegment reach_tube_segment(const LtiSystem& sys, const Ellipsoid& target,
                                const InputBounds& bounds, double t_begin,
                                double t_end, double step,
                                const Vector& l_terminal, int direction_id) {
    sys.validate();
    const double delta = t_end - t_begin;
    if (delta <= 0.0 || step <= 0.0) {
        throw std::invalid_argument("reach_tube_segment: bad interval");
    }
    const int nsteps = static_cast<int>(std::lround(delta / step));
    if (nsteps < 1 || std::abs(nsteps * step - delta) > 1e-9 * delta) {
        throw std::invalid_argument(
            "reach_tube_segment: step does not divide the interval");
    }
    const int n = sys.state_dim();
    Vector l = l_terminal;
    if (l.norm() == 0.0) {
        throw std::invalid_argument("reach_tube_segment: zero direction");
    }
    l.normalize();

    const Matrix phi = matrix_exponential(sys.A, step);
    const Matrix phi_inv = matrix_exponential(sys.A, -step);
    const Matrix phi1 = matrix_exponential_integral(sys.A, step);
    const bool has_dist = !bounds.disturbance_free();

    // Backward accumulation in terminal-aligned coordinates
    // y = exp(A (t_end - t)) x: the control enters as an internal
    // Minkowski-sum approximation tight along the (constant) direction l,
    // the disturbance as a geometric-difference correction.
    Vector yc = target.center();
    Matrix yshape = target.shape();

    ReachSegment seg;
    seg.direction_id = direction_id;
    seg.terminal_direction = l;
    seg.t_begin = t_begin;
    seg.t_end = t_end;
    seg.grid.resize(nsteps + 1);
    seg.centers.resize(nsteps + 1);
    seg.shapes.resize(nsteps + 1);
    seg.ell.resize(nsteps + 1);
    seg.grid[nsteps] = t_end;
    seg.centers[nsteps] = target.center();
    seg.shapes[nsteps] = target.shape();
    seg.ell[nsteps] = l;

    Matrix fwd = Matrix::Identity(n, n);   // exp(A (j-1) step)
    Matrix bwd = Matrix::Identity(n, n);   // exp(-A j step), after update
    for (int j = 1; j <= nsteps; ++j) {
        const double t_sample = t_end - j * step;
        const Matrix psi = fwd * phi1;  // integral of exp(A s) over the step

        if (has_dist) {
            const Matrix gd = psi * sys.G;
            const Matrix qd =
                gd * bounds.disturbance.shape() * gd.transpose();
            yc -= gd * bounds.disturbance.center();
            const double a = l.dot(yshape * l);
            const double b = l.dot(qd * l);
            if (b > 0.0) {
                if (a <= b * (1.0 + 1e-12)) {
                    throw SegmentDegenerateError(
                        "reach_tube_segment: disturbance dominates control",
                        t_sample);
                }
                const double p = std::sqrt(a / b);
                yshape = ((1.0 - 1.0 / p) * yshape + (1.0 - p) * qd).eval();
                yshape = 0.5 * (yshape + yshape.transpose()).eval();
            }
        }

        const Matrix bu = psi * sys.B;
        const Matrix qc = bu * bounds.control.shape() * bu.transpose();
        yc -= bu * bounds.control.center();
        const Matrix t1 = sym_sqrt_psd(yshape);
        const Matrix t2 = sym_sqrt_psd(qc);
        const Vector v1 = t1 * l;
        const Vector v2 = t2 * l;
        Matrix root;
        if (v2.norm() < 1e-14 * std::max(1.0, t2.cwiseAbs().maxCoeff())) {
            root = t1 + t2;
        } else if (v1.norm() < 1e-14) {
            root = t1 + t2;
        } else {
            const Matrix s = align_rotation((v2 / v2.norm()).eval(),
                                            (v1 / v1.norm()).eval());
            root = t1 + s * t2;
        }
        yshape = (root.transpose() * root).eval();
        yshape = 0.5 * (yshape + yshape.transpose()).eval();

        Eigen::LLT<Matrix> llt(yshape);
        if (llt.info() != Eigen::Success) {
            throw SegmentDegenerateError(
                "reach_tube_segment: shape lost positive definiteness",
                t_sample);
        }

        fwd = (fwd * phi).eval();  // now exp(A j step)
        bwd = (bwd * phi_inv).eval();
        const int idx = nsteps - j;
        seg.grid[idx] = t_sample;
        seg.centers[idx] = bwd * yc;
        Matrix xs = bwd * yshape * bwd.transpose();
        seg.shapes[idx] = 0.5 * (xs + xs.transpose());
        seg.ell[idx] = fwd.transpose() * l;
    }
    return seg;
}

double dynamics_bound(const LtiSystem& sys, const Ellipsoid& k,
                      const InputBounds& bounds) {
    auto top_sv = [](const Matrix& m, const Matrix& q) {
        const Matrix s = m * q * m.transpose();
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()));
        return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
    };
    double m = 0.0;
    m += (sys.A * k.center()).norm() + top_sv(sys.A, k.shape());
    m += (sys.B * bounds.control.center()).norm() +
         top_sv(sys.B, bounds.control.shape());
    m += (sys.G * bounds.disturbance.center()).norm() +
         top_sv(sys.G, bounds.disturbance.shape());
    return m;
}

}  // namespace safekern
