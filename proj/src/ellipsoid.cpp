#include "safekern/ellipsoid.hpp"

#include <cmath>
#include <limits>

namespace safekern {

namespace {

// Maximize w'diag(lam)w + 2 beta'w over ||w|| <= 1, lam entries >= 0.
// Stationarity gives w_i = beta_i / (nu - lam_i) with nu >= max(lam); nu is
// pinned down by the secular equation sum beta_i^2/(nu-lam_i)^2 = 1.
// When wout is non-null it receives the maximizer.
double trs_sphere_max(const Vector& lam, const Vector& beta,
                      Vector* wout = nullptr) {
    const int n = static_cast<int>(lam.size());
    if (n == 0) return 0.0;
    const double lmax = lam.maxCoeff();
    const double scale =
        std::max(1.0, lam.cwiseAbs().maxCoeff() + beta.cwiseAbs().sum());

    auto secular = [&](double nu) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d = nu - lam(i);
            s += beta(i) * beta(i) / (d * d);
        }
        return s;
    };
    auto value_at = [&](double nu) {
        double f = 0.0;
        for (int i = 0; i < n; ++i) {
            const double w = beta(i) / (nu - lam(i));
            f += lam(i) * w * w + 2.0 * beta(i) * w;
        }
        return f;
    };

    const double edge = lmax + 1e-14 * scale;
    if (beta.cwiseAbs().maxCoeff() > 0.0 && secular(edge) >= 1.0) {
        double lo = edge;
        double hi = lmax + beta.norm() + 1e-12 * scale;
        while (secular(hi) > 1.0) hi = lmax + 2.0 * (hi - lmax) + scale * 1e-12;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (secular(mid) > 1.0 ? lo : hi) = mid;
        }
        const double nu = 0.5 * (lo + hi);
        if (wout) {
            wout->resize(n);
            for (int i = 0; i < n; ++i) (*wout)(i) = beta(i) / (nu - lam(i));
        }
        return value_at(nu);
    }

    // Hard case: nu = lmax; residual norm is placed in the top eigenspace.
    const double gap_tol = 1e-12 * scale;
    double f = 0.0, used = 0.0, btop = 0.0;
    int top = -1;
    Vector w = Vector::Zero(n);
    for (int i = 0; i < n; ++i) {
        const double d = lmax - lam(i);
        if (d <= gap_tol) {
            btop += std::abs(beta(i));
            if (top < 0) top = i;
            continue;
        }
        w(i) = beta(i) / (lmax - lam(i));
        f += lam(i) * w(i) * w(i) + 2.0 * beta(i) * w(i);
        used += w(i) * w(i);
    }
    const double s = std::sqrt(std::max(0.0, 1.0 - used));
    f += lmax * s * s + 2.0 * btop * s;
    if (wout) {
        if (top >= 0) w(top) = beta(top) >= 0.0 ? s : -s;
        *wout = w;
    }
    return f;
}

Matrix sym_sqrt(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    Vector d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double unit_ball_volume(int n) {
    return std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

Ellipsoid::Ellipsoid(Vector center, Matrix shape, bool allow_degenerate)
    : center_(std::move(center)), shape_(std::move(shape)),
      degenerate_(false) {
    if (shape_.rows() != shape_.cols() || shape_.rows() != center_.size() ||
        center_.size() == 0) {
        throw InvalidEllipsoidError("Ellipsoid: inconsistent dimensions");
    }
    if (!shape_.allFinite() || !center_.allFinite()) {
        throw InvalidEllipsoidError("Ellipsoid: non-finite entries");
    }
    const double mag = std::max(1e-300, shape_.cwiseAbs().maxCoeff());
    const double asym = (shape_ - shape_.transpose()).cwiseAbs().maxCoeff();
    if (asym > tol().symmetry * std::max(1.0, mag)) {
        throw InvalidEllipsoidError("Ellipsoid: shape matrix not symmetric");
    }
    shape_ = 0.5 * (shape_ + shape_.transpose()).eval();

    Eigen::LLT<Matrix> llt(shape_);
    if (llt.info() == Eigen::Success &&
        shape_.diagonal().minCoeff() > 0.0) {
        llt_ = std::move(llt);
        return;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(shape_);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin < -1e-10 * std::max(1.0, mag)) {
        throw InvalidEllipsoidError("Ellipsoid: shape matrix not PSD");
    }
    if (!allow_degenerate) {
        throw InvalidEllipsoidError(
            "Ellipsoid: singular shape without degenerate flag");
    }
    degenerate_ = true;
}

Ellipsoid Ellipsoid::point(Vector center) {
    const auto n = center.size();
    return Ellipsoid(std::move(center), Matrix::Zero(n, n), true);
}

Ellipsoid Ellipsoid::ball(Vector center, double radius) {
    const auto n = center.size();
    return Ellipsoid(std::move(center),
                     radius * radius * Matrix::Identity(n, n), radius == 0.0);
}

double Ellipsoid::quadratic(const Vector& x) const {
    if (x.size() != center_.size()) {
        throw InvalidEllipsoidError("quadratic: dimension mismatch");
    }
    if (!llt_) {
        throw InvalidEllipsoidError("quadratic: singular shape matrix");
    }
    const Vector d = x - center_;
    return d.dot(llt_->solve(d));
}

bool Ellipsoid::contains(const Vector& x) const {
    if (!degenerate_) return quadratic(x) <= 1.0 + tol().membership;
    // Degenerate set: deviation along null directions must vanish.
    Eigen::SelfAdjointEigenSolver<Matrix> es(shape_);
    const Vector d = es.eigenvectors().transpose() * (x - center_);
    const double mag = std::max(1.0, shape_.cwiseAbs().maxCoeff());
    double q = 0.0;
    for (int i = 0; i < d.size(); ++i) {
        const double lam = es.eigenvalues()(i);
        if (lam <= 1e-12 * mag) {
            if (std::abs(d(i)) > 1e-8 * std::sqrt(mag)) return false;
        } else {
            q += d(i) * d(i) / lam;
        }
    }
    return q <= 1.0 + tol().membership;
}

double Ellipsoid::support(const Vector& l) const {
    return l.dot(center_) + std::sqrt(std::max(0.0, l.dot(shape_ * l)));
}

Vector Ellipsoid::support_vector(const Vector& l) const {
    const Vector Ql = shape_ * l;
    const double lQl = l.dot(Ql);
    if (lQl <= 0.0 ||
        std::sqrt(lQl) <= 1e-150 * std::max(1.0, l.norm())) {
        throw DegenerateDirectionError(
            "support_vector: direction in null space of the shape matrix");
    }
    return center_ + Ql / std::sqrt(lQl);
}

double Ellipsoid::volume() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(shape_);
    double half_log_det = 0.0;
    for (int i = 0; i < dim(); ++i) {
        const double lam = es.eigenvalues()(i);
        if (lam <= 0.0) return 0.0;
        half_log_det += 0.5 * std::log(lam);
    }
    return unit_ball_volume(dim()) * std::exp(half_log_det);
}

Ellipsoid Ellipsoid::scaled(double c) const {
    return Ellipsoid(center_, c * c * shape_, degenerate_ || c == 0.0);
}

Vector Ellipsoid::shape_solve(const Vector& rhs) const {
    if (!llt_) throw InvalidEllipsoidError("shape_solve: singular shape");
    return llt_->solve(rhs);
}

Matrix Ellipsoid::shape_inverse() const {
    if (!llt_) throw InvalidEllipsoidError("shape_inverse: singular shape");
    Matrix inv = llt_->solve(Matrix::Identity(dim(), dim()));
    return 0.5 * (inv + inv.transpose());
}

double Ellipsoid::min_shape_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(shape_);
    return es.eigenvalues().minCoeff();
}

double point_ellipsoid_distance(const Vector& x, const Ellipsoid& e) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(e.shape());
    const Vector D = es.eigenvalues();
    const double dmin = D.minCoeff();
    if (dmin <= 0.0) {
        throw InvalidEllipsoidError("point_ellipsoid_distance: shape not PD");
    }
    const Vector d = es.eigenvectors().transpose() * (x - e.center());
    const int n = static_cast<int>(d.size());
    const double dmax = D.maxCoeff();

    if (d.cwiseAbs().maxCoeff() <= 1e-300) return -std::sqrt(dmin);

    // Projection onto the boundary: z_i = d_i D_i / (D_i + theta) with
    // sum z_i^2 / D_i = 1; g is strictly decreasing on (-dmin, inf).
    auto g = [&](double theta) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            const double t = D(i) + theta;
            s += d(i) * d(i) * D(i) / (t * t);
        }
        return s;
    };
    auto dist_at = [&](double theta) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            const double diff = d(i) * theta / (D(i) + theta);
            s += diff * diff;
        }
        return std::sqrt(s);
    };

    const double lo0 = -dmin * (1.0 - 1e-13);
    if (g(lo0) >= 1.0) {
        double lo = lo0;
        double hi = std::max(0.0, d.norm() * std::sqrt(dmax));
        while (g(hi) > 1.0) hi = 2.0 * hi + dmax;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (g(mid) > 1.0 ? lo : hi) = mid;
        }
        const double theta = 0.5 * (lo + hi);
        return theta >= 0.0 ? dist_at(theta) : -dist_at(theta);
    }

    // Hard case: the nearest boundary point has a component along the
    // smallest semi-axis that x itself lacks.
    double s = 0.0, inner = 0.0;
    const double gap_tol = 1e-12 * dmax;
    for (int i = 0; i < n; ++i) {
        if (D(i) - dmin <= gap_tol) continue;
        const double diff = d(i) * dmin / (D(i) - dmin);
        s += diff * diff;
        const double z = d(i) * D(i) / (D(i) - dmin);
        inner += z * z / D(i);
    }
    const double w2 = dmin * std::max(0.0, 1.0 - inner);
    return -std::sqrt(s + w2);
}

namespace {

// max over x in E(q, W^2) of (x - c)' P (x - c); optionally reports the
// maximizer. W must be a symmetric square root of the shape.
double max_quadratic_sqrt(const Vector& q, const Matrix& W, const Vector& c,
                          const Matrix& P, Vector* xout = nullptr) {
    const Vector d = q - c;
    Matrix M = W * P * W;
    M = 0.5 * (M + M.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(M);
    const Vector lam = es.eigenvalues().cwiseMax(0.0);
    const Vector beta = es.eigenvectors().transpose() * (W * (P * d));
    Vector w;
    const double f =
        d.dot(P * d) + trs_sphere_max(lam, beta, xout ? &w : nullptr);
    if (xout) *xout = q + W * (es.eigenvectors() * w);
    return f;
}

}  // namespace

double max_quadratic_over_ellipsoid(const Ellipsoid& e, const Vector& q,
                                    const Matrix& P) {
    return max_quadratic_sqrt(e.center(), sym_sqrt(e.shape()), q, P);
}

bool contains_ellipsoid(const Ellipsoid& inner, const Ellipsoid& outer) {
    if (inner.dim() != outer.dim()) {
        throw InvalidEllipsoidError("contains_ellipsoid: dimension mismatch");
    }
    const double m =
        max_quadratic_over_ellipsoid(inner, outer.center(), outer.shape_inverse());
    return m <= 1.0 + tol().containment;
}

namespace {

struct FusionMember {
    bool feasible = false;
    double log_volume = -std::numeric_limits<double>::infinity();
    Vector center;
    Matrix base_shape;
    double scale = 0.0;
};

FusionMember fusion_member(double a, const Ellipsoid& e1, const Ellipsoid& e2,
                           const Matrix& P1, const Matrix& P2) {
    FusionMember out;
    const int n = e1.dim();
    Matrix X = a * P1 + (1.0 - a) * P2;
    Eigen::LLT<Matrix> llt(X);
    if (llt.info() != Eigen::Success) return out;
    Matrix S = llt.solve(Matrix::Identity(n, n));
    S = 0.5 * (S + S.transpose()).eval();
    const Vector q =
        llt.solve(a * (P1 * e1.center()) + (1.0 - a) * (P2 * e2.center()));

    const Vector d1 = q - e1.center();
    const Vector d2 = q - e2.center();
    const double k1 = d1.dot(P1 * d1);
    const double k2 = d2.dot(P2 * d2);
    if (k1 >= 1.0 || k2 >= 1.0) return out;  // center not interior to both

    // Largest scale c with E(q, c S) inside both operands; the trust-region
    // pieces for a given mixing weight share one eigendecomposition each.
    const Matrix W = sym_sqrt(S);
    struct Cache {
        Vector lam, beta;
        double k;
    };
    auto make_cache = [&](const Matrix& P, const Vector& d) {
        Matrix M = W * P * W;
        M = 0.5 * (M + M.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Matrix> es(M);
        Cache c;
        c.lam = es.eigenvalues().cwiseMax(0.0);
        c.beta = es.eigenvectors().transpose() * (W * (P * d));
        c.k = d.dot(P * d);
        return c;
    };
    const Cache c1 = make_cache(P1, d1);
    const Cache c2 = make_cache(P2, d2);
    auto worst = [&](double c) {
        const double sq = std::sqrt(c);
        const double f1 =
            c1.k + trs_sphere_max((c * c1.lam).eval(), (sq * c1.beta).eval());
        const double f2 =
            c2.k + trs_sphere_max((c * c2.lam).eval(), (sq * c2.beta).eval());
        return std::max(f1, f2);
    };

    double hi = 1.0;
    int guard = 0;
    while (worst(hi) < 1.0 && ++guard < 40) hi *= 2.0;
    double lo = 0.0;
    for (int it = 0; it < 120; ++it) {
        const double mid = 0.5 * (lo + hi);
        (worst(mid) <= 1.0 ? lo : hi) = mid;
    }
    if (lo <= 0.0) return out;

    double half_log_det = 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> esS(S);
    for (int i = 0; i < n; ++i) {
        const double lam = esS.eigenvalues()(i);
        if (lam <= 0.0) return out;
        half_log_det += 0.5 * std::log(lam);
    }
    out.feasible = true;
    out.scale = lo;
    out.center = q;
    out.base_shape = S;
    out.log_volume = 0.5 * n * std::log(lo) + half_log_det;
    return out;
}

}  // namespace

namespace {

// Anisotropic tightening of a fusion-family member: starting from the
// unscaled combination E(q, Y), repeatedly flatten the ellipsoid along the
// outward normal of the worst containment violation (a rank-one update of
// Y^{-1}, applied to Y by Sherman-Morrison), then re-inflate uniformly. This
// trims only the offending caps instead of shrinking every axis, which
// matters when the fusion is iterated many times.
std::optional<std::pair<Ellipsoid, double>> refine_by_cuts(
    const Vector& q, Matrix Y, const Ellipsoid& e1, const Ellipsoid& e2,
    const Matrix& P1, const Matrix& P2) {
    const int n = static_cast<int>(q.size());
    const Ellipsoid* ops[2] = {&e1, &e2};
    const Matrix* invs[2] = {&P1, &P2};

    bool feasible = false;
    for (int iter = 0; iter < 60; ++iter) {
        const Matrix W = sym_sqrt(Y);
        double fworst = -std::numeric_limits<double>::infinity();
        int iw = -1;
        Vector xw;
        for (int i = 0; i < 2; ++i) {
            Vector x;
            const double f =
                max_quadratic_sqrt(q, W, ops[i]->center(), *invs[i], &x);
            if (f > fworst) {
                fworst = f;
                iw = i;
                xw = x;
            }
        }
        // Loose acceptance: the closing uniform re-inflation bisects the
        // scale against the exact constraints, so residual violations at
        // this tolerance are squeezed out there.
        if (fworst <= 1.0 + 1e-7) {
            feasible = true;
            break;
        }
        Vector g = (*invs[iw]) * (xw - ops[iw]->center());
        const double gn = g.norm();
        if (!(gn > 0.0)) break;
        g /= gn;
        const Vector Yg = Y * g;
        const double gYg = g.dot(Yg);
        auto cut = [&](double w) {
            return (Y - (w / (1.0 + w * gYg)) * (Yg * Yg.transpose())).eval();
        };
        auto excess = [&](double w) {
            const Matrix Yp = cut(w);
            return max_quadratic_sqrt(q, sym_sqrt(Yp), ops[iw]->center(),
                                      *invs[iw]);
        };
        // Minimal cut weight bringing this constraint just inside; the
        // violation is monotone in w because Y(w) decreases in Loewner order.
        double w_hi = 1.0 / std::max(gYg, 1e-300);
        int guard = 0;
        while (excess(w_hi) > 1.0 - 1e-9 && ++guard < 60) w_hi *= 2.0;
        if (guard >= 60) break;  // flattening along g cannot fix this face
        double w_lo = 0.0;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (w_lo + w_hi);
            (excess(mid) > 1.0 - 1e-9 ? w_lo : w_hi) = mid;
        }
        Y = cut(w_hi);
    }
    if (!feasible) return std::nullopt;

    // Re-inflate uniformly to tightness against both operands.
    const Matrix W = sym_sqrt(Y);
    struct Cache {
        Vector lam, beta;
        double k;
    };
    Cache cache[2];
    for (int i = 0; i < 2; ++i) {
        const Vector d = q - ops[i]->center();
        Matrix M = W * (*invs[i]) * W;
        M = 0.5 * (M + M.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Matrix> es(M);
        cache[i].lam = es.eigenvalues().cwiseMax(0.0);
        cache[i].beta = es.eigenvectors().transpose() * (W * ((*invs[i]) * d));
        cache[i].k = d.dot((*invs[i]) * d);
    }
    auto worst = [&](double c) {
        const double sq = std::sqrt(c);
        double f = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < 2; ++i) {
            f = std::max(f, cache[i].k +
                                trs_sphere_max((c * cache[i].lam).eval(),
                                               (sq * cache[i].beta).eval()));
        }
        return f;
    };
    double hi = 1.0;
    int guard = 0;
    while (worst(hi) < 1.0 && ++guard < 40) hi *= 2.0;
    double lo = 0.0;
    for (int it = 0; it < 120; ++it) {
        const double mid = 0.5 * (lo + hi);
        (worst(mid) <= 1.0 ? lo : hi) = mid;
    }
    if (lo <= 0.0) return std::nullopt;

    double half_log_det = 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> esY(Y);
    for (int i = 0; i < n; ++i) {
        const double lam = esY.eigenvalues()(i);
        if (lam <= 0.0) return std::nullopt;
        half_log_det += 0.5 * std::log(lam);
    }
    const double log_volume = 0.5 * n * std::log(lo) + half_log_det;
    return std::make_pair(Ellipsoid(q, (lo * Y).eval()), log_volume);
}

}  // namespace

std::optional<Ellipsoid> fusion_intersect_ia(const Ellipsoid& e1,
                                             const Ellipsoid& e2) {
    if (e1.dim() != e2.dim()) {
        throw InvalidEllipsoidError("fusion_intersect_ia: dimension mismatch");
    }
    if (e1.dim() == 1) {
        // Exact interval intersection.
        const double r1 = std::sqrt(e1.shape()(0, 0));
        const double r2 = std::sqrt(e2.shape()(0, 0));
        const double lo = std::max(e1.center()(0) - r1, e2.center()(0) - r2);
        const double hi = std::min(e1.center()(0) + r1, e2.center()(0) + r2);
        if (hi - lo <= 0.0) return std::nullopt;
        Vector c(1);
        c(0) = 0.5 * (lo + hi);
        Matrix s(1, 1);
        s(0, 0) = 0.25 * (hi - lo) * (hi - lo);
        return Ellipsoid(c, s);
    }
    // Concentric case: E(c, Y) lies in E(c, S) iff Y <= S in the Loewner
    // order, so the problem is max-det Y with Y <= S1, Y <= S2. After the
    // congruence that maps S1 to I and S2 to a diagonal D, the optimum is
    // min(I, D) (Hadamard's inequality), and it is the true maximum-volume
    // inscribed ellipsoid of the lens, which is symmetric about the shared
    // center.
    const double center_scale =
        1.0 + e1.center().norm() + std::sqrt(e1.shape().trace());
    if ((e1.center() - e2.center()).norm() <= 1e-10 * center_scale) {
        const int n = e1.dim();
        Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(e2.shape(),
                                                             e1.shape());
        const Matrix& V = ges.eigenvectors();  // V' S1 V = I, V' S2 V = D
        const Matrix Vinv = V.inverse();
        const Vector d = ges.eigenvalues().cwiseMin(1.0);
        Matrix Y = Vinv.transpose() * d.asDiagonal() * Vinv;
        Y = 0.5 * (Y + Y.transpose()).eval();
        return Ellipsoid(e1.center(), Y);
    }

    if (contains_ellipsoid(e1, e2)) return e1;
    if (contains_ellipsoid(e2, e1)) return e2;

    // Shifted-concentric candidate: shrinking each operand about a common
    // center c by (1 - rho_i), rho_i the c-offset in the operand's metric,
    // keeps it inside the operand (Cauchy-Schwarz on the support function),
    // after which the concentric max-det solution applies. A uniform
    // re-inflation against the original operands recovers most of the slack.
    // When the centers nearly coincide this is far better than the convex
    // combination family below.
    std::optional<Ellipsoid> conc;
    {
        std::vector<Vector> centers = {e1.center(), e2.center(),
                                       0.5 * (e1.center() + e2.center())};
        double best_vol = -1.0;
        for (const Vector& c : centers) {
            const double r1 = std::sqrt(std::max(0.0, e1.quadratic(c)));
            const double r2 = std::sqrt(std::max(0.0, e2.quadratic(c)));
            if (r1 >= 1.0 || r2 >= 1.0) continue;
            const Matrix S1 = (1.0 - r1) * (1.0 - r1) * e1.shape();
            const Matrix S2 = (1.0 - r2) * (1.0 - r2) * e2.shape();
            Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(S2, S1);
            if (ges.info() != Eigen::Success ||
                ges.eigenvalues().minCoeff() <= 0.0) {
                continue;
            }
            const Matrix Vinv = ges.eigenvectors().inverse();
            const Vector d = ges.eigenvalues().cwiseMin(1.0);
            Matrix Y = Vinv.transpose() * d.asDiagonal() * Vinv;
            Y = 0.5 * (Y + Y.transpose()).eval();
            auto fits = [&](double t) {
                const Ellipsoid cand(c, (t * Y).eval());
                return contains_ellipsoid(cand, e1) &&
                       contains_ellipsoid(cand, e2);
            };
            double lo = 1.0, hi = 2.0;
            if (!fits(lo)) continue;
            int guard = 0;
            while (fits(hi) && ++guard < 30) {
                lo = hi;
                hi *= 2.0;
            }
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                (fits(mid) ? lo : hi) = mid;
            }
            const Ellipsoid cand(c, (lo * Y).eval());
            const double vol = cand.volume();
            if (vol > best_vol) {
                best_vol = vol;
                conc = cand;
            }
        }
    }

    const Matrix P1 = e1.shape_inverse();
    const Matrix P2 = e2.shape_inverse();
    auto eval = [&](double a) { return fusion_member(a, e1, e2, P1, P2); };

    const int kScan = 65;
    double best_a = -1.0;
    FusionMember best;
    for (int i = 0; i <= kScan; ++i) {
        const double a = static_cast<double>(i) / kScan;
        FusionMember m = eval(a);
        if (m.feasible && m.log_volume > best.log_volume) {
            best = m;
            best_a = a;
        }
    }
    if (!best.feasible) return conc;

    // Golden-section refinement of the mixing weight around the scan optimum.
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a_lo = std::max(0.0, best_a - 1.0 / kScan);
    double a_hi = std::min(1.0, best_a + 1.0 / kScan);
    double x1 = a_hi - gr * (a_hi - a_lo);
    double x2 = a_lo + gr * (a_hi - a_lo);
    FusionMember m1 = eval(x1), m2 = eval(x2);
    while (a_hi - a_lo > tol().fusion_alpha) {
        if (m1.log_volume >= m2.log_volume) {
            a_hi = x2;
            x2 = x1;
            m2 = m1;
            x1 = a_hi - gr * (a_hi - a_lo);
            m1 = eval(x1);
        } else {
            a_lo = x1;
            x1 = x2;
            m1 = m2;
            x2 = a_lo + gr * (a_hi - a_lo);
            m2 = eval(x2);
        }
        if (m1.log_volume > best.log_volume) best = m1;
        if (m2.log_volume > best.log_volume) best = m2;
    }
    if (!best.feasible) return conc;

    auto refined = refine_by_cuts(best.center, best.base_shape, e1, e2, P1, P2);
    Ellipsoid winner = Ellipsoid(best.center, best.scale * best.base_shape);
    double winner_lv = best.log_volume;
    if (refined && refined->second > winner_lv) {
        winner = refined->first;
        winner_lv = refined->second;
    }
    // Operand-seeded deflation: when one operand sticks only slightly out of
    // the other, flattening it along the offending caps beats every member of
    // the combination family, which can only retract uniformly.
    for (const Ellipsoid* seed : {&e2, &e1}) {
        const Ellipsoid* other = (seed == &e2) ? &e1 : &e2;
        if (other->quadratic(seed->center()) >= 1.0) continue;
        auto defl =
            refine_by_cuts(seed->center(), seed->shape(), e1, e2, P1, P2);
        if (defl && defl->second > winner_lv) {
            winner = defl->first;
            winner_lv = defl->second;
        }
    }
    if (conc) {
        // log sqrt det, the same scale refine_by_cuts and the family report
        const Eigen::SelfAdjointEigenSolver<Matrix> es(conc->shape());
        double lv = 0.0;
        for (int i = 0; i < conc->dim(); ++i) {
            lv += 0.5 * std::log(std::max(es.eigenvalues()(i), 1e-300));
        }
        if (lv > winner_lv) return conc;
    }
    return winner;
}

std::optional<Ellipsoid> erode_by_ball(const Ellipsoid& e, double r) {
    if (r < 0.0) throw std::invalid_argument("erode_by_ball: negative radius");
    if (r == 0.0) return e;
    const double lmin = e.min_shape_eigenvalue();
    if (lmin <= 0.0) {
        throw InvalidEllipsoidError("erode_by_ball: shape not PD");
    }
    const double c = 1.0 - r / std::sqrt(lmin);
    if (c <= 0.0) return std::nullopt;
    return e.scaled(c);
}

Ellipsoid mvie_box(const HyperRectangle& rect) {
    if (rect.lower.size() != rect.upper.size() || rect.lower.size() == 0) {
        throw std::invalid_argument("mvie_box: inconsistent bounds");
    }
    const int n = static_cast<int>(rect.lower.size());
    Vector center(n), half(n);
    bool degenerate = false;
    for (int i = 0; i < n; ++i) {
        if (rect.lower(i) > rect.upper(i)) {
            throw std::invalid_argument("mvie_box: empty box");
        }
        center(i) = 0.5 * (rect.lower(i) + rect.upper(i));
        half(i) = 0.5 * (rect.upper(i) - rect.lower(i));
        if (half(i) == 0.0) degenerate = true;
    }
    return Ellipsoid(center, half.array().square().matrix().asDiagonal(),
                     degenerate);
}

double error_gap_estimate(const Ellipsoid& e1, const Ellipsoid& e2,
                          const Ellipsoid& fused) {
    return std::min(e1.volume(), e2.volume()) - fused.volume();
}

}  // namespace safekern
