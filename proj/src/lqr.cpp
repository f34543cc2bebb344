#include <cmath>

#include "safekern/simulate.hpp"

namespace safekern {

// Infinite-horizon gain via the Hamiltonian eigenvector method: the
// stabilizing solution of A'P + PA - P B R^{-1} B' P + Q = 0 spans the
// stable invariant subspace of H = [A, -B R^{-1} B'; -Q, -A']. This copes
// with badly scaled weight matrices that defeat ODE integration.
Matrix lqr_gain(const Matrix& a, const Matrix& b, const Matrix& q,
                const Matrix& r) {
    const int n = static_cast<int>(a.rows());
    const int m = static_cast<int>(b.cols());
    if (a.cols() != n || b.rows() != n || q.rows() != n || q.cols() != n ||
        r.rows() != m || r.cols() != m) {
        throw std::invalid_argument("lqr_gain: inconsistent dimensions");
    }
    Eigen::LLT<Matrix> rllt(0.5 * (r + r.transpose()));
    if (rllt.info() != Eigen::Success) {
        throw std::invalid_argument("lqr_gain: R not positive definite");
    }
    const Matrix rinv_bt = rllt.solve(b.transpose());

    Matrix h(2 * n, 2 * n);
    h.topLeftCorner(n, n) = a;
    h.topRightCorner(n, n) = -b * rinv_bt;
    h.bottomLeftCorner(n, n) = -0.5 * (q + q.transpose());
    h.bottomRightCorner(n, n) = -a.transpose();

    Eigen::ComplexEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success) {
        throw Error("lqr_gain: Hamiltonian eigendecomposition failed");
    }
    using CMatrix = Eigen::MatrixXcd;
    CMatrix basis(2 * n, n);
    int found = 0;
    for (int i = 0; i < 2 * n && found < n; ++i) {
        if (es.eigenvalues()(i).real() < 0.0) {
            basis.col(found++) = es.eigenvectors().col(i);
        }
    }
    if (found != n) {
        throw Error(
            "lqr_gain: stable subspace has wrong dimension; is (A,B) "
            "stabilizable?");
    }
    const CMatrix x1 = basis.topRows(n);
    const CMatrix x2 = basis.bottomRows(n);
    Eigen::FullPivLU<CMatrix> lu(x1);
    if (!lu.isInvertible()) {
        throw Error("lqr_gain: singular stable-subspace projection");
    }
    const CMatrix pc = x2 * lu.inverse();
    if (pc.imag().cwiseAbs().maxCoeff() >
        1e-6 * (1.0 + pc.real().cwiseAbs().maxCoeff())) {
        throw Error("lqr_gain: Riccati solution is not real");
    }
    Matrix p = pc.real();
    p = 0.5 * (p + p.transpose()).eval();
    return rinv_bt * p;
}

}  // namespace safekern
