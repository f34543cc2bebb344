#include "safekern/matrix_exp.hpp"

#include <cmath>

namespace safekern {

namespace {

// Degree-13 Pade coefficients (Higham, "The scaling and squaring method
// for the matrix exponential revisited").
constexpr double kPade13[] = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0,  129060195264000.0,   10559470521600.0,
    670442572800.0,      33522128640.0,       1323241920.0,
    40840800.0,          960960.0,            16380.0,
    182.0,               1.0};

Matrix pade13(const Matrix& a) {
    const int n = static_cast<int>(a.rows());
    const Matrix I = Matrix::Identity(n, n);
    const Matrix a2 = a * a;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a4 * a2;
    const Matrix u =
        a * (a6 * (kPade13[13] * a6 + kPade13[11] * a4 + kPade13[9] * a2) +
             kPade13[7] * a6 + kPade13[5] * a4 + kPade13[3] * a2 +
             kPade13[1] * I);
    const Matrix v =
        a6 * (kPade13[12] * a6 + kPade13[10] * a4 + kPade13[8] * a2) +
        kPade13[6] * a6 + kPade13[4] * a4 + kPade13[2] * a2 + kPade13[0] * I;
    return (v - u).fullPivLu().solve(v + u);
}

}  // namespace

Matrix matrix_exponential(const Matrix& a, double t) {
    if (a.rows() != a.cols()) {
        throw std::invalid_argument("matrix_exponential: matrix not square");
    }
    if (!a.allFinite() || !std::isfinite(t)) {
        throw Error("matrix_exponential: non-finite input");
    }
    Matrix at = a * t;
    const double norm = at.cwiseAbs().rowwise().sum().maxCoeff();  // inf-norm
    if (!std::isfinite(norm) || norm > 1e12) {
        throw Error("matrix_exponential: norm overflow");
    }
    constexpr double theta13 = 5.371920351148152;
    int squarings = 0;
    if (norm > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
        at /= std::pow(2.0, squarings);
    }
    Matrix e = pade13(at);
    for (int i = 0; i < squarings; ++i) e = e * e;
    if (!e.allFinite()) throw Error("matrix_exponential: overflow");
    return e;
}

Matrix matrix_exponential_integral(const Matrix& a, double h) {
    const int n = static_cast<int>(a.rows());
    Matrix aug = Matrix::Zero(2 * n, 2 * n);
    aug.topLeftCorner(n, n) = a;
    aug.topRightCorner(n, n) = Matrix::Identity(n, n);
    const Matrix e = matrix_exponential(aug, h);
    return e.topRightCorner(n, n);
}

}  // namespace safekern
