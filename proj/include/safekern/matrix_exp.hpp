#pragma once

#include "safekern/ellipsoid.hpp"

namespace safekern {

/// exp(A t), scaling-and-squaring with a degree-13 Pade approximant.
Matrix matrix_exponential(const Matrix& a, double t = 1.0);

/// Integral of exp(A s) ds over [0, h], computed from the exponential of the
/// augmented matrix [[A, I], [0, 0]]. Exact for singular A as well.
Matrix matrix_exponential_integral(const Matrix& a, double h);

}  // namespace safekern
