#pragma once

namespace safekern {

/// Shared numeric policy. Tests and solvers read the same constants so a
/// tolerance change propagates everywhere at once.
struct Tolerances {
    double membership = 1e-9;    ///< relative slack on the membership quadratic
    double symmetry = 1e-10;     ///< relative asymmetry allowed in shape matrices
    double containment = 1e-8;   ///< slack on ellipsoid-in-ellipsoid tests
    double interior = 1e-9;      ///< strict-interior margin for automaton domains
    double fusion_alpha = 1e-9;  ///< bracket tolerance of the fusion line search
};

inline const Tolerances& tol() {
    static const Tolerances t{};
    return t;
}

}  // namespace safekern
