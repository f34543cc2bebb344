#pragma once

#include <cstdint>
#include <vector>

#include "safekern/ellipsoid.hpp"

namespace safekern {

/// dx/dt = A x + B u + G v
struct LtiSystem {
    Matrix A;
    Matrix B;
    Matrix G;

    int state_dim() const { return static_cast<int>(A.rows()); }
    int control_dim() const { return static_cast<int>(B.cols()); }
    int disturbance_dim() const { return static_cast<int>(G.cols()); }

    void validate() const {
        if (A.rows() != A.cols() || B.rows() != A.rows() ||
            G.rows() != A.rows() || A.rows() == 0) {
            throw std::invalid_argument("LtiSystem: inconsistent dimensions");
        }
        if (!A.allFinite() || !B.allFinite() || !G.allFinite()) {
            throw std::invalid_argument("LtiSystem: non-finite entries");
        }
    }
};

/// Admissible input sets. The disturbance set may be a point ellipsoid
/// (zero shape) for disturbance-free analysis.
struct InputBounds {
    Ellipsoid control;
    Ellipsoid disturbance;

    bool disturbance_free() const {
        return disturbance.degenerate() ||
               disturbance.shape().cwiseAbs().maxCoeff() == 0.0;
    }
};

/// Terminal directions parameterizing the internal approximation families.
struct DirectionSet {
    std::vector<Vector> directions;
    std::uint64_t seed = 0;

    /// count unit vectors drawn as normalized Gaussians from a seeded PRNG,
    /// optionally preceded by the 2n canonical +-axis directions.
    static DirectionSet random(int dim, int count, std::uint64_t seed,
                               bool include_axes = false);
};

}  // namespace safekern
