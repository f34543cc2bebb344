#pragma once

#include "safekern/kernel.hpp"

namespace safekern {

enum class Mode { Perf, Safe };
enum class Variant { FiniteH, InfiniteH };

struct ControllerConfig {
    bool enabled = true;  ///< false: performance input passes through
    double alpha = 0.9;            ///< blending threshold, in (0, 1)
    double sigma_rate_perf = 1.0;  ///< pseudo-time rate while in Perf
    bool blending = true;
    bool fallback = true;          ///< best-effort law outside every tube
    Variant variant = Variant::FiniteH;
    /// Slack on phi = 1 before a state counts as strictly outside a tube.
    double outside_slack = 1e-3;
};

struct ControllerState {
    Mode mode = Mode::Perf;
    int gamma = -1;       ///< active direction id (-1: none available)
    double sigma = 0.0;   ///< pseudo-time within the horizon
    int k = 1;            ///< active partition sub-interval
    double t = 0.0;       ///< wall-clock time
    bool exhausted = false;  ///< FiniteH only: sigma reached tau

    /// Choose the initial location from x0: the deepest tube containing it.
    static ControllerState init(const KernelApprox& approx, const Vector& x0,
                                const ControllerConfig& cfg);
};

struct ControlDecision {
    Vector u;
    Mode mode = Mode::Perf;
    int gamma = -1;
    double beta = 0.0;        ///< safe-law weight actually applied
    double sigma_rate = 0.0;
    double phi = 0.0;         ///< tube depth coordinate of x
    Vector direction;         ///< direction vector l used by the safe law
    bool horizon_exhausted = false;
    bool best_effort = false; ///< x was outside every tube; fallback law
    bool mode_switched = false;
};

/// psi_BU: u = mu - U B' l / sqrt(<l, B U B' l>); throws
/// DegenerateDirectionError when B'l lies in the null space of U.
Vector safe_law(const Vector& l, const Matrix& b, const Ellipsoid& u_set);

/// l = X^{-1} (x - x_c) for the tube cross-section E(x_c, X).
Vector direction_vector(const Vector& x, const Ellipsoid& tube);

/// Depth coordinate phi(x) = quadratic of the tube at x (0 center, 1 boundary).
double phi_depth(const Vector& x, const Ellipsoid& tube);

/// Piecewise blending weight: 0 below alpha, smooth ramp to 1 at the boundary.
double beta_weight(double xi, double alpha);

/// One transition of the hybrid automaton: picks mode/direction from the
/// current state, produces the control, and advances (sigma, k, t) by dt.
std::pair<ControllerState, ControlDecision> automaton_step(
    const ControllerState& state, const Vector& x, double dt,
    const KernelApprox& approx, const Vector& u_perf,
    const ControllerConfig& cfg);

}  // namespace safekern
