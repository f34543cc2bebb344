#pragma once

#include "safekern/controller.hpp"

namespace safekern {

struct DisturbancePolicy {
    enum class Kind { None, UniformRandom, WorstCase, AdversarialSwitching,
                      Fixed };
    Kind kind = Kind::None;
    std::uint64_t seed = 0;
    int period = 1;                // AdversarialSwitching: steps per phase
    std::vector<Vector> samples;   // Fixed: one per step, last value held

    static DisturbancePolicy none() { return {}; }
    static DisturbancePolicy uniform_random(std::uint64_t seed);
    static DisturbancePolicy worst_case();
    static DisturbancePolicy adversarial_switching(int period,
                                                   std::uint64_t seed);
    static DisturbancePolicy fixed(std::vector<Vector> samples);
};

struct PerfPolicy {
    enum class Kind { ConstantInput, SaturatedLqr, Fixed };
    Kind kind = Kind::ConstantInput;
    Vector u0;                    // ConstantInput
    Matrix gain;                  // SaturatedLqr: u = -gain (x - x_ss)
    Vector x_ss;
    std::vector<Vector> samples;  // Fixed

    static PerfPolicy constant(Vector u);
    static PerfPolicy saturated_lqr(Matrix gain, Vector x_ss);
    static PerfPolicy fixed(std::vector<Vector> samples);
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> states;
    std::vector<Vector> controls;      // per step (one fewer than states)
    std::vector<Vector> disturbances;  // per step
    std::vector<int> modes;            // 0 = Perf, 1 = Safe, per step
    std::vector<int> gammas;           // per step
    std::vector<int> ks;               // per step
    std::vector<double> sigmas;        // per step (value entering the step)
    std::vector<double> betas;         // per step
    std::vector<bool> safety_ok;       // per state sample
    std::vector<bool> best_effort;     // per step
    std::vector<bool> exhausted;       // per step

    std::size_t steps() const { return controls.size(); }
};

/// Disturbance support vector of G V along +l; returns the center when l is
/// orthogonal to the disturbance coupling.
Vector worst_case_disturbance(const Vector& l, const Matrix& g,
                              const Ellipsoid& v_set);

/// Radial projection into U: identity inside, support vector along u_raw - mu
/// otherwise (support along an arbitrary fixed direction if u_raw = mu).
Vector saturate(const Vector& u_raw, const Ellipsoid& u_set);

/// Closed-loop rollout: automaton-supervised control with zero-order hold,
/// RK4 plant integration, and the chosen disturbance policy. safety_ok
/// records membership of each state sample in the constraint set of approx.
Trajectory simulate_closed_loop(const LtiSystem& sys,
                                const KernelApprox& approx,
                                const ControllerConfig& cfg,
                                const PerfPolicy& perf,
                                const DisturbancePolicy& dist,
                                const Vector& x0, double duration, double dt);

struct SafetyReport {
    struct Entry {
        int x0_index;
        int policy_index;
        double containment_rate;  // fraction of state samples inside K
        double min_margin;        // min over t of -signed distance to bd(K)
        int mode_switches;
        bool any_best_effort;
    };
    std::vector<Entry> entries;
    double worst_rate() const;
};

SafetyReport monte_carlo_safety_oracle(
    const LtiSystem& sys, const KernelApprox& approx,
    const ControllerConfig& cfg, const PerfPolicy& perf,
    const std::vector<Vector>& x0_set,
    const std::vector<DisturbancePolicy>& policies, double horizon,
    double dt);

/// Infinite-horizon LQR gain from the stable invariant subspace of the
/// Hamiltonian matrix. Throws Error when (A, B) is not stabilizable.
Matrix lqr_gain(const Matrix& a, const Matrix& b, const Matrix& q,
                const Matrix& r);

/// 12-state quadrotor hover linearization with the constraint/input sets
/// used by the case study.
struct QuadrotorModel {
    LtiSystem sys;
    Ellipsoid constraint;   // K_eps: inscribed ellipsoid of the state bounds
    InputBounds bounds;     // U_eps and V
    HyperRectangle input_box;
    Vector x0;              // case-study initial state
    Vector x_ss;            // hover setpoint
    Matrix q_lqr;
    Matrix r_lqr;
};

QuadrotorModel quadrotor_model();

}  // namespace safekern
