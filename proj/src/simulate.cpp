#include "safekern/simulate.hpp"

#include <cmath>
#include <random>

namespace safekern {

DisturbancePolicy DisturbancePolicy::uniform_random(std::uint64_t seed) {
    DisturbancePolicy p;
    p.kind = Kind::UniformRandom;
    p.seed = seed;
    return p;
}

DisturbancePolicy DisturbancePolicy::worst_case() {
    DisturbancePolicy p;
    p.kind = Kind::WorstCase;
    return p;
}

DisturbancePolicy DisturbancePolicy::adversarial_switching(
    int period, std::uint64_t seed) {
    if (period < 1) {
        throw std::invalid_argument("AdversarialSwitching: period < 1");
    }
    DisturbancePolicy p;
    p.kind = Kind::AdversarialSwitching;
    p.period = period;
    p.seed = seed;
    return p;
}

DisturbancePolicy DisturbancePolicy::fixed(std::vector<Vector> samples) {
    if (samples.empty()) {
        throw std::invalid_argument("Fixed disturbance: no samples");
    }
    DisturbancePolicy p;
    p.kind = Kind::Fixed;
    p.samples = std::move(samples);
    return p;
}

PerfPolicy PerfPolicy::constant(Vector u) {
    PerfPolicy p;
    p.kind = Kind::ConstantInput;
    p.u0 = std::move(u);
    return p;
}

PerfPolicy PerfPolicy::saturated_lqr(Matrix gain, Vector x_ss) {
    PerfPolicy p;
    p.kind = Kind::SaturatedLqr;
    p.gain = std::move(gain);
    p.x_ss = std::move(x_ss);
    return p;
}

PerfPolicy PerfPolicy::fixed(std::vector<Vector> samples) {
    if (samples.empty()) {
        throw std::invalid_argument("Fixed perf policy: no samples");
    }
    PerfPolicy p;
    p.kind = Kind::Fixed;
    p.samples = std::move(samples);
    return p;
}

Vector worst_case_disturbance(const Vector& l, const Matrix& g,
                              const Ellipsoid& v_set) {
    const Vector gl = g.transpose() * l;
    const double den = gl.dot(v_set.shape() * gl);
    if (den <= 0.0) return v_set.center();
    return v_set.center() + v_set.shape() * gl / std::sqrt(den);
}

Vector saturate(const Vector& u_raw, const Ellipsoid& u_set) {
    if (u_set.contains(u_raw)) return u_raw;
    Vector dir = u_raw - u_set.center();
    if (dir.norm() == 0.0) {
        dir = Vector::Zero(u_raw.size());
        dir(0) = 1.0;
    }
    const double den = std::sqrt(dir.dot(u_set.shape() * dir));
    if (den == 0.0) return u_set.center();
    return u_set.center() + u_set.shape() * dir / den;
}

namespace {

Vector uniform_in_ellipsoid(const Ellipsoid& e, std::mt19937_64& rng) {
    const int n = e.dim();
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vector w(n);
    for (int i = 0; i < n; ++i) w(i) = gauss(rng);
    const double nn = w.norm();
    if (nn == 0.0) return e.center();
    w *= std::pow(unif(rng), 1.0 / n) / nn;
    Eigen::SelfAdjointEigenSolver<Matrix> es(e.shape());
    const Matrix root = es.eigenvectors() *
                        es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                        es.eigenvectors().transpose();
    return e.center() + root * w;
}

Vector plant_rhs(const LtiSystem& sys, const Vector& x, const Vector& u,
                 const Vector& v) {
    return sys.A * x + sys.B * u + sys.G * v;
}

Vector rk4_step(const LtiSystem& sys, const Vector& x, const Vector& u,
                const Vector& v, double dt) {
    const Vector k1 = plant_rhs(sys, x, u, v);
    const Vector k2 = plant_rhs(sys, x + 0.5 * dt * k1, u, v);
    const Vector k3 = plant_rhs(sys, x + 0.5 * dt * k2, u, v);
    const Vector k4 = plant_rhs(sys, x + dt * k3, u, v);
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Trajectory simulate_closed_loop(const LtiSystem& sys,
                                const KernelApprox& approx,
                                const ControllerConfig& cfg,
                                const PerfPolicy& perf,
                                const DisturbancePolicy& dist,
                                const Vector& x0, double duration,
                                double dt) {
    sys.validate();
    if (!x0.allFinite() || x0.size() != sys.state_dim()) {
        throw std::invalid_argument("simulate_closed_loop: bad x0");
    }
    if (!(dt > 0.0) || !(duration > 0.0)) {
        throw std::invalid_argument("simulate_closed_loop: bad time step");
    }
    const int nsteps = static_cast<int>(std::ceil(duration / dt - 1e-9));
    std::mt19937_64 rng(dist.seed);

    ControllerState st;
    if (cfg.enabled) st = ControllerState::init(approx, x0, cfg);
    Trajectory traj;
    traj.times.reserve(nsteps + 1);
    traj.states.reserve(nsteps + 1);

    Vector x = x0;
    traj.times.push_back(0.0);
    traj.states.push_back(x);
    traj.safety_ok.push_back(approx.constraint.quadratic(x) <= 1.0 + 1e-6);

    for (int i = 0; i < nsteps; ++i) {
        Vector u_perf;
        switch (perf.kind) {
            case PerfPolicy::Kind::ConstantInput:
                u_perf = perf.u0;
                break;
            case PerfPolicy::Kind::SaturatedLqr:
                u_perf = -perf.gain * (x - perf.x_ss);
                break;
            case PerfPolicy::Kind::Fixed:
                u_perf = perf.samples[std::min<std::size_t>(
                    i, perf.samples.size() - 1)];
                break;
        }
        u_perf = saturate(u_perf, approx.bounds.control);

        ControllerState next_st = st;
        ControlDecision d;
        if (cfg.enabled) {
            std::tie(next_st, d) = automaton_step(st, x, dt, approx, u_perf,
                                                  cfg);
        } else {
            // Unsupervised run: the performance input passes through and no
            // safety guarantee applies.
            d.u = u_perf;
            d.mode = Mode::Perf;
            d.gamma = -1;
            d.beta = 0.0;
            d.best_effort = true;
            d.direction = x - approx.constraint.center();
        }

        Vector v;
        switch (dist.kind) {
            case DisturbancePolicy::Kind::None:
                v = approx.bounds.disturbance.center();
                break;
            case DisturbancePolicy::Kind::UniformRandom:
                v = uniform_in_ellipsoid(approx.bounds.disturbance, rng);
                break;
            case DisturbancePolicy::Kind::WorstCase:
                v = worst_case_disturbance(d.direction, sys.G,
                                           approx.bounds.disturbance);
                break;
            case DisturbancePolicy::Kind::AdversarialSwitching: {
                const bool flip = (i / dist.period) % 2 == 1;
                const Vector l = flip ? Vector(-d.direction) : d.direction;
                v = worst_case_disturbance(l, sys.G,
                                           approx.bounds.disturbance);
                break;
            }
            case DisturbancePolicy::Kind::Fixed:
                v = dist.samples[std::min<std::size_t>(
                    i, dist.samples.size() - 1)];
                break;
        }

        traj.controls.push_back(d.u);
        traj.disturbances.push_back(v);
        traj.modes.push_back(d.mode == Mode::Safe ? 1 : 0);
        traj.gammas.push_back(d.gamma);
        traj.ks.push_back(st.k);
        traj.sigmas.push_back(st.sigma);
        traj.betas.push_back(d.beta);
        traj.best_effort.push_back(d.best_effort);
        traj.exhausted.push_back(d.horizon_exhausted);

        x = rk4_step(sys, x, d.u, v, dt);
        st = next_st;
        traj.times.push_back((i + 1) * dt);
        traj.states.push_back(x);
        traj.safety_ok.push_back(approx.constraint.quadratic(x) <=
                                 1.0 + 1e-6);
    }
    return traj;
}

double SafetyReport::worst_rate() const {
    double w = 1.0;
    for (const Entry& e : entries) w = std::min(w, e.containment_rate);
    return entries.empty() ? 0.0 : w;
}

SafetyReport monte_carlo_safety_oracle(
    const LtiSystem& sys, const KernelApprox& approx,
    const ControllerConfig& cfg, const PerfPolicy& perf,
    const std::vector<Vector>& x0_set,
    const std::vector<DisturbancePolicy>& policies, double horizon,
    double dt) {
    SafetyReport report;
    for (std::size_t xi = 0; xi < x0_set.size(); ++xi) {
        for (std::size_t pi = 0; pi < policies.size(); ++pi) {
            const Trajectory traj = simulate_closed_loop(
                sys, approx, cfg, perf, policies[pi], x0_set[xi], horizon,
                dt);
            SafetyReport::Entry e;
            e.x0_index = static_cast<int>(xi);
            e.policy_index = static_cast<int>(pi);
            int inside = 0;
            double min_margin = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < traj.states.size(); ++i) {
                if (traj.safety_ok[i]) ++inside;
                min_margin = std::min(
                    min_margin, -point_ellipsoid_distance(traj.states[i],
                                                          approx.constraint));
            }
            e.containment_rate =
                static_cast<double>(inside) /
                static_cast<double>(traj.states.size());
            e.min_margin = min_margin;
            e.mode_switches = 0;
            for (std::size_t i = 1; i < traj.modes.size(); ++i) {
                if (traj.modes[i] != traj.modes[i - 1]) ++e.mode_switches;
            }
            e.any_best_effort = false;
            for (bool b : traj.best_effort) e.any_best_effort |= b;
            report.entries.push_back(e);
        }
    }
    return report;
}

}  // namespace safekern
