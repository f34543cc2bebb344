#include "safekern/controller.hpp"

#include <cmath>
#include <limits>

namespace safekern {

Vector safe_law(const Vector& l, const Matrix& b, const Ellipsoid& u_set) {
    const Vector bl = b.transpose() * l;
    const double den = bl.dot(u_set.shape() * bl);
    if (den <= 0.0 || !std::isfinite(den)) {
        throw DegenerateDirectionError(
            "safe_law: direction orthogonal to the control coupling");
    }
    return u_set.center() - u_set.shape() * bl / std::sqrt(den);
}

Vector direction_vector(const Vector& x, const Ellipsoid& tube) {
    return tube.shape_solve(x - tube.center());
}

double phi_depth(const Vector& x, const Ellipsoid& tube) {
    return tube.quadratic(x);
}

double beta_weight(double xi, double alpha) {
    if (alpha < 0.0 || alpha >= 1.0) {
        throw std::invalid_argument("beta_weight: alpha outside [0,1)");
    }
    if (xi >= 1.0) return 1.0;
    if (xi < alpha) return 0.0;
    return (xi - alpha) / (1.0 - alpha);
}

namespace {

struct Candidate {
    int id = -1;
    int k = 0;
    double sigma = 0.0;  // pseudo-time at which this chain's tube is read
    double quad = std::numeric_limits<double>::infinity();
    double dist = std::numeric_limits<double>::infinity();
};

// Tubes available to the automaton at the current state. For InfiniteH every
// candidate lives on its own invariant sub-interval; foreign directions are
// entered at the segment start (the largest cross-section).
std::vector<Candidate> gather_candidates(const KernelApprox& approx,
                                         const ControllerState& state,
                                         const Vector& x, Variant variant) {
    std::vector<Candidate> out;
    for (const DirectionChain& c : approx.chains) {
        Candidate cand;
        cand.id = c.direction_id;
        if (variant == Variant::InfiniteH) {
            if (c.invariance_k < 0) continue;
            cand.k = c.invariance_k;
            const double lo = approx.partition.times[cand.k - 1];
            const double hi = approx.partition.times[cand.k];
            cand.sigma = (c.direction_id == state.gamma)
                             ? std::clamp(state.sigma, lo, hi)
                             : lo;
        } else {
            if (!c.has_segment(state.k)) continue;
            cand.k = state.k;
            cand.sigma = std::clamp(state.sigma,
                                    approx.partition.times[cand.k - 1],
                                    approx.partition.times[cand.k]);
        }
        const Ellipsoid tube = c.segment(cand.k).at(cand.sigma);
        cand.quad = tube.quadratic(x);
        cand.dist = point_ellipsoid_distance(x, tube);
        out.push_back(cand);
    }
    return out;
}

const Candidate* best_interior(const std::vector<Candidate>& cands) {
    const Candidate* best = nullptr;
    for (const Candidate& c : cands) {
        if (c.quad >= 1.0 - tol().interior) continue;
        if (!best || c.quad < best->quad) best = &c;
    }
    return best;
}

const Candidate* find_id(const std::vector<Candidate>& cands, int id) {
    for (const Candidate& c : cands) {
        if (c.id == id) return &c;
    }
    return nullptr;
}

const Candidate* nearest(const std::vector<Candidate>& cands) {
    const Candidate* best = nullptr;
    for (const Candidate& c : cands) {
        if (!best || c.dist < best->dist) best = &c;
    }
    return best;
}

}  // namespace

ControllerState ControllerState::init(const KernelApprox& approx,
                                      const Vector& x0,
                                      const ControllerConfig& cfg) {
    ControllerState st;
    st.k = 1;
    st.sigma = 0.0;
    if (cfg.variant == Variant::InfiniteH &&
        approx.invariance_records.empty()) {
        throw Error(
            "ControllerState: infinite-horizon variant needs an invariance "
            "certificate; rerun synthesis with stop_on_invariance");
    }
    const auto cands = gather_candidates(approx, st, x0, cfg.variant);
    if (cands.empty()) {
        throw Error("ControllerState: no tube available at sigma = 0");
    }
    const Candidate* pick = best_interior(cands);
    if (pick) {
        st.mode = Mode::Perf;
    } else {
        st.mode = Mode::Safe;
        pick = nearest(cands);
    }
    st.gamma = pick->id;
    st.k = pick->k;
    st.sigma = pick->sigma;
    return st;
}

std::pair<ControllerState, ControlDecision> automaton_step(
    const ControllerState& state, const Vector& x, double dt,
    const KernelApprox& approx, const Vector& u_perf,
    const ControllerConfig& cfg) {
    if (!x.allFinite() || !(dt > 0.0)) {
        throw std::invalid_argument("automaton_step: bad state or step");
    }
    ControllerState st = state;
    ControlDecision d;
    d.u = u_perf;
    d.direction = Vector::Zero(x.size());

    if (cfg.variant == Variant::FiniteH && state.exhausted) {
        d.mode = state.mode;
        d.gamma = state.gamma;
        d.horizon_exhausted = true;
        st.t += dt;
        return {st, d};
    }

    const auto cands = gather_candidates(approx, state, x, cfg.variant);
    const Candidate* current = find_id(cands, state.gamma);
    const Candidate* pick = nullptr;
    Mode mode;
    if (current && current->quad < 1.0 - tol().interior) {
        mode = Mode::Perf;
        pick = current;
    } else if (const Candidate* p = best_interior(cands)) {
        mode = Mode::Perf;  // (perf,perf) or (safe,perf) reset of gamma
        pick = p;
    } else {
        mode = Mode::Safe;
        pick = current;
        double min_quad = std::numeric_limits<double>::infinity();
        for (const Candidate& c : cands) min_quad = std::min(min_quad, c.quad);
        const bool outside_all = min_quad > 1.0 + cfg.outside_slack;
        if (!pick || outside_all) {
            if (!cfg.fallback && outside_all) {
                throw SafetyViolationError(
                    "automaton_step: state outside every tube and fallback "
                    "is disabled");
            }
            pick = nearest(cands);
            if (!pick) {
                throw SafetyViolationError(
                    "automaton_step: no tube available at the current "
                    "sub-interval");
            }
            d.best_effort = outside_all;
        }
    }

    st.gamma = pick->id;
    st.k = pick->k;
    st.sigma = pick->sigma;
    const DirectionChain& chain = *approx.chain_by_id(st.gamma);
    const Ellipsoid tube = chain.segment(st.k).at(st.sigma);
    d.mode = mode;
    d.gamma = st.gamma;
    d.phi = pick->quad;
    d.direction = direction_vector(x, tube);
    d.mode_switched = (mode != state.mode) || (st.gamma != state.gamma);

    auto apply_safe = [&]() -> Vector {
        try {
            return safe_law(d.direction, approx.sys.B, approx.bounds.control);
        } catch (const DegenerateDirectionError&) {
            return approx.bounds.control.center();
        }
    };

    if (mode == Mode::Safe) {
        d.u = apply_safe();
        d.beta = 1.0;
        d.sigma_rate = 1.0;
    } else {
        d.sigma_rate = cfg.sigma_rate_perf;
        if (cfg.blending) {
            d.beta = beta_weight(d.phi, cfg.alpha);
            if (d.beta > 0.0) {
                d.u = (1.0 - d.beta) * u_perf + d.beta * apply_safe();
            } else {
                d.u = u_perf;
            }
        } else {
            d.beta = 0.0;
            d.u = u_perf;
        }
    }
    st.mode = mode;

    st.sigma += d.sigma_rate * dt;
    st.t += dt;
    if (cfg.variant == Variant::FiniteH) {
        const double tau = approx.partition.horizon();
        if (st.sigma >= tau - 1e-12) {
            st.sigma = tau;
            st.exhausted = true;
        } else {
            st.k = approx.partition.interval_of(st.sigma);
        }
    } else {
        const double lo = approx.partition.times[st.k - 1];
        const double hi = approx.partition.times[st.k];
        if (st.sigma >= hi - 1e-12) {
            st.sigma = hi;
            // (safe,safe) downward reset once the state has been driven back
            // into the closure of the segment-start set.
            const Ellipsoid start = chain.segment(st.k).start_ellipsoid();
            if (start.quadratic(x) <= 1.0 + tol().membership) {
                st.sigma = lo;
            }
        }
    }
    return {st, d};
}

}  // namespace safekern
