#include "safekern/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "safekern/matrix_exp.hpp"

namespace safekern {

double Partition::norm() const {
    double m = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i) {
        m = std::max(m, times[i] - times[i - 1]);
    }
    return m;
}

void Partition::validate() const {
    if (times.size() < 2 || times.front() != 0.0) {
        throw std::invalid_argument("Partition: need t_0 = 0 < ... < tau");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) {
            throw std::invalid_argument("Partition: times not increasing");
        }
    }
}

int Partition::interval_of(double sigma) const {
    int k = static_cast<int>(
        std::upper_bound(times.begin(), times.end(), sigma) - times.begin());
    return std::clamp(k, 1, intervals());
}

Partition make_uniform_partition(double tau, int n) {
    if (!(tau > 0.0) || n < 1) {
        throw std::invalid_argument("make_uniform_partition: bad arguments");
    }
    Partition p;
    p.times.resize(n + 1);
    for (int i = 0; i <= n; ++i) p.times[i] = tau * i / n;
    p.times[n] = tau;
    return p;
}

Ellipsoid shrink_constraint(const Ellipsoid& k, double m_bound,
                            const Partition& p) {
    const double r = m_bound * p.norm();
    auto shrunk = erode_by_ball(k, r);
    if (!shrunk) {
        throw InfeasiblePartitionError(
            "shrink_constraint: erosion radius " + std::to_string(r) +
            " empties the constraint set; refine the partition");
    }
    return *shrunk;
}

bool check_invariance(const ReachSegment& segment, const Ellipsoid& k_k) {
    const Ellipsoid term = segment.terminal_ellipsoid();
    const double scale =
        std::max(1.0, k_k.shape().cwiseAbs().maxCoeff());
    if ((term.center() - k_k.center()).norm() > 1e-9 * scale ||
        (term.shape() - k_k.shape()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
        throw std::invalid_argument(
            "check_invariance: segment target does not match the kernel");
    }
    return contains_ellipsoid(k_k, segment.start_ellipsoid());
}

namespace {

DirectionChain run_chain(const LtiSystem& sys, const Ellipsoid& eroded,
                         const InputBounds& bounds, const Partition& p,
                         const Vector& direction, int direction_id,
                         const KernelOptions& opt) {
    const int n = p.intervals();
    DirectionChain chain;
    chain.direction_id = direction_id;
    chain.n_intervals = n;

    // Each sub-interval's tube is anchored at the chain's terminal direction:
    // the adjoint propagation runs only within the sub-interval, so the chain
    // stays tight near l_tau throughout the recursion.
    const Vector l_term = direction / direction.norm();

    chain.kernels.push_back(eroded);  // K_n
    for (int k = n; k >= 1; --k) {
        const double t0 = p.times[k - 1];
        const double t1 = p.times[k];
        const double step = (t1 - t0) / opt.substeps;
        const Ellipsoid& target = chain.kernels.back();
        ReachSegment seg;
        try {
            seg = reach_tube_segment(sys, target, bounds, t0, t1, step,
                                     l_term, direction_id);
        } catch (const SegmentDegenerateError&) {
            chain.dropped = true;
            break;
        }
        chain.segments.push_back(std::move(seg));
        const ReachSegment& s = chain.segments.back();

        const bool invariant =
            contains_ellipsoid(target, s.start_ellipsoid());
        if (invariant && chain.invariance_k < 0) chain.invariance_k = k;
        if (invariant && opt.stop_on_invariance) break;

        auto fused = fusion_intersect_ia(eroded, s.start_ellipsoid());
        if (invariant && (!fused || fused->volume() < target.volume())) {
            // K_k sits inside both lens operands, so it is itself a valid
            // inscribed ellipsoid; never step down to a smaller fusion.
            fused = target;
        }
        if (!fused) {
            chain.dropped = true;
            chain.segments.pop_back();
            break;
        }
        chain.error_gaps.push_back(
            error_gap_estimate(eroded, s.start_ellipsoid(), *fused));
        chain.kernels.push_back(std::move(*fused));
    }
    chain.terminal_direction = l_term;
    return chain;
}

}  // namespace

KernelApprox discriminating_kernel_ia(const LtiSystem& sys,
                                      const Ellipsoid& constraint,
                                      const InputBounds& bounds,
                                      const Partition& partition,
                                      const DirectionSet& dirs,
                                      const KernelOptions& options) {
    sys.validate();
    partition.validate();
    if (dirs.directions.empty()) {
        throw std::invalid_argument("discriminating_kernel_ia: no directions");
    }
    for (const Vector& l : dirs.directions) {
        if (l.size() != sys.state_dim()) {
            throw std::invalid_argument(
                "discriminating_kernel_ia: direction dimension mismatch");
        }
    }

    KernelApprox out;
    out.sys = sys;
    out.bounds = bounds;
    out.partition = partition;
    out.dirs = dirs;
    out.constraint = constraint;
    out.m_bound = dynamics_bound(sys, constraint, bounds);
    out.eroded = shrink_constraint(constraint, out.m_bound, partition);

    const int nd = static_cast<int>(dirs.directions.size());
    out.chains.resize(nd);
    auto work = [&](int i) {
        return run_chain(sys, out.eroded, bounds, partition,
                         dirs.directions[i], i, options);
    };
    const int jobs = std::max(1, options.jobs);
    if (jobs == 1 || nd == 1) {
        for (int i = 0; i < nd; ++i) out.chains[i] = work(i);
    } else {
        std::vector<std::future<DirectionChain>> futs;
        futs.reserve(nd);
        for (int i = 0; i < nd; ++i) {
            futs.push_back(std::async(std::launch::async, work, i));
        }
        for (int i = 0; i < nd; ++i) out.chains[i] = futs[i].get();
    }

    for (const DirectionChain& c : out.chains) {
        if (c.invariance_k >= 0) {
            out.invariance_records.push_back({c.direction_id, c.invariance_k});
        }
        for (const ReachSegment& s : c.segments) s.prepare_interpolation();
    }
    return out;
}

std::vector<Ellipsoid> KernelApprox::final_kernel() const {
    std::vector<Ellipsoid> out;
    for (const DirectionChain& c : chains) {
        if (c.has_kernel(0)) out.push_back(c.kernel(0));
    }
    return out;
}

std::vector<Ellipsoid> KernelApprox::intermediate_kernel(int k) const {
    if (k < 0 || k > partition.intervals()) {
        throw std::invalid_argument("intermediate_kernel: k out of range");
    }
    std::vector<Ellipsoid> out;
    for (const DirectionChain& c : chains) {
        if (c.has_kernel(k)) out.push_back(c.kernel(k));
    }
    return out;
}

std::vector<int> KernelApprox::membership_in_union(int k, double sigma,
                                                   const Vector& x) const {
    std::vector<int> ids;
    for (const DirectionChain& c : chains) {
        if (!c.has_segment(k)) continue;
        const double q = c.segment(k).at(sigma).quadratic(x);
        if (q < 1.0 - tol().interior) ids.push_back(c.direction_id);
    }
    return ids;
}

double KernelApprox::total_error_gap() const {
    double g = 0.0;
    for (const DirectionChain& c : chains) {
        for (double e : c.error_gaps) g += e;
    }
    return g;
}

const DirectionChain* KernelApprox::chain_by_id(int direction_id) const {
    if (direction_id < 0 ||
        direction_id >= static_cast<int>(chains.size())) {
        return nullptr;
    }
    return &chains[direction_id];
}

}  // namespace safekern
