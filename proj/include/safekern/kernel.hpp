#pragma once

#include <optional>

#include "safekern/reach.hpp"

namespace safekern {

/// Partition t_0 = 0 < t_1 < ... < t_n = tau of the analysis horizon.
struct Partition {
    std::vector<double> times;

    int intervals() const { return static_cast<int>(times.size()) - 1; }
    double horizon() const { return times.back(); }
    double norm() const;
    void validate() const;

    /// Index k with sigma in [t_{k-1}, t_k] (clamped to [1, n]).
    int interval_of(double sigma) const;
};

Partition make_uniform_partition(double tau, int n);

/// K eroded by a ball of radius M * ||P||; throws InfeasiblePartitionError
/// when the erosion empties the set.
Ellipsoid shrink_constraint(const Ellipsoid& k, double m_bound,
                            const Partition& p);

struct KernelOptions {
    int substeps = 10;               ///< integration steps per sub-interval
    bool stop_on_invariance = false; ///< halt a chain once Prop-style
                                     ///< controlled-invariance is detected
    int jobs = 1;
};

/// One terminal direction's kernel chain. Entries are indexed from the base
/// case downward: kernels[i] is K_{n-i}, segments[i] covers sub-interval
/// k = n - i (target kernels[i]).
struct DirectionChain {
    int direction_id = -1;
    Vector terminal_direction;
    std::vector<Ellipsoid> kernels;
    std::vector<ReachSegment> segments;
    std::vector<double> error_gaps;  // one per fusion performed
    bool dropped = false;            // fusion degenerated before k = 0
    int invariance_k = -1;           // k where the invariance condition held

    int n_intervals = 0;
    int k_min() const {
        return n_intervals - static_cast<int>(kernels.size()) + 1;
    }
    bool has_kernel(int k) const {
        return k <= n_intervals && n_intervals - k <
               static_cast<int>(kernels.size());
    }
    const Ellipsoid& kernel(int k) const { return kernels[n_intervals - k]; }
    bool has_segment(int k) const {
        return k >= 1 && k <= n_intervals &&
               n_intervals - k < static_cast<int>(segments.size());
    }
    const ReachSegment& segment(int k) const {
        return segments[n_intervals - k];
    }
};

/// Piecewise-ellipsoidal under-approximation of the discriminating kernel
/// plus everything the online controller reads.
struct KernelApprox {
    LtiSystem sys;
    InputBounds bounds;
    Partition partition;
    DirectionSet dirs;
    Ellipsoid constraint;  // K
    Ellipsoid eroded;      // K_down
    double m_bound = 0.0;
    std::vector<DirectionChain> chains;

    struct InvarianceRecord {
        int direction_id;
        int k;
    };
    std::vector<InvarianceRecord> invariance_records;

    /// Final kernel pieces K_0 (chains that survived to k = 0).
    std::vector<Ellipsoid> final_kernel() const;

    /// {K_k} over surviving directions: the piecewise-ellipsoidal
    /// under-approximation of the intermediate discriminating kernel.
    std::vector<Ellipsoid> intermediate_kernel(int k) const;

    /// Direction ids whose interpolated tube ellipsoid at (sigma, k)
    /// strictly contains x, in ascending id order.
    std::vector<int> membership_in_union(int k, double sigma,
                                         const Vector& x) const;

    bool empty() const { return final_kernel().empty(); }
    double total_error_gap() const;

    const DirectionChain* chain_by_id(int direction_id) const;
};

/// Offline phase: per-direction recursion
/// K_{k-1} = fusion(K_down, reach-segment-start(K_k)) from K_n = K_down.
KernelApprox discriminating_kernel_ia(const LtiSystem& sys,
                                      const Ellipsoid& constraint,
                                      const InputBounds& bounds,
                                      const Partition& partition,
                                      const DirectionSet& dirs,
                                      const KernelOptions& options = {});

/// Controlled-invariance condition: target of the segment is contained in
/// the segment-start ellipsoid.
bool check_invariance(const ReachSegment& segment, const Ellipsoid& k_k);

}  // namespace safekern
