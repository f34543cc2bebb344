#pragma once

#include <stdexcept>
#include <string>

namespace safekern {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidEllipsoidError : Error {
    using Error::Error;
};

/// Direction lies in the null space of the relevant shape matrix.
struct DegenerateDirectionError : Error {
    using Error::Error;
};

/// Shape matrix lost positive definiteness during backward integration.
struct SegmentDegenerateError : Error {
    SegmentDegenerateError(const std::string& msg, double t)
        : Error(msg), time(t) {}
    double time;
};

/// Constraint erosion emptied the set; the caller should refine the partition.
struct InfeasiblePartitionError : Error {
    using Error::Error;
};

/// Kernel artifacts on disk do not match the config that requested them.
struct StalenessError : Error {
    using Error::Error;
};

/// State left every tube and the fallback law is disabled.
struct SafetyViolationError : Error {
    using Error::Error;
};

}  // namespace safekern
