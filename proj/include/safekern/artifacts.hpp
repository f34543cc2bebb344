#pragma once

#include "safekern/config.hpp"

namespace safekern {

constexpr const char* kToolVersion = "0.1.0";

Json ellipsoid_to_json(const Ellipsoid& e);
Ellipsoid ellipsoid_from_json(const Json& j);
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

/// Writes kernel.json plus one tube_dir<i>_k<k>.json per stored segment.
void write_kernel_artifacts(const KernelApprox& approx,
                            const std::string& dir,
                            const std::string& cfg_hash, const Json& echo,
                            double seconds);

/// Reconstructs a KernelApprox from disk; throws StalenessError when the
/// stored config hash differs from expected_hash (pass "" to skip the check).
KernelApprox load_kernel_artifacts(const std::string& dir,
                                   const std::string& expected_hash);

void write_trajectory_csv(const Trajectory& traj, const std::string& path);

void write_json_file(const Json& j, const std::string& path);
Json read_json_file(const std::string& path);

}  // namespace safekern
