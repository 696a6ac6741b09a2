#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "dvf/geometry.hpp"

namespace dvf {

enum class RegistrationMethod { kTruth, kIcp };

const char* to_string(RegistrationMethod method);

struct RegistrationResult {
  /// Maps cloud-2 frame coordinates into the cloud-1 frame.
  RigidTransform transform;
  RegistrationMethod method = RegistrationMethod::kTruth;
  int iterations = 0;
  /// RMS of nearest-neighbour distances, each capped at max_corr_dist (icp only).
  double final_residual = 0.0;
  bool converged = true;
  /// Residual before the first update and after every accepted update (icp only).
  std::vector<double> residual_trace;

  friend bool operator==(const RegistrationResult&, const RegistrationResult&) = default;
};

class RegistrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Re-expresses cloud 2 in cloud 1's sensor frame using the two capture poses
/// (T = pose1^-1 * pose2). The sensor pose is mapped along with the points.
std::pair<PointCloud, RegistrationResult> register_with_truth(const PointCloud& cloud2,
                                                              const RigidTransform& pose1,
                                                              const RigidTransform& pose2);

struct IcpParams {
  int max_iter = 60;
  double tol = 1e-6;
  double max_corr_dist = 1.0;
};

/// Point-to-point ICP aligning cloud2 onto cloud1, starting from `init`.
/// Throws RegistrationError when no correspondence lies within max_corr_dist.
/// Non-convergence within max_iter is reported through `converged`.
RegistrationResult icp_register(const PointCloud& cloud1, const PointCloud& cloud2,
                                const RigidTransform& init, const IcpParams& params = {});

/// Closed-form least-squares rigid transform taking `source[i]` onto `target[i]`.
RigidTransform best_fit_transform(const std::vector<Point3>& source,
                                  const std::vector<Point3>& target);

}  // namespace dvf
