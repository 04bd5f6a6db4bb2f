#pragma once

// Rigid 6D pose: translation in meters (camera frame of the center view) and
// orientation as a unit quaternion.

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace plenopose {

struct Pose {
    Eigen::Vector3d translation{0.0, 0.0, 0.0};
    Eigen::Quaterniond rotation{1.0, 0.0, 0.0, 0.0};  // (w, x, y, z)

    Eigen::Vector3d transform(const Eigen::Vector3d& local) const {
        return rotation * local + translation;
    }
    // Unit norm within 1e-9 and finite translation.
    void validate() const;
};

}  // namespace plenopose
