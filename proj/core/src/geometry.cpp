#include "plenopose/geometry.hpp"

#include <cmath>

#include "plenopose/errors.hpp"

namespace plenopose {

void Pose::validate() const {
    if (!translation.allFinite())
        throw ValidationError("Pose: non-finite translation");
    if (std::abs(rotation.norm() - 1.0) > 1e-9)
        throw ValidationError("Pose: quaternion norm deviates from 1 by more "
                              "than 1e-9");
}

}  // namespace plenopose
