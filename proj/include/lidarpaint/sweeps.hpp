#pragma once

#include <vector>

#include "lidarpaint/camera.hpp"
#include "lidarpaint/types.hpp"

namespace lidarpaint {

/// Motion-compensate and stack a sweep list into one cloud expressed in the
/// keyframe ego frame. Each point is mapped by
///   T(ego_kf <- ego_i) * lidar_to_ego,
/// where T(ego_kf <- ego_i) is composed from the two ego poses. When the
/// full transform is exactly identity the points are copied bitwise.
/// sweep_offset is set to keyframe timestamp minus sweep timestamp
/// (0 for the keyframe, positive for older sweeps).
std::vector<LidarPoint> stack_sweeps(const std::vector<Sweep>& sweeps,
                                     std::size_t keyframe_index,
                                     const CalibrationRig& rig);

/// Zip raw points with per-point paint fields into the 9-field output record.
/// All sequences must have equal length. instance_id 0 requires label 0 and a
/// zero center; points sharing a nonzero id must agree on (label, center).
std::vector<AugmentedPoint> assemble_augmented(const std::vector<LidarPoint>& points,
                                               const std::vector<int>& labels,
                                               const std::vector<Vec3>& centers,
                                               const std::vector<int>& instance_ids);

}  // namespace lidarpaint
