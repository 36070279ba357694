#pragma once

#include <optional>
#include <vector>

#include "lidarpaint/geometry.hpp"
#include "lidarpaint/types.hpp"

namespace lidarpaint {

/// Pinhole camera. The frame convention is x right, y down, z forward;
/// extrinsic maps ego coordinates into the camera frame (cam <- ego).
/// (u,v) are continuous pixels with the origin at the top-left pixel
/// corner; mask lookup floors, and the right/bottom edge is excluded
/// (u in [0,width), v in [0,height) after floor).
struct CameraModel {
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 0;
    int height = 0;
    RigidTransform extrinsic;  // cam <- ego

    bool valid() const {
        return fx > 0.0 && fy > 0.0 && width >= 1 && height >= 1 && extrinsic.is_rigid();
    }
};

/// Sensor layout: one LiDAR plus M cameras covering the surround view.
/// Cameras are listed in ring order such that camera j's right image border
/// faces camera j+1's left border (wrapping at the end).
struct CalibrationRig {
    RigidTransform lidar_to_ego;
    std::vector<CameraModel> cameras;

    bool valid() const {
        if (cameras.empty() || !lidar_to_ego.is_rigid()) return false;
        for (const auto& c : cameras)
            if (!c.valid()) return false;
        return true;
    }
};

/// One in-frustum projection of a point.
struct PixelHit {
    int camera = 0;
    double u = 0.0;
    double v = 0.0;
    double depth = 0.0;  // meters along camera z
};

/// Points closer than this to the image plane are treated as behind the
/// camera; prevents division blowup as z -> 0.
constexpr double kDefaultNearPlaneM = 0.1;

/// Project an ego-frame point through one camera. Absent when the point is
/// behind the near plane or outside the image bounds.
std::optional<PixelHit> project_point(const Vec3& p_ego, const CameraModel& cam,
                                      int camera_index = 0,
                                      double z_min = kDefaultNearPlaneM);

/// Invert project_point given the recorded depth. Returns the ego-frame point.
Vec3 unproject_pixel(const PixelHit& hit, const CameraModel& cam);

/// All in-frustum hits for every point, over every camera of the rig.
/// Points in overlapping fields of view get several hits; downstream
/// conflict resolution picks one.
std::vector<std::vector<PixelHit>> project_cloud(const std::vector<LidarPoint>& points,
                                                 const CalibrationRig& rig,
                                                 double z_min = kDefaultNearPlaneM);

}  // namespace lidarpaint
