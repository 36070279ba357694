#include "lidarpaint/camera.hpp"

#include "lidarpaint/errors.hpp"

namespace lidarpaint {

std::optional<PixelHit> project_point(const Vec3& p_ego, const CameraModel& cam,
                                      int camera_index, double z_min) {
    const Vec3 p_cam = cam.extrinsic.apply(p_ego);
    if (!(p_cam.z > z_min)) return std::nullopt;
    const double u = cam.fx * p_cam.x / p_cam.z + cam.cx;
    const double v = cam.fy * p_cam.y / p_cam.z + cam.cy;
    if (!(u >= 0.0 && u < cam.width && v >= 0.0 && v < cam.height)) return std::nullopt;
    return PixelHit{camera_index, u, v, p_cam.z};
}

Vec3 unproject_pixel(const PixelHit& hit, const CameraModel& cam) {
    const Vec3 p_cam{(hit.u - cam.cx) / cam.fx * hit.depth,
                     (hit.v - cam.cy) / cam.fy * hit.depth, hit.depth};
    return cam.extrinsic.inverse().apply(p_cam);
}

std::vector<std::vector<PixelHit>> project_cloud(const std::vector<LidarPoint>& points,
                                                 const CalibrationRig& rig,
                                                 double z_min) {
    if (!rig.valid()) throw InputError("invalid calibration rig");
    std::vector<std::vector<PixelHit>> hits(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Vec3 p = points[i].position();
        for (std::size_t j = 0; j < rig.cameras.size(); ++j) {
            if (auto h = project_point(p, rig.cameras[j], static_cast<int>(j), z_min))
                hits[i].push_back(*h);
        }
    }
    return hits;
}

}  // namespace lidarpaint
