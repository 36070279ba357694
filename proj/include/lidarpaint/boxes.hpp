#pragma once

#include <array>
#include <vector>

#include "lidarpaint/geometry.hpp"

namespace lidarpaint {

/// Upright 3D box: center, size (length along local x, width along local y,
/// height along z), yaw about z in (-pi, pi]. Score is meaningful for
/// detections only.
struct Box3D {
    Vec3 center;
    double length = 0.0;
    double width = 0.0;
    double height = 0.0;
    double yaw = 0.0;
    int label = 0;
    double score = 0.0;

    bool valid() const {
        return length > 0.0 && width > 0.0 && height > 0.0 && center.finite() &&
               yaw > -3.14159265358979323846 - 1e-12 && yaw <= 3.14159265358979323846 + 1e-12;
    }

    /// Global point -> box-local frame (center at origin, yaw removed).
    Vec3 to_local(const Vec3& p) const;
    Vec3 to_global(const Vec3& local) const;

    bool contains(const Vec3& p) const;
    bool contains_bev(double x, double y) const;

    /// BEV footprint corners, counterclockwise.
    std::array<Vec3, 4> bev_corners() const;
};

/// Sampling step of the rasterized BEV IoU.
constexpr double kBevIouCellM = 0.05;

/// Intersection-over-union of the two boxes' BEV rectangles, approximated by
/// rasterizing both footprints at kBevIouCellM and counting cells.
double bev_iou(const Box3D& a, const Box3D& b);

/// Exact positive-area overlap test for the two BEV rectangles (separating
/// axis). Equivalent to "IoU > 0" without the raster approximation.
bool bev_overlap(const Box3D& a, const Box3D& b);

}  // namespace lidarpaint
