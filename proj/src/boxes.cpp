#include "lidarpaint/boxes.hpp"

#include <algorithm>
#include <cmath>

namespace lidarpaint {

Vec3 Box3D::to_local(const Vec3& p) const {
    const double dx = p.x - center.x;
    const double dy = p.y - center.y;
    const double c = std::cos(yaw), s = std::sin(yaw);
    return {c * dx + s * dy, -s * dx + c * dy, p.z - center.z};
}

Vec3 Box3D::to_global(const Vec3& local) const {
    const double c = std::cos(yaw), s = std::sin(yaw);
    return {center.x + c * local.x - s * local.y,
            center.y + s * local.x + c * local.y,
            center.z + local.z};
}

bool Box3D::contains(const Vec3& p) const {
    const Vec3 l = to_local(p);
    return std::abs(l.x) <= 0.5 * length && std::abs(l.y) <= 0.5 * width &&
           std::abs(l.z) <= 0.5 * height;
}

bool Box3D::contains_bev(double x, double y) const {
    const Vec3 l = to_local({x, y, center.z});
    return std::abs(l.x) <= 0.5 * length && std::abs(l.y) <= 0.5 * width;
}

std::array<Vec3, 4> Box3D::bev_corners() const {
    const double hl = 0.5 * length, hw = 0.5 * width;
    return {to_global({hl, hw, 0}), to_global({-hl, hw, 0}),
            to_global({-hl, -hw, 0}), to_global({hl, -hw, 0})};
}

double bev_iou(const Box3D& a, const Box3D& b) {
    // Circumscribed-circle reject keeps the raster pass off the hot path for
    // well-separated pairs.
    const double ra = 0.5 * std::hypot(a.length, a.width);
    const double rb = 0.5 * std::hypot(b.length, b.width);
    const double dx = a.center.x - b.center.x, dy = a.center.y - b.center.y;
    if (dx * dx + dy * dy > (ra + rb) * (ra + rb)) return 0.0;

    double min_x = 1e300, min_y = 1e300, max_x = -1e300, max_y = -1e300;
    for (const Box3D* box : {&a, &b}) {
        for (const Vec3& c : box->bev_corners()) {
            min_x = std::min(min_x, c.x);
            min_y = std::min(min_y, c.y);
            max_x = std::max(max_x, c.x);
            max_y = std::max(max_y, c.y);
        }
    }
    // Snap the raster to the global grid so identical boxes rasterize
    // identically regardless of the partner box.
    const long ix0 = std::lround(std::floor(min_x / kBevIouCellM));
    const long iy0 = std::lround(std::floor(min_y / kBevIouCellM));
    const long ix1 = std::lround(std::ceil(max_x / kBevIouCellM));
    const long iy1 = std::lround(std::ceil(max_y / kBevIouCellM));

    long in_a = 0, in_b = 0, in_both = 0;
    for (long iy = iy0; iy < iy1; ++iy) {
        const double y = (iy + 0.5) * kBevIouCellM;
        for (long ix = ix0; ix < ix1; ++ix) {
            const double x = (ix + 0.5) * kBevIouCellM;
            const bool pa = a.contains_bev(x, y);
            const bool pb = b.contains_bev(x, y);
            in_a += pa;
            in_b += pb;
            in_both += pa && pb;
        }
    }
    const long uni = in_a + in_b - in_both;
    return uni > 0 ? static_cast<double>(in_both) / static_cast<double>(uni) : 0.0;
}

namespace {

bool separated_on_axes(const Box3D& a, const Box3D& b) {
    const auto corners_b = b.bev_corners();
    const double c = std::cos(a.yaw), s = std::sin(a.yaw);
    const double axes[2][2] = {{c, s}, {-s, c}};
    const double extents[2] = {0.5 * a.length, 0.5 * a.width};
    for (int k = 0; k < 2; ++k) {
        double lo = 1e300, hi = -1e300;
        for (const Vec3& q : corners_b) {
            const double proj = axes[k][0] * (q.x - a.center.x) + axes[k][1] * (q.y - a.center.y);
            lo = std::min(lo, proj);
            hi = std::max(hi, proj);
        }
        if (lo >= extents[k] || hi <= -extents[k]) return true;
    }
    return false;
}

}  // namespace

bool bev_overlap(const Box3D& a, const Box3D& b) {
    return !separated_on_axes(a, b) && !separated_on_axes(b, a);
}

}  // namespace lidarpaint
