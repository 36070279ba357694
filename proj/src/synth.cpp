#include "lidarpaint/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "lidarpaint/errors.hpp"

namespace lidarpaint {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct BoxDims {
    double length, width, height;
};

/// Plausible cuboid dimensions for the default categories; anything custom
/// falls back to ratios of the characteristic length.
BoxDims dims_for(const LabelEntry& e) {
    if (e.name == "car") return {4.5, 1.9, 1.6};
    if (e.name == "truck") return {7.0, 2.5, 2.8};
    if (e.name == "bus") return {11.0, 2.9, 3.4};
    if (e.name == "trailer") return {10.0, 2.9, 3.8};
    if (e.name == "construction_vehicle") return {6.0, 2.8, 3.2};
    if (e.name == "pedestrian") return {0.8, 0.7, 1.7};
    if (e.name == "motorcycle") return {2.1, 0.8, 1.4};
    if (e.name == "bicycle") return {1.7, 0.6, 1.3};
    if (e.name == "traffic_cone") return {0.4, 0.4, 0.8};
    if (e.name == "barrier") return {2.5, 0.5, 1.0};
    const double l = e.characteristic_length_m;
    return {l, std::clamp(0.42 * l, 0.35, 3.0), std::clamp(0.40 * l, 0.8, 4.0)};
}

Box3D inflated(const Box3D& b, double margin) {
    Box3D out = b;
    out.length += 2.0 * margin;
    out.width += 2.0 * margin;
    return out;
}

int points_for_box(const Box3D& b, double density) {
    const double range = std::hypot(b.center.x, b.center.y);
    const double volume = b.length * b.width * b.height;
    const double n = density * volume * 100.0 / std::max(range * range, 1.0);
    return std::clamp(static_cast<int>(std::lround(n)), 8, 6000);
}

void sample_box_volume(const Box3D& box, int count, int gt, std::mt19937_64& rng,
                       std::vector<LidarPoint>& points, std::vector<int>& gt_index) {
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    std::uniform_real_distribution<double> refl(0.0, 1.0);
    for (int k = 0; k < count; ++k) {
        const Vec3 local{u(rng) * box.length, u(rng) * box.width, u(rng) * box.height};
        const Vec3 g = box.to_global(local);
        points.push_back({g.x, g.y, g.z, refl(rng)});
        gt_index.push_back(gt);
    }
}

/// Ray/box intersection in the box local frame; returns entry distance or
/// infinity on miss.
double ray_box(const Box3D& box, const Vec3& origin, const Vec3& dir, double t_near) {
    const Vec3 o = box.to_local(origin);
    const double c = std::cos(box.yaw), s = std::sin(box.yaw);
    const Vec3 d{c * dir.x + s * dir.y, -s * dir.x + c * dir.y, dir.z};
    const double half[3] = {0.5 * box.length, 0.5 * box.width, 0.5 * box.height};
    const double oc[3] = {o.x, o.y, o.z};
    const double dc[3] = {d.x, d.y, d.z};

    double tmin = t_near;
    double tmax = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        if (std::abs(dc[a]) < 1e-12) {
            if (std::abs(oc[a]) > half[a]) return std::numeric_limits<double>::infinity();
            continue;
        }
        double lo = (-half[a] - oc[a]) / dc[a];
        double hi = (half[a] - oc[a]) / dc[a];
        if (lo > hi) std::swap(lo, hi);
        tmin = std::max(tmin, lo);
        tmax = std::min(tmax, hi);
    }
    return tmax >= tmin ? tmin : std::numeric_limits<double>::infinity();
}

}  // namespace

CalibrationRig make_ring_rig(int cameras, int image_width, int image_height,
                             double overlap_deg, double camera_height_m) {
    if (cameras < 1) throw InputError("need at least one camera");
    const double fov_deg = 360.0 / cameras + overlap_deg;
    if (!(fov_deg > 0.0 && fov_deg < 170.0))
        throw InputError("horizontal FOV must stay below 170 degrees");
    const double fx = (image_width / 2.0) / std::tan(0.5 * fov_deg * kPi / 180.0);

    CalibrationRig rig;
    rig.lidar_to_ego = RigidTransform::identity();
    for (int j = 0; j < cameras; ++j) {
        // Clockwise ring: yaw decreases with index.
        const double yaw = -j * (2.0 * kPi / cameras);
        const double cy = std::cos(yaw), sy = std::sin(yaw);
        // Camera axes in ego coordinates: z forward, y down, x right.
        const Vec3 z_axis{cy, sy, 0.0};
        const Vec3 y_axis{0.0, 0.0, -1.0};
        const Vec3 x_axis{sy, -cy, 0.0};
        const Vec3 position{0.0, 0.0, camera_height_m};
        // Rows of R are the camera axes; t = -R * position.
        const std::array<double, 9> r{x_axis.x, x_axis.y, x_axis.z,
                                      y_axis.x, y_axis.y, y_axis.z,
                                      z_axis.x, z_axis.y, z_axis.z};
        const Vec3 t{-(x_axis.dot(position)), -(y_axis.dot(position)), -(z_axis.dot(position))};
        CameraModel cam;
        cam.fx = fx;
        cam.fy = fx;
        cam.cx = image_width / 2.0;
        cam.cy = image_height / 2.0;
        cam.width = image_width;
        cam.height = image_height;
        cam.extrinsic = RigidTransform::from_rotation_translation(r, t);
        rig.cameras.push_back(cam);
    }
    return rig;
}

SyntheticScene generate_scene(const SceneSpec& spec) {
    if (!(spec.density > 0.0)) throw InputError("density must be positive");
    if (spec.box_count < 0) throw InputError("box count must be >= 0");

    SyntheticScene scene;
    scene.labels = spec.labels;
    scene.rig = make_ring_rig(spec.cameras, spec.image_width, spec.image_height,
                              spec.camera_overlap_deg, spec.camera_height_m);

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    for (const Box3D& fixed : spec.fixed_boxes) {
        for (const Box3D& prev : scene.gt_boxes)
            if (bev_overlap(inflated(fixed, 0.5), inflated(prev, 0.5)))
                throw InputError("fixed boxes overlap");
        scene.gt_boxes.push_back(fixed);
    }

    std::vector<int> mix = spec.label_mix;
    if (mix.empty())
        for (const auto& e : spec.labels.entries()) mix.push_back(e.id);

    for (int i = 0; i < spec.box_count; ++i) {
        const int label = mix[static_cast<std::size_t>(i) % mix.size()];
        const BoxDims dims = dims_for(spec.labels.entry(label));
        bool placed = false;
        for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
            const double range = spec.min_range_m + u01(rng) * (spec.max_range_m - spec.min_range_m);
            const double azimuth = -kPi + u01(rng) * 2.0 * kPi;
            Box3D box;
            box.center = {range * std::cos(azimuth), range * std::sin(azimuth), dims.height / 2.0};
            box.length = dims.length;
            box.width = dims.width;
            box.height = dims.height;
            box.yaw = -kPi + u01(rng) * 2.0 * kPi;
            if (box.yaw <= -kPi) box.yaw = kPi;
            box.label = label;
            bool collides = false;
            for (const Box3D& prev : scene.gt_boxes)
                collides = collides || bev_overlap(inflated(box, 0.5), inflated(prev, 0.5));
            if (!collides) {
                scene.gt_boxes.push_back(box);
                placed = true;
            }
        }
        if (!placed) throw InputError("box placement infeasible after bounded retries");
    }

    for (std::size_t b = 0; b < scene.gt_boxes.size(); ++b) {
        sample_box_volume(scene.gt_boxes[b], points_for_box(scene.gt_boxes[b], spec.density),
                          static_cast<int>(b), rng, scene.points, scene.gt_index);
    }

    // Ground returns on an annulus, area density falling off as 1/r^2.
    const double ground_min = 3.0;
    const double ground_max = std::max(spec.max_range_m, ground_min + 1.0);
    std::uniform_real_distribution<double> refl(0.0, 1.0);
    for (int k = 0; k < spec.background_points; ++k) {
        for (int attempt = 0; attempt < 20; ++attempt) {
            const double r = ground_min * std::pow(ground_max / ground_min, u01(rng));
            const double az = -kPi + u01(rng) * 2.0 * kPi;
            const double x = r * std::cos(az), y = r * std::sin(az);
            bool under_box = false;
            for (const Box3D& box : scene.gt_boxes)
                under_box = under_box || inflated(box, 0.1).contains_bev(x, y);
            if (!under_box) {
                scene.points.push_back({x, y, 0.0, refl(rng)});
                scene.gt_index.push_back(-1);
                break;
            }
        }
    }

    scene.masks = render_instance_masks(scene);
    return scene;
}

std::vector<InstanceMask> render_instance_masks(const SyntheticScene& scene) {
    std::vector<InstanceMask> masks;
    masks.reserve(scene.rig.cameras.size());
    for (std::size_t j = 0; j < scene.rig.cameras.size(); ++j) {
        const CameraModel& cam = scene.rig.cameras[j];
        const RigidTransform ego_from_cam = cam.extrinsic.inverse();
        const Vec3 origin = ego_from_cam.translation_part();

        InstanceMask mask;
        mask.camera = static_cast<int>(j);
        mask.width = cam.width;
        mask.height = cam.height;
        mask.raster.assign(static_cast<std::size_t>(cam.width) * cam.height, 0);

        for (int py = 0; py < cam.height; ++py) {
            for (int px = 0; px < cam.width; ++px) {
                const Vec3 dir_cam{(px + 0.5 - cam.cx) / cam.fx,
                                   (py + 0.5 - cam.cy) / cam.fy, 1.0};
                const Vec3 dir = ego_from_cam.rotate(dir_cam);
                double best_t = std::numeric_limits<double>::infinity();
                std::uint16_t best_id = 0;
                for (std::size_t b = 0; b < scene.gt_boxes.size(); ++b) {
                    const double t = ray_box(scene.gt_boxes[b], origin, dir, 1e-3);
                    if (t < best_t) {
                        best_t = t;
                        best_id = static_cast<std::uint16_t>(b + 1);
                    }
                }
                if (best_id != 0) mask.at(px, py) = best_id;
            }
        }

        std::vector<bool> seen(scene.gt_boxes.size() + 1, false);
        std::vector<bool> left(scene.gt_boxes.size() + 1, false);
        std::vector<bool> right(scene.gt_boxes.size() + 1, false);
        for (int py = 0; py < cam.height; ++py) {
            for (int px = 0; px < cam.width; ++px) {
                const std::uint16_t id = mask.at(px, py);
                if (id == 0) continue;
                seen[id] = true;
                if (px == 0) left[id] = true;
                if (px == cam.width - 1) right[id] = true;
            }
        }
        for (std::size_t b = 0; b < scene.gt_boxes.size(); ++b) {
            const std::uint16_t id = static_cast<std::uint16_t>(b + 1);
            if (!seen[id]) continue;
            mask.records.push_back({id, scene.gt_boxes[b].label, 1.0, left[id], right[id]});
        }
        masks.push_back(std::move(mask));
    }
    return masks;
}

CalibrationRig perturb_calibration(const CalibrationRig& rig, const NoiseSpec& noise,
                                   std::uint64_t seed) {
    if (!noise.valid()) throw InputError("invalid noise spec");
    if (noise.rotation_jitter_deg == 0.0 && noise.translation_jitter_m == 0.0) return rig;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    CalibrationRig out = rig;
    for (CameraModel& cam : out.cameras) {
        Vec3 axis{gauss(rng), gauss(rng), gauss(rng)};
        if (axis.norm() < 1e-9) axis = {0.0, 0.0, 1.0};
        const double angle = noise.rotation_jitter_deg * kPi / 180.0 * u01(rng);
        Vec3 tdir{gauss(rng), gauss(rng), gauss(rng)};
        if (tdir.norm() < 1e-9) tdir = {1.0, 0.0, 0.0};
        const double tmag = noise.translation_jitter_m * u01(rng);

        RigidTransform delta = RigidTransform::axis_angle(axis, angle);
        delta = compose(RigidTransform::translation(tdir.normalized() * tmag), delta);
        cam.extrinsic = compose(delta, cam.extrinsic);
    }
    return out;
}

SyntheticScene apply_noise(const SyntheticScene& scene, const NoiseSpec& noise,
                           std::uint64_t seed) {
    if (!noise.valid()) throw InputError("invalid noise spec");
    SyntheticScene out = scene;
    out.noise = noise;
    out.rig = perturb_calibration(scene.rig, noise, seed);

    if (noise.occluder_walls > 0 && !scene.gt_boxes.empty()) {
        std::mt19937_64 rng(seed + 1);
        std::uniform_real_distribution<double> refl(0.0, 1.0);
        for (int k = 0; k < noise.occluder_walls; ++k) {
            const Box3D& target = scene.gt_boxes[static_cast<std::size_t>(k) % scene.gt_boxes.size()];
            const double range = std::hypot(target.center.x, target.center.y);
            const Vec3 dir = Vec3{target.center.x, target.center.y, 0.0} / std::max(range, 1e-9);

            for (double gap : {12.0, 17.0, 22.0}) {
                Box3D wall;
                wall.center = {dir.x * (range + gap), dir.y * (range + gap), target.height};
                wall.length = 3.0 * target.width + 2.0;
                wall.width = 0.2;
                wall.height = 2.0 * target.height;
                wall.yaw = std::atan2(dir.y, dir.x) + kPi / 2.0;
                if (wall.yaw > kPi) wall.yaw -= 2.0 * kPi;
                bool collides = false;
                for (const Box3D& box : scene.gt_boxes)
                    collides = collides || bev_overlap(wall, box);
                if (collides) continue;

                const int count = std::clamp(
                    static_cast<int>(std::lround(60.0 * wall.length * wall.height /
                                                 std::pow((range + gap) / 10.0, 2.0))),
                    20, 2000);
                std::uniform_real_distribution<double> u(-0.5, 0.5);
                for (int i = 0; i < count; ++i) {
                    const Vec3 local{u(rng) * wall.length, u(rng) * wall.width,
                                     u(rng) * wall.height};
                    const Vec3 g = wall.to_global(local);
                    out.points.push_back({g.x, g.y, g.z, refl(rng)});
                    out.gt_index.push_back(-1);
                }
                break;
            }
        }
    }

    if (noise.sync_offset_s > 0.0 && noise.ego_speed_mps > 0.0) {
        const double shift = noise.ego_speed_mps * noise.sync_offset_s;
        for (LidarPoint& p : out.points) p.x -= shift;
    }
    return out;
}

std::vector<int> gt_point_labels(const SyntheticScene& scene) {
    std::vector<int> labels(scene.points.size(), 0);
    for (std::size_t i = 0; i < scene.points.size(); ++i) {
        const int b = scene.gt_index[i];
        if (b >= 0) labels[i] = scene.gt_boxes[static_cast<std::size_t>(b)].label;
    }
    return labels;
}

std::vector<bool> clean_visible_flags(const SyntheticScene& scene) {
    std::vector<bool> flags(scene.points.size(), false);
    const auto hits = project_cloud(scene.points, scene.rig);
    std::vector<const InstanceMask*> mask_of(scene.rig.cameras.size(), nullptr);
    for (const auto& m : scene.masks) mask_of[static_cast<std::size_t>(m.camera)] = &m;

    for (std::size_t i = 0; i < scene.points.size(); ++i) {
        const int b = scene.gt_index[i];
        if (b < 0) continue;
        const std::uint16_t own = static_cast<std::uint16_t>(b + 1);
        bool seen_own = false, seen_other = false;
        for (const PixelHit& h : hits[i]) {
            const InstanceMask* m = mask_of[static_cast<std::size_t>(h.camera)];
            if (m == nullptr) continue;
            const std::uint16_t v = m->at(static_cast<int>(std::floor(h.u)),
                                          static_cast<int>(std::floor(h.v)));
            if (v == own) seen_own = true;
            else if (v != 0) seen_other = true;
        }
        flags[i] = seen_own && !seen_other;
    }
    return flags;
}

std::vector<InstanceMask> erode_masks(const std::vector<InstanceMask>& masks, int px) {
    std::vector<InstanceMask> out = masks;
    for (int pass = 0; pass < px; ++pass) {
        for (InstanceMask& m : out) {
            const std::vector<std::uint16_t> src = m.raster;
            // Out-of-image neighbors count as matching so border contact is
            // not erased by the image edge itself.
            auto differs = [&](std::uint16_t v, int x, int y) {
                if (x < 0 || y < 0 || x >= m.width || y >= m.height) return false;
                return src[static_cast<std::size_t>(y) * m.width + x] != v;
            };
            for (int y = 0; y < m.height; ++y) {
                for (int x = 0; x < m.width; ++x) {
                    const std::uint16_t v = src[static_cast<std::size_t>(y) * m.width + x];
                    if (v == 0) continue;
                    if (differs(v, x - 1, y) || differs(v, x + 1, y) ||
                        differs(v, x, y - 1) || differs(v, x, y + 1))
                        m.at(x, y) = 0;
                }
            }
        }
    }
    // Border flags follow the raster.
    for (InstanceMask& m : out) {
        for (InstanceRecord& rec : m.records) {
            rec.touches_left = false;
            rec.touches_right = false;
            for (int y = 0; y < m.height; ++y) {
                if (m.at(0, y) == rec.id) rec.touches_left = true;
                if (m.at(m.width - 1, y) == rec.id) rec.touches_right = true;
            }
        }
    }
    return out;
}

}  // namespace lidarpaint
