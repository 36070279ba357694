#include <doctest.h>

#include <cmath>
#include <cstring>
#include <set>

#include "lidarpaint/errors.hpp"
#include "lidarpaint/painter.hpp"
#include "lidarpaint/synth.hpp"

using namespace lidarpaint;

TEST_CASE("zero boxes give a background-only scene") {
    SceneSpec spec;
    spec.box_count = 0;
    spec.background_points = 300;
    spec.seed = 91;
    const SyntheticScene scene = generate_scene(spec);
    CHECK(scene.gt_boxes.empty());
    CHECK(scene.points.size() > 200);
    for (int g : scene.gt_index) CHECK(g == -1);
    for (const auto& m : scene.masks)
        for (auto v : m.raster) CHECK(v == 0);
}

TEST_CASE("same seed reproduces the scene exactly") {
    SceneSpec spec;
    spec.box_count = 4;
    spec.seed = 92;
    const SyntheticScene a = generate_scene(spec);
    const SyntheticScene b = generate_scene(spec);
    REQUIRE(a.points.size() == b.points.size());
    CHECK(std::memcmp(a.points.data(), b.points.data(),
                      a.points.size() * sizeof(LidarPoint)) == 0);
    REQUIRE(a.masks.size() == b.masks.size());
    for (std::size_t j = 0; j < a.masks.size(); ++j)
        CHECK(a.masks[j].raster == b.masks[j].raster);
    CHECK(a.gt_index == b.gt_index);
}

TEST_CASE("a box inside one camera frustum projects all its points there") {
    SceneSpec spec;
    spec.box_count = 0;
    spec.background_points = 0;
    spec.seed = 93;
    Box3D cone;
    cone.center = {15, 0, 0.4};  // dead ahead of camera 0
    cone.length = 0.4;
    cone.width = 0.4;
    cone.height = 0.8;
    cone.label = 9;
    spec.fixed_boxes.push_back(cone);
    const SyntheticScene scene = generate_scene(spec);
    REQUIRE(!scene.points.empty());

    const auto hits = project_cloud(scene.points, scene.rig);
    for (const auto& per_point : hits) {
        REQUIRE(per_point.size() == 1);
        CHECK(per_point[0].camera == 0);
    }
}

TEST_CASE("every foreground point lies inside its own box") {
    SceneSpec spec;
    spec.box_count = 8;
    spec.seed = 94;
    const SyntheticScene scene = generate_scene(spec);
    for (std::size_t i = 0; i < scene.points.size(); ++i) {
        const int b = scene.gt_index[i];
        if (b < 0) continue;
        CHECK(scene.gt_boxes[static_cast<std::size_t>(b)].contains(scene.points[i].position()));
        // And in no other box (boxes are placed without overlap).
        for (std::size_t other = 0; other < scene.gt_boxes.size(); ++other) {
            if (static_cast<int>(other) == b) continue;
            CHECK_FALSE(scene.gt_boxes[other].contains(scene.points[i].position()));
        }
    }
}

TEST_CASE("rendered masks agree with point projection for zero noise") {
    SceneSpec spec;
    spec.box_count = 5;
    spec.seed = 95;
    const SyntheticScene scene = generate_scene(spec);
    const auto hits = project_cloud(scene.points, scene.rig);

    std::size_t checked = 0;
    for (std::size_t i = 0; i < scene.points.size(); ++i) {
        const int b = scene.gt_index[i];
        if (b < 0) continue;
        for (const PixelHit& h : hits[i]) {
            const auto& m = scene.masks[static_cast<std::size_t>(h.camera)];
            const auto v = m.at(static_cast<int>(std::floor(h.u)),
                                static_cast<int>(std::floor(h.v)));
            // Own id, another box occluding, or background (pixel ray slips
            // past the box silhouette near edges); never a *farther* box.
            if (v == static_cast<std::uint16_t>(b + 1)) ++checked;
        }
    }
    CHECK(checked > 1000);  // the overwhelming majority of projections
}

TEST_CASE("occluder gets the contested pixels") {
    SceneSpec spec;
    spec.box_count = 0;
    spec.background_points = 0;
    spec.seed = 96;
    Box3D near_box;
    near_box.center = {14, 0, 0.8};
    near_box.length = 4.0;
    near_box.width = 2.0;
    near_box.height = 1.6;
    near_box.label = 1;
    Box3D far_box = near_box;
    far_box.center = {26, 0, 0.8};
    spec.fixed_boxes = {near_box, far_box};
    const SyntheticScene scene = generate_scene(spec);

    const InstanceMask& mask = scene.masks[0];
    std::size_t near_px = 0, far_px = 0;
    for (auto v : mask.raster) {
        near_px += v == 1;
        far_px += v == 2;
    }
    CHECK(near_px > 100);
    CHECK(far_px > 0);  // the far box peeks over the near one
    // Contested pixel: the far box's center projects inside the near box's
    // silhouette, so the z-buffer must hand that pixel to the near box.
    const CameraModel& cam = scene.rig.cameras[0];
    const auto hit = project_point(far_box.center, cam, 0);
    REQUIRE(hit.has_value());
    CHECK(mask.at(static_cast<int>(std::floor(hit->u)),
                  static_cast<int>(std::floor(hit->v))) == 1);
}

TEST_CASE("zero-magnitude noise leaves the rig bitwise unchanged") {
    SceneSpec spec;
    spec.box_count = 1;
    spec.seed = 97;
    const SyntheticScene scene = generate_scene(spec);
    const CalibrationRig out = perturb_calibration(scene.rig, NoiseSpec{}, 5);
    for (std::size_t j = 0; j < out.cameras.size(); ++j)
        CHECK(out.cameras[j].extrinsic == scene.rig.cameras[j].extrinsic);
}

TEST_CASE("perturbation is deterministic per seed") {
    const CalibrationRig rig = make_ring_rig(6, 640, 400, 0.0, 2.2);
    NoiseSpec noise;
    noise.rotation_jitter_deg = 1.0;
    noise.translation_jitter_m = 0.05;
    const CalibrationRig a = perturb_calibration(rig, noise, 7);
    const CalibrationRig b = perturb_calibration(rig, noise, 7);
    const CalibrationRig c = perturb_calibration(rig, noise, 8);
    bool any_diff_c = false;
    for (std::size_t j = 0; j < a.cameras.size(); ++j) {
        CHECK(a.cameras[j].extrinsic == b.cameras[j].extrinsic);
        any_diff_c = any_diff_c || !(a.cameras[j].extrinsic == c.cameras[j].extrinsic);
    }
    CHECK(any_diff_c);
}

TEST_CASE("a one-degree yaw shifts a 50 m point by about 0.87 m") {
    // Camera yaw = rotation about the camera's vertical (its y axis).
    const CalibrationRig rig = make_ring_rig(6, 640, 400, 0.0, 2.2);
    const RigidTransform yaw = RigidTransform::rotation_y(1.0 * 3.14159265358979 / 180.0);
    const RigidTransform perturbed = compose(yaw, rig.cameras[0].extrinsic);
    const Vec3 p{50, 0, 2.2};  // on camera 0's optical axis
    const Vec3 before = rig.cameras[0].extrinsic.apply(p);
    const Vec3 after = perturbed.apply(p);
    CHECK(before.x == doctest::Approx(0.0));
    const double lateral = std::abs(after.x - before.x);
    CHECK(lateral == doctest::Approx(50.0 * std::tan(1.0 * 3.14159265358979 / 180.0))
                         .epsilon(0.01));
}

TEST_CASE("perturbed rotations stay within the jitter bound") {
    const CalibrationRig rig = make_ring_rig(6, 640, 400, 0.0, 2.2);
    NoiseSpec noise;
    noise.rotation_jitter_deg = 0.5;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const CalibrationRig out = perturb_calibration(rig, noise, seed);
        for (std::size_t j = 0; j < rig.cameras.size(); ++j) {
            // Relative rotation angle from the trace.
            const RigidTransform rel = compose(out.cameras[j].extrinsic,
                                               rig.cameras[j].extrinsic.inverse());
            const double trace = rel.rotation(0, 0) + rel.rotation(1, 1) + rel.rotation(2, 2);
            const double angle = std::acos(std::clamp((trace - 1.0) / 2.0, -1.0, 1.0));
            CHECK(angle <= 0.5 * 3.14159265358979 / 180.0 + 1e-9);
        }
    }
}

TEST_CASE("occluder walls add background points behind a box") {
    SceneSpec spec;
    spec.box_count = 1;
    spec.label_mix = {1};
    spec.background_points = 0;
    spec.seed = 98;
    const SyntheticScene clean = generate_scene(spec);
    NoiseSpec noise;
    noise.occluder_walls = 1;
    const SyntheticScene noisy = apply_noise(clean, noise, 11);

    REQUIRE(noisy.points.size() > clean.points.size());
    const double box_range = std::hypot(clean.gt_boxes[0].center.x,
                                        clean.gt_boxes[0].center.y);
    for (std::size_t i = clean.points.size(); i < noisy.points.size(); ++i) {
        CHECK(noisy.gt_index[i] == -1);
        CHECK(std::hypot(noisy.points[i].x, noisy.points[i].y) > box_range + 5.0);
    }
    // Masks are untouched: walls are not instances.
    for (std::size_t j = 0; j < clean.masks.size(); ++j)
        CHECK(noisy.masks[j].raster == clean.masks[j].raster);
}

TEST_CASE("sync offset displaces the cloud") {
    SceneSpec spec;
    spec.box_count = 1;
    spec.seed = 99;
    const SyntheticScene clean = generate_scene(spec);
    NoiseSpec noise;
    noise.sync_offset_s = 0.1;
    noise.ego_speed_mps = 10.0;
    const SyntheticScene noisy = apply_noise(clean, noise, 12);
    for (std::size_t i = 0; i < clean.points.size(); ++i) {
        CHECK(noisy.points[i].x == doctest::Approx(clean.points[i].x - 1.0));
        CHECK(noisy.points[i].y == clean.points[i].y);
    }
}

TEST_CASE("oracle consistency: noiseless painting is perfect on clean points") {
    SceneSpec spec;
    spec.box_count = 6;
    spec.seed = 100;
    const SyntheticScene scene = generate_scene(spec);
    const auto paint = paint_scene(scene.points, scene.rig, scene.masks);
    const auto flags = clean_visible_flags(scene);
    const auto gt = gt_point_labels(scene);
    std::size_t clean_count = 0;
    for (std::size_t i = 0; i < scene.points.size(); ++i) {
        if (!flags[i]) continue;
        ++clean_count;
        REQUIRE(paint.point_labels[i] == gt[i]);
    }
    CHECK(clean_count > 2000);
}

TEST_CASE("infeasible placement is rejected") {
    SceneSpec spec;
    spec.box_count = 200;       // cannot fit without overlap
    spec.min_range_m = 5.0;
    spec.max_range_m = 7.0;
    spec.label_mix = {3};       // buses
    spec.seed = 101;
    CHECK_THROWS_AS(generate_scene(spec), InputError);
}

TEST_CASE("erode_masks shrinks every instance region") {
    SceneSpec spec;
    spec.box_count = 4;
    spec.seed = 102;
    const SyntheticScene scene = generate_scene(spec);
    const auto eroded = erode_masks(scene.masks, 1);
    for (std::size_t j = 0; j < scene.masks.size(); ++j) {
        std::size_t before = 0, after = 0;
        for (auto v : scene.masks[j].raster) before += v != 0;
        for (std::size_t i = 0; i < eroded[j].raster.size(); ++i) {
            after += eroded[j].raster[i] != 0;
            if (eroded[j].raster[i] != 0) CHECK(eroded[j].raster[i] == scene.masks[j].raster[i]);
        }
        CHECK(after <= before);
    }
}
