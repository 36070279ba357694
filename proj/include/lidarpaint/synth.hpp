#pragma once

#include <cstdint>
#include <vector>

#include "lidarpaint/boxes.hpp"
#include "lidarpaint/camera.hpp"
#include "lidarpaint/instance_mask.hpp"
#include "lidarpaint/types.hpp"

namespace lidarpaint {

/// Controlled error injection knobs. Calibration jitter models imprecise
/// extrinsics, the sync offset models LiDAR/camera capture skew (converted
/// to an ego-motion displacement of the cloud), and occluder walls create
/// frustum contamination behind foreground objects.
struct NoiseSpec {
    double rotation_jitter_deg = 0.0;   // per camera, angle <= jitter
    double translation_jitter_m = 0.0;  // per camera
    double sync_offset_s = 0.0;
    double ego_speed_mps = 10.0;        // converts sync offset to displacement
    int occluder_walls = 0;

    bool valid() const {
        return rotation_jitter_deg >= 0.0 && translation_jitter_m >= 0.0 &&
               sync_offset_s >= 0.0 && ego_speed_mps >= 0.0 && occluder_walls >= 0;
    }
    bool zero() const {
        return rotation_jitter_deg == 0.0 && translation_jitter_m == 0.0 &&
               sync_offset_s == 0.0 && occluder_walls == 0;
    }
};

struct SceneSpec {
    int box_count = 10;
    std::vector<int> label_mix;     // label ids to cycle through; empty = whole table
    std::vector<Box3D> fixed_boxes; // placed verbatim before random boxes
    double min_range_m = 12.0;
    double max_range_m = 40.0;
    double density = 60.0;          // points per cubic meter at 10 m range
    int background_points = 4000;   // ground-plane returns
    int cameras = 6;
    int image_width = 640;
    int image_height = 400;
    double camera_overlap_deg = 0.0;  // horizontal FOV = 360/M + overlap
    double camera_height_m = 2.2;
    std::uint64_t seed = 1;
    LabelTable labels = LabelTable::default_table();
};

struct SyntheticScene {
    CalibrationRig rig;
    std::vector<Box3D> gt_boxes;
    std::vector<LidarPoint> points;
    std::vector<int> gt_index;  // per point: box index, or -1 for background
    std::vector<InstanceMask> masks;
    NoiseSpec noise;
    LabelTable labels;
};

/// Surround rig of M pinhole cameras co-located above the ego origin, listed
/// in clockwise ring order so that camera j's right image border faces
/// camera j+1's left border. lidar_to_ego is identity (points are generated
/// in the ego frame).
CalibrationRig make_ring_rig(int cameras, int image_width, int image_height,
                             double overlap_deg, double camera_height_m);

/// Generate boxes without BEV overlap, fill them with range-decaying volume
/// samples, add ground returns, and render pixel-exact masks. Deterministic
/// per seed. Throws InputError when placement stays infeasible after bounded
/// retries.
SyntheticScene generate_scene(const SceneSpec& spec);

/// Z-buffered ray cast of the ground-truth boxes at pixel resolution; the
/// nearer box wins each pixel. Scores are fixed at 1.0; border-touch flags
/// come from raster contact with the first/last column.
std::vector<InstanceMask> render_instance_masks(const SyntheticScene& scene);

/// Compose each camera extrinsic with a small random rotation (uniform axis,
/// angle <= jitter) and translation. Intrinsics untouched; deterministic per
/// seed; a zero-magnitude spec returns the rig unchanged.
CalibrationRig perturb_calibration(const CalibrationRig& rig, const NoiseSpec& noise,
                                   std::uint64_t seed);

/// Full error injection: perturbed calibration, occluder walls appended as
/// background points behind foreground boxes, and the sync-offset cloud
/// displacement. Masks stay as rendered by the true rig.
SyntheticScene apply_noise(const SyntheticScene& scene, const NoiseSpec& noise,
                           std::uint64_t seed);

/// Per-point ground-truth labels (0 for background).
std::vector<int> gt_point_labels(const SyntheticScene& scene);

/// A foreground point is cleanly visible when at least one camera's raster
/// shows its own instance at its pixel and no camera shows a different
/// instance there. Meaningful on unperturbed scenes.
std::vector<bool> clean_visible_flags(const SyntheticScene& scene);

/// Morphological erosion of every instance region by `px` pixels
/// (4-neighborhood); background grows. Segmentation-quality knob.
std::vector<InstanceMask> erode_masks(const std::vector<InstanceMask>& masks, int px);

}  // namespace lidarpaint
