#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "lidarpaint/camera.hpp"
#include "lidarpaint/instance_mask.hpp"
#include "lidarpaint/types.hpp"

namespace lidarpaint {

struct PainterConfig {
    double merge_gap_m = 0.5;  // max 3D gap for a cross-seam merge
    double z_min_m = kDefaultNearPlaneM;
};

/// One (camera, 2D instance) membership candidate for a point.
struct MaskCandidate {
    int camera = 0;
    std::uint16_t instance_2d = 0;
    int label = 0;
    double score = 0.0;
};

/// Key of a raw per-camera group: (camera index, 2D instance id).
using GroupKey = std::pair<int, std::uint16_t>;

struct AssociationResult {
    std::map<GroupKey, std::vector<int>> groups;        // point indices per group
    std::vector<std::vector<MaskCandidate>> candidates; // per point, 0..M entries
};

/// Assign each projected point to the 2D instances its hits land on.
/// A point joins group (j, id) iff its hit in camera j falls on raster value
/// id != 0 (lookup at floor(u), floor(v)). Throws InputError when a hit's
/// camera has no mask or a mask's raster references a missing record.
AssociationResult associate(const std::vector<LidarPoint>& points,
                            const std::vector<std::vector<PixelHit>>& hits,
                            const std::vector<InstanceMask>& masks);

/// Keep the highest-score candidate per point; ties go to the lower camera
/// index. Returns one entry per point, instance_2d == 0 when unpainted.
std::vector<MaskCandidate> resolve_conflicts(
    const std::vector<std::vector<MaskCandidate>>& candidates);

/// Merge groups of a truncated object seen across two adjacent cameras.
/// Groups merge when the 2D instances touch the facing borders (right border
/// of camera j, left of camera j+1 in ring order), labels match, and the 3D
/// gap between the point sets is below merge_gap. Merging is transitive.
/// Returns the partition of group keys into merged components.
std::vector<std::vector<GroupKey>> merge_truncated(
    const std::map<GroupKey, std::vector<int>>& groups,
    const std::vector<InstanceMask>& masks,
    const std::vector<LidarPoint>& points,
    std::size_t camera_count,
    double merge_gap_m);

struct PaintResult {
    std::vector<Instance3DPrior> priors;
    std::vector<int> point_labels;     // per point, 0 = unpainted
    std::vector<int> point_instance;   // per point, 0 = none
};

/// Full painting step: associate -> resolve_conflicts -> merge_truncated,
/// then number instances scene-uniquely (by smallest member index) and set
/// each provisional center to the member mean.
PaintResult paint_scene(const std::vector<LidarPoint>& points,
                        const CalibrationRig& rig,
                        const std::vector<InstanceMask>& masks,
                        const PainterConfig& config = {});

}  // namespace lidarpaint
