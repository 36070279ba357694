#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lidarpaint/boxes.hpp"
#include "lidarpaint/types.hpp"

namespace lidarpaint {

constexpr double kDefaultFpIouThreshold = 0.1;

/// Detections whose best BEV IoU against every same-scene ground-truth box
/// stays below the threshold.
std::vector<Box3D> mine_false_positives(const std::vector<Box3D>& detections,
                                        const std::vector<Box3D>& ground_truth,
                                        double iou_threshold = kDefaultFpIouThreshold);

/// One hard-negative example: the points cropped from a false-positive
/// detection, stored in the box-local frame.
struct FpRecord {
    std::vector<LidarPoint> points;  // box-local coordinates
    Box3D box;
    std::string scene_id;
};

/// Offline store of false-positive examples. On disk: one directory holding
/// index.json (box fields, point count, blob offset per record) and
/// points.bin, a single little-endian float32 blob of (x,y,z,r) rows.
class FpDatabase {
  public:
    void add(FpRecord record);

    /// Crop the cloud inside each box and add one record per non-empty crop.
    void add_from_scene(const std::vector<LidarPoint>& cloud,
                        const std::vector<Box3D>& fp_boxes,
                        const std::string& scene_id);

    const std::vector<FpRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }

    void save(const std::string& directory) const;
    static FpDatabase load(const std::string& directory);

  private:
    std::vector<FpRecord> records_;
};

struct PasteResult {
    std::vector<AugmentedPoint> cloud;
    int requested = 0;
    int pasted = 0;
};

/// Paste up to `count` seeded draws from the database into the cloud at
/// their stored poses. A draw is skipped when its box footprint overlaps any
/// ground-truth box or an already pasted box. Pasted points are background
/// (label 0, instance 0). Deterministic per seed.
PasteResult paste_samples(const std::vector<AugmentedPoint>& cloud,
                          const FpDatabase& db, int count,
                          const std::vector<Box3D>& gt_boxes,
                          std::uint64_t rng_seed);

}  // namespace lidarpaint
