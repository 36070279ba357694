#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lidarpaint/geometry.hpp"

namespace lidarpaint {

/// Raw LiDAR return. Coordinates are meters in the LiDAR or ego frame,
/// reflectance is unitless ([0,1] by convention, any finite value accepted).
/// sweep_offset is seconds relative to the keyframe (0 for keyframe points);
/// it is carried for 5-field cloud compatibility, never used as a feature.
struct LidarPoint {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double r = 0.0;
    double sweep_offset = 0.0;

    Vec3 position() const { return {x, y, z}; }
    bool finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(z) &&
               std::isfinite(r) && std::isfinite(sweep_offset);
    }
};

/// Painted point: raw fields plus semantic label, 3D instance center and the
/// scene-unique instance id. Label 0 / id 0 mean unpainted; an unpainted
/// point carries a zero center.
struct AugmentedPoint {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double r = 0.0;
    int s = 0;
    double cx = 0.0;
    double cy = 0.0;
    double cz = 0.0;
    int instance_id = 0;

    Vec3 position() const { return {x, y, z}; }
    Vec3 center() const { return {cx, cy, cz}; }
    bool painted() const { return instance_id != 0; }
};

struct LabelEntry {
    int id = 0;
    std::string name;
    double characteristic_length_m = 0.0;
};

/// Ordered category set. IDs are dense starting at 1; id 0 is reserved as
/// the unpainted/background sentinel and never appears in the table.
class LabelTable {
  public:
    LabelTable() = default;
    explicit LabelTable(std::vector<LabelEntry> entries);

    /// The ten driving classes used throughout the tests and defaults.
    static LabelTable default_table();

    const std::vector<LabelEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool contains(int id) const { return id >= 1 && id <= static_cast<int>(entries_.size()); }
    const LabelEntry& entry(int id) const;

  private:
    std::vector<LabelEntry> entries_;
};

/// One LiDAR revolution plus the ego pose (ego -> global) at capture time.
struct Sweep {
    std::vector<LidarPoint> points;
    RigidTransform ego_pose;
    double timestamp = 0.0;
};

}  // namespace lidarpaint
