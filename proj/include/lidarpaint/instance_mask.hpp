#pragma once

#include <cstdint>
#include <vector>

#include "lidarpaint/geometry.hpp"

namespace lidarpaint {

/// Per-instance record attached to a mask raster.
struct InstanceRecord {
    std::uint16_t id = 0;  // nonzero raster value
    int label = 0;         // label id >= 1
    double score = 0.0;    // segmentation score in [0,1]
    bool touches_left = false;
    bool touches_right = false;
};

/// 2D instance-ID raster for one camera. Raster value 0 is background; every
/// nonzero value must have a matching record.
struct InstanceMask {
    int camera = 0;
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> raster;  // row-major, width*height
    std::vector<InstanceRecord> records;

    std::uint16_t at(int x, int y) const {
        return raster[static_cast<std::size_t>(y) * width + x];
    }
    std::uint16_t& at(int x, int y) {
        return raster[static_cast<std::size_t>(y) * width + x];
    }
    const InstanceRecord* record_for(std::uint16_t id) const {
        for (const auto& r : records)
            if (r.id == id) return &r;
        return nullptr;
    }
};

/// Aggregated 3D instance prior: points projected into one 2D instance
/// (possibly merged across a camera seam), with label, score and a center.
/// The center is the member mean right after painting and the salient
/// cluster medoid after refinement.
struct Instance3DPrior {
    int instance_id = 0;  // scene-unique, >= 1
    int label = 0;        // >= 1
    double score = 0.0;
    std::vector<int> member_indices;  // into the keyframe cloud
    Vec3 center;
    bool low_confidence = false;  // set when refinement found no core cluster
};

}  // namespace lidarpaint
