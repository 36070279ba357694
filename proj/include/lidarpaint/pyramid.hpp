#pragma once

#include <map>
#include <vector>

#include "lidarpaint/boxes.hpp"
#include "lidarpaint/types.hpp"

namespace lidarpaint {

struct Raster2D {
    int width = 0;
    int height = 0;
    std::vector<double> data;  // row-major

    double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

/// One pyramid level: stride doubles per level, receptive field is
/// stride * base cell size * growth factor.
struct PyramidLevel {
    int level = 0;
    int stride = 1;
    Raster2D features;
    double receptive_field_m = 0.0;
};

constexpr double kDefaultCellSizeM = 0.2;
constexpr double kDefaultReceptiveGrowth = 10.0;

/// Level k is the 2x average pool of level k-1 (a plumbing stand-in for a
/// learned multi-scale neck; the dispatch logic below is what matters).
/// Base dims must be divisible by 2^(levels-1).
std::vector<PyramidLevel> build_pyramid(const Raster2D& base, int levels,
                                        double cell_size_m = kDefaultCellSizeM,
                                        double growth = kDefaultReceptiveGrowth);

/// Category -> pyramid level. Total over the label table; larger objects
/// never map to a finer level than smaller ones.
struct DispatchTable {
    std::map<int, int> level_of_label;
};

/// Map each label to the level whose receptive field is the smallest one
/// >= 2x the characteristic length; falls back to the coarsest level.
DispatchTable assign_category_scales(const LabelTable& labels,
                                     const std::vector<PyramidLevel>& levels);

struct DispatchTarget {
    int box_index = -1;
    int cell_x = 0;
    int cell_y = 0;
};

/// Route each box to its label's level and bin its center into that level's
/// raster (cell = floor((center - origin) / level cell size)); out-of-range
/// boxes are dropped.
std::vector<std::vector<DispatchTarget>> dispatch_targets(
    const std::vector<Box3D>& boxes, const DispatchTable& table,
    const std::vector<PyramidLevel>& levels, double origin_x, double origin_y,
    double cell_size_m = kDefaultCellSizeM);

}  // namespace lidarpaint
