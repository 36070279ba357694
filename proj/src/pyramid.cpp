#include "lidarpaint/pyramid.hpp"

#include <cmath>

#include "lidarpaint/errors.hpp"

namespace lidarpaint {

std::vector<PyramidLevel> build_pyramid(const Raster2D& base, int levels,
                                        double cell_size_m, double growth) {
    if (levels < 1) throw InputError("build_pyramid: need at least one level");
    const int div = 1 << (levels - 1);
    if (base.width % div != 0 || base.height % div != 0)
        throw InputError("build_pyramid: base dims not divisible by 2^(levels-1)");
    if (base.data.size() != static_cast<std::size_t>(base.width) * base.height)
        throw InputError("build_pyramid: raster size mismatch");

    std::vector<PyramidLevel> out;
    out.reserve(levels);
    out.push_back({0, 1, base, cell_size_m * growth});
    for (int k = 1; k < levels; ++k) {
        const Raster2D& prev = out.back().features;
        Raster2D next{prev.width / 2, prev.height / 2, {}};
        next.data.resize(static_cast<std::size_t>(next.width) * next.height);
        for (int y = 0; y < next.height; ++y) {
            for (int x = 0; x < next.width; ++x) {
                next.data[static_cast<std::size_t>(y) * next.width + x] =
                    0.25 * (prev.at(2 * x, 2 * y) + prev.at(2 * x + 1, 2 * y) +
                            prev.at(2 * x, 2 * y + 1) + prev.at(2 * x + 1, 2 * y + 1));
            }
        }
        const int stride = 1 << k;
        out.push_back({k, stride, std::move(next), stride * cell_size_m * growth});
    }
    return out;
}

DispatchTable assign_category_scales(const LabelTable& labels,
                                     const std::vector<PyramidLevel>& levels) {
    if (levels.empty()) throw InputError("assign_category_scales: no levels");
    if (labels.size() == 0) throw InputError("assign_category_scales: empty label table");
    for (std::size_t k = 1; k < levels.size(); ++k)
        if (levels[k].stride <= levels[k - 1].stride)
            throw InputError("assign_category_scales: strides must increase");

    DispatchTable table;
    for (const LabelEntry& e : labels.entries()) {
        const double target = 2.0 * e.characteristic_length_m;
        int chosen = static_cast<int>(levels.size()) - 1;  // coarsest fallback
        for (std::size_t k = 0; k < levels.size(); ++k) {
            if (levels[k].receptive_field_m >= target) {
                chosen = static_cast<int>(k);
                break;
            }
        }
        table.level_of_label[e.id] = chosen;
    }
    return table;
}

std::vector<std::vector<DispatchTarget>> dispatch_targets(
    const std::vector<Box3D>& boxes, const DispatchTable& table,
    const std::vector<PyramidLevel>& levels, double origin_x, double origin_y,
    double cell_size_m) {
    std::vector<std::vector<DispatchTarget>> out(levels.size());
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const Box3D& box = boxes[i];
        const auto it = table.level_of_label.find(box.label);
        if (it == table.level_of_label.end())
            throw InputError("dispatch_targets: label " + std::to_string(box.label) +
                             " missing from dispatch table");
        const int lvl = it->second;
        const PyramidLevel& level = levels[static_cast<std::size_t>(lvl)];
        const double cell = cell_size_m * level.stride;
        const int cx = static_cast<int>(std::floor((box.center.x - origin_x) / cell));
        const int cy = static_cast<int>(std::floor((box.center.y - origin_y) / cell));
        if (cx < 0 || cy < 0 || cx >= level.features.width || cy >= level.features.height)
            continue;  // out of range
        out[static_cast<std::size_t>(lvl)].push_back({static_cast<int>(i), cx, cy});
    }
    return out;
}

}  // namespace lidarpaint
