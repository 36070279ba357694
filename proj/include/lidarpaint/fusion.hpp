#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <vector>

#include "lidarpaint/types.hpp"

namespace lidarpaint {

/// Axis-aligned detection grid: per-axis range and voxel size.
/// Grid dimensions are ceil((max - min) / size) per axis.
struct GridConfig {
    std::array<double, 3> min{-51.2, -51.2, -5.0};
    std::array<double, 3> max{51.2, 51.2, 3.0};
    std::array<double, 3> voxel{0.2, 0.2, 8.0};

    bool valid() const {
        for (int a = 0; a < 3; ++a)
            if (!(max[a] > min[a]) || !(voxel[a] > 0.0)) return false;
        return true;
    }
    std::array<int, 3> dims() const {
        std::array<int, 3> d{};
        for (int a = 0; a < 3; ++a)
            d[a] = static_cast<int>(std::ceil((max[a] - min[a]) / voxel[a]));
        return d;
    }
};

using VoxelIndex = std::array<int, 3>;

/// Bucket points into grid cells: index = floor((coord - min) / size) per
/// axis; out-of-range points are dropped. In-range points are partitioned.
std::map<VoxelIndex, std::vector<int>> pillarize(const std::vector<AugmentedPoint>& points,
                                                 const GridConfig& grid);

/// Per-point feature block: n rows of `width` values, row-major.
struct FeatureBlock {
    int width = 0;
    std::vector<double> values;

    std::size_t rows() const { return width > 0 ? values.size() / width : 0; }
    double at(std::size_t row, int col) const { return values[row * width + col]; }
};

/// Build the three input channel blocks from painted points: raw (x,y,z,r),
/// semantic one-hot over label ids 0..label_count, and center offset
/// (center - position, zero for unpainted points).
std::vector<FeatureBlock> make_channel_blocks(const std::vector<AugmentedPoint>& points,
                                              int label_count);

/// One channel-attention stage: a two-layer MLP (rectifier hidden layer) over
/// the concatenated blocks emits one logit per block; the logistic of each
/// logit weighs that block in the fused sum.
struct AttentionStage {
    int in_width = 0;
    int hidden = 0;
    int num_blocks = 0;
    std::vector<double> w1;  // hidden x in_width, row-major
    std::vector<double> b1;  // hidden
    std::vector<double> w2;  // num_blocks x hidden, row-major
    std::vector<double> b2;  // num_blocks

    std::size_t param_count() const {
        return w1.size() + b1.size() + w2.size() + b2.size();
    }
};

/// Fixture weights: seeded uniform(-0.1, 0.1). Training is out of scope.
AttentionStage make_attention_stage(int in_width, int hidden, int num_blocks,
                                    std::mt19937_64& rng);

struct AttentionOutput {
    FeatureBlock fused;               // width = max block width
    std::vector<double> mask;         // n x num_blocks, entries in (0,1)
};

/// mask = logistic(MLP(concat(blocks))); output = sum_b mask_b * block_b with
/// blocks zero-padded to the widest. Throws InputError on row-count or width
/// mismatch with the stage.
AttentionOutput attention_forward(const std::vector<FeatureBlock>& blocks,
                                  const AttentionStage& stage);

/// Stage k consumes stage k-1's fused output as an extra block; the final
/// output is concatenated with the raw (x,y,z,r) block (skip connection).
/// blocks[0] must be the 4-wide raw block.
FeatureBlock cascaded_fuse(const std::vector<FeatureBlock>& blocks,
                           const std::vector<AttentionStage>& stages);

/// Convenience: stages sized for make_channel_blocks output.
std::vector<AttentionStage> make_cascade(int label_count, int depth, int hidden,
                                         std::uint64_t seed);

/// Flatten / restore stage parameters (w1, b1, w2, b2 per stage, in order).
std::vector<double> flatten_params(const std::vector<AttentionStage>& stages);
void set_params(std::vector<AttentionStage>& stages, const std::vector<double>& params);

/// d(loss)/d(params) for loss = sum_{points,cols} cotangent * fused_output,
/// computed by backprop through every cascaded stage.
std::vector<double> cascade_gradient(const std::vector<FeatureBlock>& blocks,
                                     const std::vector<AttentionStage>& stages,
                                     const FeatureBlock& cotangent);

/// Loss value matching cascade_gradient, before the skip concatenation.
double cascade_loss(const std::vector<FeatureBlock>& blocks,
                    const std::vector<AttentionStage>& stages,
                    const FeatureBlock& cotangent);

/// Central finite differences of fn at params, step h per coordinate.
std::vector<double> numerical_gradient(
    const std::function<double(const std::vector<double>&)>& fn,
    std::vector<double> params, double h);

}  // namespace lidarpaint
