#include "lidarpaint/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "lidarpaint/errors.hpp"

namespace lidarpaint {

std::map<VoxelIndex, std::vector<int>> pillarize(const std::vector<AugmentedPoint>& points,
                                                 const GridConfig& grid) {
    if (!grid.valid()) throw InputError("invalid grid config");
    const auto dims = grid.dims();
    std::map<VoxelIndex, std::vector<int>> cells;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double coord[3] = {points[i].x, points[i].y, points[i].z};
        VoxelIndex idx{};
        bool in_range = true;
        for (int a = 0; a < 3 && in_range; ++a) {
            const int c = static_cast<int>(std::floor((coord[a] - grid.min[a]) / grid.voxel[a]));
            if (c < 0 || c >= dims[a] || coord[a] >= grid.max[a]) in_range = false;
            idx[a] = c;
        }
        if (in_range) cells[idx].push_back(static_cast<int>(i));
    }
    return cells;
}

std::vector<FeatureBlock> make_channel_blocks(const std::vector<AugmentedPoint>& points,
                                              int label_count) {
    const std::size_t n = points.size();
    FeatureBlock raw{4, std::vector<double>(n * 4, 0.0)};
    FeatureBlock semantic{label_count + 1, std::vector<double>(n * (label_count + 1), 0.0)};
    FeatureBlock offset{3, std::vector<double>(n * 3, 0.0)};

    for (std::size_t i = 0; i < n; ++i) {
        const AugmentedPoint& p = points[i];
        raw.values[i * 4 + 0] = p.x;
        raw.values[i * 4 + 1] = p.y;
        raw.values[i * 4 + 2] = p.z;
        raw.values[i * 4 + 3] = p.r;
        if (p.s >= 0 && p.s <= label_count)
            semantic.values[i * (label_count + 1) + p.s] = 1.0;
        if (p.painted()) {
            offset.values[i * 3 + 0] = p.cx - p.x;
            offset.values[i * 3 + 1] = p.cy - p.y;
            offset.values[i * 3 + 2] = p.cz - p.z;
        }
    }
    return {std::move(raw), std::move(semantic), std::move(offset)};
}

AttentionStage make_attention_stage(int in_width, int hidden, int num_blocks,
                                    std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-0.1, 0.1);
    AttentionStage s;
    s.in_width = in_width;
    s.hidden = hidden;
    s.num_blocks = num_blocks;
    s.w1.resize(static_cast<std::size_t>(hidden) * in_width);
    s.b1.resize(hidden);
    s.w2.resize(static_cast<std::size_t>(num_blocks) * hidden);
    s.b2.resize(num_blocks);
    for (auto* v : {&s.w1, &s.b1, &s.w2, &s.b2})
        for (double& x : *v) x = dist(rng);
    return s;
}

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void check_blocks(const std::vector<FeatureBlock>& blocks, const AttentionStage& stage) {
    if (blocks.empty()) throw InputError("attention_forward: no blocks");
    const std::size_t n = blocks.front().rows();
    int total = 0;
    for (const auto& b : blocks) {
        if (b.rows() != n) throw InputError("attention_forward: block row counts differ");
        total += b.width;
    }
    if (total != stage.in_width)
        throw InputError("attention_forward: concatenated width " + std::to_string(total) +
                         " does not match stage input " + std::to_string(stage.in_width));
    if (static_cast<int>(blocks.size()) != stage.num_blocks)
        throw InputError("attention_forward: block count does not match stage");
}

/// Everything the backward pass needs from one stage's forward run.
struct StageTape {
    std::vector<double> x;    // n x in_width
    std::vector<double> z1;   // n x hidden
    std::vector<double> h;    // n x hidden
    std::vector<double> mask; // n x num_blocks
    FeatureBlock out;
};

StageTape forward_stage(const std::vector<FeatureBlock>& blocks, const AttentionStage& stage) {
    check_blocks(blocks, stage);
    const std::size_t n = blocks.front().rows();
    int common = 0;
    for (const auto& b : blocks) common = std::max(common, b.width);

    StageTape tape;
    tape.x.resize(n * stage.in_width);
    tape.z1.resize(n * stage.hidden);
    tape.h.resize(n * stage.hidden);
    tape.mask.resize(n * stage.num_blocks);
    tape.out.width = common;
    tape.out.values.assign(n * common, 0.0);

    for (std::size_t p = 0; p < n; ++p) {
        double* x = &tape.x[p * stage.in_width];
        int col = 0;
        for (const auto& b : blocks)
            for (int j = 0; j < b.width; ++j) x[col++] = b.at(p, j);

        for (int i = 0; i < stage.hidden; ++i) {
            double acc = stage.b1[i];
            const double* row = &stage.w1[static_cast<std::size_t>(i) * stage.in_width];
            for (int j = 0; j < stage.in_width; ++j) acc += row[j] * x[j];
            tape.z1[p * stage.hidden + i] = acc;
            tape.h[p * stage.hidden + i] = acc > 0.0 ? acc : 0.0;
        }
        for (int k = 0; k < stage.num_blocks; ++k) {
            double acc = stage.b2[k];
            const double* row = &stage.w2[static_cast<std::size_t>(k) * stage.hidden];
            for (int i = 0; i < stage.hidden; ++i) acc += row[i] * tape.h[p * stage.hidden + i];
            tape.mask[p * stage.num_blocks + k] = logistic(acc);
        }
        for (int k = 0; k < stage.num_blocks; ++k) {
            const double m = tape.mask[p * stage.num_blocks + k];
            const FeatureBlock& b = blocks[static_cast<std::size_t>(k)];
            for (int j = 0; j < b.width; ++j)
                tape.out.values[p * common + j] += m * b.at(p, j);
        }
    }
    return tape;
}

}  // namespace

AttentionOutput attention_forward(const std::vector<FeatureBlock>& blocks,
                                  const AttentionStage& stage) {
    StageTape tape = forward_stage(blocks, stage);
    return {std::move(tape.out), std::move(tape.mask)};
}

FeatureBlock cascaded_fuse(const std::vector<FeatureBlock>& blocks,
                           const std::vector<AttentionStage>& stages) {
    if (stages.empty()) throw InputError("cascaded_fuse: need at least one stage");
    if (blocks.empty() || blocks.front().width != 4)
        throw InputError("cascaded_fuse: blocks[0] must be the 4-wide raw block");

    std::vector<FeatureBlock> current = blocks;
    FeatureBlock fused;
    for (const AttentionStage& stage : stages) {
        fused = attention_forward(current, stage).fused;
        current.push_back(fused);
    }

    // Skip connection: append the raw point fields.
    const FeatureBlock& raw = blocks.front();
    const std::size_t n = raw.rows();
    FeatureBlock out{fused.width + 4, std::vector<double>(n * (fused.width + 4), 0.0)};
    for (std::size_t p = 0; p < n; ++p) {
        for (int j = 0; j < fused.width; ++j) out.values[p * out.width + j] = fused.at(p, j);
        for (int j = 0; j < 4; ++j) out.values[p * out.width + fused.width + j] = raw.at(p, j);
    }
    return out;
}

std::vector<AttentionStage> make_cascade(int label_count, int depth, int hidden,
                                         std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const int base_widths[3] = {4, label_count + 1, 3};
    int in_width = base_widths[0] + base_widths[1] + base_widths[2];
    int common = std::max({base_widths[0], base_widths[1], base_widths[2]});
    int blocks = 3;
    std::vector<AttentionStage> stages;
    for (int k = 0; k < depth; ++k) {
        stages.push_back(make_attention_stage(in_width, hidden, blocks, rng));
        in_width += common;  // next stage also sees this stage's fused output
        blocks += 1;
    }
    return stages;
}

std::vector<double> flatten_params(const std::vector<AttentionStage>& stages) {
    std::vector<double> out;
    for (const auto& s : stages) {
        out.insert(out.end(), s.w1.begin(), s.w1.end());
        out.insert(out.end(), s.b1.begin(), s.b1.end());
        out.insert(out.end(), s.w2.begin(), s.w2.end());
        out.insert(out.end(), s.b2.begin(), s.b2.end());
    }
    return out;
}

void set_params(std::vector<AttentionStage>& stages, const std::vector<double>& params) {
    std::size_t pos = 0;
    for (auto& s : stages) {
        for (auto* v : {&s.w1, &s.b1, &s.w2, &s.b2}) {
            if (pos + v->size() > params.size())
                throw InputError("set_params: parameter vector too short");
            std::copy(params.begin() + pos, params.begin() + pos + v->size(), v->begin());
            pos += v->size();
        }
    }
    if (pos != params.size()) throw InputError("set_params: parameter vector too long");
}

double cascade_loss(const std::vector<FeatureBlock>& blocks,
                    const std::vector<AttentionStage>& stages,
                    const FeatureBlock& cotangent) {
    std::vector<FeatureBlock> current = blocks;
    FeatureBlock fused;
    for (const AttentionStage& stage : stages) {
        fused = attention_forward(current, stage).fused;
        current.push_back(fused);
    }
    if (cotangent.width != fused.width || cotangent.values.size() != fused.values.size())
        throw InputError("cascade_loss: cotangent shape mismatch");
    double loss = 0.0;
    for (std::size_t i = 0; i < fused.values.size(); ++i)
        loss += cotangent.values[i] * fused.values[i];
    return loss;
}

std::vector<double> cascade_gradient(const std::vector<FeatureBlock>& blocks,
                                     const std::vector<AttentionStage>& stages,
                                     const FeatureBlock& cotangent) {
    const std::size_t n_stages = stages.size();
    std::vector<std::vector<FeatureBlock>> inputs(n_stages);  // blocks fed to each stage
    std::vector<StageTape> tapes;
    tapes.reserve(n_stages);

    std::vector<FeatureBlock> current = blocks;
    for (std::size_t k = 0; k < n_stages; ++k) {
        inputs[k] = current;
        tapes.push_back(forward_stage(current, stages[k]));
        current.push_back(tapes.back().out);
    }

    std::vector<AttentionStage> grads;
    for (const auto& s : stages) {
        AttentionStage g = s;
        std::fill(g.w1.begin(), g.w1.end(), 0.0);
        std::fill(g.b1.begin(), g.b1.end(), 0.0);
        std::fill(g.w2.begin(), g.w2.end(), 0.0);
        std::fill(g.b2.begin(), g.b2.end(), 0.0);
        grads.push_back(std::move(g));
    }

    // Cotangent accumulated on each stage's fused output. Stage k consumes
    // every earlier output as an input block, so gradient fans out to all of
    // them, not just the immediately preceding stage.
    const std::size_t base_blocks = blocks.size();
    std::vector<FeatureBlock> out_cotangent(n_stages);
    for (std::size_t k = 0; k < n_stages; ++k) {
        out_cotangent[k].width = tapes[k].out.width;
        out_cotangent[k].values.assign(tapes[k].out.values.size(), 0.0);
    }
    if (cotangent.width != out_cotangent.back().width ||
        cotangent.values.size() != out_cotangent.back().values.size())
        throw InputError("cascade_gradient: cotangent shape mismatch");
    out_cotangent.back() = cotangent;

    for (std::size_t k = n_stages; k-- > 0;) {
        const AttentionStage& stage = stages[k];
        const StageTape& tape = tapes[k];
        const std::vector<FeatureBlock>& in_blocks = inputs[k];
        const std::size_t n = in_blocks.front().rows();
        const int common = tape.out.width;
        const FeatureBlock& upstream = out_cotangent[k];

        std::vector<int> col_offset(in_blocks.size(), 0);
        for (std::size_t b = 1; b < in_blocks.size(); ++b)
            col_offset[b] = col_offset[b - 1] + in_blocks[b - 1].width;

        std::vector<double> dz1(stage.hidden);
        std::vector<double> dz2(stage.num_blocks);
        for (std::size_t p = 0; p < n; ++p) {
            const double* dout = &upstream.values[p * common];
            const double* x = &tape.x[p * stage.in_width];
            const double* h = &tape.h[p * stage.hidden];
            const double* mask = &tape.mask[p * stage.num_blocks];

            // dL/dm_b = dout . padded block b ; dz2 through the logistic
            for (int b = 0; b < stage.num_blocks; ++b) {
                const FeatureBlock& blk = in_blocks[static_cast<std::size_t>(b)];
                double dm = 0.0;
                for (int j = 0; j < blk.width; ++j) dm += dout[j] * blk.at(p, j);
                dz2[b] = dm * mask[b] * (1.0 - mask[b]);
            }
            for (int b = 0; b < stage.num_blocks; ++b) {
                grads[k].b2[b] += dz2[b];
                double* wrow = &grads[k].w2[static_cast<std::size_t>(b) * stage.hidden];
                for (int i = 0; i < stage.hidden; ++i) wrow[i] += dz2[b] * h[i];
            }
            for (int i = 0; i < stage.hidden; ++i) {
                double dh = 0.0;
                for (int b = 0; b < stage.num_blocks; ++b)
                    dh += stage.w2[static_cast<std::size_t>(b) * stage.hidden + i] * dz2[b];
                dz1[i] = tape.z1[p * stage.hidden + i] > 0.0 ? dh : 0.0;
            }
            for (int i = 0; i < stage.hidden; ++i) {
                grads[k].b1[i] += dz1[i];
                double* wrow = &grads[k].w1[static_cast<std::size_t>(i) * stage.in_width];
                for (int j = 0; j < stage.in_width; ++j) wrow[j] += dz1[i] * x[j];
            }

            // Earlier stage outputs receive gradient through their MLP input
            // slice and through the mask-weighted sum.
            for (std::size_t b = base_blocks; b < in_blocks.size(); ++b) {
                const std::size_t producer = b - base_blocks;
                const FeatureBlock& blk = in_blocks[b];
                double* dprev = &out_cotangent[producer].values[p * blk.width];
                for (int j = 0; j < blk.width; ++j) {
                    double dx_j = 0.0;
                    for (int i = 0; i < stage.hidden; ++i)
                        dx_j += stage.w1[static_cast<std::size_t>(i) * stage.in_width +
                                         col_offset[b] + j] * dz1[i];
                    dprev[j] += dx_j + mask[b] * dout[j];
                }
            }
        }
    }

    return flatten_params(grads);
}

std::vector<double> numerical_gradient(
    const std::function<double(const std::vector<double>&)>& fn,
    std::vector<double> params, double h) {
    if (!(h > 0.0)) throw InputError("numerical_gradient: step must be positive");
    std::vector<double> grad(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double orig = params[i];
        params[i] = orig + h;
        const double fp = fn(params);
        params[i] = orig - h;
        const double fm = fn(params);
        params[i] = orig;
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

}  // namespace lidarpaint
