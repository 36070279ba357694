#include "lidarpaint/painter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "lidarpaint/errors.hpp"

namespace lidarpaint {

namespace {

/// Validates raster/record consistency and returns a dense id -> record map.
std::vector<const InstanceRecord*> check_mask(const InstanceMask& m) {
    std::vector<const InstanceRecord*> by_id(65536, nullptr);
    for (const auto& rec : m.records) {
        if (rec.id == 0) throw InputError("mask record with id 0");
        if (rec.label < 1) throw InputError("mask record with label < 1");
        if (!(rec.score >= 0.0 && rec.score <= 1.0))
            throw InputError("mask record score outside [0,1]");
        by_id[rec.id] = &rec;
    }
    if (m.raster.size() != static_cast<std::size_t>(m.width) * m.height)
        throw InputError("mask raster size does not match dimensions");
    for (std::size_t i = 0; i < m.raster.size(); ++i) {
        const std::uint16_t v = m.raster[i];
        if (v != 0 && by_id[v] == nullptr)
            throw InputError("raster value " + std::to_string(v) +
                             " in camera " + std::to_string(m.camera) +
                             " has no instance record");
    }
    return by_id;
}

double min_gap(const std::vector<int>& a, const std::vector<int>& b,
               const std::vector<LidarPoint>& points) {
    double best = std::numeric_limits<double>::infinity();
    for (int ia : a) {
        const Vec3 pa = points[ia].position();
        for (int ib : b) {
            best = std::min(best, squared_distance(pa, points[ib].position()));
        }
    }
    return std::sqrt(best);
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

}  // namespace

AssociationResult associate(const std::vector<LidarPoint>& points,
                            const std::vector<std::vector<PixelHit>>& hits,
                            const std::vector<InstanceMask>& masks) {
    if (hits.size() != points.size())
        throw InputError("associate: hits/points length mismatch");

    // camera index -> mask position, with per-mask record lookup
    int max_cam = -1;
    for (const auto& m : masks) max_cam = std::max(max_cam, m.camera);
    std::vector<int> mask_of_camera(static_cast<std::size_t>(max_cam) + 1, -1);
    std::vector<std::vector<const InstanceRecord*>> records(masks.size());
    for (std::size_t k = 0; k < masks.size(); ++k) {
        mask_of_camera[masks[k].camera] = static_cast<int>(k);
        records[k] = check_mask(masks[k]);
    }

    AssociationResult out;
    out.candidates.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (const PixelHit& h : hits[i]) {
            if (h.camera > max_cam || mask_of_camera[h.camera] < 0)
                throw InputError("no mask for camera " + std::to_string(h.camera));
            const int k = mask_of_camera[h.camera];
            const InstanceMask& m = masks[k];
            const int px = static_cast<int>(std::floor(h.u));
            const int py = static_cast<int>(std::floor(h.v));
            const std::uint16_t id = m.at(px, py);
            if (id == 0) continue;
            const InstanceRecord* rec = records[k][id];
            out.groups[{h.camera, id}].push_back(static_cast<int>(i));
            out.candidates[i].push_back({h.camera, id, rec->label, rec->score});
        }
    }
    return out;
}

std::vector<MaskCandidate> resolve_conflicts(
    const std::vector<std::vector<MaskCandidate>>& candidates) {
    std::vector<MaskCandidate> chosen(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const MaskCandidate* best = nullptr;
        for (const auto& c : candidates[i]) {
            if (best == nullptr || c.score > best->score ||
                (c.score == best->score && c.camera < best->camera)) {
                best = &c;
            }
        }
        if (best != nullptr) chosen[i] = *best;
    }
    return chosen;
}

std::vector<std::vector<GroupKey>> merge_truncated(
    const std::map<GroupKey, std::vector<int>>& groups,
    const std::vector<InstanceMask>& masks,
    const std::vector<LidarPoint>& points,
    std::size_t camera_count,
    double merge_gap_m) {
    std::vector<GroupKey> keys;
    keys.reserve(groups.size());
    for (const auto& [key, members] : groups) keys.push_back(key);

    std::vector<const InstanceMask*> mask_of_camera(camera_count, nullptr);
    for (const auto& m : masks)
        if (m.camera >= 0 && static_cast<std::size_t>(m.camera) < camera_count)
            mask_of_camera[m.camera] = &m;

    UnionFind uf(keys.size());
    if (camera_count >= 2) {
        for (std::size_t a = 0; a < keys.size(); ++a) {
            const auto [cam_a, id_a] = keys[a];
            const std::size_t cam_b = (static_cast<std::size_t>(cam_a) + 1) % camera_count;
            if (mask_of_camera[cam_a] == nullptr || mask_of_camera[cam_b] == nullptr)
                continue;
            const InstanceRecord* rec_a = mask_of_camera[cam_a]->record_for(id_a);
            if (rec_a == nullptr || !rec_a->touches_right) continue;
            for (std::size_t b = 0; b < keys.size(); ++b) {
                if (keys[b].first != static_cast<int>(cam_b)) continue;
                const InstanceRecord* rec_b = mask_of_camera[cam_b]->record_for(keys[b].second);
                if (rec_b == nullptr || !rec_b->touches_left) continue;
                if (rec_b->label != rec_a->label) continue;
                if (min_gap(groups.at(keys[a]), groups.at(keys[b]), points) < merge_gap_m)
                    uf.unite(static_cast<int>(a), static_cast<int>(b));
            }
        }
    }

    std::map<int, std::vector<GroupKey>> components;
    for (std::size_t i = 0; i < keys.size(); ++i)
        components[uf.find(static_cast<int>(i))].push_back(keys[i]);
    std::vector<std::vector<GroupKey>> out;
    out.reserve(components.size());
    for (auto& [root, ks] : components) out.push_back(std::move(ks));
    return out;
}

PaintResult paint_scene(const std::vector<LidarPoint>& points,
                        const CalibrationRig& rig,
                        const std::vector<InstanceMask>& masks,
                        const PainterConfig& config) {
    const auto hits = project_cloud(points, rig, config.z_min_m);
    const AssociationResult assoc = associate(points, hits, masks);
    const auto chosen = resolve_conflicts(assoc.candidates);

    // Rebuild groups from the per-point winners so each painted point sits in
    // exactly one group.
    std::map<GroupKey, std::vector<int>> groups;
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        if (chosen[i].instance_2d != 0)
            groups[{chosen[i].camera, chosen[i].instance_2d}].push_back(static_cast<int>(i));
    }

    const auto components = merge_truncated(groups, masks, points,
                                            rig.cameras.size(), config.merge_gap_m);

    PaintResult out;
    out.point_labels.assign(points.size(), 0);
    out.point_instance.assign(points.size(), 0);

    std::vector<Instance3DPrior> priors;
    priors.reserve(components.size());
    for (const auto& component : components) {
        Instance3DPrior prior;
        for (const GroupKey& key : component) {
            const InstanceMask* m = nullptr;
            for (const auto& cand : masks)
                if (cand.camera == key.first) m = &cand;
            const InstanceRecord* rec = m->record_for(key.second);
            prior.label = rec->label;
            prior.score = std::max(prior.score, rec->score);
            const auto& members = groups.at(key);
            prior.member_indices.insert(prior.member_indices.end(), members.begin(),
                                        members.end());
        }
        std::sort(prior.member_indices.begin(), prior.member_indices.end());
        Vec3 sum;
        for (int idx : prior.member_indices) sum = sum + points[idx].position();
        prior.center = sum / static_cast<double>(prior.member_indices.size());
        priors.push_back(std::move(prior));
    }

    // Scene-unique ids, numbered by smallest member index.
    std::sort(priors.begin(), priors.end(), [](const auto& a, const auto& b) {
        return a.member_indices.front() < b.member_indices.front();
    });
    for (std::size_t k = 0; k < priors.size(); ++k) {
        priors[k].instance_id = static_cast<int>(k) + 1;
        for (int idx : priors[k].member_indices) {
            out.point_labels[idx] = priors[k].label;
            out.point_instance[idx] = priors[k].instance_id;
        }
    }
    out.priors = std::move(priors);
    return out;
}

}  // namespace lidarpaint
