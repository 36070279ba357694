#include "lidarpaint/sweeps.hpp"

#include <map>
#include <string>
#include <tuple>

#include "lidarpaint/errors.hpp"

namespace lidarpaint {

std::vector<LidarPoint> stack_sweeps(const std::vector<Sweep>& sweeps,
                                     std::size_t keyframe_index,
                                     const CalibrationRig& rig) {
    if (sweeps.empty()) throw InputError("empty sweep list");
    if (keyframe_index >= sweeps.size()) throw InputError("keyframe index out of range");
    if (!rig.lidar_to_ego.is_rigid()) throw InputError("lidar_to_ego is not rigid");
    for (const auto& s : sweeps)
        if (!s.ego_pose.is_rigid()) throw InputError("sweep ego pose is not rigid");

    const Sweep& key = sweeps[keyframe_index];
    const RigidTransform global_to_key = key.ego_pose.inverse();

    std::size_t total = 0;
    for (const auto& s : sweeps) total += s.points.size();
    std::vector<LidarPoint> out;
    out.reserve(total);

    for (const auto& s : sweeps) {
        const RigidTransform key_from_sweep = compose(global_to_key, s.ego_pose);
        const RigidTransform full = compose(key_from_sweep, rig.lidar_to_ego);
        const double offset = key.timestamp - s.timestamp;
        if (full.is_identity()) {
            for (const auto& p : s.points) {
                LidarPoint q = p;
                q.sweep_offset = offset;
                out.push_back(q);
            }
        } else {
            for (const auto& p : s.points) {
                const Vec3 q = full.apply(p.position());
                out.push_back({q.x, q.y, q.z, p.r, offset});
            }
        }
    }
    return out;
}

std::vector<AugmentedPoint> assemble_augmented(const std::vector<LidarPoint>& points,
                                               const std::vector<int>& labels,
                                               const std::vector<Vec3>& centers,
                                               const std::vector<int>& instance_ids) {
    const std::size_t n = points.size();
    if (labels.size() != n || centers.size() != n || instance_ids.size() != n)
        throw InputError("assemble_augmented: input lengths differ");

    std::map<int, std::tuple<int, double, double, double>> seen;
    std::vector<AugmentedPoint> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int id = instance_ids[i];
        const int s = labels[i];
        const Vec3& c = centers[i];
        if (id == 0) {
            if (s != 0 || c.x != 0.0 || c.y != 0.0 || c.z != 0.0)
                throw InputError("point " + std::to_string(i) +
                                 ": instance_id 0 requires label 0 and zero center");
        } else {
            auto fields = std::make_tuple(s, c.x, c.y, c.z);
            auto [it, inserted] = seen.emplace(id, fields);
            if (!inserted && it->second != fields)
                throw InputError("instance " + std::to_string(id) +
                                 ": points disagree on (label, center)");
        }
        const LidarPoint& p = points[i];
        out.push_back({p.x, p.y, p.z, p.r, s, c.x, c.y, c.z, id});
    }
    return out;
}

}  // namespace lidarpaint
