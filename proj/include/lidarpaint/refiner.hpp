#pragma once

#include <span>
#include <vector>

#include "lidarpaint/instance_mask.hpp"
#include "lidarpaint/types.hpp"

namespace lidarpaint {

struct ClusterParams {
    double eps = 0.5;  // meters
    int min_pts = 4;

    bool valid() const { return eps > 0.0 && min_pts >= 1; }
};

/// One density cluster inside a prior's member set.
struct Cluster {
    std::vector<int> members;  // indices into the cloud
    int medoid_index = -1;     // member index (into the cloud)
    double ego_distance = 0.0; // medoid distance to the ego origin

    std::size_t count() const { return members.size(); }
};

struct DbscanResult {
    std::vector<int> assignment;  // per input point: cluster id or -1 for noise
    std::vector<bool> noise;
    int cluster_count = 0;
};

/// Density clustering with fully deterministic semantics:
///   - neighbors: Euclidean distance <= eps, the point itself included;
///   - core point: at least min_pts neighbors;
///   - clusters: connected components of core points, plus border points
///     (non-core with a core neighbor), each border point joining the
///     cluster of its smallest-index core neighbor;
///   - everything else is noise.
/// Clusters are numbered 0,1,... by smallest member index. O(n^2); priors
/// are small, so no spatial index.
DbscanResult dbscan(std::span<const Vec3> points, const ClusterParams& params);

/// Index of the member minimizing the summed Euclidean distance to all other
/// members; ties break to the smallest index. Throws InputError when empty.
int medoid(std::span<const Vec3> points);

/// The cluster with the most points and nearest the ego vehicle, ranked by
/// score = count / (1 + ego_distance); ties by smaller ego distance, then
/// smaller medoid index. Throws InputError when empty.
const Cluster& select_salient(const std::vector<Cluster>& clusters);

struct RefinerConfig {
    double eps_scale = 0.25;  // eps = scale * characteristic length
    double eps_min_m = 0.3;
    double eps_max_m = 1.5;
    int min_pts = 4;
};

ClusterParams params_for_label(const LabelTable& labels, int label,
                               const RefinerConfig& config = {});

/// Refine one prior: cluster its members and keep only the salient cluster,
/// with the cluster medoid as center. When every member is noise the prior
/// survives unchanged (small far objects must not vanish) with a
/// low-confidence flag and a whole-set medoid center.
Instance3DPrior refine_instance(const Instance3DPrior& prior,
                                const std::vector<LidarPoint>& points,
                                const ClusterParams& params);

struct RefineResult {
    std::vector<Instance3DPrior> priors;
    std::vector<int> point_labels;     // per point, 0 = unpainted
    std::vector<Vec3> point_centers;
    std::vector<int> point_instance;
    std::size_t evicted_count = 0;
};

/// Map refine_instance over all priors and assemble the final per-point
/// paint fields. Evicted points become unpainted.
RefineResult refine_scene(const std::vector<Instance3DPrior>& priors,
                          const std::vector<LidarPoint>& points,
                          const LabelTable& labels,
                          const RefinerConfig& config = {});

}  // namespace lidarpaint
