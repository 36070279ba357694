#include "lidarpaint/refiner.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "lidarpaint/errors.hpp"

namespace lidarpaint {

namespace {

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

DbscanResult dbscan(std::span<const Vec3> points, const ClusterParams& params) {
    if (!params.valid()) throw InputError("invalid cluster params");
    const int n = static_cast<int>(points.size());
    const double eps2 = params.eps * params.eps;

    DbscanResult out;
    out.assignment.assign(points.size(), -1);
    out.noise.assign(points.size(), false);
    if (n == 0) return out;

    // Pass 1: neighbor counts (self included) -> core flags.
    std::vector<int> degree(points.size(), 1);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (squared_distance(points[i], points[j]) <= eps2) {
                ++degree[i];
                ++degree[j];
            }
        }
    }
    std::vector<bool> core(points.size());
    for (int i = 0; i < n; ++i) core[i] = degree[i] >= params.min_pts;

    // Pass 2: connect core points within eps.
    UnionFind uf(points.size());
    for (int i = 0; i < n; ++i) {
        if (!core[i]) continue;
        for (int j = i + 1; j < n; ++j) {
            if (core[j] && squared_distance(points[i], points[j]) <= eps2)
                uf.unite(i, j);
        }
    }

    std::vector<int> provisional(points.size(), -1);
    std::vector<int> cluster_of_root(points.size(), -1);
    int next = 0;
    for (int i = 0; i < n; ++i) {
        if (!core[i]) continue;
        const int root = uf.find(i);
        if (cluster_of_root[root] < 0) cluster_of_root[root] = next++;
        provisional[i] = cluster_of_root[root];
    }
    out.cluster_count = next;

    // Pass 3: border points join the cluster of their smallest-index core
    // neighbor; the rest is noise.
    for (int i = 0; i < n; ++i) {
        if (core[i]) continue;
        int owner = -1;
        for (int j = 0; j < n; ++j) {
            if (core[j] && squared_distance(points[i], points[j]) <= eps2) {
                owner = j;
                break;
            }
        }
        if (owner >= 0) {
            provisional[i] = provisional[owner];
        } else {
            out.noise[i] = true;
        }
    }

    // Renumber by smallest member index (border points included).
    std::vector<int> first_member(next, n);
    for (int i = 0; i < n; ++i)
        if (provisional[i] >= 0) first_member[provisional[i]] = std::min(first_member[provisional[i]], i);
    std::vector<int> order(next);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return first_member[a] < first_member[b]; });
    std::vector<int> remap(next);
    for (int k = 0; k < next; ++k) remap[order[k]] = k;
    for (int i = 0; i < n; ++i)
        if (provisional[i] >= 0) out.assignment[i] = remap[provisional[i]];
    return out;
}

int medoid(std::span<const Vec3> points) {
    if (points.empty()) throw InputError("medoid of empty set");
    const int n = static_cast<int>(points.size());
    std::vector<double> total(points.size(), 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double d = distance(points[i], points[j]);
            total[i] += d;
            total[j] += d;
        }
    }
    int best = 0;
    for (int i = 1; i < n; ++i)
        if (total[i] < total[best]) best = i;
    return best;
}

const Cluster& select_salient(const std::vector<Cluster>& clusters) {
    if (clusters.empty()) throw InputError("select_salient on empty cluster list");
    auto score = [](const Cluster& c) {
        return static_cast<double>(c.count()) / (1.0 + c.ego_distance);
    };
    const Cluster* best = &clusters.front();
    for (const Cluster& c : clusters) {
        const double sc = score(c), sb = score(*best);
        if (sc > sb ||
            (sc == sb && (c.ego_distance < best->ego_distance ||
                          (c.ego_distance == best->ego_distance &&
                           c.medoid_index < best->medoid_index)))) {
            best = &c;
        }
    }
    return *best;
}

ClusterParams params_for_label(const LabelTable& labels, int label,
                               const RefinerConfig& config) {
    ClusterParams p;
    p.min_pts = config.min_pts;
    p.eps = std::clamp(config.eps_scale * labels.entry(label).characteristic_length_m,
                       config.eps_min_m, config.eps_max_m);
    return p;
}

Instance3DPrior refine_instance(const Instance3DPrior& prior,
                                const std::vector<LidarPoint>& points,
                                const ClusterParams& params) {
    if (prior.member_indices.empty()) throw InputError("refine_instance: empty prior");

    std::vector<Vec3> coords;
    coords.reserve(prior.member_indices.size());
    for (int idx : prior.member_indices) coords.push_back(points[idx].position());

    const DbscanResult clustering = dbscan(coords, params);

    Instance3DPrior refined = prior;
    if (clustering.cluster_count == 0) {
        const int local = medoid(coords);
        refined.center = coords[local];
        refined.low_confidence = true;
        return refined;
    }

    std::vector<Cluster> clusters(clustering.cluster_count);
    std::vector<std::vector<Vec3>> cluster_coords(clustering.cluster_count);
    for (std::size_t i = 0; i < coords.size(); ++i) {
        const int c = clustering.assignment[i];
        if (c < 0) continue;
        clusters[c].members.push_back(prior.member_indices[i]);
        cluster_coords[c].push_back(coords[i]);
    }
    for (int c = 0; c < clustering.cluster_count; ++c) {
        const int local = medoid(cluster_coords[c]);
        clusters[c].medoid_index = clusters[c].members[local];
        clusters[c].ego_distance = cluster_coords[c][local].norm();
    }

    const Cluster& salient = select_salient(clusters);
    refined.member_indices = salient.members;
    refined.center = points[salient.medoid_index].position();
    refined.low_confidence = false;
    return refined;
}

RefineResult refine_scene(const std::vector<Instance3DPrior>& priors,
                          const std::vector<LidarPoint>& points,
                          const LabelTable& labels,
                          const RefinerConfig& config) {
    RefineResult out;
    out.point_labels.assign(points.size(), 0);
    out.point_centers.assign(points.size(), Vec3{});
    out.point_instance.assign(points.size(), 0);
    out.priors.reserve(priors.size());

    for (const Instance3DPrior& prior : priors) {
        const ClusterParams params = params_for_label(labels, prior.label, config);
        Instance3DPrior refined = refine_instance(prior, points, params);
        out.evicted_count += prior.member_indices.size() - refined.member_indices.size();
        for (int idx : refined.member_indices) {
            out.point_labels[idx] = refined.label;
            out.point_centers[idx] = refined.center;
            out.point_instance[idx] = refined.instance_id;
        }
        out.priors.push_back(std::move(refined));
    }
    return out;
}

}  // namespace lidarpaint
