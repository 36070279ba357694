#include <doctest.h>

#include <algorithm>
#include <deque>
#include <map>
#include <random>
#include <set>

#include "lidarpaint/errors.hpp"
#include "lidarpaint/painter.hpp"
#include "lidarpaint/refiner.hpp"
#include "lidarpaint/synth.hpp"

using namespace lidarpaint;

namespace {

/// Reference DBSCAN: classic queue expansion over an explicit adjacency
/// matrix, with the same deterministic border rule (smallest-index core
/// neighbor). Kept independent of the production formulation.
std::vector<int> reference_dbscan(const std::vector<Vec3>& pts, double eps, int min_pts) {
    const int n = static_cast<int>(pts.size());
    const double eps2 = eps * eps;
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            adj[i][j] = squared_distance(pts[i], pts[j]) <= eps2;

    std::vector<bool> core(n, false);
    for (int i = 0; i < n; ++i) {
        int deg = 0;
        for (int j = 0; j < n; ++j) deg += adj[i][j];
        core[i] = deg >= min_pts;
    }

    std::vector<int> label(n, -1);
    int next = 0;
    for (int seed = 0; seed < n; ++seed) {
        if (!core[seed] || label[seed] >= 0) continue;
        std::deque<int> queue{seed};
        label[seed] = next;
        while (!queue.empty()) {
            const int p = queue.front();
            queue.pop_front();
            for (int q = 0; q < n; ++q) {
                if (!adj[p][q] || !core[q] || label[q] >= 0) continue;
                label[q] = next;
                queue.push_back(q);
            }
        }
        ++next;
    }
    for (int i = 0; i < n; ++i) {
        if (core[i]) continue;
        for (int j = 0; j < n; ++j) {
            if (core[j] && adj[i][j]) {
                label[i] = label[j];
                break;
            }
        }
    }
    // Renumber by smallest member index.
    std::map<int, int> remap;
    std::vector<int> order;
    for (int i = 0; i < n; ++i)
        if (label[i] >= 0 && !remap.count(label[i])) {
            remap[label[i]] = static_cast<int>(order.size());
            order.push_back(label[i]);
        }
    for (int i = 0; i < n; ++i)
        if (label[i] >= 0) label[i] = remap[label[i]];
    return label;
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return false;
    std::map<int, int> fwd, bwd;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if ((a[i] < 0) != (b[i] < 0)) return false;
        if (a[i] < 0) continue;
        if (fwd.count(a[i]) && fwd[a[i]] != b[i]) return false;
        if (bwd.count(b[i]) && bwd[b[i]] != a[i]) return false;
        fwd[a[i]] = b[i];
        bwd[b[i]] = a[i];
    }
    return true;
}

}  // namespace

TEST_CASE("dbscan clusters a tight blob") {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    std::vector<Vec3> pts;
    for (int i = 0; i < 10; ++i) pts.push_back({u(rng), u(rng), u(rng)});
    const auto result = dbscan(pts, {1.0, 3});
    CHECK(result.cluster_count == 1);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(result.assignment[i] == 0);
        CHECK_FALSE(result.noise[i]);
    }
}

TEST_CASE("dbscan separates two distant blobs") {
    std::mt19937_64 rng(52);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    std::vector<Vec3> pts;
    for (int i = 0; i < 20; ++i) pts.push_back({u(rng), u(rng), u(rng)});
    for (int i = 0; i < 20; ++i) pts.push_back({10.0 + u(rng), u(rng), u(rng)});
    const auto result = dbscan(pts, {1.0, 3});
    CHECK(result.cluster_count == 2);
    for (int i = 0; i < 20; ++i) CHECK(result.assignment[i] == 0);
    for (int i = 20; i < 40; ++i) CHECK(result.assignment[i] == 1);
}

TEST_CASE("two isolated points are noise") {
    const std::vector<Vec3> pts{{0, 0, 0}, {100, 0, 0}};
    const auto result = dbscan(pts, {1.0, 3});
    CHECK(result.cluster_count == 0);
    CHECK(result.noise[0]);
    CHECK(result.noise[1]);
}

TEST_CASE("dbscan matches the reference on random instances") {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 100; ++trial) {
        std::uniform_int_distribution<int> npts(1, 200);
        std::uniform_real_distribution<double> span(0.0, 20.0);
        std::uniform_real_distribution<double> eps_d(0.3, 3.0);
        std::uniform_int_distribution<int> minpts_d(1, 8);
        const int n = npts(rng);
        std::vector<Vec3> pts;
        std::uniform_real_distribution<double> u(0.0, 1.0);
        // A few gaussian clumps plus uniform scatter.
        const int clumps = 1 + static_cast<int>(u(rng) * 4);
        std::normal_distribution<double> g(0.0, 0.8);
        for (int i = 0; i < n; ++i) {
            if (u(rng) < 0.75) {
                const int c = static_cast<int>(u(rng) * clumps);
                pts.push_back({5.0 * c + g(rng), g(rng), 0.3 * g(rng)});
            } else {
                pts.push_back({span(rng), span(rng), span(rng) * 0.2});
            }
        }
        const double eps = eps_d(rng);
        const int min_pts = minpts_d(rng);
        const auto mine = dbscan(pts, {eps, min_pts});
        const auto ref = reference_dbscan(pts, eps, min_pts);
        CHECK(same_partition(mine.assignment, ref));
    }
}

TEST_CASE("medoid basics") {
    CHECK(medoid(std::vector<Vec3>{{3, 1, 4}}) == 0);
    CHECK(medoid(std::vector<Vec3>{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}) == 1);
    CHECK_THROWS_AS(medoid(std::vector<Vec3>{}), InputError);
}

TEST_CASE("medoid resists an outlier that drags the mean") {
    std::mt19937_64 rng(54);
    std::normal_distribution<double> g(0.0, 0.5);
    std::vector<Vec3> pts;
    for (int i = 0; i < 30; ++i) pts.push_back({g(rng), g(rng), g(rng)});
    pts.push_back({50, 0, 0});

    // Exhaustive pairwise-distance sums as the oracle.
    int best = -1;
    double best_sum = 1e300;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < pts.size(); ++j) sum += distance(pts[i], pts[j]);
        if (sum < best_sum) {
            best_sum = sum;
            best = static_cast<int>(i);
        }
    }
    const int m = medoid(pts);
    CHECK(m == best);
    CHECK(pts[static_cast<std::size_t>(m)].norm() < 2.0);

    Vec3 mean;
    for (const Vec3& p : pts) mean = mean + p;
    mean = mean / static_cast<double>(pts.size());
    CHECK(mean.norm() > 1.5);  // dragged toward the outlier
}

TEST_CASE("medoid index is invariant under rigid motion") {
    std::mt19937_64 rng(55);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<Vec3> pts;
    for (int i = 0; i < 40; ++i) pts.push_back({g(rng), g(rng), g(rng)});
    const int base = medoid(pts);

    const RigidTransform t = compose(RigidTransform::translation({4, -2, 7}),
                                     RigidTransform::axis_angle({1, 2, 3}, 1.1));
    std::vector<Vec3> moved;
    for (const Vec3& p : pts) moved.push_back(t.apply(p));
    CHECK(medoid(moved) == base);
}

TEST_CASE("select_salient ranks by count over distance") {
    Cluster a{{0, 1, 2}, 0, 10.0};
    SUBCASE("single cluster") {
        const std::vector<Cluster> clusters{a};
        CHECK(&select_salient(clusters) == &clusters[0]);
    }
    SUBCASE("dominating cluster wins") {
        Cluster big{std::vector<int>(50, 0), 0, 10.0};
        Cluster small{std::vector<int>(20, 0), 1, 30.0};
        const std::vector<Cluster> clusters{small, big};
        CHECK(select_salient(clusters).count() == 50);
    }
    SUBCASE("documented score formula") {
        Cluster near{std::vector<int>(30, 0), 0, 5.0};   // score 5.0
        Cluster far{std::vector<int>(40, 0), 1, 40.0};   // score ~0.98
        const std::vector<Cluster> clusters{far, near};
        CHECK(select_salient(clusters).ego_distance == 5.0);
    }
    SUBCASE("empty input rejected") {
        CHECK_THROWS_AS(select_salient({}), InputError);
    }
}

TEST_CASE("params_for_label scales eps with the characteristic length") {
    const LabelTable table = LabelTable::default_table();
    CHECK(params_for_label(table, 1).eps == doctest::Approx(1.125));  // car 4.5
    CHECK(params_for_label(table, 9).eps == doctest::Approx(0.3));    // cone clamps up
    CHECK(params_for_label(table, 3).eps == doctest::Approx(1.5));    // bus clamps down
    CHECK(params_for_label(table, 1).min_pts == 4);
}

namespace {

Instance3DPrior make_prior(const std::vector<int>& members,
                           const std::vector<LidarPoint>& points, int label) {
    Instance3DPrior prior;
    prior.instance_id = 1;
    prior.label = label;
    prior.score = 1.0;
    prior.member_indices = members;
    Vec3 sum;
    for (int idx : members) sum = sum + points[static_cast<std::size_t>(idx)].position();
    prior.center = sum / static_cast<double>(members.size());
    return prior;
}

}  // namespace

TEST_CASE("refine_instance keeps a compact prior and moves center to medoid") {
    std::mt19937_64 rng(56);
    std::normal_distribution<double> g(0.0, 0.3);
    std::vector<LidarPoint> points;
    std::vector<int> members;
    for (int i = 0; i < 60; ++i) {
        points.push_back({10.0 + g(rng), g(rng), g(rng), 0.5});
        members.push_back(i);
    }
    const auto prior = make_prior(members, points, 1);
    const auto refined = refine_instance(prior, points, {1.0, 4});
    CHECK(refined.member_indices == prior.member_indices);
    CHECK_FALSE(refined.low_confidence);
    // Center is one of the member points.
    bool is_member_point = false;
    for (int idx : refined.member_indices)
        is_member_point |= distance(points[static_cast<std::size_t>(idx)].position(),
                                    refined.center) == 0.0;
    CHECK(is_member_point);
}

TEST_CASE("refine_instance evicts a background cluster behind the object") {
    std::mt19937_64 rng(57);
    std::normal_distribution<double> g(0.0, 0.4);
    std::vector<LidarPoint> points;
    std::vector<int> members;
    const Vec3 gt_center{12, 0, 1};
    for (int i = 0; i < 80; ++i) {
        points.push_back({gt_center.x + g(rng), gt_center.y + g(rng), gt_center.z + g(rng), 0.5});
        members.push_back(i);
    }
    for (int i = 0; i < 25; ++i) {  // building points 15 m behind
        points.push_back({27.0 + g(rng), g(rng), 1.0 + g(rng), 0.5});
        members.push_back(80 + i);
    }
    const auto prior = make_prior(members, points, 1);
    const double mean_err = distance(prior.center, gt_center);

    const auto refined = refine_instance(prior, points, {1.0, 4});
    CHECK(refined.member_indices.size() == 80);
    for (int idx : refined.member_indices) CHECK(idx < 80);
    CHECK(distance(refined.center, gt_center) < mean_err);
}

TEST_CASE("refine_instance keeps a degenerate prior with low confidence") {
    const std::vector<LidarPoint> points{{5, 0, 0, 0.1}, {5.2, 0, 0, 0.1}};
    const auto prior = make_prior({0, 1}, points, 6);
    const auto refined = refine_instance(prior, points, {0.5, 4});
    CHECK(refined.member_indices == prior.member_indices);
    CHECK(refined.low_confidence);
    CHECK(distance(refined.center, {5, 0, 0}) == 0.0);  // medoid, smallest index on tie
}

TEST_CASE("refine_instance never adds members") {
    std::mt19937_64 rng(58);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<LidarPoint> points;
        std::vector<int> members;
        const int n = 5 + static_cast<int>(u(rng) + 5.0) * 10;
        for (int i = 0; i < n; ++i) {
            points.push_back({u(rng), u(rng), u(rng), 0.5});
            members.push_back(i);
        }
        const auto prior = make_prior(members, points, 1);
        const auto refined = refine_instance(prior, points, {0.8, 4});
        std::set<int> original(members.begin(), members.end());
        for (int idx : refined.member_indices) CHECK(original.count(idx) == 1);
    }
}

TEST_CASE("refine_scene with zero priors leaves every point unpainted") {
    const std::vector<LidarPoint> points{{1, 2, 3, 0.5}, {2, 2, 3, 0.5}};
    const auto result = refine_scene({}, points, LabelTable::default_table());
    CHECK(result.priors.empty());
    for (int s : result.point_labels) CHECK(s == 0);
    for (int id : result.point_instance) CHECK(id == 0);
}

TEST_CASE("medoid beats mean on contaminated priors") {
    // 100 seeded priors with up to 20% frustum contamination; the medoid must
    // be at least as close to the true center in >= 95 of them.
    std::mt19937_64 rng(59);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    int medoid_wins = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const Vec3 center{8.0 + 30.0 * u(rng), -10.0 + 20.0 * u(rng), 1.0};
        const int n_clean = 40 + static_cast<int>(u(rng) * 200);
        // Contamination between 5% and 20% of the prior.
        const double frac = 0.05 + 0.15 * u(rng);
        const int n_dirty = std::max(1, static_cast<int>(n_clean * frac / (1.0 - frac)));
        std::vector<Vec3> pts;
        for (int i = 0; i < n_clean; ++i)
            pts.push_back({center.x + 1.1 * g(rng), center.y + 0.5 * g(rng),
                           center.z + 0.4 * g(rng)});
        const Vec3 dir = center.normalized();
        for (int i = 0; i < n_dirty; ++i) {
            const double behind = 10.0 + 15.0 * u(rng);
            pts.push_back({center.x + dir.x * behind + g(rng),
                           center.y + dir.y * behind + g(rng),
                           center.z + 0.5 * g(rng)});
        }
        Vec3 mean;
        for (const Vec3& p : pts) mean = mean + p;
        mean = mean / static_cast<double>(pts.size());
        const Vec3 med = pts[static_cast<std::size_t>(medoid(pts))];
        if (distance(med, center) <= distance(mean, center)) ++medoid_wins;
    }
    CHECK(medoid_wins >= 95);
}

TEST_CASE("refinement does not hurt label accuracy on a jittered scene") {
    int improved_or_equal = 0;
    for (int trial = 0; trial < 10; ++trial) {
        SceneSpec spec;
        spec.box_count = 5;
        spec.background_points = 2000;
        spec.seed = 500 + trial;
        SyntheticScene scene = generate_scene(spec);
        NoiseSpec noise;
        noise.rotation_jitter_deg = 0.5;
        noise.occluder_walls = 2;
        scene = apply_noise(scene, noise, 700 + trial);

        const auto gt_labels = gt_point_labels(scene);
        const auto paint = paint_scene(scene.points, scene.rig, scene.masks);
        const auto refined = refine_scene(paint.priors, scene.points, scene.labels);

        std::size_t painted_before = 0, correct_before = 0;
        std::size_t painted_after = 0, correct_after = 0;
        for (std::size_t i = 0; i < scene.points.size(); ++i) {
            if (paint.point_labels[i] != 0) {
                ++painted_before;
                if (paint.point_labels[i] == gt_labels[i]) ++correct_before;
            }
            if (refined.point_labels[i] != 0) {
                ++painted_after;
                if (refined.point_labels[i] == gt_labels[i]) ++correct_after;
            }
        }
        REQUIRE(painted_before > 0);
        const double before = static_cast<double>(correct_before) / painted_before;
        const double after = painted_after == 0
                                 ? 1.0
                                 : static_cast<double>(correct_after) / painted_after;
        if (after >= before) ++improved_or_equal;
    }
    CHECK(improved_or_equal >= 9);
}
