#include "lidarpaint/fp_augment.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>
#include <random>

#include <json.hpp>

#include "lidarpaint/errors.hpp"
#include "lidarpaint/io.hpp"

namespace lidarpaint {

std::vector<Box3D> mine_false_positives(const std::vector<Box3D>& detections,
                                        const std::vector<Box3D>& ground_truth,
                                        double iou_threshold) {
    if (!(iou_threshold >= 0.0 && iou_threshold < 1.0))
        throw InputError("iou_threshold must be in [0,1)");
    std::vector<Box3D> out;
    for (const Box3D& det : detections) {
        double best = 0.0;
        for (const Box3D& gt : ground_truth) best = std::max(best, bev_iou(det, gt));
        if (best < iou_threshold) out.push_back(det);
    }
    return out;
}

void FpDatabase::add(FpRecord record) {
    for (const LidarPoint& p : record.points) {
        if (std::abs(p.x) > 0.5 * record.box.length + 1e-9 ||
            std::abs(p.y) > 0.5 * record.box.width + 1e-9 ||
            std::abs(p.z) > 0.5 * record.box.height + 1e-9)
            throw InputError("fp record point outside its box");
    }
    records_.push_back(std::move(record));
}

void FpDatabase::add_from_scene(const std::vector<LidarPoint>& cloud,
                                const std::vector<Box3D>& fp_boxes,
                                const std::string& scene_id) {
    for (const Box3D& box : fp_boxes) {
        FpRecord rec;
        rec.box = box;
        rec.scene_id = scene_id;
        for (const LidarPoint& p : cloud) {
            if (!box.contains(p.position())) continue;
            const Vec3 local = box.to_local(p.position());
            rec.points.push_back({local.x, local.y, local.z, p.r, p.sweep_offset});
        }
        if (!rec.points.empty()) add(std::move(rec));
    }
}

void FpDatabase::save(const std::string& directory) const {
    std::string blob;
    nlohmann::json index = nlohmann::json::array();
    for (const FpRecord& rec : records_) {
        nlohmann::json entry;
        entry["scene_id"] = rec.scene_id;
        entry["box"] = {{"center", {rec.box.center.x, rec.box.center.y, rec.box.center.z}},
                        {"size", {rec.box.length, rec.box.width, rec.box.height}},
                        {"yaw", rec.box.yaw},
                        {"label", rec.box.label},
                        {"score", rec.box.score}};
        entry["point_count"] = rec.points.size();
        entry["offset"] = blob.size();
        index.push_back(entry);
        for (const LidarPoint& p : rec.points) {
            const float row[4] = {static_cast<float>(p.x), static_cast<float>(p.y),
                                  static_cast<float>(p.z), static_cast<float>(p.r)};
            blob.append(reinterpret_cast<const char*>(row), sizeof(row));
        }
    }
    write_file_atomic(directory + "/index.json", index.dump(2) + "\n");
    write_file_atomic(directory + "/points.bin", blob);
}

FpDatabase FpDatabase::load(const std::string& directory) {
    const nlohmann::json index = nlohmann::json::parse(read_file(directory + "/index.json"));
    const std::string blob = read_file(directory + "/points.bin");

    FpDatabase db;
    for (const auto& entry : index) {
        FpRecord rec;
        rec.scene_id = entry.at("scene_id").get<std::string>();
        const auto& jb = entry.at("box");
        rec.box.center = {jb.at("center")[0].get<double>(), jb.at("center")[1].get<double>(),
                          jb.at("center")[2].get<double>()};
        rec.box.length = jb.at("size")[0].get<double>();
        rec.box.width = jb.at("size")[1].get<double>();
        rec.box.height = jb.at("size")[2].get<double>();
        rec.box.yaw = jb.at("yaw").get<double>();
        rec.box.label = jb.at("label").get<int>();
        rec.box.score = jb.value("score", 0.0);
        const std::size_t count = entry.at("point_count").get<std::size_t>();
        const std::size_t offset = entry.at("offset").get<std::size_t>();
        if (offset + count * 16 > blob.size())
            throw FormatError(directory + "/points.bin: record overruns blob (offset " +
                              std::to_string(offset) + ")");
        for (std::size_t i = 0; i < count; ++i) {
            float row[4];
            std::memcpy(row, blob.data() + offset + i * 16, 16);
            rec.points.push_back({row[0], row[1], row[2], row[3]});
        }
        db.records_.push_back(std::move(rec));
    }
    return db;
}

PasteResult paste_samples(const std::vector<AugmentedPoint>& cloud,
                          const FpDatabase& db, int count,
                          const std::vector<Box3D>& gt_boxes,
                          std::uint64_t rng_seed) {
    if (count < 0) throw InputError("paste count must be >= 0");
    PasteResult out;
    out.cloud = cloud;
    out.requested = count;
    if (count == 0 || db.size() == 0) return out;

    std::mt19937_64 rng(rng_seed);
    std::vector<std::size_t> order(db.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<Box3D> pasted_boxes;
    for (std::size_t idx : order) {
        if (out.pasted >= count) break;
        const FpRecord& rec = db.records()[idx];

        bool collides = false;
        for (const Box3D& gt : gt_boxes)
            collides = collides || bev_overlap(rec.box, gt);
        for (const Box3D& prev : pasted_boxes)
            collides = collides || bev_overlap(rec.box, prev);
        if (collides) continue;

        for (const LidarPoint& p : rec.points) {
            const Vec3 g = rec.box.to_global(p.position());
            out.cloud.push_back({g.x, g.y, g.z, p.r, 0, 0.0, 0.0, 0.0, 0});
        }
        pasted_boxes.push_back(rec.box);
        ++out.pasted;
    }
    return out;
}

}  // namespace lidarpaint
