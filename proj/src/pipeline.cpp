#include "lidarpaint/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "lidarpaint/errors.hpp"
#include "lidarpaint/io.hpp"
#include "lidarpaint/sweeps.hpp"

namespace lidarpaint {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void read_array3(const json& j, const char* key, std::array<double, 3>& out) {
    if (!j.contains(key)) return;
    const auto& arr = j.at(key);
    for (int a = 0; a < 3; ++a) out[a] = arr[a].get<double>();
}

NoiseSpec noise_from_json(const json& j) {
    NoiseSpec n;
    maybe(j, "rotation_jitter_deg", n.rotation_jitter_deg);
    maybe(j, "translation_jitter_m", n.translation_jitter_m);
    maybe(j, "sync_offset_s", n.sync_offset_s);
    maybe(j, "ego_speed_mps", n.ego_speed_mps);
    maybe(j, "occluder_walls", n.occluder_walls);
    return n;
}

json noise_to_json(const NoiseSpec& n) {
    return {{"rotation_jitter_deg", n.rotation_jitter_deg},
            {"translation_jitter_m", n.translation_jitter_m},
            {"sync_offset_s", n.sync_offset_s},
            {"ego_speed_mps", n.ego_speed_mps},
            {"occluder_walls", n.occluder_walls}};
}

}  // namespace

PipelineConfig PipelineConfig::from_json_file(const std::string& path) {
    return from_json_text(read_file(path));
}

PipelineConfig PipelineConfig::from_json_text(const std::string& text) {
    PipelineConfig c;
    const json j = json::parse(text);
    if (j.contains("io")) {
        const auto& io = j.at("io");
        maybe(io, "scene_dir", c.scene_dir);
        maybe(io, "output", c.output);
        maybe(io, "report", c.report);
        maybe(io, "cloud_fields", c.cloud_fields);
    }
    if (j.contains("rig")) maybe(j.at("rig"), "calibration", c.calibration);
    if (j.contains("painter")) {
        const auto& p = j.at("painter");
        maybe(p, "merge_gap_m", c.painter.merge_gap_m);
        maybe(p, "z_min_m", c.painter.z_min_m);
    }
    if (j.contains("refiner")) {
        const auto& r = j.at("refiner");
        maybe(r, "enabled", c.refiner_enabled);
        maybe(r, "eps_scale", c.refiner.eps_scale);
        maybe(r, "eps_min_m", c.refiner.eps_min_m);
        maybe(r, "eps_max_m", c.refiner.eps_max_m);
        maybe(r, "min_pts", c.refiner.min_pts);
    }
    if (j.contains("fusion")) {
        const auto& f = j.at("fusion");
        maybe(f, "stages", c.fusion_stages);
        maybe(f, "hidden", c.fusion_hidden);
        maybe(f, "seed", c.fusion_seed);
        if (f.contains("grid")) {
            const auto& g = f.at("grid");
            read_array3(g, "min", c.grid.min);
            read_array3(g, "max", c.grid.max);
            read_array3(g, "voxel", c.grid.voxel);
        }
    }
    if (j.contains("fpa")) {
        const auto& f = j.at("fpa");
        maybe(f, "database", c.fpa_database);
        maybe(f, "count", c.fpa_count);
        maybe(f, "iou_threshold", c.fpa_iou_threshold);
        maybe(f, "seed", c.fpa_seed);
    }
    if (j.contains("synth")) {
        const auto& s = j.at("synth");
        maybe(s, "box_count", c.synth.box_count);
        maybe(s, "label_mix", c.synth.label_mix);
        maybe(s, "min_range_m", c.synth.min_range_m);
        maybe(s, "max_range_m", c.synth.max_range_m);
        maybe(s, "density", c.synth.density);
        maybe(s, "background_points", c.synth.background_points);
        maybe(s, "cameras", c.synth.cameras);
        maybe(s, "image_width", c.synth.image_width);
        maybe(s, "image_height", c.synth.image_height);
        maybe(s, "camera_overlap_deg", c.synth.camera_overlap_deg);
        maybe(s, "camera_height_m", c.synth.camera_height_m);
        maybe(s, "seed", c.synth.seed);
        if (s.contains("noise")) c.noise = noise_from_json(s.at("noise"));
        maybe(s, "noise_seed", c.noise_seed);
    }
    return c;
}

std::string PipelineConfig::to_json_text() const {
    json j;
    j["io"] = {{"scene_dir", scene_dir},
               {"output", output},
               {"report", report},
               {"cloud_fields", cloud_fields}};
    j["rig"] = {{"calibration", calibration}};
    j["painter"] = {{"merge_gap_m", painter.merge_gap_m}, {"z_min_m", painter.z_min_m}};
    j["refiner"] = {{"enabled", refiner_enabled},
                    {"eps_scale", refiner.eps_scale},
                    {"eps_min_m", refiner.eps_min_m},
                    {"eps_max_m", refiner.eps_max_m},
                    {"min_pts", refiner.min_pts}};
    j["fusion"] = {{"stages", fusion_stages},
                   {"hidden", fusion_hidden},
                   {"seed", fusion_seed},
                   {"grid",
                    {{"min", grid.min}, {"max", grid.max}, {"voxel", grid.voxel}}}};
    j["fpa"] = {{"database", fpa_database},
                {"count", fpa_count},
                {"iou_threshold", fpa_iou_threshold},
                {"seed", fpa_seed}};
    j["synth"] = {{"box_count", synth.box_count},
                  {"label_mix", synth.label_mix},
                  {"min_range_m", synth.min_range_m},
                  {"max_range_m", synth.max_range_m},
                  {"density", synth.density},
                  {"background_points", synth.background_points},
                  {"cameras", synth.cameras},
                  {"image_width", synth.image_width},
                  {"image_height", synth.image_height},
                  {"camera_overlap_deg", synth.camera_overlap_deg},
                  {"camera_height_m", synth.camera_height_m},
                  {"seed", synth.seed},
                  {"noise", noise_to_json(noise)},
                  {"noise_seed", noise_seed}};
    return j.dump(2) + "\n";
}

std::string PipelineConfig::resolve(const std::string& path) const {
    if (path.empty() || fs::path(path).is_absolute() || scene_dir.empty()) return path;
    return (fs::path(scene_dir) / path).string();
}

void write_scene_dir(const SyntheticScene& scene, const std::string& dir, int sweep_count) {
    if (sweep_count < 1) throw InputError("sweep_count must be >= 1");
    fs::create_directories(dir);
    write_calibration(scene.rig, dir + "/calib.json");

    if (sweep_count == 1) {
        write_cloud(scene.points, dir + "/cloud.bin", 4);
    } else {
        // Contiguous chunks so restacking preserves point order (the GT
        // sidecar indexes the stacked order).
        json sweeps = json::array();
        const std::size_t n = scene.points.size();
        for (int k = 0; k < sweep_count; ++k) {
            const std::size_t begin = n * k / sweep_count;
            const std::size_t end = n * (k + 1) / sweep_count;
            const std::vector<LidarPoint> chunk(scene.points.begin() + begin,
                                                scene.points.begin() + end);
            char name[32];
            std::snprintf(name, sizeof(name), "sweep_%03d.bin", k);
            write_cloud(chunk, dir + "/" + name, 4);
            sweeps.push_back({{"file", name},
                              {"timestamp", 0.05 * k},
                              {"ego_pose", json::array({1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0,
                                                        0, 0, 0, 1})}});
        }
        json meta;
        meta["keyframe_index"] = sweep_count - 1;
        meta["sweeps"] = sweeps;
        write_file_atomic(dir + "/sweeps.json", meta.dump(2) + "\n");
    }

    for (const InstanceMask& mask : scene.masks) {
        const std::string stem = dir + "/masks/cam" + std::to_string(mask.camera);
        write_instance_mask(mask, stem + ".pgm", stem + ".json");
    }

    write_boxes(scene.gt_boxes, dir + "/gt/boxes.json");
    write_gt_index(scene.gt_index, dir + "/gt/point_index.bin");
}

namespace {

RigidTransform pose_from_json(const json& arr) {
    std::array<double, 16> m{};
    for (std::size_t i = 0; i < 16; ++i) m[i] = arr[i].get<double>();
    return RigidTransform::from_matrix(m);
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config) {
    PipelineResult result;

    // --- load ---------------------------------------------------------
    CalibrationRig rig;
    std::vector<InstanceMask> masks;
    std::vector<Sweep> sweeps;
    std::size_t keyframe = 0;
    std::vector<Box3D> gt_boxes;
    std::vector<int> gt_index;
    try {
        if (config.scene_dir.empty()) throw FormatError("io.scene_dir not set");
        const std::string calib = config.calibration.empty()
                                      ? config.scene_dir + "/calib.json"
                                      : config.resolve(config.calibration);
        rig = read_calibration(calib);

        for (std::size_t j = 0; j < rig.cameras.size(); ++j) {
            const std::string stem = config.scene_dir + "/masks/cam" + std::to_string(j);
            masks.push_back(read_instance_mask(stem + ".pgm", stem + ".json"));
        }

        const std::string sweeps_meta = config.scene_dir + "/sweeps.json";
        if (fs::exists(sweeps_meta)) {
            const json meta = json::parse(read_file(sweeps_meta));
            keyframe = meta.at("keyframe_index").get<std::size_t>();
            for (const auto& s : meta.at("sweeps")) {
                Sweep sweep;
                sweep.points = read_cloud(
                    config.scene_dir + "/" + s.at("file").get<std::string>(),
                    config.cloud_fields);
                sweep.timestamp = s.at("timestamp").get<double>();
                sweep.ego_pose = pose_from_json(s.at("ego_pose"));
                sweeps.push_back(std::move(sweep));
            }
        } else {
            Sweep sweep;
            sweep.points = read_cloud(config.scene_dir + "/cloud.bin", config.cloud_fields);
            sweeps.push_back(std::move(sweep));
        }

        if (fs::exists(config.scene_dir + "/gt/boxes.json")) {
            gt_boxes = read_boxes(config.scene_dir + "/gt/boxes.json");
            gt_index = read_gt_index(config.scene_dir + "/gt/point_index.bin");
            result.has_ground_truth = true;
        }
    } catch (const std::exception& e) {
        throw StageError("load", e.what());
    }

    // --- stack --------------------------------------------------------
    std::vector<LidarPoint> cloud;
    try {
        cloud = stack_sweeps(sweeps, keyframe, rig);
    } catch (const std::exception& e) {
        throw StageError("stack", e.what());
    }
    result.point_count = cloud.size();
    if (result.has_ground_truth && gt_index.size() != cloud.size())
        throw StageError("stack", "ground-truth sidecar length does not match cloud");

    // --- paint --------------------------------------------------------
    PaintResult paint;
    try {
        paint = paint_scene(cloud, rig, masks, config.painter);
    } catch (const std::exception& e) {
        throw StageError("paint", e.what());
    }

    // --- refine -------------------------------------------------------
    std::vector<Instance3DPrior> priors;
    std::vector<int> labels;
    std::vector<Vec3> centers;
    std::vector<int> instance_ids;
    std::size_t evicted = 0;
    try {
        if (config.refiner_enabled) {
            RefineResult refined = refine_scene(paint.priors, cloud,
                                                LabelTable::default_table(), config.refiner);
            priors = std::move(refined.priors);
            labels = std::move(refined.point_labels);
            centers = std::move(refined.point_centers);
            instance_ids = std::move(refined.point_instance);
            evicted = refined.evicted_count;
        } else {
            priors = paint.priors;
            labels = paint.point_labels;
            instance_ids = paint.point_instance;
            centers.assign(cloud.size(), Vec3{});
            for (const Instance3DPrior& prior : priors)
                for (int idx : prior.member_indices) centers[idx] = prior.center;
        }
    } catch (const std::exception& e) {
        throw StageError("refine", e.what());
    }

    // --- assemble + write ----------------------------------------------
    std::vector<AugmentedPoint> augmented;
    try {
        augmented = assemble_augmented(cloud, labels, centers, instance_ids);
        result.output_path = config.resolve(config.output);
        write_augmented(augmented, result.output_path);
    } catch (const std::exception& e) {
        throw StageError("write", e.what());
    }
    result.prior_count = priors.size();

    // --- metrics --------------------------------------------------------
    try {
        if (result.has_ground_truth) {
            result.metrics = compute_metrics(augmented, priors, gt_boxes, gt_index, evicted);
        } else {
            result.metrics.painted = 0;
            for (const auto& p : augmented)
                if (p.painted()) ++result.metrics.painted;
            result.metrics.unpainted = augmented.size() - result.metrics.painted;
            result.metrics.evicted = evicted;
        }
        if (!config.report.empty()) {
            json rep;
            rep["label_accuracy"] = result.metrics.label_accuracy;
            rep["accuracy_vacuous"] = result.metrics.accuracy_vacuous;
            if (result.metrics.center_mae_m)
                rep["center_mae_m"] = *result.metrics.center_mae_m;
            else
                rep["center_mae_m"] = nullptr;
            rep["cluster_purity"] = result.metrics.cluster_purity;
            rep["painted"] = result.metrics.painted;
            rep["unpainted"] = result.metrics.unpainted;
            rep["evicted"] = result.metrics.evicted;
            rep["priors"] = result.prior_count;
            rep["points"] = result.point_count;
            rep["has_ground_truth"] = result.has_ground_truth;
            write_file_atomic(config.resolve(config.report), rep.dump(2) + "\n");
        }
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError("metrics", e.what());
    }
    return result;
}

}  // namespace lidarpaint
