#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lidarpaint/errors.hpp"
#include "lidarpaint/fp_augment.hpp"
#include "lidarpaint/fusion.hpp"
#include "lidarpaint/io.hpp"
#include "lidarpaint/pipeline.hpp"
#include "lidarpaint/synth.hpp"

namespace {

using namespace lidarpaint;

struct CommonOpts {
    std::string config_path;
    std::string scene_dir;
    std::string output;
    long long seed = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "pipeline config JSON");
    cmd->add_option("--scene-dir", opts.scene_dir, "scene directory override");
    cmd->add_option("--output", opts.output, "output path override");
    cmd->add_option("--seed", opts.seed, "seed override where randomness exists");
}

PipelineConfig load_config(const CommonOpts& opts) {
    PipelineConfig config = opts.config_path.empty()
                                ? PipelineConfig{}
                                : PipelineConfig::from_json_file(opts.config_path);
    if (!opts.scene_dir.empty()) config.scene_dir = opts.scene_dir;
    if (!opts.output.empty()) config.output = opts.output;
    return config;
}

void print_metrics(const PipelineResult& result) {
    std::cout << "points:   " << result.point_count << "\n"
              << "priors:   " << result.prior_count << "\n"
              << "painted:  " << result.metrics.painted << "\n"
              << "unpainted:" << result.metrics.unpainted << "\n"
              << "evicted:  " << result.metrics.evicted << "\n";
    if (result.has_ground_truth) {
        std::cout << "label_accuracy: " << result.metrics.label_accuracy
                  << (result.metrics.accuracy_vacuous ? " (vacuous)" : "") << "\n"
                  << "cluster_purity: " << result.metrics.cluster_purity << "\n";
        if (result.metrics.center_mae_m)
            std::cout << "center_mae_m:   " << *result.metrics.center_mae_m << "\n";
        else
            std::cout << "center_mae_m:   n/a\n";
    }
    std::cout << "wrote " << result.output_path << std::endl;
}

int cmd_synth(const CommonOpts& opts, int sweeps) {
    PipelineConfig config = load_config(opts);
    if (opts.seed >= 0) config.synth.seed = static_cast<std::uint64_t>(opts.seed);
    if (config.scene_dir.empty()) {
        std::cerr << "[synth] --scene-dir (or io.scene_dir) required" << std::endl;
        return 2;
    }
    SyntheticScene scene = generate_scene(config.synth);
    if (!config.noise.zero()) scene = apply_noise(scene, config.noise, config.noise_seed);
    write_scene_dir(scene, config.scene_dir, sweeps);
    std::cout << "scene: " << scene.gt_boxes.size() << " boxes, " << scene.points.size()
              << " points, " << scene.rig.cameras.size() << " cameras -> "
              << config.scene_dir << std::endl;
    return 0;
}

int cmd_pipeline(const CommonOpts& opts, bool refine) {
    PipelineConfig config = load_config(opts);
    if (!refine) config.refiner_enabled = false;
    const PipelineResult result = run_pipeline(config);
    print_metrics(result);
    return 0;
}

int cmd_eval(const CommonOpts& opts) {
    PipelineConfig config = load_config(opts);
    const std::string aug_path = config.resolve(config.output);
    const auto augmented = read_augmented(aug_path);
    const auto boxes = read_boxes(config.scene_dir + "/gt/boxes.json");
    const auto gt_index = read_gt_index(config.scene_dir + "/gt/point_index.bin");
    if (gt_index.size() != augmented.size())
        throw StageError("eval", "ground-truth sidecar length does not match cloud");

    std::vector<int> gt_labels(gt_index.size(), 0);
    for (std::size_t i = 0; i < gt_index.size(); ++i)
        if (gt_index[i] >= 0) gt_labels[i] = boxes[static_cast<std::size_t>(gt_index[i])].label;

    std::size_t painted = 0;
    for (const auto& p : augmented)
        if (p.painted()) ++painted;
    std::cout << "points:  " << augmented.size() << "\n"
              << "painted: " << painted << "\n"
              << "label_accuracy: " << label_accuracy(augmented, gt_labels)
              << (painted == 0 ? " (vacuous)" : "") << std::endl;
    return 0;
}

int cmd_fuse(const CommonOpts& opts) {
    PipelineConfig config = load_config(opts);
    if (opts.seed >= 0) config.fusion_seed = static_cast<std::uint64_t>(opts.seed);
    const std::string aug_path = config.resolve(config.output);
    const auto augmented = read_augmented(aug_path);
    const int label_count = static_cast<int>(LabelTable::default_table().size());

    const auto blocks = make_channel_blocks(augmented, label_count);
    const auto stages = make_cascade(label_count, config.fusion_stages,
                                     config.fusion_hidden, config.fusion_seed);
    const FeatureBlock fused = cascaded_fuse(blocks, stages);

    std::string bytes;
    bytes.reserve(fused.values.size() * 4);
    for (double v : fused.values) {
        const float f = static_cast<float>(v);
        bytes.append(reinterpret_cast<const char*>(&f), 4);
    }
    const std::string out_path = config.resolve("fused.bin");
    write_file_atomic(out_path, bytes);

    nlohmann::json meta;
    meta["points"] = fused.rows();
    meta["feature_width"] = fused.width;
    meta["stages"] = config.fusion_stages;
    meta["seed"] = config.fusion_seed;
    write_file_atomic(config.resolve("fused.json"), meta.dump(2) + "\n");

    const auto cells = pillarize(augmented, config.grid);
    const auto dims = config.grid.dims();
    std::cout << "fused " << fused.rows() << " points, width " << fused.width << "; grid "
              << dims[0] << "x" << dims[1] << "x" << dims[2] << ", " << cells.size()
              << " occupied cells -> " << out_path << std::endl;
    return 0;
}

int cmd_augment_fp(const CommonOpts& opts, const std::string& detections_path,
                   bool build_db, int paste_count) {
    PipelineConfig config = load_config(opts);
    if (opts.seed >= 0) config.fpa_seed = static_cast<std::uint64_t>(opts.seed);
    if (config.fpa_database.empty()) {
        std::cerr << "[augment-fp] fpa.database not set" << std::endl;
        return 2;
    }
    const std::string db_dir = config.resolve(config.fpa_database);

    if (build_db) {
        if (detections_path.empty()) {
            std::cerr << "[augment-fp] --detections required with --build-db" << std::endl;
            return 2;
        }
        const auto detections = read_boxes(config.resolve(detections_path));
        const auto gt = read_boxes(config.scene_dir + "/gt/boxes.json");
        const auto fps = mine_false_positives(detections, gt, config.fpa_iou_threshold);
        const auto cloud = read_cloud(config.scene_dir + "/cloud.bin", config.cloud_fields);
        FpDatabase db;
        db.add_from_scene(cloud, fps, config.scene_dir);
        db.save(db_dir);
        std::cout << "mined " << fps.size() << " false positives, stored " << db.size()
                  << " records -> " << db_dir << std::endl;
    }

    if (paste_count > 0) {
        const FpDatabase db = FpDatabase::load(db_dir);
        const auto augmented = read_augmented(config.resolve(config.output));
        const auto gt = read_boxes(config.scene_dir + "/gt/boxes.json");
        const PasteResult pasted =
            paste_samples(augmented, db, paste_count, gt, config.fpa_seed);
        const std::string out_path = config.resolve("augmented_fp.bin");
        write_augmented(pasted.cloud, out_path);
        std::cout << "pasted " << pasted.pasted << "/" << pasted.requested << " samples ("
                  << pasted.cloud.size() - augmented.size() << " points) -> " << out_path
                  << std::endl;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LiDAR instance painting pipeline"};
    app.require_subcommand(1);

    CommonOpts opts;
    int sweeps = 1;
    int paste_count = 0;
    bool build_db = false;
    std::string detections_path;

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic scene directory");
    add_common(synth, opts);
    synth->add_option("--sweeps", sweeps, "split the cloud into N sweeps");

    CLI::App* paint = app.add_subcommand("paint", "paint without refinement");
    add_common(paint, opts);

    CLI::App* refine = app.add_subcommand("refine", "paint + adaptive refinement");
    add_common(refine, opts);

    CLI::App* fuse = app.add_subcommand("fuse", "attention-fuse a painted cloud");
    add_common(fuse, opts);

    CLI::App* augment_fp = app.add_subcommand("augment-fp", "false-positive database / paste");
    add_common(augment_fp, opts);
    augment_fp->add_flag("--build-db", build_db, "mine FPs and build the database");
    augment_fp->add_option("--detections", detections_path, "detections JSON (for --build-db)");
    augment_fp->add_option("--count", paste_count, "number of samples to paste");

    CLI::App* eval = app.add_subcommand("eval", "metrics for an augmented cloud");
    add_common(eval, opts);

    CLI::App* pipeline = app.add_subcommand("pipeline", "full stage-1 pipeline");
    add_common(pipeline, opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth(opts, sweeps);
        if (paint->parsed()) return cmd_pipeline(opts, false);
        if (refine->parsed() || pipeline->parsed()) return cmd_pipeline(opts, true);
        if (fuse->parsed()) return cmd_fuse(opts);
        if (augment_fp->parsed())
            return cmd_augment_fp(opts, detections_path, build_db, paste_count);
        if (eval->parsed()) return cmd_eval(opts);
    } catch (const StageError& e) {
        std::cerr << e.what() << std::endl;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "[error] " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
