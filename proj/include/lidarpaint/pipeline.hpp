#pragma once

#include <cstdint>
#include <string>

#include "lidarpaint/fusion.hpp"
#include "lidarpaint/metrics.hpp"
#include "lidarpaint/painter.hpp"
#include "lidarpaint/refiner.hpp"
#include "lidarpaint/synth.hpp"

namespace lidarpaint {

/// Everything the driver needs, one section per stage. Defaults match the
/// per-module documentation; a JSON config file overrides field by field.
struct PipelineConfig {
    // io
    std::string scene_dir;
    std::string output = "augmented.bin";  // relative paths resolve under scene_dir
    std::string report = "metrics.json";
    int cloud_fields = 4;
    // rig
    std::string calibration;  // empty = scene_dir/calib.json
    // painter
    PainterConfig painter;
    // refiner
    bool refiner_enabled = true;
    RefinerConfig refiner;
    // fusion
    int fusion_stages = 2;
    int fusion_hidden = 16;
    std::uint64_t fusion_seed = 7;
    GridConfig grid;
    // fpa
    std::string fpa_database;
    int fpa_count = 0;
    double fpa_iou_threshold = 0.1;
    std::uint64_t fpa_seed = 1;
    // synth
    SceneSpec synth;
    NoiseSpec noise;
    std::uint64_t noise_seed = 99;

    static PipelineConfig from_json_file(const std::string& path);
    static PipelineConfig from_json_text(const std::string& text);
    std::string to_json_text() const;

    std::string resolve(const std::string& path) const;
};

/// Scene directory layout shared by the CLI tools:
///   calib.json, cloud.bin (or sweeps.json + sweep_NNN.bin),
///   masks/camJ.pgm + camJ.json, gt/boxes.json + gt/point_index.bin.
void write_scene_dir(const SyntheticScene& scene, const std::string& dir,
                     int sweep_count = 1);

struct PipelineResult {
    Metrics metrics;
    bool has_ground_truth = false;
    std::string output_path;
    std::size_t point_count = 0;
    std::size_t prior_count = 0;
};

/// stack -> project -> paint -> refine -> assemble -> write -> metrics.
/// Any stage failure surfaces as StageError tagged with the stage name.
PipelineResult run_pipeline(const PipelineConfig& config);

}  // namespace lidarpaint
