#pragma once

#include <string>
#include <vector>

#include "lidarpaint/boxes.hpp"
#include "lidarpaint/camera.hpp"
#include "lidarpaint/instance_mask.hpp"
#include "lidarpaint/types.hpp"

namespace lidarpaint {

/// Point cloud binary: little-endian float32 rows of (x, y, z, r) or
/// (x, y, z, r, offset); the 5th field is stored as sweep_offset.
/// Throws FormatError (with the byte offset) on size mismatch or
/// non-finite values.
std::vector<LidarPoint> read_cloud(const std::string& path, int field_count);
void write_cloud(const std::vector<LidarPoint>& points, const std::string& path,
                 int field_count);

/// Painted cloud binary: per record 8 little-endian float32
/// (x, y, z, r, s, cx, cy, cz) followed by one little-endian int32
/// instance id; 36 bytes per point.
void write_augmented(const std::vector<AugmentedPoint>& points, const std::string& path);
std::vector<AugmentedPoint> read_augmented(const std::string& path);

/// Instance mask raster as 16-bit binary PGM (P5, maxval 65535, samples
/// big-endian per the Netpbm convention) plus a JSON sidecar carrying the
/// per-instance records.
void write_instance_mask(const InstanceMask& mask, const std::string& pgm_path,
                         const std::string& json_path);
InstanceMask read_instance_mask(const std::string& pgm_path, const std::string& json_path);

/// Calibration JSON: row-major 4x4 matrices plus per-camera intrinsics.
void write_calibration(const CalibrationRig& rig, const std::string& path);
CalibrationRig read_calibration(const std::string& path);

/// Ground-truth boxes JSON and the per-point box-index sidecar
/// (little-endian int32, -1 for background).
void write_boxes(const std::vector<Box3D>& boxes, const std::string& path);
std::vector<Box3D> read_boxes(const std::string& path);
void write_gt_index(const std::vector<int>& gt_index, const std::string& path);
std::vector<int> read_gt_index(const std::string& path);

/// Write-temp-then-rename; partial files never land at the target path.
void write_file_atomic(const std::string& path, const std::string& bytes);
std::string read_file(const std::string& path);

}  // namespace lidarpaint
