#include "lidarpaint/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lidarpaint/errors.hpp"

namespace lidarpaint {

namespace {

static_assert(std::endian::native == std::endian::little,
              "codecs assume a little-endian host");

void put_f32(std::string& out, float v) {
    char buf[4];
    std::memcpy(buf, &v, 4);
    out.append(buf, 4);
}

void put_i32(std::string& out, std::int32_t v) {
    char buf[4];
    std::memcpy(buf, &v, 4);
    out.append(buf, 4);
}

float get_f32(const std::string& bytes, std::size_t offset) {
    float v;
    std::memcpy(&v, bytes.data() + offset, 4);
    return v;
}

std::int32_t get_i32(const std::string& bytes, std::size_t offset) {
    std::int32_t v;
    std::memcpy(&v, bytes.data() + offset, 4);
    return v;
}

nlohmann::json transform_to_json(const RigidTransform& t) {
    nlohmann::json arr = nlohmann::json::array();
    for (double v : t.matrix()) arr.push_back(v);
    return arr;
}

RigidTransform transform_from_json(const nlohmann::json& arr) {
    if (!arr.is_array() || arr.size() != 16)
        throw FormatError("transform must be a 16-element row-major array");
    std::array<double, 16> m{};
    for (std::size_t i = 0; i < 16; ++i) m[i] = arr[i].get<double>();
    return RigidTransform::from_matrix(m);
}

}  // namespace

std::vector<LidarPoint> read_cloud(const std::string& path, int field_count) {
    if (field_count != 4 && field_count != 5)
        throw InputError("field_count must be 4 or 5");
    const std::string bytes = read_file(path);
    const std::size_t row = static_cast<std::size_t>(field_count) * 4;
    if (bytes.size() % row != 0)
        throw FormatError(path + ": size " + std::to_string(bytes.size()) +
                          " is not a multiple of " + std::to_string(row) +
                          " (trailing fragment at byte offset " +
                          std::to_string(bytes.size() - bytes.size() % row) + ")");
    std::vector<LidarPoint> points(bytes.size() / row);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::size_t base = i * row;
        LidarPoint p;
        p.x = get_f32(bytes, base);
        p.y = get_f32(bytes, base + 4);
        p.z = get_f32(bytes, base + 8);
        p.r = get_f32(bytes, base + 12);
        if (field_count == 5) p.sweep_offset = get_f32(bytes, base + 16);
        if (!p.finite())
            throw FormatError(path + ": non-finite value in record " + std::to_string(i) +
                              " (byte offset " + std::to_string(base) + ")");
        points[i] = p;
    }
    return points;
}

void write_cloud(const std::vector<LidarPoint>& points, const std::string& path,
                 int field_count) {
    if (field_count != 4 && field_count != 5)
        throw InputError("field_count must be 4 or 5");
    std::string bytes;
    bytes.reserve(points.size() * field_count * 4);
    for (const LidarPoint& p : points) {
        put_f32(bytes, static_cast<float>(p.x));
        put_f32(bytes, static_cast<float>(p.y));
        put_f32(bytes, static_cast<float>(p.z));
        put_f32(bytes, static_cast<float>(p.r));
        if (field_count == 5) put_f32(bytes, static_cast<float>(p.sweep_offset));
    }
    write_file_atomic(path, bytes);
}

void write_augmented(const std::vector<AugmentedPoint>& points, const std::string& path) {
    std::string bytes;
    bytes.reserve(points.size() * 36);
    for (const AugmentedPoint& p : points) {
        put_f32(bytes, static_cast<float>(p.x));
        put_f32(bytes, static_cast<float>(p.y));
        put_f32(bytes, static_cast<float>(p.z));
        put_f32(bytes, static_cast<float>(p.r));
        put_f32(bytes, static_cast<float>(p.s));
        put_f32(bytes, static_cast<float>(p.cx));
        put_f32(bytes, static_cast<float>(p.cy));
        put_f32(bytes, static_cast<float>(p.cz));
        put_i32(bytes, p.instance_id);
    }
    write_file_atomic(path, bytes);
}

std::vector<AugmentedPoint> read_augmented(const std::string& path) {
    const std::string bytes = read_file(path);
    if (bytes.size() % 36 != 0)
        throw FormatError(path + ": size " + std::to_string(bytes.size()) +
                          " is not a multiple of 36");
    std::vector<AugmentedPoint> points(bytes.size() / 36);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::size_t base = i * 36;
        AugmentedPoint p;
        p.x = get_f32(bytes, base);
        p.y = get_f32(bytes, base + 4);
        p.z = get_f32(bytes, base + 8);
        p.r = get_f32(bytes, base + 12);
        p.s = static_cast<int>(get_f32(bytes, base + 16));
        p.cx = get_f32(bytes, base + 20);
        p.cy = get_f32(bytes, base + 24);
        p.cz = get_f32(bytes, base + 28);
        p.instance_id = get_i32(bytes, base + 32);
        points[i] = p;
    }
    return points;
}

void write_instance_mask(const InstanceMask& mask, const std::string& pgm_path,
                         const std::string& json_path) {
    std::string bytes = "P5\n" + std::to_string(mask.width) + " " +
                        std::to_string(mask.height) + "\n65535\n";
    bytes.reserve(bytes.size() + mask.raster.size() * 2);
    for (std::uint16_t v : mask.raster) {
        bytes.push_back(static_cast<char>(v >> 8));
        bytes.push_back(static_cast<char>(v & 0xff));
    }
    write_file_atomic(pgm_path, bytes);

    nlohmann::json j;
    j["camera"] = mask.camera;
    nlohmann::json instances = nlohmann::json::object();
    for (const InstanceRecord& r : mask.records) {
        instances[std::to_string(r.id)] = {{"label", r.label},
                                           {"score", r.score},
                                           {"touches_left", r.touches_left},
                                           {"touches_right", r.touches_right}};
    }
    j["instances"] = instances;
    write_file_atomic(json_path, j.dump(2) + "\n");
}

InstanceMask read_instance_mask(const std::string& pgm_path, const std::string& json_path) {
    const std::string bytes = read_file(pgm_path);
    std::istringstream header(bytes.substr(0, 64));
    std::string magic;
    int width = 0, height = 0, maxval = 0;
    header >> magic >> width >> height >> maxval;
    if (magic != "P5" || width < 1 || height < 1)
        throw FormatError(pgm_path + ": not a binary PGM");
    if (maxval != 65535)
        throw FormatError(pgm_path + ": expected maxval 65535, got " + std::to_string(maxval));
    const std::size_t data_start = static_cast<std::size_t>(header.tellg()) + 1;
    const std::size_t expected = static_cast<std::size_t>(width) * height * 2;
    if (bytes.size() != data_start + expected)
        throw FormatError(pgm_path + ": expected " + std::to_string(data_start + expected) +
                          " bytes, got " + std::to_string(bytes.size()));

    InstanceMask mask;
    mask.width = width;
    mask.height = height;
    mask.raster.resize(static_cast<std::size_t>(width) * height);
    for (std::size_t i = 0; i < mask.raster.size(); ++i) {
        const auto hi = static_cast<unsigned char>(bytes[data_start + 2 * i]);
        const auto lo = static_cast<unsigned char>(bytes[data_start + 2 * i + 1]);
        mask.raster[i] = static_cast<std::uint16_t>((hi << 8) | lo);
    }

    const nlohmann::json j = nlohmann::json::parse(read_file(json_path));
    mask.camera = j.at("camera").get<int>();
    for (const auto& [key, val] : j.at("instances").items()) {
        InstanceRecord r;
        r.id = static_cast<std::uint16_t>(std::stoi(key));
        r.label = val.at("label").get<int>();
        r.score = val.at("score").get<double>();
        r.touches_left = val.at("touches_left").get<bool>();
        r.touches_right = val.at("touches_right").get<bool>();
        mask.records.push_back(r);
    }
    return mask;
}

void write_calibration(const CalibrationRig& rig, const std::string& path) {
    nlohmann::json j;
    j["lidar_to_ego"] = transform_to_json(rig.lidar_to_ego);
    nlohmann::json cams = nlohmann::json::array();
    for (const CameraModel& c : rig.cameras) {
        cams.push_back({{"fx", c.fx},
                        {"fy", c.fy},
                        {"cx", c.cx},
                        {"cy", c.cy},
                        {"width", c.width},
                        {"height", c.height},
                        {"extrinsic", transform_to_json(c.extrinsic)}});
    }
    j["cameras"] = cams;
    write_file_atomic(path, j.dump(2) + "\n");
}

CalibrationRig read_calibration(const std::string& path) {
    const nlohmann::json j = nlohmann::json::parse(read_file(path));
    CalibrationRig rig;
    rig.lidar_to_ego = transform_from_json(j.at("lidar_to_ego"));
    for (const auto& c : j.at("cameras")) {
        CameraModel cam;
        cam.fx = c.at("fx").get<double>();
        cam.fy = c.at("fy").get<double>();
        cam.cx = c.at("cx").get<double>();
        cam.cy = c.at("cy").get<double>();
        cam.width = c.at("width").get<int>();
        cam.height = c.at("height").get<int>();
        cam.extrinsic = transform_from_json(c.at("extrinsic"));
        rig.cameras.push_back(cam);
    }
    if (!rig.valid()) throw FormatError(path + ": calibration fails validation");
    return rig;
}

void write_boxes(const std::vector<Box3D>& boxes, const std::string& path) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Box3D& b : boxes) {
        arr.push_back({{"center", {b.center.x, b.center.y, b.center.z}},
                       {"size", {b.length, b.width, b.height}},
                       {"yaw", b.yaw},
                       {"label", b.label},
                       {"score", b.score}});
    }
    write_file_atomic(path, arr.dump(2) + "\n");
}

std::vector<Box3D> read_boxes(const std::string& path) {
    const nlohmann::json arr = nlohmann::json::parse(read_file(path));
    std::vector<Box3D> boxes;
    for (const auto& j : arr) {
        Box3D b;
        b.center = {j.at("center")[0].get<double>(), j.at("center")[1].get<double>(),
                    j.at("center")[2].get<double>()};
        b.length = j.at("size")[0].get<double>();
        b.width = j.at("size")[1].get<double>();
        b.height = j.at("size")[2].get<double>();
        b.yaw = j.at("yaw").get<double>();
        b.label = j.at("label").get<int>();
        b.score = j.value("score", 0.0);
        boxes.push_back(b);
    }
    return boxes;
}

void write_gt_index(const std::vector<int>& gt_index, const std::string& path) {
    std::string bytes;
    bytes.reserve(gt_index.size() * 4);
    for (int v : gt_index) put_i32(bytes, v);
    write_file_atomic(path, bytes);
}

std::vector<int> read_gt_index(const std::string& path) {
    const std::string bytes = read_file(path);
    if (bytes.size() % 4 != 0)
        throw FormatError(path + ": size is not a multiple of 4");
    std::vector<int> out(bytes.size() / 4);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = get_i32(bytes, i * 4);
    return out;
}

void write_file_atomic(const std::string& path, const std::string& bytes) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError("cannot open " + tmp.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw FormatError("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace lidarpaint
