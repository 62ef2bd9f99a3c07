#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "uvrppg/core.hpp"
#include "uvrppg/frame_ops.hpp"
#include "uvrppg/image.hpp"
#include "uvrppg/mesh_geometry.hpp"
#include "uvrppg/rppg_extract.hpp"
#include "uvrppg/uv_mapping.hpp"

namespace uvrppg {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// PPM / PGM image sequences (8-bit, codec-free).

inline void write_ppm(const fs::path& path, const Image& img) {
    if (img.channels != 1 && img.channels != 3)
        throw IoError("PPM writer supports 1 or 3 channels");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << (img.channels == 3 ? "P6\n" : "P5\n") << img.width << " " << img.height << "\n255\n";
    std::vector<uint8_t> row(static_cast<size_t>(img.width) * img.channels);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) {
                const float v = img.at(y, x, c);
                row[static_cast<size_t>(x) * img.channels + c] =
                    static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
            }
        f.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!f) throw IoError("failed writing " + path.string());
}

inline Image read_ppm(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    std::string magic;
    f >> magic;
    const int channels = magic == "P6" ? 3 : (magic == "P5" ? 1 : 0);
    if (channels == 0) throw IoError(path.string() + ": unsupported image magic '" + magic + "'");
    int w = 0, h = 0, maxval = 0;
    f >> w >> h >> maxval;
    if (!f || w <= 0 || h <= 0 || maxval != 255)
        throw IoError(path.string() + ": bad PPM header");
    f.get();  // single whitespace after maxval
    Image img(h, w, channels, 0.0f);
    std::vector<uint8_t> raw(static_cast<size_t>(w) * h * channels);
    f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!f) throw IoError(path.string() + ": truncated pixel data");
    for (size_t i = 0; i < raw.size(); ++i) img.data[i] = static_cast<float>(raw[i]);
    return img;
}

inline std::string frame_filename(int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06d.ppm", index);
    return buf;
}

// Angle frames visualize as 8-bit grayscale, 0..180 degrees -> 0..255.
inline Image angle_frame_to_image(const AngleFrame& angle) {
    Image img(angle.size, angle.size, 1, 0.0f);
    for (int y = 0; y < angle.size; ++y)
        for (int x = 0; x < angle.size; ++x)
            img.at(y, x, 0) = static_cast<float>(angle.at(y, x) / 180.0 * 255.0);
    return img;
}

// ---------------------------------------------------------------------------
// Landmark records: one JSON object per line,
// {"frame": int, "detected": bool, "points": [[x,y,z] x 468]}.

inline void write_landmarks_jsonl(const fs::path& path, const LandmarkSequence& seq) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    for (const LandmarkFrame& frame : seq.frames) {
        nlohmann::json rec;
        rec["frame"] = frame.frame_index;
        rec["detected"] = frame.detected;
        nlohmann::json pts = nlohmann::json::array();
        if (frame.detected)
            for (const Vec3& p : frame.points) pts.push_back({p.x, p.y, p.z});
        rec["points"] = std::move(pts);
        if (frame.interpolated) rec["interpolated"] = true;
        f << rec.dump() << "\n";
    }
    if (!f) throw IoError("failed writing " + path.string());
}

inline LandmarkSequence read_landmarks_jsonl(const fs::path& path, double fps) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path.string());
    LandmarkSequence seq;
    seq.fps = fps;
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw IoError(path.string() + ":" + std::to_string(line_no) +
                          ": malformed landmark record: " + e.what());
        }
        LandmarkFrame frame;
        try {
            frame.frame_index = rec.at("frame").get<int>();
            frame.detected = rec.at("detected").get<bool>();
            frame.interpolated = rec.value("interpolated", false);
            const auto& pts = rec.at("points");
            if (frame.detected) {
                if (pts.size() != kLandmarkCount)
                    throw IoError("expected " + std::to_string(kLandmarkCount) +
                                  " points, got " + std::to_string(pts.size()));
                for (int i = 0; i < kLandmarkCount; ++i) {
                    const auto& p = pts[i];
                    if (p.size() != 3) throw IoError("point " + std::to_string(i) + " is not a triple");
                    frame.points[i] = {p[0].get<double>(), p[1].get<double>(), p[2].get<double>()};
                    if (!std::isfinite(frame.points[i].x) || !std::isfinite(frame.points[i].y) ||
                        !std::isfinite(frame.points[i].z))
                        throw IoError("point " + std::to_string(i) + " is not finite");
                }
            }
        } catch (const IoError&) {
            throw IoError(path.string() + ":" + std::to_string(line_no) +
                          ": malformed landmark record");
        } catch (const std::exception& e) {
            throw IoError(path.string() + ":" + std::to_string(line_no) +
                          ": malformed landmark record: " + e.what());
        }
        if (frame.frame_index != static_cast<int>(seq.frames.size()))
            throw IoError(path.string() + ":" + std::to_string(line_no) +
                          ": frame index out of order");
        seq.frames.push_back(std::move(frame));
    }
    if (seq.frames.empty()) throw IoError(path.string() + ": no landmark records");
    return seq;
}

// ---------------------------------------------------------------------------
// Ground-truth PPG: two-column text (timestamp_seconds value).

inline void write_ppg(const fs::path& path, const GroundTruthPPG& ppg) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    char buf[80];
    for (size_t i = 0; i < ppg.timestamps.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.9f %.9f\n", ppg.timestamps[i], ppg.values[i]);
        f << buf;
    }
    if (!f) throw IoError("failed writing " + path.string());
}

inline GroundTruthPPG read_ppg(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path.string());
    GroundTruthPPG ppg;
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        double t = 0.0, v = 0.0;
        if (!(ss >> t >> v))
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected two columns");
        ppg.timestamps.push_back(t);
        ppg.values.push_back(v);
    }
    if (ppg.timestamps.empty()) throw IoError(path.string() + ": no PPG samples");
    return ppg;
}

// ---------------------------------------------------------------------------
// Flat binary tensor dump: "UVT1" magic, four uint32 dims (T, H, W, C,
// little-endian), then row-major float32 data.

inline void write_tensor(const fs::path& path, const std::vector<Image>& frames) {
    if (frames.empty()) throw IoError("tensor dump needs at least one frame");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f.write("UVT1", 4);
    const uint32_t dims[4] = {static_cast<uint32_t>(frames.size()),
                              static_cast<uint32_t>(frames[0].height),
                              static_cast<uint32_t>(frames[0].width),
                              static_cast<uint32_t>(frames[0].channels)};
    f.write(reinterpret_cast<const char*>(dims), sizeof dims);
    for (const Image& img : frames) {
        if (img.height != frames[0].height || img.width != frames[0].width ||
            img.channels != frames[0].channels)
            throw IoError("tensor dump needs uniform frame shapes");
        f.write(reinterpret_cast<const char*>(img.data.data()),
                static_cast<std::streamsize>(img.data.size() * sizeof(float)));
    }
    if (!f) throw IoError("failed writing " + path.string());
}

inline std::vector<Image> read_tensor(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    char magic[4];
    f.read(magic, 4);
    if (!f || std::string(magic, 4) != "UVT1") throw IoError(path.string() + ": bad tensor magic");
    uint32_t dims[4];
    f.read(reinterpret_cast<char*>(dims), sizeof dims);
    if (!f) throw IoError(path.string() + ": truncated tensor header");
    std::vector<Image> frames;
    for (uint32_t t = 0; t < dims[0]; ++t) {
        Image img(static_cast<int>(dims[1]), static_cast<int>(dims[2]),
                  static_cast<int>(dims[3]), 0.0f);
        f.read(reinterpret_cast<char*>(img.data.data()),
               static_cast<std::streamsize>(img.data.size() * sizeof(float)));
        if (!f) throw IoError(path.string() + ": truncated tensor data");
        frames.push_back(std::move(img));
    }
    return frames;
}

// ---------------------------------------------------------------------------
// Mesh asset tables (text): mesh.txt has 468 "x y z" rows, uv.txt has 468
// "u v" rows, tessellation.txt has one "a b c" index triple per line.

inline void write_face_mesh_model(const fs::path& dir, const FaceMeshModel& model) {
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "mesh.txt");
        char buf[96];
        for (const Vec3& p : model.canonical) {
            std::snprintf(buf, sizeof buf, "%.12g %.12g %.12g\n", p.x, p.y, p.z);
            f << buf;
        }
        if (!f) throw IoError("failed writing mesh.txt");
    }
    {
        std::ofstream f(dir / "uv.txt");
        char buf[64];
        for (const Vec2& p : model.uv.uv) {
            std::snprintf(buf, sizeof buf, "%.12g %.12g\n", p.x, p.y);
            f << buf;
        }
        if (!f) throw IoError("failed writing uv.txt");
    }
    {
        std::ofstream f(dir / "tessellation.txt");
        for (const auto& t : model.tess.triangles) f << t[0] << " " << t[1] << " " << t[2] << "\n";
        if (!f) throw IoError("failed writing tessellation.txt");
    }
}

inline FaceMeshModel load_face_mesh_model(const fs::path& dir) {
    FaceMeshModel model;
    {
        std::ifstream f(dir / "mesh.txt");
        if (!f) throw IoError("cannot open " + (dir / "mesh.txt").string());
        for (int i = 0; i < kLandmarkCount; ++i)
            if (!(f >> model.canonical[i].x >> model.canonical[i].y >> model.canonical[i].z))
                throw IoError("mesh.txt: expected " + std::to_string(kLandmarkCount) + " rows");
    }
    {
        std::ifstream f(dir / "uv.txt");
        if (!f) throw IoError("cannot open " + (dir / "uv.txt").string());
        for (int i = 0; i < kLandmarkCount; ++i) {
            if (!(f >> model.uv.uv[i].x >> model.uv.uv[i].y))
                throw IoError("uv.txt: expected " + std::to_string(kLandmarkCount) + " rows");
            if (model.uv.uv[i].x < 0.0 || model.uv.uv[i].x > 1.0 || model.uv.uv[i].y < 0.0 ||
                model.uv.uv[i].y > 1.0)
                throw IoError("uv.txt: coordinate outside [0,1] at row " + std::to_string(i));
        }
    }
    {
        std::ifstream f(dir / "tessellation.txt");
        if (!f) throw IoError("cannot open " + (dir / "tessellation.txt").string());
        int a, b, c;
        while (f >> a >> b >> c) model.tess.triangles.push_back({a, b, c});
    }
    validate_tessellation(model.tess);
    LandmarkFrame canonical;
    canonical.detected = true;
    canonical.points = model.canonical;
    ensure_camera_facing_winding(model.tess, canonical);
    return model;
}

// ---------------------------------------------------------------------------
// Dataset discovery and validation.

struct DatasetEntry {
    std::string video_id;
    fs::path frames_dir;
    fs::path landmark_file;
    fs::path ppg_file;
    double fps = 0.0;
    int width = 0;
    int height = 0;
    int frame_count = 0;
    std::string scenario;
};

struct IngestResult {
    std::vector<DatasetEntry> entries;                  // sorted by video_id
    std::vector<std::string> diagnostics;               // one line per rejected entry
};

inline void write_meta(const fs::path& path, const DatasetEntry& entry,
                       const nlohmann::json& extra = {}) {
    nlohmann::json meta;
    meta["video_id"] = entry.video_id;
    meta["fps"] = entry.fps;
    meta["width"] = entry.width;
    meta["height"] = entry.height;
    meta["frames"] = entry.frame_count;
    meta["scenario"] = entry.scenario;
    if (!extra.empty()) meta["generator"] = extra;
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << meta.dump(2) << "\n";
}

// Scans root for subdirectories holding meta.json; validates counts and
// landmark record shape. Invalid entries are reported, not fatal.
inline IngestResult ingest_dataset(const fs::path& root) {
    if (!fs::exists(root)) throw IoError("dataset root " + root.string() + " does not exist");
    IngestResult result;
    std::vector<fs::path> candidates;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory() && fs::exists(e.path() / "meta.json")) candidates.push_back(e.path());
    std::sort(candidates.begin(), candidates.end());
    for (const fs::path& dir : candidates) {
        const std::string id = dir.filename().string();
        try {
            std::ifstream mf(dir / "meta.json");
            nlohmann::json meta = nlohmann::json::parse(mf);
            DatasetEntry entry;
            entry.video_id = meta.value("video_id", id);
            entry.fps = meta.at("fps").get<double>();
            entry.width = meta.at("width").get<int>();
            entry.height = meta.at("height").get<int>();
            entry.frame_count = meta.at("frames").get<int>();
            entry.scenario = meta.value("scenario", "unspecified");
            entry.frames_dir = dir / "frames";
            entry.landmark_file = dir / "landmarks.jsonl";
            entry.ppg_file = dir / "ppg.txt";
            if (entry.fps <= 0.0) throw IoError("meta.json: fps must be > 0");
            int n_frames = 0;
            for (const auto& f : fs::directory_iterator(entry.frames_dir))
                if (f.path().extension() == ".ppm") ++n_frames;
            if (n_frames != entry.frame_count)
                throw IoError("frame file count " + std::to_string(n_frames) +
                              " does not match meta frames " + std::to_string(entry.frame_count));
            const LandmarkSequence lm = read_landmarks_jsonl(entry.landmark_file, entry.fps);
            if (static_cast<int>(lm.frames.size()) != entry.frame_count)
                throw IoError("landmark record count " + std::to_string(lm.frames.size()) +
                              " does not match frame count " + std::to_string(entry.frame_count));
            read_ppg(entry.ppg_file);
            result.entries.push_back(std::move(entry));
        } catch (const std::exception& e) {
            result.diagnostics.push_back(id + ": rejected: " + e.what());
        }
    }
    return result;
}

inline std::vector<Image> read_frames(const DatasetEntry& entry) {
    std::vector<Image> frames;
    frames.reserve(entry.frame_count);
    for (int i = 0; i < entry.frame_count; ++i)
        frames.push_back(read_ppm(entry.frames_dir / frame_filename(i)));
    return frames;
}

}  // namespace uvrppg
