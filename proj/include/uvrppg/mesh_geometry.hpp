#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "uvrppg/core.hpp"

namespace uvrppg {

// One frame worth of detected 3D facial landmarks in detector geometry units.
struct LandmarkFrame {
    std::array<Vec3, kLandmarkCount> points{};
    bool detected = false;
    bool interpolated = false;
    int frame_index = 0;
};

struct LandmarkSequence {
    std::vector<LandmarkFrame> frames;
    double fps = 0.0;

    bool fully_detected() const {
        for (const auto& f : frames)
            if (!f.detected) return false;
        return true;
    }
};

// Triangle index triples into the 468 landmark set, consistent winding.
struct Tessellation {
    std::vector<std::array<int, 3>> triangles;
};

// Fixed per-vertex texture coordinates in [0,1]^2.
struct CanonicalUV {
    std::array<Vec2, kLandmarkCount> uv{};
};

struct CameraModel {
    Vec3 n_cam{0.0, 0.0, -1.0};
};

struct VertexOrientation {
    std::array<Vec3, kLandmarkCount> normals{};
    std::array<double, kLandmarkCount> angles_deg{};
};

inline void validate_tessellation(const Tessellation& tess) {
    std::array<bool, kLandmarkCount> referenced{};
    if (tess.triangles.empty()) throw InvalidInputError("tessellation has no triangles");
    for (size_t t = 0; t < tess.triangles.size(); ++t) {
        const auto& tri = tess.triangles[t];
        for (int v : tri) {
            if (v < 0 || v >= kLandmarkCount)
                throw InvalidInputError("tessellation triangle " + std::to_string(t) +
                                        " references invalid vertex " + std::to_string(v));
            referenced[v] = true;
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
            throw InvalidInputError("tessellation triangle " + std::to_string(t) +
                                    " repeats a vertex index");
    }
    for (int v = 0; v < kLandmarkCount; ++v)
        if (!referenced[v])
            throw InvalidInputError("vertex " + std::to_string(v) +
                                    " is not referenced by any triangle");
}

// Orthographic projection onto the image plane: z is discarded.
inline std::array<Vec2, kLandmarkCount> project_to_image_plane(const LandmarkFrame& frame) {
    if (!frame.detected)
        throw InvalidInputError("cannot project undetected landmark frame " +
                                std::to_string(frame.frame_index));
    std::array<Vec2, kLandmarkCount> out{};
    for (int i = 0; i < kLandmarkCount; ++i) out[i] = {frame.points[i].x, frame.points[i].y};
    return out;
}

// Unit normal per triangle from the cross product of two edge vectors,
// orientation given by the tessellation winding.
inline std::vector<Vec3> face_normals(const LandmarkFrame& frame, const Tessellation& tess) {
    std::vector<Vec3> normals;
    normals.reserve(tess.triangles.size());
    for (size_t t = 0; t < tess.triangles.size(); ++t) {
        const auto& tri = tess.triangles[t];
        const Vec3& p0 = frame.points[tri[0]];
        const Vec3& p1 = frame.points[tri[1]];
        const Vec3& p2 = frame.points[tri[2]];
        const Vec3 n = cross(p1 - p0, p2 - p0);
        const double len = norm(n);
        if (len == 0.0)
            throw DegenerateGeometryError("triangle " + std::to_string(t) + " has zero area");
        normals.push_back({n.x / len, n.y / len, n.z / len});
    }
    return normals;
}

// Per-vertex normal as the unweighted mean of adjacent unit face normals,
// re-normalized; angle theta_v against the camera normal in [0, 180] degrees.
inline VertexOrientation vertex_orientation(const std::vector<Vec3>& face_norms,
                                            const Tessellation& tess,
                                            const CameraModel& camera = {}) {
    std::array<Vec3, kLandmarkCount> acc{};
    std::array<int, kLandmarkCount> count{};
    for (size_t t = 0; t < tess.triangles.size(); ++t) {
        for (int v : tess.triangles[t]) {
            acc[v] = acc[v] + face_norms[t];
            ++count[v];
        }
    }
    VertexOrientation out;
    for (int v = 0; v < kLandmarkCount; ++v) {
        if (count[v] == 0)
            throw InvalidInputError("vertex " + std::to_string(v) + " has no adjacent triangles");
        const Vec3 mean = (1.0 / count[v]) * acc[v];
        const double len = norm(mean);
        if (len == 0.0)
            throw DegenerateGeometryError("mean normal of vertex " + std::to_string(v) +
                                          " has zero magnitude");
        out.normals[v] = {mean.x / len, mean.y / len, mean.z / len};
        out.angles_deg[v] = angle_deg_between_units(out.normals[v], camera.n_cam);
    }
    return out;
}

// Fills runs of up to max_gap consecutive undetected frames by per-coordinate
// linear interpolation between the bounding detected frames. Longer runs and
// runs touching the sequence boundary stay undetected; downstream windows that
// overlap them are skipped.
inline LandmarkSequence interpolate_missing_landmarks(const LandmarkSequence& seq,
                                                      int max_gap = 3) {
    if (seq.frames.empty()) throw InvalidInputError("landmark sequence is empty");
    LandmarkSequence out = seq;
    const int n = static_cast<int>(out.frames.size());
    int i = 0;
    while (i < n) {
        if (out.frames[i].detected) {
            ++i;
            continue;
        }
        int j = i;
        while (j < n && !out.frames[j].detected) ++j;
        const int gap = j - i;
        const bool interior = (i > 0) && (j < n);
        if (interior && gap <= max_gap) {
            const LandmarkFrame& a = out.frames[i - 1];
            const LandmarkFrame& b = out.frames[j];
            for (int k = 0; k < gap; ++k) {
                const double t = static_cast<double>(k + 1) / (gap + 1);
                LandmarkFrame& f = out.frames[i + k];
                for (int v = 0; v < kLandmarkCount; ++v)
                    f.points[v] = a.points[v] + t * (b.points[v] - a.points[v]);
                f.detected = true;
                f.interpolated = true;
            }
        }
        i = j;
    }
    return out;
}

// Canonical mesh, tessellation and texture coordinates form the asset bundle
// every UV operation needs.
struct FaceMeshModel {
    std::array<Vec3, kLandmarkCount> canonical{};
    Tessellation tess;
    CanonicalUV uv;
};

// The tessellation asset fixes the winding convention. At the canonical pose
// at least 99% of face normals must face the camera (theta < 90 degrees);
// otherwise the winding is flipped globally.
inline bool ensure_camera_facing_winding(Tessellation& tess, const LandmarkFrame& canonical,
                                         const CameraModel& camera = {}) {
    const auto normals = face_normals(canonical, tess);
    size_t facing = 0;
    for (const Vec3& n : normals)
        if (angle_deg_between_units(n, camera.n_cam) < 90.0) ++facing;
    if (static_cast<double>(facing) >= 0.99 * static_cast<double>(normals.size())) return false;
    for (auto& tri : tess.triangles) std::swap(tri[1], tri[2]);
    return true;
}

}  // namespace uvrppg
