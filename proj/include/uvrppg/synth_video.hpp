#pragma once

#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "uvrppg/core.hpp"
#include "uvrppg/image.hpp"
#include "uvrppg/mesh_geometry.hpp"
#include "uvrppg/rppg_extract.hpp"
#include "uvrppg/uv_mapping.hpp"

namespace uvrppg {

// Scripted rigid motion: every axis follows amp * sin(2 pi freq t).
struct MotionScript {
    double yaw_amp_deg = 0.0, yaw_freq_hz = 0.0;
    double pitch_amp_deg = 0.0, pitch_freq_hz = 0.0;
    double roll_amp_deg = 0.0, roll_freq_hz = 0.0;
    double trans_amp_px = 0.0, trans_freq_hz = 0.0;
    double duration_s = 10.0;
    double fps = 30.0;
    std::string scenario = "stationary";

    int frame_count() const { return static_cast<int>(std::lround(duration_s * fps)); }
};

// Pulsatile intensity modulation embedded into the rendered texture.
struct PulseParams {
    double f_hr_hz = 1.2;
    double amplitude = 0.02;                          // fraction of base intensity
    std::array<double, 3> channel_weights{0.33, 0.77, 0.53};
};

struct RigidTransform {
    std::array<std::array<double, 3>, 3> r{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    Vec3 d{};

    Vec3 apply(const Vec3& v) const {
        return {r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z + d.x,
                r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z + d.y,
                r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z + d.z};
    }
};

namespace detail {

inline std::array<std::array<double, 3>, 3> mat_mul(const std::array<std::array<double, 3>, 3>& a,
                                                    const std::array<std::array<double, 3>, 3>& b) {
    std::array<std::array<double, 3>, 3> m{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) m[i][j] += a[i][k] * b[k][j];
    return m;
}

inline std::array<std::array<double, 3>, 3> rot_x(double rad) {
    const double c = std::cos(rad), s = std::sin(rad);
    return {{{1, 0, 0}, {0, c, -s}, {0, s, c}}};
}
inline std::array<std::array<double, 3>, 3> rot_y(double rad) {
    const double c = std::cos(rad), s = std::sin(rad);
    return {{{c, 0, s}, {0, 1, 0}, {-s, 0, c}}};
}
inline std::array<std::array<double, 3>, 3> rot_z(double rad) {
    const double c = std::cos(rad), s = std::sin(rad);
    return {{{c, -s, 0}, {s, c, 0}, {0, 0, 1}}};
}

}  // namespace detail

// Sinusoidal pose track: R(t) = Rz(roll) Rx(pitch) Ry(yaw), translation along
// the image x axis.
inline std::vector<RigidTransform> generate_pose_track(const MotionScript& script) {
    if (script.frame_count() < 2) throw InvalidInputError("motion script spans fewer than 2 frames");
    std::vector<RigidTransform> out;
    out.reserve(script.frame_count());
    for (int f = 0; f < script.frame_count(); ++f) {
        const double t = static_cast<double>(f) / script.fps;
        const double yaw = rad_from_deg(script.yaw_amp_deg * std::sin(2.0 * kPi * script.yaw_freq_hz * t));
        const double pitch =
            rad_from_deg(script.pitch_amp_deg * std::sin(2.0 * kPi * script.pitch_freq_hz * t));
        const double roll =
            rad_from_deg(script.roll_amp_deg * std::sin(2.0 * kPi * script.roll_freq_hz * t));
        RigidTransform tf;
        tf.r = detail::mat_mul(detail::rot_z(roll), detail::mat_mul(detail::rot_x(pitch), detail::rot_y(yaw)));
        tf.d = {script.trans_amp_px * std::sin(2.0 * kPi * script.trans_freq_hz * t), 0.0, 0.0};
        out.push_back(tf);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Canonical face proxy: an ellipsoid dome over the unit disk with 12
// concentric rings of 6k vertices (468 total), bulging toward the camera
// (negative z). Its UV layout is the disk itself, so UV triangles never
// overlap.

inline FaceMeshModel make_face_proxy_model() {
    FaceMeshModel model;
    constexpr int kRings = 12;
    constexpr double kDomeHeight = 0.6;
    int idx = 0;
    std::array<int, kRings + 1> ring_base{};  // ring k (1-based) starts at ring_base[k]
    for (int k = 1; k <= kRings; ++k) {
        ring_base[k] = idx;
        const int nk = 6 * k;
        const double rho = static_cast<double>(k) / kRings;
        for (int j = 0; j < nk; ++j) {
            const double phi = 2.0 * kPi * (j + 0.5 * (k % 2)) / nk;
            const double x = rho * std::cos(phi);
            const double y = rho * std::sin(phi);
            const double z = -kDomeHeight * std::sqrt(std::max(0.0, 1.0 - rho * rho));
            model.canonical[idx] = {x, y, z};
            model.uv.uv[idx] = {0.05 + 0.45 * (x + 1.0), 0.05 + 0.45 * (y + 1.0)};
            ++idx;
        }
    }

    auto add_tri = [&](int a, int b, int c) { model.tess.triangles.push_back({a, b, c}); };
    // Innermost ring closes as a small fan, wound like the annuli.
    for (int j = 1; j + 1 < 6; ++j) add_tri(ring_base[1], ring_base[1] + j + 1, ring_base[1] + j);
    // Annuli between consecutive rings, merged by angular parameter.
    for (int k = 1; k < kRings; ++k) {
        const int n = 6 * k, m = 6 * (k + 1);
        const int bi = ring_base[k], bo = ring_base[k + 1];
        int i = 0, j = 0;
        while (i < n || j < m) {
            bool step_inner;
            if (i == n)
                step_inner = false;
            else if (j == m)
                step_inner = true;
            else
                step_inner = static_cast<double>(i + 1) * m <= static_cast<double>(j + 1) * n;
            if (step_inner) {
                add_tri(bi + i % n, bi + (i + 1) % n, bo + j % m);
                ++i;
            } else {
                add_tri(bi + i % n, bo + (j + 1) % m, bo + j % m);
                ++j;
            }
        }
    }

    validate_tessellation(model.tess);
    LandmarkFrame canonical;
    canonical.detected = true;
    canonical.points = model.canonical;
    ensure_camera_facing_winding(model.tess, canonical);
    return model;
}

// Band-limited skin-like texture atlas, deterministic per seed.
inline Image make_texture_atlas(int size, uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    std::uniform_real_distribution<double> freq(0.5, 2.5);  // cycles across the atlas
    std::uniform_real_distribution<double> amp(6.0, 14.0);
    const double base[3] = {190.0, 140.0, 120.0};
    struct Grating {
        double fx, fy, ph, a;
    };
    std::vector<Grating> gratings;
    for (int i = 0; i < 6; ++i)
        gratings.push_back({freq(rng), freq(rng), phase(rng), amp(rng)});
    Image atlas(size, size, 3, 0.0f);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double u = static_cast<double>(x) / (size - 1);
            const double v = static_cast<double>(y) / (size - 1);
            double bump = 0.0;
            for (const Grating& g : gratings)
                bump += g.a * std::sin(2.0 * kPi * (g.fx * u + g.fy * v) + g.ph);
            for (int c = 0; c < 3; ++c) {
                const double val = base[c] + bump * (c == 1 ? 1.0 : 0.8);
                atlas.at(y, x, c) = static_cast<float>(std::clamp(val, 20.0, 235.0));
            }
        }
    }
    return atlas;
}

struct SyntheticVideo {
    std::vector<Image> frames;  // float RGB, 0..255 scale
    LandmarkSequence landmarks;
    GroundTruthPPG ppg;
};

// Render the textured proxy mesh under the scripted motion with the pulse
// modulation baked into the sampled intensities. Orthographic projection,
// back-face culling only. Emitted landmarks are the exact transformed
// vertices; the reference PPG is sin(2 pi f_hr t) sampled at ppg_fps.
inline SyntheticVideo render_synthetic_video(const Image& atlas, const FaceMeshModel& model,
                                             const std::vector<RigidTransform>& poses,
                                             const PulseParams& pulse, int width, int height,
                                             double fps, double ppg_fps = 60.0) {
    if (atlas.channels != 3) throw InvalidInputError("texture atlas must have 3 channels");
    if (!(pulse.f_hr_hz >= 0.75 && pulse.f_hr_hz <= 2.5))
        throw InvalidInputError("pulse frequency must lie in [0.75, 2.5] Hz");
    if (!(pulse.amplitude >= 0.0 && pulse.amplitude <= 0.2))
        throw InvalidInputError("pulse amplitude must lie in [0, 0.2]");
    const double scale = 0.42 * std::min(width, height);
    const Vec3 center{0.5 * width, 0.5 * height, 0.0};

    // Scaled canonical vertices and their centroid (rotation pivot).
    std::array<Vec3, kLandmarkCount> base;
    Vec3 pivot{};
    for (int v = 0; v < kLandmarkCount; ++v) {
        base[v] = center + scale * model.canonical[v];
        pivot = pivot + (1.0 / kLandmarkCount) * base[v];
    }

    SyntheticVideo out;
    out.landmarks.fps = fps;
    const CameraModel camera;
    std::vector<float> texel(3);
    for (size_t f = 0; f < poses.size(); ++f) {
        const double t = static_cast<double>(f) / fps;
        LandmarkFrame lm;
        lm.detected = true;
        lm.frame_index = static_cast<int>(f);
        for (int v = 0; v < kLandmarkCount; ++v)
            lm.points[v] = poses[f].apply(base[v] - pivot) + pivot;

        double gain[3];
        for (int c = 0; c < 3; ++c)
            gain[c] = 1.0 + pulse.amplitude * pulse.channel_weights[c] *
                                std::sin(2.0 * kPi * pulse.f_hr_hz * t);

        // Visibility: draw only camera-facing triangles.
        std::vector<uint8_t> visible(model.tess.triangles.size(), 0);
        for (size_t tr = 0; tr < model.tess.triangles.size(); ++tr) {
            const auto& tri = model.tess.triangles[tr];
            const Vec3 n = cross(lm.points[tri[1]] - lm.points[tri[0]],
                                 lm.points[tri[2]] - lm.points[tri[0]]);
            visible[tr] = dot(n, camera.n_cam) > 0.0 ? 1 : 0;
        }

        Image frame(height, width, 3, 0.0f);
        detail::rasterize_triangles(
            width, height, model.tess.triangles.size(),
            [&](size_t tr, std::array<Vec2, 3>& q) {
                const auto& tri = model.tess.triangles[tr];
                if (!visible[tr]) {
                    q = {Vec2{0, 0}, Vec2{0, 0}, Vec2{0, 0}};  // zero area, skipped
                    return;
                }
                for (int k = 0; k < 3; ++k)
                    q[k] = {lm.points[tri[k]].x, lm.points[tri[k]].y};
            },
            [&](int x, int y, size_t tr, double l0, double l1, double l2) {
                const auto& tri = model.tess.triangles[tr];
                const Vec2 uv0 = model.uv.uv[tri[0]], uv1 = model.uv.uv[tri[1]],
                           uv2 = model.uv.uv[tri[2]];
                const double u = l0 * uv0.x + l1 * uv1.x + l2 * uv2.x;
                const double v = l0 * uv0.y + l1 * uv1.y + l2 * uv2.y;
                sample_bilinear_clamped(atlas, u * (atlas.width - 1), v * (atlas.height - 1),
                                        texel.data());
                for (int c = 0; c < 3; ++c)
                    frame.at(y, x, c) =
                        static_cast<float>(std::clamp(texel[c] * gain[c], 0.0, 255.0));
            });
        out.frames.push_back(std::move(frame));
        out.landmarks.frames.push_back(std::move(lm));
    }

    const double duration = static_cast<double>(poses.size()) / fps;
    for (size_t k = 0;; ++k) {
        const double t = static_cast<double>(k) / ppg_fps;
        if (t > duration) break;
        out.ppg.timestamps.push_back(t);
        out.ppg.values.push_back(std::sin(2.0 * kPi * pulse.f_hr_hz * t));
    }
    return out;
}

// Motion presets mirroring the benchmark's scenario taxonomy.
inline MotionScript scenario_script(const std::string& name, double duration_s, double fps) {
    MotionScript s;
    s.duration_s = duration_s;
    s.fps = fps;
    s.scenario = name;
    if (name == "stationary") {
        // all amplitudes zero
    } else if (name == "rotation") {
        s.yaw_amp_deg = 30.0;
        s.yaw_freq_hz = 0.1;
    } else if (name == "talking") {
        s.yaw_amp_deg = 6.0;
        s.yaw_freq_hz = 0.25;
        s.pitch_amp_deg = 4.0;
        s.pitch_freq_hz = 0.4;
    } else if (name == "walking") {
        s.trans_amp_px = 12.0;
        s.trans_freq_hz = 0.5;
        s.yaw_amp_deg = 8.0;
        s.yaw_freq_hz = 0.3;
        s.roll_amp_deg = 4.0;
        s.roll_freq_hz = 0.5;
    } else {
        throw ConfigError("unknown scenario '" + name +
                          "' (expected stationary, rotation, talking or walking)");
    }
    return s;
}

}  // namespace uvrppg
