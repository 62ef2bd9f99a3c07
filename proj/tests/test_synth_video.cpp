#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "uvrppg/frame_ops.hpp"
#include "uvrppg/pulse_eval.hpp"
#include "uvrppg/rppg_extract.hpp"
#include "uvrppg/synth_video.hpp"

using namespace uvrppg;

namespace {

double mat_deviation_from_identity(const RigidTransform& tf) {
    double worst = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double rtr = 0.0;
            for (int k = 0; k < 3; ++k) rtr += tf.r[k][i] * tf.r[k][j];
            worst = std::max(worst, std::abs(rtr - (i == j ? 1.0 : 0.0)));
        }
    return worst;
}

double green_trace_std(const SyntheticVideo& sv) {
    std::vector<double> g;
    for (const Image& f : sv.frames) {
        double acc = 0.0;
        size_t n = 0;
        for (int y = 0; y < f.height; ++y)
            for (int x = 0; x < f.width; ++x) {
                if (f.at(y, x, 1) <= 0.0f) continue;  // background
                acc += f.at(y, x, 1);
                ++n;
            }
        g.push_back(acc / static_cast<double>(n));
    }
    double m = 0.0;
    for (double v : g) m += v;
    m /= static_cast<double>(g.size());
    double ss = 0.0;
    for (double v : g) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(g.size()));
}

}  // namespace

TEST_CASE("pose track") {
    SUBCASE("zero amplitudes give the identity transform") {
        MotionScript s;
        s.duration_s = 1.0;
        s.fps = 10.0;
        for (const auto& tf : generate_pose_track(s)) {
            CHECK(mat_deviation_from_identity(tf) <= 1e-15);
            CHECK(tf.r[0][0] == 1.0);
            CHECK(tf.d.x == 0.0);
        }
    }

    SUBCASE("yaw follows amp * sin(2 pi f t)") {
        MotionScript s;
        s.yaw_amp_deg = 30.0;
        s.yaw_freq_hz = 0.1;
        s.duration_s = 4.0;
        s.fps = 10.0;
        const auto poses = generate_pose_track(s);
        for (size_t f = 0; f < poses.size(); ++f) {
            const double t = static_cast<double>(f) / s.fps;
            const double want = rad_from_deg(30.0 * std::sin(2.0 * kPi * 0.1 * t));
            // For a pure yaw, R = Ry(yaw): R[0][0] = cos, R[0][2] = sin.
            CHECK(std::atan2(poses[f].r[0][2], poses[f].r[0][0]) ==
                  doctest::Approx(want).epsilon(1e-12));
        }
    }

    SUBCASE("composed rotations stay orthonormal") {
        MotionScript s;
        s.yaw_amp_deg = 35.0;
        s.yaw_freq_hz = 0.17;
        s.pitch_amp_deg = 20.0;
        s.pitch_freq_hz = 0.31;
        s.roll_amp_deg = 14.0;
        s.roll_freq_hz = 0.07;
        s.trans_amp_px = 9.0;
        s.trans_freq_hz = 0.4;
        s.duration_s = 3.0;
        s.fps = 20.0;
        for (const auto& tf : generate_pose_track(s))
            CHECK(mat_deviation_from_identity(tf) <= 1e-12);
    }
}

TEST_CASE("face proxy model is a valid asset bundle") {
    const FaceMeshModel model = make_face_proxy_model();
    CHECK(model.tess.triangles.size() == 862);
    validate_tessellation(model.tess);
    for (const Vec2& uv : model.uv.uv) {
        CHECK(uv.x >= 0.0);
        CHECK(uv.x <= 1.0);
        CHECK(uv.y >= 0.0);
        CHECK(uv.y <= 1.0);
    }
    // Orientation spread: masks at 30/45/60 all separate regions.
    LandmarkFrame canonical;
    canonical.detected = true;
    canonical.points = model.canonical;
    const auto orient = vertex_orientation(face_normals(canonical, model.tess), model.tess);
    int below30 = 0, mid = 0, above60 = 0;
    for (double a : orient.angles_deg) {
        if (a < 30.0) ++below30;
        if (a >= 30.0 && a < 60.0) ++mid;
        if (a >= 60.0) ++above60;
    }
    CHECK(below30 > 50);
    CHECK(mid > 50);
    CHECK(above60 > 50);
}

TEST_CASE("static render with zero pulse amplitude") {
    const FaceMeshModel model = make_face_proxy_model();
    MotionScript script;
    script.duration_s = 0.5;
    script.fps = 10.0;
    PulseParams pulse;
    pulse.amplitude = 0.0;
    const SyntheticVideo sv = render_synthetic_video(make_texture_atlas(64, 7), model,
                                                     generate_pose_track(script), pulse, 64, 64,
                                                     script.fps);
    REQUIRE(sv.frames.size() == 5);
    for (size_t f = 1; f < sv.frames.size(); ++f) CHECK(sv.frames[f].data == sv.frames[0].data);

    // Landmarks at the identity pose are the scaled, centered canonical mesh.
    const double scale = 0.42 * 64.0;
    for (int v = 0; v < kLandmarkCount; v += 37) {
        CHECK(sv.landmarks.frames[0].points[v].x ==
              doctest::Approx(32.0 + scale * model.canonical[v].x).epsilon(1e-12));
        CHECK(sv.landmarks.frames[0].points[v].z ==
              doctest::Approx(scale * model.canonical[v].z).epsilon(1e-12));
    }
}

TEST_CASE("render to UV round trip recovers the atlas on well-oriented texels") {
    const int s = 128;
    const FaceMeshModel model = make_face_proxy_model();
    const Image atlas = make_texture_atlas(s, 42);
    MotionScript script;
    script.duration_s = 0.2;
    script.fps = 10.0;
    PulseParams pulse;
    pulse.amplitude = 0.0;
    const SyntheticVideo sv =
        render_synthetic_video(atlas, model, generate_pose_track(script), pulse, s, s, script.fps);

    const auto pts = project_to_image_plane(sv.landmarks.frames[0]);
    const UVFrame uvf = rasterize_uv_texture(sv.frames[0], pts, model.tess, model.uv, s);
    const auto orient =
        vertex_orientation(face_normals(sv.landmarks.frames[0], model.tess), model.tess);
    const AngleFrame angle = rasterize_angle_frame(orient, model.tess, model.uv, s);
    const OrientationMask mask = orientation_mask(angle, 45.0);

    float lo = 1e9f, hi = -1e9f;
    for (float v : atlas.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    double err = 0.0;
    size_t n = 0;
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x) {
            if (!mask.keep.at(y, x)) continue;
            for (int c = 0; c < 3; ++c) {
                err += std::abs(uvf.texels.at(y, x, c) - atlas.at(y, x, c));
                ++n;
            }
        }
    REQUIRE(n > 10000);
    const double mae = err / static_cast<double>(n);
    CHECK(mae <= 0.02 * (hi - lo));
}

TEST_CASE("UV frames are stable under in-plane rigid motion on kept texels") {
    const int s = 96;
    const FaceMeshModel model = make_face_proxy_model();
    const Image atlas = make_texture_atlas(s, 4);
    MotionScript script;
    script.roll_amp_deg = 20.0;
    script.roll_freq_hz = 0.5;
    script.trans_amp_px = 6.0;
    script.trans_freq_hz = 0.5;
    script.duration_s = 1.0;
    script.fps = 4.0;
    PulseParams pulse;
    pulse.amplitude = 0.0;
    const SyntheticVideo sv =
        render_synthetic_video(atlas, model, generate_pose_track(script), pulse, s, s, script.fps);

    const UVRasterTable table = build_uv_raster_table(model.tess, model.uv, s);
    std::vector<UVFrame> uv_frames;
    std::vector<Mask> keeps;
    for (size_t f = 0; f < sv.frames.size(); ++f) {
        const auto pts = project_to_image_plane(sv.landmarks.frames[f]);
        uv_frames.push_back(apply_uv_raster(table, sv.frames[f], pts, model.tess));
        const auto orient =
            vertex_orientation(face_normals(sv.landmarks.frames[f], model.tess), model.tess);
        keeps.push_back(orientation_mask(apply_angle_raster(table, orient, model.tess), 45.0).keep);
    }
    double err = 0.0;
    size_t n = 0;
    for (size_t f = 1; f < uv_frames.size(); ++f) {
        for (int y = 0; y < s; ++y)
            for (int x = 0; x < s; ++x) {
                if (!keeps[0].at(y, x) || !keeps[f].at(y, x)) continue;
                for (int c = 0; c < 3; ++c) {
                    err += std::abs(uv_frames[f].texels.at(y, x, c) -
                                    uv_frames[0].texels.at(y, x, c));
                    ++n;
                }
            }
    }
    REQUIRE(n > 10000);
    CHECK(err / static_cast<double>(n) <= 0.02 * 255.0);
}

TEST_CASE("ground-truth PPG is the embedded sinusoid") {
    const FaceMeshModel model = make_face_proxy_model();
    MotionScript script;
    script.duration_s = 2.0;
    script.fps = 10.0;
    PulseParams pulse;
    pulse.f_hr_hz = 1.2;
    const SyntheticVideo sv = render_synthetic_video(make_texture_atlas(32, 1), model,
                                                     generate_pose_track(script), pulse, 32, 32,
                                                     script.fps, 60.0);
    REQUIRE(sv.ppg.timestamps.size() == 121);  // 2 s at 60 Hz inclusive
    for (size_t k = 0; k < sv.ppg.timestamps.size(); ++k) {
        const double t = static_cast<double>(k) / 60.0;
        CHECK(sv.ppg.timestamps[k] == doctest::Approx(t).epsilon(1e-12));
        CHECK(sv.ppg.values[k] == doctest::Approx(std::sin(2.0 * kPi * 1.2 * t)).epsilon(1e-12));
    }
}

TEST_CASE("pulse amplitude scales the green-trace modulation linearly") {
    const FaceMeshModel model = make_face_proxy_model();
    MotionScript script;
    script.duration_s = 3.0;
    script.fps = 20.0;
    const auto poses = generate_pose_track(script);
    const Image atlas = make_texture_atlas(64, 9);
    PulseParams p1, p2;
    p1.amplitude = 0.02;
    p2.amplitude = 0.04;
    const double s1 = green_trace_std(render_synthetic_video(atlas, model, poses, p1, 64, 64, 20.0));
    const double s2 = green_trace_std(render_synthetic_video(atlas, model, poses, p2, 64, 64, 20.0));
    CHECK(s2 / s1 == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("every extractor recovers the embedded rate within one FFT bin") {
    const FaceMeshModel model = make_face_proxy_model();
    MotionScript script = scenario_script("stationary", 20.0, 30.0);
    PulseParams pulse;
    pulse.f_hr_hz = 1.2;
    pulse.amplitude = 0.02;
    const SyntheticVideo sv = render_synthetic_video(make_texture_atlas(96, 5), model,
                                                     generate_pose_track(script), pulse, 96, 96,
                                                     30.0);
    VideoTensor video;
    video.frames = sv.frames;
    video.fps = 30.0;
    const PipelineSpec spec = PipelineSpec::parse("tuv:64,mask:45,fd", 128);
    const auto windows = run_pipeline(video, sv.landmarks, spec, model);
    REQUIRE(windows.size() == 4);

    for (const char* id : {"green", "chrom", "pos"}) {
        const auto extractor = make_extractor(id);
        const PulseWaveform wave = extract_full_video(windows, *extractor);
        const PrChainResult chain = estimate_pulse_rate(wave.values, wave.fps);
        CHECK(std::abs(chain.estimate.bpm - 72.0) <= chain.estimate.bin_width_bpm);
    }
}

TEST_CASE("scenario presets and validation") {
    CHECK(scenario_script("rotation", 10.0, 30.0).yaw_amp_deg == 30.0);
    CHECK(scenario_script("walking", 10.0, 30.0).trans_amp_px > 0.0);
    CHECK(scenario_script("stationary", 10.0, 30.0).yaw_amp_deg == 0.0);
    CHECK(scenario_script("talking", 10.0, 30.0).pitch_amp_deg > 0.0);
    CHECK_THROWS_AS(scenario_script("jumping", 10.0, 30.0), ConfigError);

    const FaceMeshModel model = make_face_proxy_model();
    PulseParams bad;
    bad.f_hr_hz = 3.5;
    MotionScript s;
    s.duration_s = 0.2;
    s.fps = 10.0;
    CHECK_THROWS_AS(render_synthetic_video(make_texture_atlas(16, 1), model,
                                           generate_pose_track(s), bad, 16, 16, 10.0),
                    InvalidInputError);
}
