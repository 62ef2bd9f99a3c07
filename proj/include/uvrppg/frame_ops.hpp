#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "uvrppg/core.hpp"
#include "uvrppg/image.hpp"
#include "uvrppg/mesh_geometry.hpp"
#include "uvrppg/uv_mapping.hpp"

namespace uvrppg {

enum class ValueSemantics { raw_intensity, differenced_standardized };

// T frames of equal shape plus the scale they are expressed in.
struct VideoTensor {
    std::vector<Image> frames;
    ValueSemantics semantics = ValueSemantics::raw_intensity;
    double fps = 0.0;
};

struct BoundingBox {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
};

// ---------------------------------------------------------------------------
// Convex hull helpers (Andrew monotone chain, CCW order).

inline std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
    std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Vec2& a, const Vec2& b) { return a.x == b.x && a.y == b.y; }),
              pts.end());
    const size_t n = pts.size();
    if (n < 3) throw DegenerateGeometryError("convex hull needs at least 3 distinct points");
    std::vector<Vec2> hull(2 * n);
    size_t k = 0;
    for (size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    for (size_t i = n - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    if (hull.size() < 3) throw DegenerateGeometryError("landmark hull is collinear");
    return hull;
}

inline bool point_in_convex_hull(const std::vector<Vec2>& hull, const Vec2& p) {
    const size_t n = hull.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& a = hull[i];
        const Vec2& b = hull[(i + 1) % n];
        if (cross(b - a, p - a) < 0.0) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Spatial stages.

// Axis-aligned bounds of the convex hull of the projected landmarks, scaled
// about the box center.
inline BoundingBox static_crop_box(const std::array<Vec2, kLandmarkCount>& pts2d,
                                   double scale = 1.5) {
    convex_hull(std::vector<Vec2>(pts2d.begin(), pts2d.end()));  // degeneracy check
    BoundingBox b{pts2d[0].x, pts2d[0].y, pts2d[0].x, pts2d[0].y};
    for (const Vec2& p : pts2d) {
        b.x0 = std::min(b.x0, p.x);
        b.y0 = std::min(b.y0, p.y);
        b.x1 = std::max(b.x1, p.x);
        b.y1 = std::max(b.y1, p.y);
    }
    const double cx = 0.5 * (b.x0 + b.x1), cy = 0.5 * (b.y0 + b.y1);
    const double hx = 0.5 * (b.x1 - b.x0) * scale, hy = 0.5 * (b.y1 - b.y0) * scale;
    return {cx - hx, cy - hy, cx + hx, cy + hy};
}

// Integer pixel range of a float box: [floor(x0), ceil(x1)) per axis.
struct PixelRect {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
};

inline PixelRect pixel_rect(const BoundingBox& box) {
    if (!(box.x0 < box.x1 && box.y0 < box.y1))
        throw InvalidInputError("bounding box is empty or inverted");
    return {static_cast<int>(std::floor(box.x0)), static_cast<int>(std::floor(box.y0)),
            static_cast<int>(std::ceil(box.x1)), static_cast<int>(std::ceil(box.y1))};
}

// Crop a frame to the box; pixels outside the source image are zero-filled
// and marked not-kept in the mask.
inline void crop_frame(const Image& src, const Mask& src_mask, const PixelRect& r, Image& dst,
                       Mask& dst_mask) {
    if (r.x1 <= 0 || r.y1 <= 0 || r.x0 >= src.width || r.y0 >= src.height)
        throw InvalidInputError("crop box does not intersect the frame");
    dst = Image(r.height(), r.width(), src.channels, 0.0f);
    dst_mask = Mask(r.height(), r.width(), false);
    for (int y = 0; y < r.height(); ++y) {
        const int sy = r.y0 + y;
        if (sy < 0 || sy >= src.height) continue;
        for (int x = 0; x < r.width(); ++x) {
            const int sx = r.x0 + x;
            if (sx < 0 || sx >= src.width) continue;
            for (int c = 0; c < src.channels; ++c) dst.at(y, x, c) = src.at(sy, sx, c);
            dst_mask.at(y, x) = src_mask.at(sy, sx);
        }
    }
}

// Symmetric zero padding of the shorter side up to a square; an odd
// difference puts the extra pixel on the trailing edge.
inline void pad_square_frame(const Image& src, const Mask& src_mask, Image& dst, Mask& dst_mask,
                             int* pad_left = nullptr, int* pad_top = nullptr) {
    const int side = std::max(src.height, src.width);
    const int padL = (side - src.width) / 2;
    const int padT = (side - src.height) / 2;
    dst = Image(side, side, src.channels, 0.0f);
    dst_mask = Mask(side, side, false);
    for (int y = 0; y < src.height; ++y)
        for (int x = 0; x < src.width; ++x) {
            for (int c = 0; c < src.channels; ++c) dst.at(y + padT, x + padL, c) = src.at(y, x, c);
            dst_mask.at(y + padT, x + padL) = src_mask.at(y, x);
        }
    if (pad_left) *pad_left = padL;
    if (pad_top) *pad_top = padT;
}

// Zero out pixels outside the convex hull of the projected landmarks.
inline void segment_frame(Image& frame, Mask& mask,
                          const std::array<Vec2, kLandmarkCount>& pts2d) {
    const auto hull = convex_hull(std::vector<Vec2>(pts2d.begin(), pts2d.end()));
    for (int y = 0; y < frame.height; ++y) {
        for (int x = 0; x < frame.width; ++x) {
            if (!point_in_convex_hull(hull, {static_cast<double>(x), static_cast<double>(y)})) {
                for (int c = 0; c < frame.channels; ++c) frame.at(y, x, c) = 0.0f;
                mask.at(y, x) = 0;
            }
        }
    }
}

// Bilinear resize with the half-pixel-center convention:
// src = (dst + 0.5) * (src_dim / dst_dim) - 0.5, clamped at edges.
inline Image resize_bilinear(const Image& src, int out_h, int out_w) {
    if (out_h < 1 || out_w < 1) throw InvalidInputError("resize target must be >= 1");
    Image dst(out_h, out_w, src.channels, 0.0f);
    const double sy_scale = static_cast<double>(src.height) / out_h;
    const double sx_scale = static_cast<double>(src.width) / out_w;
    std::vector<float> sample(static_cast<size_t>(src.channels));
    for (int y = 0; y < out_h; ++y) {
        const double sy = (y + 0.5) * sy_scale - 0.5;
        for (int x = 0; x < out_w; ++x) {
            const double sx = (x + 0.5) * sx_scale - 0.5;
            sample_bilinear_clamped(src, sx, sy, sample.data());
            for (int c = 0; c < src.channels; ++c) dst.at(y, x, c) = sample[c];
        }
    }
    return dst;
}

inline Mask resize_mask(const Mask& src, int out_h, int out_w) {
    Image tmp(src.height, src.width, 1, 0.0f);
    for (int y = 0; y < src.height; ++y)
        for (int x = 0; x < src.width; ++x) tmp.at(y, x, 0) = src.at(y, x) ? 1.0f : 0.0f;
    const Image resized = resize_bilinear(tmp, out_h, out_w);
    Mask out(out_h, out_w, false);
    for (int y = 0; y < out_h; ++y)
        for (int x = 0; x < out_w; ++x) out.at(y, x) = resized.at(y, x, 0) >= 0.5f ? 1 : 0;
    return out;
}

// Video-level static crop: every frame is cropped to the same box.
inline VideoTensor crop(const VideoTensor& video, const BoundingBox& box) {
    const PixelRect r = pixel_rect(box);
    VideoTensor out;
    out.semantics = video.semantics;
    out.fps = video.fps;
    out.frames.reserve(video.frames.size());
    for (const Image& f : video.frames) {
        Image dst;
        Mask m_in(f.height, f.width, true), m_out;
        crop_frame(f, m_in, r, dst, m_out);
        out.frames.push_back(std::move(dst));
    }
    return out;
}

// Video-level dynamic crop: per-frame landmark box, then square padding.
// Frame sizes may differ across frames afterwards.
inline std::vector<Image> dynamic_crop_pad(
    const std::vector<Image>& frames,
    const std::vector<std::array<Vec2, kLandmarkCount>>& pts2d, double scale = 1.5) {
    if (frames.size() != pts2d.size())
        throw InvalidInputError("frame count does not match landmark count");
    std::vector<Image> out;
    out.reserve(frames.size());
    for (size_t i = 0; i < frames.size(); ++i) {
        const PixelRect r = pixel_rect(static_crop_box(pts2d[i], scale));
        Image cropped, padded;
        Mask m_in(frames[i].height, frames[i].width, true), m_c, m_p;
        crop_frame(frames[i], m_in, r, cropped, m_c);
        pad_square_frame(cropped, m_c, padded, m_p);
        out.push_back(std::move(padded));
    }
    return out;
}

// ---------------------------------------------------------------------------
// F_D chain: first-order normalized frame difference, then standardization
// and outlier clipping, both per extracted window.

inline VideoTensor normalized_frame_difference(const VideoTensor& window, double eps = 1e-7) {
    if (window.semantics != ValueSemantics::raw_intensity)
        throw InvalidInputError("frame difference expects raw intensity input");
    if (window.frames.size() < 2)
        throw InvalidInputError("frame difference needs at least 2 frames");
    for (size_t t = 1; t < window.frames.size(); ++t)
        if (!window.frames[t].same_shape(window.frames[0]))
            throw InvalidInputError("frame difference needs uniform frame shapes");
    VideoTensor out;
    out.fps = window.fps;
    out.semantics = ValueSemantics::raw_intensity;  // becomes standardized after clip_standardize
    out.frames.reserve(window.frames.size() - 1);
    for (size_t t = 0; t + 1 < window.frames.size(); ++t) {
        const Image& a = window.frames[t];
        const Image& b = window.frames[t + 1];
        Image d(a.height, a.width, a.channels, 0.0f);
        for (size_t i = 0; i < d.size(); ++i) {
            const double num = static_cast<double>(b.data[i]) - a.data[i];
            const double den = static_cast<double>(b.data[i]) + a.data[i] + eps;
            const double v = num / den;
            d.data[i] = std::isfinite(v) ? static_cast<float>(v) : 0.0f;
        }
        out.frames.push_back(std::move(d));
    }
    return out;
}

struct StandardizeResult {
    VideoTensor tensor;
    bool zero_variance = false;
};

// x <- clamp((x - mu) / sigma, +-clip_sigma) with mu, sigma taken over every
// pixel and channel of the window. Population sigma; fixed accumulation order.
inline StandardizeResult clip_standardize(const VideoTensor& window, double clip_sigma = 3.0) {
    size_t n = 0;
    double sum = 0.0;
    for (const Image& f : window.frames)
        for (float v : f.data) {
            sum += v;
            ++n;
        }
    if (n < 2) throw InvalidInputError("standardization needs at least 2 values");
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const Image& f : window.frames)
        for (float v : f.data) ss += (v - mean) * (v - mean);
    const double sigma = std::sqrt(ss / static_cast<double>(n));
    StandardizeResult res;
    res.tensor = window;
    res.tensor.semantics = ValueSemantics::differenced_standardized;
    if (sigma == 0.0) {
        for (Image& f : res.tensor.frames) std::fill(f.data.begin(), f.data.end(), 0.0f);
        res.zero_variance = true;
        return res;
    }
    for (Image& f : res.tensor.frames)
        for (float& v : f.data) {
            double z = (v - mean) / sigma;
            if (!std::isfinite(z)) z = 0.0;
            v = static_cast<float>(std::clamp(z, -clip_sigma, clip_sigma));
        }
    return res;
}

// ---------------------------------------------------------------------------
// Pipeline specification and execution.

enum class StageKind { crop_static, crop_dynamic, pad_square, segment, t_uv, mask, f_d, resize };

struct Stage {
    StageKind kind;
    double param = 0.0;  // scale, UV size, threshold or resize target
};

struct PipelineSpec {
    std::vector<Stage> stages;
    int window_len = 128;
    double fd_eps = 1e-7;
    double clip_sigma = 3.0;

    static PipelineSpec parse(const std::string& text, int window_len = 128);
    std::string str() const;
    void validate() const;
};

inline PipelineSpec PipelineSpec::parse(const std::string& text, int window_len) {
    PipelineSpec spec;
    spec.window_len = window_len;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        std::string token = text.substr(pos, comma - pos);
        pos = comma + 1;
        if (token.empty()) {
            if (text.empty()) break;
            throw ConfigError("empty stage token in pipeline '" + text + "'");
        }
        std::string name = token;
        std::optional<double> arg;
        if (const size_t colon = token.find(':'); colon != std::string::npos) {
            name = token.substr(0, colon);
            try {
                arg = std::stod(token.substr(colon + 1));
            } catch (const std::exception&) {
                throw ConfigError("bad stage parameter in '" + token + "'");
            }
        }
        if (name == "crop_static")
            spec.stages.push_back({StageKind::crop_static, arg.value_or(1.5)});
        else if (name == "crop_dynamic")
            spec.stages.push_back({StageKind::crop_dynamic, arg.value_or(1.5)});
        else if (name == "pad_square" || name == "pad")
            spec.stages.push_back({StageKind::pad_square, 0.0});
        else if (name == "segment")
            spec.stages.push_back({StageKind::segment, 0.0});
        else if (name == "tuv")
            spec.stages.push_back({StageKind::t_uv, arg.value_or(128.0)});
        else if (name == "mask")
            spec.stages.push_back({StageKind::mask, arg.value_or(45.0)});
        else if (name == "fd")
            spec.stages.push_back({StageKind::f_d, 0.0});
        else if (name == "resize")
            spec.stages.push_back({StageKind::resize, arg.value_or(72.0)});
        else
            throw ConfigError("unknown pipeline stage '" + name + "'");
        if (comma == text.size()) break;
    }
    spec.validate();
    return spec;
}

inline std::string PipelineSpec::str() const {
    std::string out;
    for (size_t i = 0; i < stages.size(); ++i) {
        if (i) out += ',';
        const Stage& s = stages[i];
        char buf[48];
        switch (s.kind) {
            case StageKind::crop_static:
                std::snprintf(buf, sizeof buf, "crop_static:%g", s.param);
                break;
            case StageKind::crop_dynamic:
                std::snprintf(buf, sizeof buf, "crop_dynamic:%g", s.param);
                break;
            case StageKind::pad_square:
                std::snprintf(buf, sizeof buf, "pad_square");
                break;
            case StageKind::segment:
                std::snprintf(buf, sizeof buf, "segment");
                break;
            case StageKind::t_uv:
                std::snprintf(buf, sizeof buf, "tuv:%d", static_cast<int>(s.param));
                break;
            case StageKind::mask:
                std::snprintf(buf, sizeof buf, "mask:%g", s.param);
                break;
            case StageKind::f_d:
                std::snprintf(buf, sizeof buf, "fd");
                break;
            case StageKind::resize:
                std::snprintf(buf, sizeof buf, "resize:%d", static_cast<int>(s.param));
                break;
        }
        out += buf;
    }
    return out;
}

inline void PipelineSpec::validate() const {
    if (window_len < 2) throw ConfigError("window length must be >= 2");
    int crops = 0, tuv = 0, fd = 0;
    bool tuv_seen = false;
    for (const Stage& s : stages) {
        switch (s.kind) {
            case StageKind::crop_static:
            case StageKind::crop_dynamic:
                ++crops;
                if (s.param <= 0.0) throw ConfigError("crop scale must be > 0");
                break;
            case StageKind::t_uv:
                ++tuv;
                tuv_seen = true;
                if (s.param < 2.0) throw ConfigError("tuv size must be >= 2");
                break;
            case StageKind::mask:
                if (!tuv_seen) throw ConfigError("mask stage requires an earlier tuv stage");
                if (!(s.param > 0.0 && s.param <= 180.0))
                    throw ConfigError("mask threshold must lie in (0, 180] degrees");
                break;
            case StageKind::segment:
                if (tuv_seen) throw ConfigError("segment stage cannot follow tuv");
                break;
            case StageKind::f_d:
                ++fd;
                break;
            case StageKind::pad_square:
                break;
            case StageKind::resize:
                if (s.param < 1.0) throw ConfigError("resize target must be >= 1");
                break;
        }
    }
    if (crops + tuv > 1) throw ConfigError("at most one of crop_static/crop_dynamic/tuv");
    if (fd > 1) throw ConfigError("fd may appear at most once");
}

// One processed non-overlapping window plus its per-frame keep masks and
// provenance.
struct ProcessedWindow {
    VideoTensor tensor;
    std::vector<Mask> masks;
    int window_index = 0;
    int start_frame = 0;
    std::string pipeline;
    std::vector<std::string> warnings;
};

namespace detail {

struct WindowState {
    std::vector<Image> frames;
    std::vector<Mask> masks;
    std::vector<std::array<Vec2, kLandmarkCount>> pts;
    std::vector<const LandmarkFrame*> lm3d;
    ValueSemantics semantics = ValueSemantics::raw_intensity;
};

inline void require_uniform(const std::vector<Image>& frames, const char* what) {
    for (size_t t = 1; t < frames.size(); ++t)
        if (!frames[t].same_shape(frames[0]))
            throw ConfigError(std::string(what) +
                              " requires uniform frame sizes; add a resize stage first");
}

}  // namespace detail

// Split the video into non-overlapping windows of window_len frames (the
// trailing partial window is dropped), apply the stages in declared order and
// return the processed windows. Windows overlapping undetected landmark
// frames are skipped.
inline std::vector<ProcessedWindow> run_pipeline(const VideoTensor& video,
                                                 const LandmarkSequence& landmarks,
                                                 const PipelineSpec& spec,
                                                 const FaceMeshModel& model) {
    spec.validate();
    if (video.frames.size() != landmarks.frames.size())
        throw InvalidInputError("video and landmark sequence lengths differ");
    if (video.frames.empty()) throw InvalidInputError("video has no frames");

    // Video-level context shared by all windows.
    std::optional<BoundingBox> static_box;
    std::optional<UVRasterTable> raster;
    for (const Stage& s : spec.stages) {
        if (s.kind == StageKind::crop_static) {
            if (!landmarks.frames.front().detected)
                throw InvalidInputError("static crop requires detected landmarks on frame 0");
            static_box = static_crop_box(project_to_image_plane(landmarks.frames.front()),
                                         s.param);
        } else if (s.kind == StageKind::t_uv) {
            raster = build_uv_raster_table(model.tess, model.uv, static_cast<int>(s.param));
        }
    }

    std::vector<ProcessedWindow> out;
    const int total = static_cast<int>(video.frames.size());
    const int n_windows = total / spec.window_len;
    for (int w = 0; w < n_windows; ++w) {
        const int start = w * spec.window_len;
        bool valid = true;
        for (int t = 0; t < spec.window_len; ++t)
            if (!landmarks.frames[start + t].detected) valid = false;
        if (!valid) continue;  // overlaps an unfilled landmark gap

        detail::WindowState st;
        st.frames.reserve(spec.window_len);
        for (int t = 0; t < spec.window_len; ++t) {
            const int idx = start + t;
            st.frames.push_back(video.frames[idx]);
            st.masks.emplace_back(video.frames[idx].height, video.frames[idx].width, true);
            st.pts.push_back(project_to_image_plane(landmarks.frames[idx]));
            st.lm3d.push_back(&landmarks.frames[idx]);
        }

        ProcessedWindow pw;
        pw.window_index = w;
        pw.start_frame = start;
        pw.pipeline = spec.str();

        for (const Stage& s : spec.stages) {
            switch (s.kind) {
                case StageKind::crop_static: {
                    const PixelRect r = pixel_rect(*static_box);
                    for (size_t t = 0; t < st.frames.size(); ++t) {
                        Image dst;
                        Mask dm;
                        crop_frame(st.frames[t], st.masks[t], r, dst, dm);
                        st.frames[t] = std::move(dst);
                        st.masks[t] = std::move(dm);
                        for (auto& p : st.pts[t]) p = {p.x - r.x0, p.y - r.y0};
                    }
                    break;
                }
                case StageKind::crop_dynamic: {
                    for (size_t t = 0; t < st.frames.size(); ++t) {
                        const PixelRect r = pixel_rect(static_crop_box(st.pts[t], s.param));
                        Image cropped, padded;
                        Mask mc, mp;
                        crop_frame(st.frames[t], st.masks[t], r, cropped, mc);
                        int padL = 0, padT = 0;
                        pad_square_frame(cropped, mc, padded, mp, &padL, &padT);
                        st.frames[t] = std::move(padded);
                        st.masks[t] = std::move(mp);
                        for (auto& p : st.pts[t])
                            p = {p.x - r.x0 + padL, p.y - r.y0 + padT};
                    }
                    break;
                }
                case StageKind::pad_square: {
                    for (size_t t = 0; t < st.frames.size(); ++t) {
                        Image padded;
                        Mask mp;
                        int padL = 0, padT = 0;
                        pad_square_frame(st.frames[t], st.masks[t], padded, mp, &padL, &padT);
                        st.frames[t] = std::move(padded);
                        st.masks[t] = std::move(mp);
                        for (auto& p : st.pts[t]) p = {p.x + padL, p.y + padT};
                    }
                    break;
                }
                case StageKind::segment: {
                    for (size_t t = 0; t < st.frames.size(); ++t)
                        segment_frame(st.frames[t], st.masks[t], st.pts[t]);
                    break;
                }
                case StageKind::t_uv: {
                    for (size_t t = 0; t < st.frames.size(); ++t) {
                        UVFrame uvf = apply_uv_raster(*raster, st.frames[t], st.pts[t],
                                                      model.tess);
                        st.frames[t] = std::move(uvf.texels);
                        st.masks[t] = uvf.coverage;
                    }
                    break;
                }
                case StageKind::mask: {
                    for (size_t t = 0; t < st.frames.size(); ++t) {
                        const auto fnorm = face_normals(*st.lm3d[t], model.tess);
                        const auto orient = vertex_orientation(fnorm, model.tess);
                        const AngleFrame angle = apply_angle_raster(*raster, orient, model.tess);
                        const OrientationMask om = orientation_mask(angle, s.param);
                        UVFrame uvf{std::move(st.frames[t]), std::move(st.masks[t])};
                        UVFrame masked = apply_mask(uvf, om);
                        st.frames[t] = std::move(masked.texels);
                        st.masks[t] = std::move(masked.coverage);
                    }
                    break;
                }
                case StageKind::f_d: {
                    detail::require_uniform(st.frames, "fd");
                    VideoTensor tmp;
                    tmp.frames = std::move(st.frames);
                    tmp.semantics = ValueSemantics::raw_intensity;
                    tmp.fps = video.fps;
                    VideoTensor diff = normalized_frame_difference(tmp, spec.fd_eps);
                    StandardizeResult std_res = clip_standardize(diff, spec.clip_sigma);
                    if (std_res.zero_variance)
                        pw.warnings.push_back("window " + std::to_string(w) +
                                              ": zero variance in standardization");
                    st.frames = std::move(std_res.tensor.frames);
                    std::vector<Mask> dmasks;
                    dmasks.reserve(st.masks.size() - 1);
                    for (size_t t = 0; t + 1 < st.masks.size(); ++t) {
                        Mask m = st.masks[t];
                        for (size_t i = 0; i < m.keep.size(); ++i)
                            m.keep[i] = m.keep[i] && st.masks[t + 1].keep[i];
                        dmasks.push_back(std::move(m));
                    }
                    st.masks = std::move(dmasks);
                    st.semantics = ValueSemantics::differenced_standardized;
                    break;
                }
                case StageKind::resize: {
                    const int target = static_cast<int>(s.param);
                    for (size_t t = 0; t < st.frames.size(); ++t) {
                        const double sx = static_cast<double>(target) / st.frames[t].width;
                        const double sy = static_cast<double>(target) / st.frames[t].height;
                        st.frames[t] = resize_bilinear(st.frames[t], target, target);
                        st.masks[t] = resize_mask(st.masks[t], target, target);
                        for (auto& p : st.pts[t])
                            p = {(p.x + 0.5) * sx - 0.5, (p.y + 0.5) * sy - 0.5};
                    }
                    break;
                }
            }
        }

        detail::require_uniform(st.frames, "window output");
        pw.tensor.frames = std::move(st.frames);
        pw.tensor.semantics = st.semantics;
        pw.tensor.fps = video.fps;
        pw.masks = std::move(st.masks);
        out.push_back(std::move(pw));
    }
    return out;
}

}  // namespace uvrppg
