#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "uvrppg/core.hpp"
#include "uvrppg/image.hpp"
#include "uvrppg/mesh_geometry.hpp"

namespace uvrppg {

// Frame resampled into UV texture space. Texels outside the facial atlas
// (coverage=false) are exactly 0.
struct UVFrame {
    Image texels;   // S x S x C
    Mask coverage;  // S x S
};

inline constexpr double kAngleSentinelDeg = 180.0;

// Per-texel camera-relative surface angle over the UV grid, degrees.
// Uncovered texels carry the 180 degree sentinel.
struct AngleFrame {
    int size = 0;
    std::vector<double> theta_deg;  // S x S
    Mask coverage;

    double at(int y, int x) const { return theta_deg[static_cast<size_t>(y) * size + x]; }
    double& at(int y, int x) { return theta_deg[static_cast<size_t>(y) * size + x]; }
};

struct OrientationMask {
    Mask keep;
    double threshold_deg = 0.0;
};

namespace detail {

// Scan-converts 2D triangles over a grid whose sample points sit on integer
// coordinates. A texel belongs to a triangle iff its center lies inside or on
// an edge; when several triangles claim a texel the lowest triangle index
// wins. Triangles with zero area on the grid contribute nothing.
//
// emit(x, y, tri_index, l0, l1, l2) is called once per covered texel with the
// barycentric coordinates of the texel center in that triangle.
template <typename TriangleVerts, typename Emit>
size_t rasterize_triangles(int grid_w, int grid_h, size_t triangle_count,
                           TriangleVerts&& verts, Emit&& emit) {
    std::vector<uint8_t> written(static_cast<size_t>(grid_w) * grid_h, 0);
    size_t covered = 0;
    std::array<Vec2, 3> q;
    for (size_t t = 0; t < triangle_count; ++t) {
        verts(t, q);
        const double area2 = cross(q[1] - q[0], q[2] - q[0]);
        if (area2 == 0.0) continue;
        const double minx = std::min({q[0].x, q[1].x, q[2].x});
        const double maxx = std::max({q[0].x, q[1].x, q[2].x});
        const double miny = std::min({q[0].y, q[1].y, q[2].y});
        const double maxy = std::max({q[0].y, q[1].y, q[2].y});
        const int x0 = std::max(0, static_cast<int>(std::ceil(minx)));
        const int x1 = std::min(grid_w - 1, static_cast<int>(std::floor(maxx)));
        const int y0 = std::max(0, static_cast<int>(std::ceil(miny)));
        const int y1 = std::min(grid_h - 1, static_cast<int>(std::floor(maxy)));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                uint8_t& w = written[static_cast<size_t>(y) * grid_w + x];
                if (w) continue;
                const Vec2 p{static_cast<double>(x), static_cast<double>(y)};
                // Edge functions; dividing by the signed area makes the
                // inside test independent of winding.
                const double w0 = cross(q[2] - q[1], p - q[1]) / area2;
                const double w1 = cross(q[0] - q[2], p - q[2]) / area2;
                const double w2 = cross(q[1] - q[0], p - q[0]) / area2;
                if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
                w = 1;
                ++covered;
                emit(x, y, t, w0, w1, w2);
            }
        }
    }
    return covered;
}

// UV -> texel grid, corner anchored: x = u*(S-1), y = v*(S-1).
inline Vec2 uv_to_grid(const Vec2& uv, int size) {
    return {uv.x * (size - 1), uv.y * (size - 1)};
}

}  // namespace detail

// The UV triangle layout is fixed per (tessellation, uv, size), so the
// texel -> (triangle, barycentric) assignment can be scan-converted once and
// replayed across all frames of a video.
struct UVRasterTable {
    int size = 0;
    Mask coverage;
    std::vector<int32_t> tri;  // -1 where uncovered
    std::vector<double> l0, l1, l2;
    size_t covered = 0;
};

inline UVRasterTable build_uv_raster_table(const Tessellation& tess, const CanonicalUV& uv,
                                           int size) {
    if (size < 2) throw InvalidInputError("UV resolution must be >= 2");
    UVRasterTable table;
    table.size = size;
    table.coverage = Mask(size, size, false);
    const size_t n = static_cast<size_t>(size) * size;
    table.tri.assign(n, -1);
    table.l0.assign(n, 0.0);
    table.l1.assign(n, 0.0);
    table.l2.assign(n, 0.0);
    table.covered = detail::rasterize_triangles(
        size, size, tess.triangles.size(),
        [&](size_t t, std::array<Vec2, 3>& q) {
            const auto& tri = tess.triangles[t];
            for (int k = 0; k < 3; ++k) q[k] = detail::uv_to_grid(uv.uv[tri[k]], size);
        },
        [&](int x, int y, size_t t, double l0, double l1, double l2) {
            const size_t i = static_cast<size_t>(y) * size + x;
            table.tri[i] = static_cast<int32_t>(t);
            table.l0[i] = l0;
            table.l1[i] = l1;
            table.l2[i] = l2;
            table.coverage.at(y, x) = 1;
        });
    if (table.covered == 0)
        throw DegenerateGeometryError("UV rasterization produced empty coverage");
    return table;
}

// Warp a source frame into UV texture space. Each covered texel maps back
// through the barycentric coordinates of its UV triangle to a point in the
// corresponding image-space triangle and bilinearly samples the source there
// (clamped at image borders). Texels outside every triangle are 0.
inline UVFrame apply_uv_raster(const UVRasterTable& table, const Image& src_frame,
                               const std::array<Vec2, kLandmarkCount>& pts2d,
                               const Tessellation& tess) {
    UVFrame out;
    const int size = table.size;
    out.texels = Image(size, size, src_frame.channels, 0.0f);
    out.coverage = table.coverage;
    std::vector<float> sample(static_cast<size_t>(src_frame.channels));
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const size_t i = static_cast<size_t>(y) * size + x;
            const int32_t t = table.tri[i];
            if (t < 0) continue;
            const auto& tri = tess.triangles[t];
            const Vec2 a = pts2d[tri[0]], b = pts2d[tri[1]], c = pts2d[tri[2]];
            const double sx = table.l0[i] * a.x + table.l1[i] * b.x + table.l2[i] * c.x;
            const double sy = table.l0[i] * a.y + table.l1[i] * b.y + table.l2[i] * c.y;
            sample_bilinear_clamped(src_frame, sx, sy, sample.data());
            for (int ch = 0; ch < src_frame.channels; ++ch) out.texels.at(y, x, ch) = sample[ch];
        }
    }
    return out;
}

inline UVFrame rasterize_uv_texture(const Image& src_frame,
                                    const std::array<Vec2, kLandmarkCount>& pts2d,
                                    const Tessellation& tess, const CanonicalUV& uv, int size) {
    return apply_uv_raster(build_uv_raster_table(tess, uv, size), src_frame, pts2d, tess);
}

// Interpolate per-vertex angles over the UV grid (barycentric per triangle).
inline AngleFrame apply_angle_raster(const UVRasterTable& table,
                                     const VertexOrientation& orientation,
                                     const Tessellation& tess) {
    AngleFrame out;
    const int size = table.size;
    out.size = size;
    out.theta_deg.assign(static_cast<size_t>(size) * size, kAngleSentinelDeg);
    out.coverage = table.coverage;
    for (size_t i = 0; i < table.tri.size(); ++i) {
        const int32_t t = table.tri[i];
        if (t < 0) continue;
        const auto& tri = tess.triangles[t];
        out.theta_deg[i] = table.l0[i] * orientation.angles_deg[tri[0]] +
                           table.l1[i] * orientation.angles_deg[tri[1]] +
                           table.l2[i] * orientation.angles_deg[tri[2]];
    }
    return out;
}

inline AngleFrame rasterize_angle_frame(const VertexOrientation& orientation,
                                        const Tessellation& tess, const CanonicalUV& uv,
                                        int size) {
    return apply_angle_raster(build_uv_raster_table(tess, uv, size), orientation, tess);
}

// keep(x,y) = coverage(x,y) and theta(x,y) < threshold. Texels at or above
// the threshold are masked out.
inline OrientationMask orientation_mask(const AngleFrame& angle, double threshold_deg) {
    if (!(threshold_deg > 0.0 && threshold_deg <= 180.0))
        throw ConfigError("orientation mask threshold must lie in (0, 180] degrees");
    OrientationMask out;
    out.threshold_deg = threshold_deg;
    out.keep = Mask(angle.size, angle.size, false);
    for (int y = 0; y < angle.size; ++y)
        for (int x = 0; x < angle.size; ++x)
            out.keep.at(y, x) = (angle.coverage.at(y, x) && angle.at(y, x) < threshold_deg) ? 1 : 0;
    return out;
}

inline UVFrame apply_mask(const UVFrame& frame, const OrientationMask& mask) {
    if (frame.texels.height != mask.keep.height || frame.texels.width != mask.keep.width)
        throw InvalidInputError("mask size does not match UV frame size");
    UVFrame out = frame;
    for (int y = 0; y < frame.texels.height; ++y) {
        for (int x = 0; x < frame.texels.width; ++x) {
            if (!mask.keep.at(y, x)) {
                for (int c = 0; c < frame.texels.channels; ++c) out.texels.at(y, x, c) = 0.0f;
            }
        }
    }
    out.coverage = mask.keep;
    return out;
}

}  // namespace uvrppg
