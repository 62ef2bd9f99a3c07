#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "uvrppg/synth_video.hpp"
#include "uvrppg/uv_mapping.hpp"

using namespace uvrppg;

namespace {

Image random_image(int h, int w, int c, std::mt19937& rng) {
    std::uniform_real_distribution<float> d(0.0f, 255.0f);
    Image img(h, w, c);
    for (float& v : img.data) v = d(rng);
    return img;
}

struct RandomMesh {
    Tessellation tess;
    CanonicalUV uv;
    std::array<Vec2, kLandmarkCount> pts{};
};

// Triangles over random vertex indices with random UV and image positions;
// overlaps are likely and exercise the lowest-index tie rule.
RandomMesh random_mesh(int n_triangles, std::mt19937& rng) {
    RandomMesh m;
    std::uniform_int_distribution<int> vi(0, kLandmarkCount - 1);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_real_distribution<double> xy(-4.0, 68.0);
    for (int i = 0; i < kLandmarkCount; ++i) {
        m.uv.uv[i] = {u01(rng), u01(rng)};
        m.pts[i] = {xy(rng), xy(rng)};
    }
    for (int t = 0; t < n_triangles; ++t) {
        int a = vi(rng), b = vi(rng), c = vi(rng);
        while (b == a) b = vi(rng);
        while (c == a || c == b) c = vi(rng);
        m.tess.triangles.push_back({a, b, c});
    }
    return m;
}

}  // namespace

TEST_CASE("identity affine reproduces the source inside the triangle") {
    const int s = 64;
    std::mt19937 rng(11);
    const Image src = random_image(s, s, 3, rng);
    Tessellation tess;
    tess.triangles.push_back({0, 1, 2});
    CanonicalUV uv;
    uv.uv[0] = {0.0, 0.0};
    uv.uv[1] = {1.0, 0.0};
    uv.uv[2] = {0.0, 1.0};
    std::array<Vec2, kLandmarkCount> pts{};
    pts[0] = {0.0, 0.0};
    pts[1] = {63.0, 0.0};
    pts[2] = {0.0, 63.0};
    const UVFrame out = rasterize_uv_texture(src, pts, tess, uv, s);
    size_t covered = 0;
    for (int y = 0; y < s; ++y) {
        for (int x = 0; x < s; ++x) {
            if (out.coverage.at(y, x)) {
                ++covered;
                for (int c = 0; c < 3; ++c)
                    CHECK(out.texels.at(y, x, c) == doctest::Approx(src.at(y, x, c)));
            } else {
                for (int c = 0; c < 3; ++c) CHECK(out.texels.at(y, x, c) == 0.0f);
            }
        }
    }
    CHECK(covered == static_cast<size_t>(s) * (s + 1) / 2);  // closed lower-left triangle
}

TEST_CASE("translated image triangle samples with the opposite shift") {
    const int s = 32;
    std::mt19937 rng(12);
    const Image src = random_image(s, s, 1, rng);
    Tessellation tess;
    tess.triangles.push_back({0, 1, 2});
    CanonicalUV uv;
    uv.uv[0] = {0.0, 0.0};
    uv.uv[1] = {1.0, 0.0};
    uv.uv[2] = {0.0, 1.0};
    std::array<Vec2, kLandmarkCount> pts{};
    pts[0] = {5.0, 3.0};
    pts[1] = {5.0 + (s - 1), 3.0};
    pts[2] = {5.0, 3.0 + (s - 1)};
    const UVFrame out = rasterize_uv_texture(src, pts, tess, uv, s);
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x) {
            if (!out.coverage.at(y, x)) continue;
            const int sx = x + 5, sy = y + 3;
            if (sx >= s || sy >= s) continue;  // clamped region
            CHECK(out.texels.at(y, x, 0) == doctest::Approx(src.at(sy, sx, 0)));
        }
}

TEST_CASE("random meshes match the inverse-barycentric oracle texel-exactly") {
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        const Image src = random_image(64, 64, 3, rng);
        const RandomMesh m = random_mesh(10, rng);
        UVFrame got;
        try {
            got = rasterize_uv_texture(src, m.pts, m.tess, m.uv, 64);
        } catch (const DegenerateGeometryError&) {
            continue;  // all triangles missed the texel grid; nothing to compare
        }
        const UVFrame want = oracle::rasterize_uv_reference(src, m.pts, m.tess, m.uv, 64);
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x) {
                REQUIRE(got.coverage.at(y, x) == want.coverage.at(y, x));
                if (!got.coverage.at(y, x)) continue;
                for (int c = 0; c < 3; ++c)
                    REQUIRE(std::abs(got.texels.at(y, x, c) - want.texels.at(y, x, c)) <= 1e-5f);
            }
    }
}

TEST_CASE("degenerate triangles contribute nothing; all-degenerate errors") {
    Tessellation tess;
    tess.triangles.push_back({0, 1, 2});
    CanonicalUV uv;
    uv.uv[0] = {0.1, 0.1};
    uv.uv[1] = {0.5, 0.5};
    uv.uv[2] = {0.9, 0.9};  // collinear
    std::array<Vec2, kLandmarkCount> pts{};
    const Image src(8, 8, 1, 1.0f);
    CHECK_THROWS_AS(rasterize_uv_texture(src, pts, tess, uv, 16), DegenerateGeometryError);
}

TEST_CASE("angle frame interpolation") {
    const FaceMeshModel model = make_face_proxy_model();
    VertexOrientation orient{};

    SUBCASE("constant field stays constant on covered texels") {
        orient.angles_deg.fill(30.0);
        const AngleFrame angle = rasterize_angle_frame(orient, model.tess, model.uv, 64);
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x) {
                if (angle.coverage.at(y, x))
                    CHECK(angle.at(y, x) == doctest::Approx(30.0).epsilon(1e-9));
                else
                    CHECK(angle.at(y, x) == 180.0);
            }
    }

    SUBCASE("triangle with vertex angles (0,0,90) averages 30 at the centroid") {
        Tessellation tess;
        tess.triangles.push_back({0, 1, 2});
        CanonicalUV uv;
        const int s = 91;  // centroid of the grid triangle lands on a texel center
        uv.uv[0] = {0.0, 0.0};
        uv.uv[1] = {1.0, 0.0};
        uv.uv[2] = {0.0, 1.0};
        VertexOrientation o{};
        o.angles_deg[0] = 0.0;
        o.angles_deg[1] = 0.0;
        o.angles_deg[2] = 90.0;
        const AngleFrame angle = rasterize_angle_frame(o, tess, uv, s);
        CHECK(angle.at(30, 30) == doctest::Approx(30.0).epsilon(1e-9));
    }

    SUBCASE("random vertex angles match the barycentric oracle") {
        std::mt19937 rng(5);
        std::uniform_real_distribution<double> d(0.0, 180.0);
        for (double& a : orient.angles_deg) a = d(rng);
        const AngleFrame angle = rasterize_angle_frame(orient, model.tess, model.uv, 96);
        std::uniform_int_distribution<int> pick(0, 95);
        for (int i = 0; i < 1000; ++i) {
            const int x = pick(rng), y = pick(rng);
            const double want =
                oracle::angle_at_texel_reference(orient, model.tess, model.uv, 96, x, y);
            CHECK(angle.at(y, x) == doctest::Approx(want).epsilon(1e-8));
        }
    }
}

TEST_CASE("orientation mask thresholding") {
    AngleFrame angle;
    angle.size = 4;
    angle.coverage = Mask(4, 4, true);
    angle.theta_deg.assign(16, 30.0);

    SUBCASE("all below threshold kept") {
        const OrientationMask m = orientation_mask(angle, 45.0);
        CHECK(m.keep.count() == 16);
    }

    SUBCASE("texels at the threshold are masked out") {
        angle.theta_deg.assign(16, 90.0);
        const OrientationMask m = orientation_mask(angle, 90.0);
        CHECK(m.keep.count() == 0);
    }

    SUBCASE("uncovered texels are never kept") {
        angle.coverage.at(1, 1) = 0;
        const OrientationMask m = orientation_mask(angle, 45.0);
        CHECK(m.keep.at(1, 1) == 0);
        CHECK(m.keep.count() == 15);
    }

    SUBCASE("threshold monotonicity on random angle frames") {
        std::mt19937 rng(9);
        std::uniform_real_distribution<double> d(0.0, 180.0);
        std::bernoulli_distribution cov(0.8);
        for (int trial = 0; trial < 100; ++trial) {
            AngleFrame a;
            a.size = 16;
            a.coverage = Mask(16, 16, false);
            a.theta_deg.assign(256, 180.0);
            for (int i = 0; i < 256; ++i)
                if (cov(rng)) {
                    a.coverage.keep[i] = 1;
                    a.theta_deg[i] = d(rng);
                }
            const double thresholds[4] = {30.0, 45.0, 60.0, 90.0};
            OrientationMask prev = orientation_mask(a, thresholds[0]);
            for (int k = 1; k < 4; ++k) {
                const OrientationMask next = orientation_mask(a, thresholds[k]);
                for (size_t i = 0; i < prev.keep.keep.size(); ++i)
                    if (prev.keep.keep[i]) REQUIRE(next.keep.keep[i]);
                prev = next;
            }
        }
    }
}

TEST_CASE("apply_mask zeroes dropped texels and replaces coverage") {
    std::mt19937 rng(3);
    UVFrame frame;
    frame.texels = random_image(8, 8, 3, rng);
    frame.coverage = Mask(8, 8, true);

    SUBCASE("all-true mask is the identity") {
        OrientationMask m;
        m.keep = Mask(8, 8, true);
        const UVFrame out = apply_mask(frame, m);
        CHECK(out.texels.data == frame.texels.data);
    }

    SUBCASE("all-false mask zeroes everything") {
        OrientationMask m;
        m.keep = Mask(8, 8, false);
        const UVFrame out = apply_mask(frame, m);
        for (float v : out.texels.data) CHECK(v == 0.0f);
    }

    SUBCASE("random mask acts elementwise") {
        OrientationMask m;
        m.keep = Mask(8, 8, false);
        std::bernoulli_distribution keep(0.5);
        for (auto& k : m.keep.keep) k = keep(rng);
        const UVFrame out = apply_mask(frame, m);
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x)
                for (int c = 0; c < 3; ++c)
                    CHECK(out.texels.at(y, x, c) ==
                          (m.keep.at(y, x) ? frame.texels.at(y, x, c) : 0.0f));
        CHECK(out.coverage.keep == m.keep.keep);
    }

    SUBCASE("size mismatch is a contract error") {
        OrientationMask m;
        m.keep = Mask(4, 4, true);
        CHECK_THROWS_AS(apply_mask(frame, m), InvalidInputError);
    }
}

TEST_CASE("uv frame intensity stays within the source range") {
    std::mt19937 rng(21);
    const Image src = random_image(48, 48, 3, rng);
    float lo = 1e9f, hi = -1e9f;
    for (float v : src.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const FaceMeshModel model = make_face_proxy_model();
    std::array<Vec2, kLandmarkCount> pts{};
    for (int i = 0; i < kLandmarkCount; ++i)
        pts[i] = {24.0 + 20.0 * model.canonical[i].x, 24.0 + 20.0 * model.canonical[i].y};
    const UVFrame out = rasterize_uv_texture(src, pts, model.tess, model.uv, 64);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) {
            if (!out.coverage.at(y, x)) continue;
            for (int c = 0; c < 3; ++c) {
                CHECK(out.texels.at(y, x, c) >= lo - 1e-4f);
                CHECK(out.texels.at(y, x, c) <= hi + 1e-4f);
            }
        }
}

TEST_CASE("canonical atlas covers each texel with at most one triangle interior") {
    const FaceMeshModel model = make_face_proxy_model();
    const int s = 128;
    for (int y = 0; y < s; ++y) {
        for (int x = 0; x < s; ++x) {
            int owners = 0;
            for (size_t t = 0; t < model.tess.triangles.size() && owners < 2; ++t) {
                const auto& tri = model.tess.triangles[t];
                const Vec2 q0 = detail::uv_to_grid(model.uv.uv[tri[0]], s);
                const Vec2 q1 = detail::uv_to_grid(model.uv.uv[tri[1]], s);
                const Vec2 q2 = detail::uv_to_grid(model.uv.uv[tri[2]], s);
                const double area2 = cross(q1 - q0, q2 - q0);
                if (area2 == 0.0) continue;
                const Vec2 p{static_cast<double>(x), static_cast<double>(y)};
                const double w0 = cross(q2 - q1, p - q1) / area2;
                const double w1 = cross(q0 - q2, p - q2) / area2;
                const double w2 = cross(q1 - q0, p - q0) / area2;
                if (w0 > 1e-9 && w1 > 1e-9 && w2 > 1e-9) ++owners;  // strict interior
            }
            REQUIRE(owners <= 1);
        }
    }
}
