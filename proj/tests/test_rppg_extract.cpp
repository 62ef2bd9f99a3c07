#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <random>

#include "uvrppg/pulse_eval.hpp"
#include "uvrppg/rppg_extract.hpp"

using namespace uvrppg;

namespace {

RGBTrace make_trace(size_t n, double fps,
                    const std::function<std::array<double, 3>(double)>& fn,
                    bool differenced = false) {
    RGBTrace t;
    t.fps = fps;
    t.differenced = differenced;
    for (size_t i = 0; i < n; ++i) t.samples.push_back(fn(static_cast<double>(i) / fps));
    return t;
}

// One 1x1-pixel frame per trace sample, so the spatial mean equals the trace.
ProcessedWindow window_from_trace(const RGBTrace& t) {
    ProcessedWindow w;
    w.tensor.fps = t.fps;
    w.tensor.semantics =
        t.differenced ? ValueSemantics::differenced_standardized : ValueSemantics::raw_intensity;
    for (const auto& s : t.samples) {
        Image f(1, 1, 3);
        for (int c = 0; c < 3; ++c) f.at(0, 0, c) = static_cast<float>(s[c]);
        w.tensor.frames.push_back(std::move(f));
        w.masks.emplace_back(1, 1, true);
    }
    return w;
}

double dominant_hz(const std::vector<double>& x, double fps) {
    const Spectrum s = power_spectrum(x, fps);
    return dominant_frequency_pr(s, 0.5, 3.0).bpm / 60.0;
}

}  // namespace

TEST_CASE("spatial mean trace") {
    SUBCASE("uniform frame with full mask") {
        ProcessedWindow w;
        w.tensor.fps = 30.0;
        w.tensor.frames.assign(2, Image(4, 4, 3, 7.0f));
        w.masks.assign(2, Mask(4, 4, true));
        const RGBTrace t = spatial_mean_trace(w);
        REQUIRE(t.samples.size() == 2);
        for (int c = 0; c < 3; ++c) CHECK(t.samples[0][c] == doctest::Approx(7.0));
        CHECK_FALSE(t.differenced);
    }

    SUBCASE("masked zeros are excluded from the mean") {
        ProcessedWindow w;
        w.tensor.fps = 30.0;
        Image f(2, 2, 3, 0.0f);
        Mask m(2, 2, false);
        f.at(0, 0, 0) = f.at(0, 0, 1) = f.at(0, 0, 2) = 5.0f;
        f.at(1, 1, 0) = f.at(1, 1, 1) = f.at(1, 1, 2) = 5.0f;
        m.at(0, 0) = m.at(1, 1) = 1;
        w.tensor.frames = {f};
        w.masks = {m};
        const RGBTrace t = spatial_mean_trace(w);
        for (int c = 0; c < 3; ++c) CHECK(t.samples[0][c] == doctest::Approx(5.0));
    }

    SUBCASE("random frame matches an explicit loop") {
        std::mt19937 rng(3);
        std::uniform_real_distribution<float> d(0.0f, 255.0f);
        std::bernoulli_distribution keep(0.6);
        ProcessedWindow w;
        w.tensor.fps = 30.0;
        Image f(6, 5, 3);
        for (float& v : f.data) v = d(rng);
        Mask m(6, 5, false);
        for (auto& k : m.keep) k = keep(rng);
        m.at(0, 0) = 1;  // at least one kept pixel
        w.tensor.frames = {f};
        w.masks = {m};
        const RGBTrace t = spatial_mean_trace(w);
        double acc[3] = {0, 0, 0};
        size_t n = 0;
        for (int y = 0; y < 6; ++y)
            for (int x = 0; x < 5; ++x) {
                if (!m.at(y, x)) continue;
                ++n;
                for (int c = 0; c < 3; ++c) acc[c] += f.at(y, x, c);
            }
        for (int c = 0; c < 3; ++c)
            CHECK(t.samples[0][c] == doctest::Approx(acc[c] / n).epsilon(1e-9));
    }

    SUBCASE("zero kept pixels names the frame") {
        ProcessedWindow w;
        w.start_frame = 40;
        w.tensor.fps = 30.0;
        w.tensor.frames.assign(2, Image(2, 2, 3, 1.0f));
        w.masks.assign(2, Mask(2, 2, true));
        w.masks[1] = Mask(2, 2, false);
        try {
            spatial_mean_trace(w);
            FAIL("expected error");
        } catch (const InvalidInputError& e) {
            CHECK(std::string(e.what()).find("41") != std::string::npos);
        }
    }
}

TEST_CASE("green extractor") {
    SUBCASE("constant trace gives zeros") {
        const RGBTrace t = make_trace(64, 30.0, [](double) {
            return std::array<double, 3>{10.0, 20.0, 30.0};
        });
        const PulseWaveform w = extract_green(t);
        for (double v : w.values) CHECK(v == doctest::Approx(0.0));
    }

    SUBCASE("sinusoid passes through mean-removed") {
        const RGBTrace t = make_trace(300, 30.0, [](double tt) {
            return std::array<double, 3>{1.0, std::sin(2.0 * kPi * 1.2 * tt), 1.0};
        });
        const PulseWaveform w = extract_green(t);
        double mean = 0.0;
        for (const auto& s : t.samples) mean += s[1];
        mean /= static_cast<double>(t.samples.size());
        for (size_t i = 0; i < w.values.size(); ++i)
            CHECK(w.values[i] == doctest::Approx(t.samples[i][1] - mean).epsilon(1e-12));
    }
}

TEST_CASE("chrom extractor") {
    SUBCASE("constant trace gives a zero waveform and flags zero sigma(Y)") {
        const RGBTrace t = make_trace(120, 30.0, [](double) {
            return std::array<double, 3>{80.0, 120.0, 60.0};
        });
        const PulseWaveform w = extract_chrom(t);
        for (double v : w.values) CHECK(std::abs(v) < 1e-9);
        CHECK_FALSE(w.warnings.empty());  // alpha forced to 0 per window
    }

    SUBCASE("green sinusoid yields a 1.2 Hz dominant peak") {
        const RGBTrace t = make_trace(900, 30.0, [](double tt) {
            return std::array<double, 3>{100.0, 110.0 * (1.0 + 0.02 * std::sin(2.0 * kPi * 1.2 * tt)),
                                         90.0};
        });
        const PulseWaveform w = extract_chrom(t);
        CHECK(dominant_hz(w.values, 30.0) == doctest::Approx(1.2).epsilon(0.03));
    }

    SUBCASE("single window matches the direct formula") {
        std::mt19937 rng(17);
        std::uniform_real_distribution<double> d(50.0, 200.0);
        const size_t n = 48;  // exactly one 1.6 s window at 30 fps
        RGBTrace t;
        t.fps = 30.0;
        for (size_t i = 0; i < n; ++i) t.samples.push_back({d(rng), d(rng), d(rng)});
        const PulseWaveform w = extract_chrom(t, 1.6);

        // Oracle: normalize by channel means, project, subtract the mean.
        double mu[3] = {0, 0, 0};
        for (const auto& s : t.samples)
            for (int c = 0; c < 3; ++c) mu[c] += s[c];
        for (double& m : mu) m /= static_cast<double>(n);
        std::vector<double> X(n), Y(n);
        for (size_t i = 0; i < n; ++i) {
            const double r = t.samples[i][0] / mu[0];
            const double g = t.samples[i][1] / mu[1];
            const double b = t.samples[i][2] / mu[2];
            X[i] = 3.0 * r - 2.0 * g;
            Y[i] = 1.5 * r + g - 1.5 * b;
        }
        auto std_of = [&](const std::vector<double>& v) {
            double m = 0.0;
            for (double x : v) m += x;
            m /= static_cast<double>(v.size());
            double ss = 0.0;
            for (double x : v) ss += (x - m) * (x - m);
            return std::sqrt(ss / static_cast<double>(v.size()));
        };
        const double alpha = std_of(X) / std_of(Y);
        std::vector<double> S(n);
        double sm = 0.0;
        for (size_t i = 0; i < n; ++i) {
            S[i] = X[i] - alpha * Y[i];
            sm += S[i];
        }
        sm /= static_cast<double>(n);
        for (size_t i = 1; i + 1 < n; ++i)
            CHECK(w.values[i] == doctest::Approx(S[i] - sm).epsilon(1e-9));
        CHECK(w.values.front() == 0.0);  // taper-zero endpoints
        CHECK(w.values.back() == 0.0);
    }
}

TEST_CASE("pos extractor") {
    SUBCASE("constant trace gives a zero waveform and flags zero sigma(S2)") {
        const RGBTrace t = make_trace(120, 30.0, [](double) {
            return std::array<double, 3>{80.0, 120.0, 60.0};
        });
        const PulseWaveform w = extract_pos(t);
        for (double v : w.values) CHECK(std::abs(v) < 1e-9);
        CHECK_FALSE(w.warnings.empty());  // window contributions dropped
    }

    SUBCASE("green-modulated trace peaks at the modulation frequency") {
        const RGBTrace t = make_trace(900, 30.0, [](double tt) {
            const double pulse = 0.02 * std::sin(2.0 * kPi * 1.4 * tt);
            return std::array<double, 3>{100.0 * (1.0 + 0.3 * pulse), 110.0 * (1.0 + pulse),
                                         90.0 * (1.0 + 0.5 * pulse)};
        });
        const PulseWaveform w = extract_pos(t);
        CHECK(dominant_hz(w.values, 30.0) == doctest::Approx(1.4).epsilon(0.03));
    }

    SUBCASE("global intensity scaling leaves the output unchanged") {
        std::mt19937 rng(23);
        std::uniform_real_distribution<double> d(50.0, 200.0);
        RGBTrace t;
        t.fps = 30.0;
        for (size_t i = 0; i < 200; ++i) t.samples.push_back({d(rng), d(rng), d(rng)});
        RGBTrace scaled = t;
        for (auto& s : scaled.samples)
            for (double& v : s) v *= 3.7;
        const PulseWaveform a = extract_pos(t);
        const PulseWaveform b = extract_pos(scaled);
        for (size_t i = 0; i < a.values.size(); ++i)
            CHECK(b.values[i] == doctest::Approx(a.values[i]).epsilon(1e-9));
    }

    SUBCASE("differenced traces skip mean normalization and keep the peak") {
        const RGBTrace t = make_trace(
            900, 30.0,
            [](double tt) {
                const double dpulse = std::cos(2.0 * kPi * 1.1 * tt);  // derivative-like
                return std::array<double, 3>{0.3 * dpulse, 1.0 * dpulse, 0.5 * dpulse};
            },
            /*differenced=*/true);
        const PulseWaveform w = extract_pos(t);
        CHECK(dominant_hz(w.values, 30.0) == doctest::Approx(1.1).epsilon(0.03));
    }

    SUBCASE("window shorter than 4 samples is rejected") {
        const RGBTrace t = make_trace(16, 2.0, [](double) {
            return std::array<double, 3>{1.0, 2.0, 3.0};
        });
        CHECK_THROWS_AS(extract_pos(t, 1.6), InvalidInputError);
    }
}

TEST_CASE("full-video extraction concatenates windows") {
    const GreenExtractor green;

    SUBCASE("one window equals single extraction") {
        const RGBTrace t = make_trace(64, 30.0, [](double tt) {
            return std::array<double, 3>{1.0, std::sin(2.0 * kPi * tt), 1.0};
        });
        const auto w = window_from_trace(t);
        const PulseWaveform whole = extract_full_video({w}, green);
        const PulseWaveform single = green.extract(w);
        CHECK(whole.values == single.values);
    }

    SUBCASE("two windows of one sinusoid keep the dominant frequency") {
        const RGBTrace full = make_trace(512, 32.0, [](double tt) {
            return std::array<double, 3>{1.0, 10.0 + std::sin(2.0 * kPi * 1.5 * tt), 1.0};
        });
        RGBTrace first = full, second = full;
        first.samples.resize(256);
        second.samples.erase(second.samples.begin(), second.samples.begin() + 256);
        const auto w0 = window_from_trace(first);
        const auto w1 = window_from_trace(second);
        const PulseWaveform whole = extract_full_video({w0, w1}, green);
        CHECK(whole.values.size() == 512);
        CHECK(dominant_hz(whole.values, 32.0) == doctest::Approx(1.5).epsilon(0.02));
    }

    SUBCASE("zero windows error") {
        CHECK_THROWS_AS(extract_full_video({}, green), InvalidInputError);
    }
}

TEST_CASE("cubic spline resampling") {
    SUBCASE("resampling at the original rate is the identity") {
        GroundTruthPPG ppg;
        std::mt19937 rng(29);
        std::uniform_real_distribution<double> d(-1.0, 1.0);
        for (int i = 0; i < 90; ++i) {
            ppg.timestamps.push_back(i / 30.0);
            ppg.values.push_back(d(rng));
        }
        const auto out = cubic_spline_resample(ppg, 30.0);
        REQUIRE(out.size() == ppg.values.size());
        for (size_t i = 0; i < out.size(); ++i)
            CHECK(out[i] == doctest::Approx(ppg.values[i]).epsilon(1e-9));
    }

    SUBCASE("60 to 30 Hz sinusoid matches the analytic values within 1e-3") {
        GroundTruthPPG ppg;
        for (int i = 0; i <= 240; ++i) {
            const double t = i / 60.0;
            ppg.timestamps.push_back(t);
            ppg.values.push_back(std::sin(2.0 * kPi * 1.2 * t));
        }
        const auto out = cubic_spline_resample(ppg, 30.0);
        for (size_t k = 0; k < out.size(); ++k) {
            const double t = static_cast<double>(k) / 30.0;
            CHECK(std::abs(out[k] - std::sin(2.0 * kPi * 1.2 * t)) <= 1e-3);
        }
    }

    SUBCASE("non-monotonic timestamps are rejected") {
        GroundTruthPPG ppg;
        ppg.timestamps = {0.0, 0.1, 0.1, 0.3, 0.4};
        ppg.values = {0.0, 1.0, 2.0, 3.0, 4.0};
        CHECK_THROWS_AS(cubic_spline_resample(ppg, 30.0), InvalidInputError);
    }
}

TEST_CASE("ground-truth preparation") {
    SUBCASE("linear signal hits the zero-variance path") {
        GroundTruthPPG ppg;
        for (int i = 0; i < 40; ++i) {
            ppg.timestamps.push_back(i / 30.0);
            ppg.values.push_back(2.0 * i);
        }
        const PulseWaveform w = prepare_ground_truth(ppg, 30.0);
        for (double v : w.values) CHECK(v == 0.0);
        REQUIRE(w.warnings.size() == 1);
    }

    SUBCASE("sinusoid keeps its frequency after difference-normalization") {
        GroundTruthPPG ppg;
        for (int i = 0; i <= 1200; ++i) {
            const double t = i / 60.0;
            ppg.timestamps.push_back(t);
            ppg.values.push_back(std::sin(2.0 * kPi * 1.3 * t));
        }
        const PulseWaveform w = prepare_ground_truth(ppg, 30.0);
        CHECK(w.fps == 30.0);
        CHECK(dominant_hz(w.values, 30.0) == doctest::Approx(1.3).epsilon(0.02));
        // normalized by the standard deviation of the differences
        double ss = 0.0, m = 0.0;
        for (double v : w.values) m += v;
        m /= static_cast<double>(w.values.size());
        for (double v : w.values) ss += (v - m) * (v - m);
        CHECK(std::sqrt(ss / w.values.size()) == doctest::Approx(1.0).epsilon(1e-3));
    }
}
