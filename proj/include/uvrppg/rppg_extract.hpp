#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "uvrppg/core.hpp"
#include "uvrppg/frame_ops.hpp"

namespace uvrppg {

// Spatial mean RGB per frame. `differenced` records whether the parent
// window went through the F_D chain; extractors skip the temporal mean
// normalization in that case since the values are already normalized
// variations around zero.
struct RGBTrace {
    std::vector<std::array<double, 3>> samples;
    double fps = 0.0;
    bool differenced = false;
};

struct PulseWaveform {
    std::vector<double> values;
    double fps = 0.0;
    std::string source;
    std::vector<std::string> warnings;
};

struct GroundTruthPPG {
    std::vector<double> timestamps;  // seconds, strictly increasing
    std::vector<double> values;
};

// Channel means over kept pixels only, per frame.
inline RGBTrace spatial_mean_trace(const ProcessedWindow& window) {
    const VideoTensor& t = window.tensor;
    if (t.frames.empty()) throw InvalidInputError("window has no frames");
    if (window.masks.size() != t.frames.size())
        throw InvalidInputError("mask count does not match frame count");
    RGBTrace trace;
    trace.fps = t.fps;
    trace.differenced = (t.semantics == ValueSemantics::differenced_standardized);
    trace.samples.reserve(t.frames.size());
    for (size_t f = 0; f < t.frames.size(); ++f) {
        const Image& img = t.frames[f];
        const Mask& m = window.masks[f];
        double acc[3] = {0.0, 0.0, 0.0};
        size_t n = 0;
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x) {
                if (!m.at(y, x)) continue;
                ++n;
                for (int c = 0; c < std::min(img.channels, 3); ++c) acc[c] += img.at(y, x, c);
            }
        }
        if (n == 0)
            throw InvalidInputError("frame " + std::to_string(window.start_frame + f) +
                                    " has zero kept pixels");
        std::array<double, 3> s{acc[0] / n, acc[1] / n, acc[2] / n};
        if (img.channels == 1) s = {s[0], s[0], s[0]};
        trace.samples.push_back(s);
    }
    return trace;
}

namespace detail {

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double stddev_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return v.empty() ? 0.0 : std::sqrt(ss / static_cast<double>(v.size()));
}

// Raised-cosine (Hann) taper used by the overlap-add extractors.
inline std::vector<double> hann_window(size_t n) {
    std::vector<double> w(n, 1.0);
    if (n > 1)
        for (size_t i = 0; i < n; ++i)
            w[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) / (n - 1)));
    return w;
}

// Shared overlap-add driver: the trace is cut into windows of win_len with
// half-window hop; `project` turns one window's per-channel values into a
// pulse segment which is Hann-tapered and accumulated.
template <typename Project>
PulseWaveform overlap_add_extract(const RGBTrace& trace, double window_s, const char* id,
                                  Project&& project) {
    const size_t n = trace.samples.size();
    if (n < 2) throw InvalidInputError("trace too short");
    if (trace.fps * window_s < 4.0)
        throw InvalidInputError("extractor window must span at least 4 samples");
    PulseWaveform out;
    out.fps = trace.fps;
    out.source = id;
    out.values.assign(n, 0.0);
    std::vector<double> weight(n, 0.0);
    const size_t win = std::min<size_t>(n, static_cast<size_t>(std::lround(trace.fps * window_s)));
    const size_t hop = std::max<size_t>(1, win / 2);
    const std::vector<double> taper = hann_window(win);
    std::vector<double> r(win), g(win), b(win), seg;
    for (size_t start = 0; start + win <= n; start += hop) {
        for (size_t i = 0; i < win; ++i) {
            r[i] = trace.samples[start + i][0];
            g[i] = trace.samples[start + i][1];
            b[i] = trace.samples[start + i][2];
        }
        if (!trace.differenced) {
            // Temporal normalization by the window mean removes the
            // intensity level; differenced traces are already zero-centered
            // normalized variations.
            for (auto* ch : {&r, &g, &b}) {
                const double m = mean_of(*ch);
                if (m != 0.0)
                    for (double& x : *ch) x /= m;
            }
        }
        seg = project(r, g, b, out.warnings);
        const double m = mean_of(seg);
        for (size_t i = 0; i < win; ++i) {
            out.values[start + i] += (seg[i] - m) * taper[i];
            weight[start + i] += taper[i];
        }
        if (start + win == n) break;
    }
    for (size_t i = 0; i < n; ++i)
        out.values[i] = weight[i] > 1e-9 ? out.values[i] / weight[i] : 0.0;
    return out;
}

}  // namespace detail

// Green channel, mean-removed.
inline PulseWaveform extract_green(const RGBTrace& trace) {
    if (trace.samples.size() < 2) throw InvalidInputError("trace too short");
    PulseWaveform out;
    out.fps = trace.fps;
    out.source = "green";
    std::vector<double> g;
    g.reserve(trace.samples.size());
    for (const auto& s : trace.samples) g.push_back(s[1]);
    const double m = detail::mean_of(g);
    for (double x : g) out.values.push_back(x - m);
    return out;
}

// Chrominance projection: X = 3r - 2g, Y = 1.5r + g - 1.5b on the
// mean-normalized channels, s = X - (sigma(X)/sigma(Y)) * Y per window.
inline PulseWaveform extract_chrom(const RGBTrace& trace, double window_s = 1.6) {
    return detail::overlap_add_extract(
        trace, window_s, "chrom",
        [](const std::vector<double>& r, const std::vector<double>& g,
           const std::vector<double>& b, std::vector<std::string>& warnings) {
            const size_t w = r.size();
            std::vector<double> X(w), Y(w), s(w);
            for (size_t i = 0; i < w; ++i) {
                X[i] = 3.0 * r[i] - 2.0 * g[i];
                Y[i] = 1.5 * r[i] + g[i] - 1.5 * b[i];
            }
            const double sy = detail::stddev_of(Y);
            double alpha = 0.0;
            if (sy == 0.0)
                warnings.push_back("chrom: zero sigma(Y) in window, alpha set to 0");
            else
                alpha = detail::stddev_of(X) / sy;
            for (size_t i = 0; i < w; ++i) s[i] = X[i] - alpha * Y[i];
            return s;
        });
}

// Plane-orthogonal-to-skin projection: S1 = g - b, S2 = -2r + g + b on the
// mean-normalized channels, h = S1 + (sigma(S1)/sigma(S2)) * S2 per window.
inline PulseWaveform extract_pos(const RGBTrace& trace, double window_s = 1.6) {
    return detail::overlap_add_extract(
        trace, window_s, "pos",
        [](const std::vector<double>& r, const std::vector<double>& g,
           const std::vector<double>& b, std::vector<std::string>& warnings) {
            const size_t w = r.size();
            std::vector<double> s1(w), s2(w), h(w, 0.0);
            for (size_t i = 0; i < w; ++i) {
                s1[i] = g[i] - b[i];
                s2[i] = -2.0 * r[i] + g[i] + b[i];
            }
            const double sd2 = detail::stddev_of(s2);
            if (sd2 == 0.0) {
                warnings.push_back("pos: zero sigma(S2) in window, contribution dropped");
                return h;
            }
            const double alpha = detail::stddev_of(s1) / sd2;
            for (size_t i = 0; i < w; ++i) h[i] = s1[i] + alpha * s2[i];
            return h;
        });
}

// Windows-in, waveform-out interface; a learned model can provide the same
// surface later without touching the pipeline.
struct WindowExtractor {
    virtual ~WindowExtractor() = default;
    virtual std::string id() const = 0;
    virtual PulseWaveform extract(const ProcessedWindow& window) const = 0;
};

struct GreenExtractor final : WindowExtractor {
    std::string id() const override { return "green"; }
    PulseWaveform extract(const ProcessedWindow& w) const override {
        return extract_green(spatial_mean_trace(w));
    }
};

struct ChromExtractor final : WindowExtractor {
    double window_s = 1.6;
    std::string id() const override { return "chrom"; }
    PulseWaveform extract(const ProcessedWindow& w) const override {
        return extract_chrom(spatial_mean_trace(w), window_s);
    }
};

struct PosExtractor final : WindowExtractor {
    double window_s = 1.6;
    std::string id() const override { return "pos"; }
    PulseWaveform extract(const ProcessedWindow& w) const override {
        return extract_pos(spatial_mean_trace(w), window_s);
    }
};

inline std::unique_ptr<WindowExtractor> make_extractor(const std::string& id,
                                                       double window_s = 1.6) {
    if (id == "green") return std::make_unique<GreenExtractor>();
    if (id == "chrom") {
        auto e = std::make_unique<ChromExtractor>();
        e->window_s = window_s;
        return e;
    }
    if (id == "pos") {
        auto e = std::make_unique<PosExtractor>();
        e->window_s = window_s;
        return e;
    }
    throw ConfigError("unknown extractor '" + id + "' (expected green, chrom or pos)");
}

// Apply the extractor per window and concatenate in temporal order.
inline PulseWaveform extract_full_video(const std::vector<ProcessedWindow>& windows,
                                        const WindowExtractor& extractor) {
    if (windows.empty()) throw InvalidInputError("no processed windows to extract from");
    PulseWaveform out;
    out.source = extractor.id();
    for (const ProcessedWindow& w : windows) {
        PulseWaveform part;
        try {
            part = extractor.extract(w);
        } catch (const Error& e) {
            throw InvalidInputError("window " + std::to_string(w.window_index) + ": " + e.what());
        }
        out.fps = part.fps;
        out.values.insert(out.values.end(), part.values.begin(), part.values.end());
        out.warnings.insert(out.warnings.end(), part.warnings.begin(), part.warnings.end());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Ground-truth preparation.

// Natural cubic spline with not-a-knot boundary conditions, evaluated at
// arbitrary query points inside [x.front(), x.back()].
class CubicSpline {
public:
    CubicSpline(const std::vector<double>& x, const std::vector<double>& y) : x_(x), y_(y) {
        const size_t n = x.size();
        if (n < 4) throw InvalidInputError("cubic spline needs at least 4 samples");
        for (size_t i = 1; i < n; ++i)
            if (!(x[i] > x[i - 1]))
                throw InvalidInputError("spline abscissae must be strictly increasing");
        // Solve for second derivatives m_i with not-a-knot end conditions.
        // The boundary unknowns m_0 and m_{n-1} are eliminated first:
        //   m_0     = ((h0 + h1) m_1 - h0 m_2) / h1
        //   m_{n-1} = ((hL2 + hL1) m_{n-2} - hL1 m_{n-3}) / hL2
        // which keeps the reduced system tridiagonal for any knot spacing.
        std::vector<double> h(n - 1);
        for (size_t i = 0; i + 1 < n; ++i) h[i] = x[i + 1] - x[i];
        const size_t q = n - 2;  // unknowns m_1 .. m_{n-2}
        std::vector<double> a(q, 0.0), b(q, 0.0), c(q, 0.0), d(q, 0.0);
        for (size_t i = 1; i + 1 < n; ++i) {
            const size_t r = i - 1;
            a[r] = h[i - 1];
            b[r] = 2.0 * (h[i - 1] + h[i]);
            c[r] = h[i];
            d[r] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
        }
        b[0] += h[0] * (h[0] + h[1]) / h[1];
        c[0] = h[1] - h[0] * h[0] / h[1];
        const double hl1 = h[n - 2], hl2 = h[n - 3];
        b[q - 1] += hl1 * (hl2 + hl1) / hl2;
        a[q - 1] = hl2 - hl1 * hl1 / hl2;
        // Thomas algorithm on the reduced system.
        std::vector<double> cp(q, 0.0), dp(q, 0.0);
        cp[0] = c[0] / b[0];
        dp[0] = d[0] / b[0];
        for (size_t i = 1; i < q; ++i) {
            const double den = b[i] - a[i] * cp[i - 1];
            cp[i] = (i + 1 < q) ? c[i] / den : 0.0;
            dp[i] = (d[i] - a[i] * dp[i - 1]) / den;
        }
        m_.assign(n, 0.0);
        m_[n - 2] = dp[q - 1];
        for (size_t i = q - 1; i-- > 0;) m_[i + 1] = dp[i] - cp[i] * m_[i + 2];
        m_[0] = ((h[0] + h[1]) * m_[1] - h[0] * m_[2]) / h[1];
        m_[n - 1] = ((hl2 + hl1) * m_[n - 2] - hl1 * m_[n - 3]) / hl2;
    }

    double operator()(double q) const {
        const size_t n = x_.size();
        size_t i = std::upper_bound(x_.begin(), x_.end(), q) - x_.begin();
        i = std::clamp<size_t>(i, 1, n - 1) - 1;
        const double h = x_[i + 1] - x_[i];
        const double t0 = x_[i + 1] - q, t1 = q - x_[i];
        return (m_[i] * t0 * t0 * t0 + m_[i + 1] * t1 * t1 * t1) / (6.0 * h) +
               (y_[i] / h - m_[i] * h / 6.0) * t0 + (y_[i + 1] / h - m_[i + 1] * h / 6.0) * t1;
    }

private:
    std::vector<double> x_, y_, m_;
};

// Resample a timestamped signal onto a uniform grid at `fps` spanning the
// original time range.
inline std::vector<double> cubic_spline_resample(const GroundTruthPPG& ppg, double fps) {
    if (ppg.timestamps.size() != ppg.values.size())
        throw InvalidInputError("PPG timestamp/value count mismatch");
    if (ppg.timestamps.size() < 4) throw InvalidInputError("PPG needs at least 4 samples");
    for (size_t i = 1; i < ppg.timestamps.size(); ++i)
        if (!(ppg.timestamps[i] > ppg.timestamps[i - 1]))
            throw InvalidInputError("PPG timestamps must be strictly increasing (sample " +
                                    std::to_string(i) + ")");
    if (fps <= 0.0) throw InvalidInputError("target fps must be > 0");
    const CubicSpline spline(ppg.timestamps, ppg.values);
    std::vector<double> out;
    const double t0 = ppg.timestamps.front();
    const double t1 = ppg.timestamps.back();
    for (size_t k = 0;; ++k) {
        const double t = t0 + static_cast<double>(k) / fps;
        if (t > t1 + 1e-12) break;
        out.push_back(spline(std::min(t, t1)));
    }
    return out;
}

// Resample the ground-truth PPG to the video rate, then take the first-order
// difference normalized by its standard deviation.
inline PulseWaveform prepare_ground_truth(const GroundTruthPPG& ppg, double fps) {
    const std::vector<double> resampled = cubic_spline_resample(ppg, fps);
    if (resampled.size() < 2) throw InvalidInputError("resampled PPG too short");
    PulseWaveform out;
    out.fps = fps;
    out.source = "ground_truth";
    out.values.resize(resampled.size() - 1);
    double max_abs = 0.0;
    for (size_t i = 0; i + 1 < resampled.size(); ++i) {
        out.values[i] = resampled[i + 1] - resampled[i];
        max_abs = std::max(max_abs, std::abs(out.values[i]));
    }
    const double sd = detail::stddev_of(out.values);
    // Constant-to-roundoff differences count as zero variance.
    if (sd <= 1e-12 * std::max(1.0, max_abs)) {
        std::fill(out.values.begin(), out.values.end(), 0.0);
        out.warnings.push_back("ground truth has zero variance after differencing");
    } else {
        for (double& v : out.values) v /= sd;
    }
    return out;
}

}  // namespace uvrppg
