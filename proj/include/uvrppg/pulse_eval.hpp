#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uvrppg/core.hpp"

namespace uvrppg {

// ---------------------------------------------------------------------------
// Smoothness-priors detrending.
//
// stationary = z - (I + lambda^2 * D2' * D2)^-1 * z, with D2 the (T-2) x T
// second-difference operator. The system matrix is pentadiagonal SPD and is
// solved by a banded Cholesky factorization in O(T).
inline std::vector<double> detrend_smoothness_priors(const std::vector<double>& signal,
                                                     double lambda = 100.0) {
    const size_t t = signal.size();
    if (t < 3) throw InvalidInputError("detrending needs at least 3 samples");
    const double l2 = lambda * lambda;
    // band[r][i] = M[i][i+r], r = 0..2
    std::array<std::vector<double>, 3> band;
    for (auto& b : band) b.assign(t, 0.0);
    for (size_t i = 0; i < t; ++i) band[0][i] = 1.0;
    static constexpr double stencil[3] = {1.0, -2.0, 1.0};
    for (size_t k = 0; k + 2 < t; ++k)
        for (int oi = 0; oi < 3; ++oi)
            for (int oj = oi; oj < 3; ++oj)
                band[oj - oi][k + oi] += l2 * stencil[oi] * stencil[oj];

    // Cholesky M = L L', L lower-banded with bandwidth 2.
    std::array<std::vector<double>, 3> low;  // low[r][i] = L[i][i-r]
    for (auto& b : low) b.assign(t, 0.0);
    for (size_t i = 0; i < t; ++i) {
        const size_t jmin = i >= 2 ? i - 2 : 0;
        for (size_t j = jmin; j <= i; ++j) {
            double s = band[i - j][j];
            const size_t kmin = std::max(jmin, j >= 2 ? j - 2 : 0);
            for (size_t k = kmin; k < j; ++k) s -= low[i - k][i] * low[j - k][j];
            if (i == j)
                low[0][i] = std::sqrt(s);
            else
                low[i - j][i] = s / low[0][j];
        }
    }
    // Solve L y = z, then L' x = y.
    std::vector<double> y(t, 0.0), x(t, 0.0);
    for (size_t i = 0; i < t; ++i) {
        double s = signal[i];
        for (size_t r = 1; r <= std::min<size_t>(i, 2); ++r) s -= low[r][i] * y[i - r];
        y[i] = s / low[0][i];
    }
    for (size_t i = t; i-- > 0;) {
        double s = y[i];
        for (size_t r = 1; r <= 2 && i + r < t; ++r) s -= low[r][i + r] * x[i + r];
        x[i] = s / low[0][i];
    }
    std::vector<double> out(t);
    for (size_t i = 0; i < t; ++i) out[i] = signal[i] - x[i];
    return out;
}

// ---------------------------------------------------------------------------
// Butterworth band-pass design (bilinear transform with pre-warping).

struct FilterCoeffs {
    std::vector<double> b, a;  // a[0] = 1
};

namespace detail {

// Expand a polynomial from its complex roots; conjugate-paired roots give
// real coefficients up to roundoff.
inline std::vector<double> poly_from_roots(const std::vector<std::complex<double>>& roots) {
    std::vector<std::complex<double>> p{1.0};
    for (const auto& r : roots) {
        std::vector<std::complex<double>> q(p.size() + 1, 0.0);
        for (size_t i = 0; i < p.size(); ++i) {
            q[i] += p[i];
            q[i + 1] -= p[i] * r;
        }
        p = std::move(q);
    }
    std::vector<double> out(p.size());
    for (size_t i = 0; i < p.size(); ++i) out[i] = p[i].real();
    return out;
}

}  // namespace detail

// Design a Butterworth band-pass of the given prototype order; the digital
// -3 dB points land exactly on lo_hz and hi_hz because the analog edges are
// pre-warped before the bilinear transform.
inline FilterCoeffs butterworth_bandpass_design(int order, double lo_hz, double hi_hz,
                                                double fs) {
    if (order < 1) throw ConfigError("filter order must be >= 1");
    if (!(lo_hz > 0.0 && hi_hz > lo_hz)) throw ConfigError("invalid band edges");
    if (!(fs > 2.0 * hi_hz))
        throw ConfigError("band edge " + std::to_string(hi_hz) +
                          " Hz is not below Nyquist for fs=" + std::to_string(fs));
    const double fs2 = 2.0 * fs;
    const double wlo = fs2 * std::tan(kPi * lo_hz / fs);
    const double whi = fs2 * std::tan(kPi * hi_hz / fs);
    const double w0 = std::sqrt(wlo * whi);
    const double bw = whi - wlo;

    // Prototype low-pass poles on the unit circle, left half-plane.
    std::vector<std::complex<double>> ppoles;
    for (int k = 0; k < order; ++k) {
        const double theta = kPi * (2.0 * k + 1.0) / (2.0 * order) + kPi / 2.0;
        ppoles.emplace_back(std::cos(theta), std::sin(theta));
    }
    // LP -> BP: each prototype pole becomes the two roots of
    // s^2 - p*bw*s + w0^2; n zeros appear at s = 0.
    std::vector<std::complex<double>> apoles, azeros(order, 0.0);
    for (const auto& p : ppoles) {
        const std::complex<double> pb = p * bw;
        const std::complex<double> disc = std::sqrt(pb * pb - 4.0 * w0 * w0);
        apoles.push_back(0.5 * (pb + disc));
        apoles.push_back(0.5 * (pb - disc));
    }
    const double again = std::pow(bw, order);

    // Bilinear transform of each root; the (2n - n) excess poles contribute
    // digital zeros at z = -1.
    std::vector<std::complex<double>> zpoles, zzeros;
    std::complex<double> gain_num = 1.0, gain_den = 1.0;
    for (const auto& z : azeros) {
        zzeros.push_back((fs2 + z) / (fs2 - z));
        gain_num *= (fs2 - z);
    }
    for (const auto& p : apoles) {
        zpoles.push_back((fs2 + p) / (fs2 - p));
        gain_den *= (fs2 - p);
    }
    for (size_t i = zzeros.size(); i < zpoles.size(); ++i) zzeros.emplace_back(-1.0, 0.0);
    const double gain = again * (gain_num / gain_den).real();

    FilterCoeffs c;
    c.b = detail::poly_from_roots(zzeros);
    for (double& v : c.b) v *= gain;
    c.a = detail::poly_from_roots(zpoles);
    return c;
}

// |H(e^{j 2 pi f / fs})| for the designed coefficients.
inline double filter_magnitude(const FilterCoeffs& c, double f_hz, double fs) {
    const std::complex<double> z = std::polar(1.0, -2.0 * kPi * f_hz / fs);
    std::complex<double> num = 0.0, den = 0.0, zp = 1.0;
    for (size_t i = 0; i < std::max(c.b.size(), c.a.size()); ++i) {
        if (i < c.b.size()) num += c.b[i] * zp;
        if (i < c.a.size()) den += c.a[i] * zp;
        zp *= z;
    }
    return std::abs(num / den);
}

// Direct form II transposed.
inline std::vector<double> lfilter(const FilterCoeffs& c, const std::vector<double>& x,
                                   std::vector<double> zi = {}) {
    const size_t m = std::max(c.b.size(), c.a.size()) - 1;
    std::vector<double> b = c.b, a = c.a;
    b.resize(m + 1, 0.0);
    a.resize(m + 1, 0.0);
    if (zi.empty()) zi.assign(m, 0.0);
    std::vector<double> y(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        const double yi = b[0] * x[i] + zi[0];
        for (size_t j = 0; j + 1 < m; ++j) zi[j] = b[j + 1] * x[i] + zi[j + 1] - a[j + 1] * yi;
        if (m > 0) zi[m - 1] = b[m] * x[i] - a[m] * yi;
        y[i] = yi;
    }
    return y;
}

namespace detail {

// Steady-state initial filter state for a unit-step input (the usual
// filtfilt transient suppression trick).
inline std::vector<double> lfilter_zi(const FilterCoeffs& c) {
    const size_t m = std::max(c.b.size(), c.a.size()) - 1;
    std::vector<double> b = c.b, a = c.a;
    b.resize(m + 1, 0.0);
    a.resize(m + 1, 0.0);
    // Solve (I - A^T) zi = b[1:] - a[1:] * b[0], A the companion matrix of a.
    std::vector<std::vector<double>> mat(m, std::vector<double>(m, 0.0));
    std::vector<double> rhs(m);
    for (size_t i = 0; i < m; ++i) {
        mat[i][0] = a[i + 1];
        mat[i][i] += 1.0;
        if (i + 1 < m) mat[i][i + 1] -= 1.0;
        rhs[i] = b[i + 1] - a[i + 1] * b[0];
    }
    // Gaussian elimination with partial pivoting.
    for (size_t col = 0; col < m; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < m; ++r)
            if (std::abs(mat[r][col]) > std::abs(mat[piv][col])) piv = r;
        std::swap(mat[col], mat[piv]);
        std::swap(rhs[col], rhs[piv]);
        for (size_t r = col + 1; r < m; ++r) {
            const double f = mat[r][col] / mat[col][col];
            for (size_t cc = col; cc < m; ++cc) mat[r][cc] -= f * mat[col][cc];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> zi(m, 0.0);
    for (size_t i = m; i-- > 0;) {
        double s = rhs[i];
        for (size_t j = i + 1; j < m; ++j) s -= mat[i][j] * zi[j];
        zi[i] = s / mat[i][i];
    }
    return zi;
}

}  // namespace detail

// Zero-phase (forward-backward) filtering with odd-reflection padding of
// 3 * max(len(a), len(b)) samples.
inline std::vector<double> filtfilt(const FilterCoeffs& c, const std::vector<double>& x) {
    const size_t m = std::max(c.b.size(), c.a.size()) - 1;
    if (x.size() < 2) throw InvalidInputError("filtfilt needs at least 2 samples");
    const size_t padlen = std::min(x.size() - 1, 3 * (m + 1));
    std::vector<double> ext;
    ext.reserve(x.size() + 2 * padlen);
    for (size_t i = padlen; i >= 1; --i) ext.push_back(2.0 * x.front() - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (size_t i = 2; i <= padlen + 1; ++i) ext.push_back(2.0 * x.back() - x[x.size() - i]);

    const std::vector<double> zi = detail::lfilter_zi(c);
    auto scaled = [&](double v) {
        std::vector<double> z = zi;
        for (double& s : z) s *= v;
        return z;
    };
    std::vector<double> fwd = lfilter(c, ext, scaled(ext.front()));
    std::reverse(fwd.begin(), fwd.end());
    std::vector<double> bwd = lfilter(c, fwd, scaled(fwd.front()));
    std::reverse(bwd.begin(), bwd.end());
    return std::vector<double>(bwd.begin() + padlen, bwd.end() - padlen);
}

inline std::vector<double> butterworth_bandpass(const std::vector<double>& signal, double fs,
                                                int order = 2,
                                                double lo_hz = 0.75, double hi_hz = 2.50) {
    return filtfilt(butterworth_bandpass_design(order, lo_hz, hi_hz, fs), signal);
}

// ---------------------------------------------------------------------------
// Spectrum and pulse-rate estimation.

struct Spectrum {
    std::vector<double> freqs;  // Hz, ascending, all nfft bins
    std::vector<double> power;
    size_t nfft = 0;
    double fps = 0.0;
};

struct PREstimate {
    double bpm = 0.0;
    double bin_width_bpm = 0.0;
};

namespace detail {

inline void fft_radix2(std::vector<std::complex<double>>& a) {
    const size_t n = a.size();
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * kPi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0);
            for (size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

}  // namespace detail

// Rectangular-windowed power spectrum, zero-padded to the next power of two.
inline Spectrum power_spectrum(const std::vector<double>& signal, double fps) {
    if (signal.size() < 8) throw InvalidInputError("spectrum needs at least 8 samples");
    size_t nfft = 1;
    while (nfft < signal.size()) nfft <<= 1;
    std::vector<std::complex<double>> buf(nfft, 0.0);
    for (size_t i = 0; i < signal.size(); ++i) buf[i] = signal[i];
    detail::fft_radix2(buf);
    Spectrum spec;
    spec.nfft = nfft;
    spec.fps = fps;
    spec.freqs.resize(nfft);
    spec.power.resize(nfft);
    for (size_t k = 0; k < nfft; ++k) {
        spec.freqs[k] = fps * static_cast<double>(k) / static_cast<double>(nfft);
        spec.power[k] = std::norm(buf[k]);
    }
    return spec;
}

// Pick the dominant in-band frequency; ties break toward the lower bin.
inline PREstimate dominant_frequency_pr(const Spectrum& spec, double lo_hz = 0.75,
                                        double hi_hz = 2.50) {
    const size_t half = spec.nfft / 2;
    size_t best = spec.nfft;
    double best_power = -1.0;
    for (size_t k = 0; k <= half; ++k) {
        const double f = spec.freqs[k];
        if (f < lo_hz || f > hi_hz) continue;
        if (spec.power[k] > best_power) {
            best_power = spec.power[k];
            best = k;
        }
    }
    if (best == spec.nfft) throw InvalidInputError("no spectrum bin inside the pulse band");
    PREstimate est;
    est.bpm = 60.0 * spec.freqs[best];
    est.bin_width_bpm = 60.0 * spec.fps / static_cast<double>(spec.nfft);
    return est;
}

// de Haan-style SNR: power within +-tolerance of the ground-truth rate and of
// its first harmonic versus the remaining power in 45..250 BPM.
inline constexpr double kSnrCapDb = 60.0;

struct SnrResult {
    double db = 0.0;
    bool capped = false;
};

inline SnrResult snr_db(const Spectrum& spec, double gt_bpm, double tolerance_bpm = 6.0) {
    if (!(gt_bpm >= 45.0 && gt_bpm <= 150.0))
        throw InvalidInputError("ground-truth pulse rate outside the 45-150 BPM band");
    double sig = 0.0, noise = 0.0;
    const size_t half = spec.nfft / 2;
    for (size_t k = 0; k <= half; ++k) {
        const double bpm = 60.0 * spec.freqs[k];
        if (bpm < 45.0 || bpm > 250.0) continue;
        const bool in_sig = std::abs(bpm - gt_bpm) <= tolerance_bpm ||
                            std::abs(bpm - 2.0 * gt_bpm) <= tolerance_bpm;
        (in_sig ? sig : noise) += spec.power[k];
    }
    SnrResult res;
    if (noise == 0.0) {
        res.db = kSnrCapDb;
        res.capped = true;
    } else if (sig == 0.0) {
        res.db = -kSnrCapDb;
        res.capped = true;
    } else {
        res.db = 10.0 * std::log10(sig / noise);
        if (res.db > kSnrCapDb || res.db < -kSnrCapDb) {
            res.db = std::clamp(res.db, -kSnrCapDb, kSnrCapDb);
            res.capped = true;
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Metrics.

struct VideoResult {
    std::string video_id;
    std::string scenario;
    double gt_bpm = 0.0;
    double est_bpm = 0.0;
    double snr_db = 0.0;
};

struct MetricBlock {
    size_t n = 0;
    double mae = 0.0;
    double rmse = 0.0;
    std::optional<double> pearson_r;  // empty when undefined (<2 rows or zero variance)
    double mean_snr = 0.0;
    double se_mae = 0.0;
    double se_rmse = 0.0;
    std::optional<double> se_r;
    double se_snr = 0.0;
};

struct EvalReport {
    std::vector<VideoResult> per_video;                         // sorted by video_id
    MetricBlock overall;
    std::vector<std::pair<std::string, MetricBlock>> by_scenario;  // sorted by label
};

namespace detail {

inline double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

inline MetricBlock metric_block(const std::vector<const VideoResult*>& rows) {
    MetricBlock blk;
    blk.n = rows.size();
    if (rows.empty()) throw InvalidInputError("metrics need at least one row");
    std::vector<double> abs_err, sq_err, snrs, gts, ests;
    for (const VideoResult* r : rows) {
        const double e = r->est_bpm - r->gt_bpm;
        abs_err.push_back(std::abs(e));
        sq_err.push_back(e * e);
        snrs.push_back(r->snr_db);
        gts.push_back(r->gt_bpm);
        ests.push_back(r->est_bpm);
    }
    double sae = 0.0, sse = 0.0, ssnr = 0.0;
    for (size_t i = 0; i < rows.size(); ++i) {
        sae += abs_err[i];
        sse += sq_err[i];
        ssnr += snrs[i];
    }
    const double n = static_cast<double>(rows.size());
    blk.mae = sae / n;
    blk.rmse = std::sqrt(sse / n);
    blk.mean_snr = ssnr / n;
    blk.se_mae = sample_std(abs_err) / std::sqrt(n);
    blk.se_rmse = blk.rmse > 0.0 ? sample_std(sq_err) / (2.0 * blk.rmse * std::sqrt(n)) : 0.0;
    blk.se_snr = sample_std(snrs) / std::sqrt(n);
    if (rows.size() >= 2) {
        double mg = 0.0, me = 0.0;
        for (size_t i = 0; i < rows.size(); ++i) {
            mg += gts[i];
            me += ests[i];
        }
        mg /= n;
        me /= n;
        double cov = 0.0, vg = 0.0, ve = 0.0;
        for (size_t i = 0; i < rows.size(); ++i) {
            cov += (gts[i] - mg) * (ests[i] - me);
            vg += (gts[i] - mg) * (gts[i] - mg);
            ve += (ests[i] - me) * (ests[i] - me);
        }
        if (vg > 0.0 && ve > 0.0) {
            blk.pearson_r = cov / std::sqrt(vg * ve);
            if (rows.size() >= 3)
                blk.se_r = std::sqrt((1.0 - *blk.pearson_r * *blk.pearson_r) /
                                     (static_cast<double>(rows.size()) - 2.0));
        }
    }
    return blk;
}

}  // namespace detail

// Aggregate per-video rows into overall and per-scenario metrics. Rows are
// sorted by video_id first so floating-point reductions are order-fixed.
inline EvalReport aggregate_metrics(std::vector<VideoResult> rows) {
    if (rows.empty()) throw InvalidInputError("no evaluation rows");
    std::sort(rows.begin(), rows.end(),
              [](const VideoResult& a, const VideoResult& b) { return a.video_id < b.video_id; });
    EvalReport report;
    report.per_video = std::move(rows);
    std::vector<const VideoResult*> all;
    std::map<std::string, std::vector<const VideoResult*>> groups;
    for (const VideoResult& r : report.per_video) {
        all.push_back(&r);
        groups[r.scenario].push_back(&r);
    }
    report.overall = detail::metric_block(all);
    for (const auto& [label, members] : groups)
        report.by_scenario.emplace_back(label, detail::metric_block(members));
    return report;
}

// Full post-processing chain shared by estimated and ground-truth waveforms.
struct PrChainResult {
    std::vector<double> filtered;
    Spectrum spectrum;
    PREstimate estimate;
};

inline PrChainResult estimate_pulse_rate(const std::vector<double>& waveform, double fps,
                                         double detrend_lambda = 100.0, int order = 2,
                                         double lo_hz = 0.75, double hi_hz = 2.50) {
    PrChainResult res;
    res.filtered = butterworth_bandpass(detrend_smoothness_priors(waveform, detrend_lambda),
                                        fps, order, lo_hz, hi_hz);
    res.spectrum = power_spectrum(res.filtered, fps);
    res.estimate = dominant_frequency_pr(res.spectrum, lo_hz, hi_hz);
    return res;
}

}  // namespace uvrppg
