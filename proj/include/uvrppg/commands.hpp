#pragma once

#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "uvrppg/dataset_io.hpp"
#include "uvrppg/frame_ops.hpp"
#include "uvrppg/mesh_geometry.hpp"
#include "uvrppg/pulse_eval.hpp"
#include "uvrppg/rppg_extract.hpp"
#include "uvrppg/synth_video.hpp"

namespace uvrppg::cli {

// Everything a command run depends on; embedded verbatim into every output
// artifact so results stay reproducible.
struct RunConfig {
    std::string data_dir;
    std::string out_dir = "out";
    std::string waveform_dir;  // evaluate input; defaults to out_dir when empty
    std::string asset_dir;     // empty = built-in face proxy assets

    std::string pipeline = "tuv:128,mask:45,fd";
    std::string extractor = "pos";
    int window_len = 128;
    int max_landmark_gap = 3;
    double mask_deg = 0.0;  // > 0 overrides every mask stage threshold
    double band_lo_hz = 0.75;
    double band_hi_hz = 2.50;
    double detrend_lambda = 100.0;
    double snr_tol_bpm = 6.0;
    double extractor_window_s = 1.6;
    int workers = 1;
    bool dump_tensors = false;
    bool dump_frames = false;

    // synth
    std::string scenario = "stationary";
    int count = 1;
    uint32_t seed = 1;
    double duration_s = 20.0;
    double fps = 30.0;
    int width = 128;
    int height = 128;
    double f_hr_hz = 1.2;
    double pulse_amplitude = 0.02;
    double ppg_fps = 60.0;
};

namespace detail {

inline void parallel_for(size_t n, int workers, const std::function<void(size_t)>& fn) {
    const int nw = std::max(1, std::min<int>(workers, static_cast<int>(n)));
    if (nw == 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w) {
        pool.emplace_back([&] {
            for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors)  // lowest index first, deterministic
        if (e) std::rethrow_exception(e);
}

inline std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

inline FaceMeshModel load_model(const RunConfig& cfg) {
    if (cfg.asset_dir.empty()) return make_face_proxy_model();
    return load_face_mesh_model(cfg.asset_dir);
}

}  // namespace detail

inline std::string provenance_block(const RunConfig& cfg, const std::string& command) {
    std::string s;
    s += "# command=" + command + "\n";
    s += "# pipeline=" + cfg.pipeline + "\n";
    if (cfg.mask_deg > 0.0) s += "# mask_deg=" + detail::fmt("%g", cfg.mask_deg) + "\n";
    s += "# extractor=" + cfg.extractor + "\n";
    s += "# window=" + std::to_string(cfg.window_len) + "\n";
    s += "# max_landmark_gap=" + std::to_string(cfg.max_landmark_gap) + "\n";
    s += "# band=[" + detail::fmt("%.4f", cfg.band_lo_hz) + "," +
         detail::fmt("%.4f", cfg.band_hi_hz) + "]\n";
    s += "# detrend_lambda=" + detail::fmt("%g", cfg.detrend_lambda) + "\n";
    s += "# snr_tol_bpm=" + detail::fmt("%g", cfg.snr_tol_bpm) + "\n";
    s += "# extractor_window_s=" + detail::fmt("%g", cfg.extractor_window_s) + "\n";
    s += "# assets=" + (cfg.asset_dir.empty() ? std::string("builtin") : cfg.asset_dir) + "\n";
    return s;
}

// ---------------------------------------------------------------------------
// synth: emit `count` synthetic videos of one scenario, seeds seed..seed+n-1.

inline int run_synth(const RunConfig& cfg) {
    const FaceMeshModel model = detail::load_model(cfg);
    fs::create_directories(cfg.out_dir);
    detail::parallel_for(static_cast<size_t>(cfg.count), cfg.workers, [&](size_t i) {
        const uint32_t seed = cfg.seed + static_cast<uint32_t>(i);
        char idbuf[80];
        std::snprintf(idbuf, sizeof idbuf, "synth_%s_s%04u", cfg.scenario.c_str(), seed);
        const std::string video_id = idbuf;
        const fs::path dir = fs::path(cfg.out_dir) / video_id;
        fs::create_directories(dir / "frames");

        const MotionScript script = scenario_script(cfg.scenario, cfg.duration_s, cfg.fps);
        const Image atlas = make_texture_atlas(128, seed);
        PulseParams pulse;
        pulse.f_hr_hz = cfg.f_hr_hz;
        pulse.amplitude = cfg.pulse_amplitude;
        const SyntheticVideo video =
            render_synthetic_video(atlas, model, generate_pose_track(script), pulse, cfg.width,
                                   cfg.height, cfg.fps, cfg.ppg_fps);

        for (size_t f = 0; f < video.frames.size(); ++f)
            write_ppm(dir / "frames" / frame_filename(static_cast<int>(f)), video.frames[f]);
        write_landmarks_jsonl(dir / "landmarks.jsonl", video.landmarks);
        write_ppg(dir / "ppg.txt", video.ppg);
        DatasetEntry entry;
        entry.video_id = video_id;
        entry.fps = cfg.fps;
        entry.width = cfg.width;
        entry.height = cfg.height;
        entry.frame_count = static_cast<int>(video.frames.size());
        entry.scenario = cfg.scenario;
        nlohmann::json gen;
        gen["seed"] = seed;
        gen["f_hr_hz"] = cfg.f_hr_hz;
        gen["pulse_amplitude"] = cfg.pulse_amplitude;
        gen["duration_s"] = cfg.duration_s;
        gen["ppg_fps"] = cfg.ppg_fps;
        write_meta(dir / "meta.json", entry, gen);
    });
    return cfg.count;
}

// ---------------------------------------------------------------------------
// Shared per-video front end: frames + landmarks -> processed windows.

inline PipelineSpec effective_spec(const RunConfig& cfg) {
    PipelineSpec spec = PipelineSpec::parse(cfg.pipeline, cfg.window_len);
    if (cfg.mask_deg > 0.0) {
        for (Stage& s : spec.stages)
            if (s.kind == StageKind::mask) s.param = cfg.mask_deg;
        spec.validate();
    }
    return spec;
}

inline std::vector<ProcessedWindow> process_entry(const DatasetEntry& entry,
                                                  const RunConfig& cfg,
                                                  const FaceMeshModel& model) {
    VideoTensor video;
    video.frames = read_frames(entry);
    video.fps = entry.fps;
    LandmarkSequence lm = read_landmarks_jsonl(entry.landmark_file, entry.fps);
    lm = interpolate_missing_landmarks(lm, cfg.max_landmark_gap);
    return run_pipeline(video, lm, effective_spec(cfg), model);
}

// prepare: write per-video window provenance and optional tensor dumps.
inline int run_prepare(const RunConfig& cfg) {
    effective_spec(cfg);  // configuration errors fire before any processing
    const FaceMeshModel model = detail::load_model(cfg);
    const IngestResult ingest = ingest_dataset(cfg.data_dir);
    if (ingest.entries.empty()) throw ConfigError("no valid dataset entries under " + cfg.data_dir);
    fs::create_directories(cfg.out_dir);
    detail::parallel_for(ingest.entries.size(), cfg.workers, [&](size_t i) {
        const DatasetEntry& entry = ingest.entries[i];
        try {
            const auto windows = process_entry(entry, cfg, model);
            const fs::path dir = fs::path(cfg.out_dir) / entry.video_id;
            fs::create_directories(dir);
            nlohmann::json summary;
            summary["video_id"] = entry.video_id;
            summary["scenario"] = entry.scenario;
            summary["pipeline"] = effective_spec(cfg).str();
            summary["pipeline_requested"] = cfg.pipeline;
            summary["window_len"] = cfg.window_len;
            summary["config"] = provenance_block(cfg, "prepare");
            nlohmann::json wj = nlohmann::json::array();
            for (const ProcessedWindow& w : windows) {
                nlohmann::json rec;
                rec["index"] = w.window_index;
                rec["start_frame"] = w.start_frame;
                rec["frames"] = w.tensor.frames.size();
                rec["warnings"] = w.warnings;
                wj.push_back(rec);
                if (cfg.dump_tensors) {
                    char name[48];
                    std::snprintf(name, sizeof name, "window_%04d.uvt", w.window_index);
                    write_tensor(dir / name, w.tensor.frames);
                }
                if (cfg.dump_frames && w.window_index == 0) {
                    for (size_t f = 0; f < w.tensor.frames.size(); ++f) {
                        const Image& img = w.tensor.frames[f];
                        Image vis = img;
                        if (w.tensor.semantics == ValueSemantics::differenced_standardized)
                            for (float& v : vis.data) v = v * 42.5f + 127.5f;
                        write_ppm(dir / ("frame_" + frame_filename(static_cast<int>(f))), vis);
                    }
                }
            }
            summary["windows"] = std::move(wj);
            if (cfg.dump_frames) {
                // Angle-frame visualization for the first frame, 0..180
                // degrees scaled to 8 bits, when the pipeline maps into UV.
                const PipelineSpec spec = effective_spec(cfg);
                for (const Stage& s : spec.stages) {
                    if (s.kind != StageKind::t_uv) continue;
                    LandmarkSequence lm = read_landmarks_jsonl(entry.landmark_file, entry.fps);
                    lm = interpolate_missing_landmarks(lm, cfg.max_landmark_gap);
                    if (!lm.frames.front().detected) break;
                    const auto orient = vertex_orientation(
                        face_normals(lm.frames.front(), model.tess), model.tess);
                    const AngleFrame angle = rasterize_angle_frame(
                        orient, model.tess, model.uv, static_cast<int>(s.param));
                    write_ppm(dir / "angle_000000.pgm", angle_frame_to_image(angle));
                    break;
                }
            }
            std::ofstream f(dir / "prepare.json");
            f << summary.dump(2) << "\n";
            if (!f) throw IoError("failed writing prepare.json");
        } catch (const Error& e) {
            throw Error(entry.video_id + ": prepare: " + e.what());
        }
    });
    return static_cast<int>(ingest.entries.size());
}

// extract: processed windows -> per-video waveform files.
inline int run_extract(const RunConfig& cfg) {
    effective_spec(cfg);  // configuration errors fire before any processing
    make_extractor(cfg.extractor, cfg.extractor_window_s);
    const FaceMeshModel model = detail::load_model(cfg);
    const IngestResult ingest = ingest_dataset(cfg.data_dir);
    if (ingest.entries.empty()) throw ConfigError("no valid dataset entries under " + cfg.data_dir);
    fs::create_directories(cfg.out_dir);
    detail::parallel_for(ingest.entries.size(), cfg.workers, [&](size_t i) {
        const DatasetEntry& entry = ingest.entries[i];
        try {
            const auto windows = process_entry(entry, cfg, model);
            const auto extractor = make_extractor(cfg.extractor, cfg.extractor_window_s);
            const PulseWaveform wave = extract_full_video(windows, *extractor);
            std::ofstream f(fs::path(cfg.out_dir) / (entry.video_id + ".waveform.txt"));
            if (!f) throw IoError("cannot open waveform output for " + entry.video_id);
            f << "# uvrppg waveform v1\n";
            f << "# video_id=" << entry.video_id << "\n";
            f << "# scenario=" << entry.scenario << "\n";
            f << "# fps=" << detail::fmt("%.6f", wave.fps) << "\n";
            f << "# source=" << wave.source << "\n";
            f << provenance_block(cfg, "extract");
            for (const std::string& w : wave.warnings) f << "# warning: " << w << "\n";
            char buf[64];
            for (size_t k = 0; k < wave.values.size(); ++k) {
                std::snprintf(buf, sizeof buf, "%zu %.9e\n", k, wave.values[k]);
                f << buf;
            }
            if (!f) throw IoError("failed writing waveform for " + entry.video_id);
        } catch (const Error& e) {
            throw Error(entry.video_id + ": extract: " + e.what());
        }
    });
    return static_cast<int>(ingest.entries.size());
}

// ---------------------------------------------------------------------------
// evaluate: waveforms + dataset ground truth -> report files.

struct LoadedWaveform {
    std::string video_id;
    std::string scenario;
    PulseWaveform wave;
};

inline LoadedWaveform read_waveform_file(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path.string());
    LoadedWaveform out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto grab = [&](const char* key) -> std::string {
                const std::string pat = std::string("# ") + key + "=";
                if (line.rfind(pat, 0) == 0) return line.substr(pat.size());
                return {};
            };
            if (auto v = grab("video_id"); !v.empty()) out.video_id = v;
            if (auto v = grab("scenario"); !v.empty()) out.scenario = v;
            if (auto v = grab("fps"); !v.empty()) out.wave.fps = std::stod(v);
            if (auto v = grab("source"); !v.empty()) out.wave.source = v;
            continue;
        }
        std::istringstream ss(line);
        size_t idx;
        double val;
        if (!(ss >> idx >> val)) throw IoError(path.string() + ": bad waveform row '" + line + "'");
        out.wave.values.push_back(val);
    }
    if (out.video_id.empty()) throw IoError(path.string() + ": missing video_id header");
    if (out.wave.fps <= 0.0) throw IoError(path.string() + ": missing fps header");
    if (out.wave.values.empty()) throw IoError(path.string() + ": no samples");
    return out;
}

inline EvalReport run_evaluate(const RunConfig& cfg) {
    const fs::path wdir = cfg.waveform_dir.empty() ? cfg.out_dir : cfg.waveform_dir;
    std::vector<fs::path> files;
    if (fs::exists(wdir))
        for (const auto& e : fs::directory_iterator(wdir)) {
            const std::string name = e.path().filename().string();
            if (name.size() > 13 && name.substr(name.size() - 13) == ".waveform.txt")
                files.push_back(e.path());
        }
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw ConfigError("no extracted waveforms (*.waveform.txt) found in " + wdir.string());

    const IngestResult ingest = ingest_dataset(cfg.data_dir);
    std::vector<VideoResult> rows(files.size());
    detail::parallel_for(files.size(), cfg.workers, [&](size_t i) {
        const LoadedWaveform lw = read_waveform_file(files[i]);
        const DatasetEntry* entry = nullptr;
        for (const DatasetEntry& e : ingest.entries)
            if (e.video_id == lw.video_id) entry = &e;
        if (!entry)
            throw ConfigError("waveform " + lw.video_id + " has no matching dataset entry");
        try {
            const PulseWaveform gt = prepare_ground_truth(read_ppg(entry->ppg_file), entry->fps);
            const PrChainResult gt_chain = estimate_pulse_rate(
                gt.values, gt.fps, cfg.detrend_lambda, 2, cfg.band_lo_hz, cfg.band_hi_hz);
            const PrChainResult est_chain = estimate_pulse_rate(
                lw.wave.values, lw.wave.fps, cfg.detrend_lambda, 2, cfg.band_lo_hz, cfg.band_hi_hz);
            VideoResult row;
            row.video_id = lw.video_id;
            row.scenario = entry->scenario;
            row.gt_bpm = gt_chain.estimate.bpm;
            row.est_bpm = est_chain.estimate.bpm;
            row.snr_db = snr_db(est_chain.spectrum, gt_chain.estimate.bpm, cfg.snr_tol_bpm).db;
            rows[i] = std::move(row);
        } catch (const Error& e) {
            throw Error(lw.video_id + ": evaluate: " + e.what());
        }
    });
    const EvalReport report = aggregate_metrics(std::move(rows));

    fs::create_directories(cfg.out_dir);
    {
        std::ofstream f(fs::path(cfg.out_dir) / "report_rows.tsv");
        f << "video_id\tscenario\tgt_bpm\test_bpm\tsnr_db\n";
        char buf[256];
        for (const VideoResult& r : report.per_video) {
            std::snprintf(buf, sizeof buf, "%s\t%s\t%.3f\t%.3f\t%.3f\n", r.video_id.c_str(),
                          r.scenario.c_str(), r.gt_bpm, r.est_bpm, r.snr_db);
            f << buf;
        }
        if (!f) throw IoError("failed writing report_rows.tsv");
    }
    {
        std::ofstream f(fs::path(cfg.out_dir) / "report.txt");
        f << "uvrppg evaluation report\n";
        f << provenance_block(cfg, "evaluate");
        f << "\nper-video results (" << report.per_video.size() << ")\n";
        char buf[256];
        for (const VideoResult& r : report.per_video) {
            std::snprintf(buf, sizeof buf, "  %-28s %-14s gt=%8.3f est=%8.3f err=%7.3f snr=%8.3f\n",
                          r.video_id.c_str(), r.scenario.c_str(), r.gt_bpm, r.est_bpm,
                          std::abs(r.est_bpm - r.gt_bpm), r.snr_db);
            f << buf;
        }
        const auto block = [&](const std::string& label, const MetricBlock& m) {
            f << "\naggregates (" << label << ", n=" << m.n << ")\n";
            std::snprintf(buf, sizeof buf, "  MAE  = %.3f +/- %.3f BPM\n", m.mae, m.se_mae);
            f << buf;
            std::snprintf(buf, sizeof buf, "  RMSE = %.3f +/- %.3f BPM\n", m.rmse, m.se_rmse);
            f << buf;
            if (m.pearson_r) {
                std::snprintf(buf, sizeof buf, "  r    = %.3f", *m.pearson_r);
                f << buf;
                if (m.se_r) {
                    std::snprintf(buf, sizeof buf, " +/- %.3f", *m.se_r);
                    f << buf;
                }
                f << "\n";
            } else {
                f << "  r    = undefined\n";
            }
            std::snprintf(buf, sizeof buf, "  SNR  = %.3f +/- %.3f dB\n", m.mean_snr, m.se_snr);
            f << buf;
        };
        block("overall", report.overall);
        for (const auto& [label, m] : report.by_scenario) block("scenario=" + label, m);
        if (!f) throw IoError("failed writing report.txt");
    }
    return report;
}

}  // namespace uvrppg::cli
