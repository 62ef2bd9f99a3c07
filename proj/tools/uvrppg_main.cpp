#include <cstdio>
#include <exception>

#include <CLI11.hpp>

#include "uvrppg/uvrppg.hpp"

namespace {

void add_common_options(CLI::App* cmd, uvrppg::cli::RunConfig& cfg) {
    cmd->add_option("--out", cfg.out_dir, "output directory");
    cmd->add_option("--workers", cfg.workers, "parallel video workers")->check(CLI::Range(1, 64));
    cmd->add_option("--assets", cfg.asset_dir,
                    "mesh asset directory (mesh.txt/uv.txt/tessellation.txt); "
                    "built-in face proxy when omitted")
        ->envname("UVRPPG_ASSET_DIR");
}

void add_pipeline_options(CLI::App* cmd, uvrppg::cli::RunConfig& cfg) {
    cmd->add_option("--data", cfg.data_dir, "dataset root directory")->required();
    cmd->add_option("--pipeline", cfg.pipeline,
                    "stage string, e.g. tuv:128,mask:45,fd or crop_static:1.5,resize:72,fd");
    cmd->add_option("--window", cfg.window_len, "frames per non-overlapping window");
    cmd->add_option("--mask-deg", cfg.mask_deg,
                    "override the orientation-mask threshold (degrees) of every mask stage");
    cmd->add_option("--max-gap", cfg.max_landmark_gap,
                    "max consecutive missing landmark frames to interpolate");
}

void add_eval_options(CLI::App* cmd, uvrppg::cli::RunConfig& cfg) {
    cmd->add_option("--band-lo", cfg.band_lo_hz, "band-pass low cutoff, Hz");
    cmd->add_option("--band-hi", cfg.band_hi_hz, "band-pass high cutoff, Hz");
    cmd->add_option("--lambda", cfg.detrend_lambda, "detrending smoothness parameter");
    cmd->add_option("--snr-tol", cfg.snr_tol_bpm, "SNR signal window half-width, BPM");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"orientation-conditioned UV facial texture video toolkit for rPPG"};
    app.require_subcommand(1);
    app.set_config("--config", "",
                   "INI/TOML file supplying options; subcommand options go in a "
                   "[subcommand] section, command-line flags win");
    uvrppg::cli::RunConfig cfg;

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic ground-truth dataset");
    add_common_options(synth, cfg);
    synth->add_option("--scenario", cfg.scenario, "stationary | rotation | talking | walking");
    synth->add_option("--count", cfg.count, "number of videos");
    synth->add_option("--seed", cfg.seed, "base texture seed");
    synth->add_option("--duration", cfg.duration_s, "seconds per video");
    synth->add_option("--fps", cfg.fps, "video frame rate");
    synth->add_option("--size", cfg.width, "square frame size in pixels");
    synth->add_option("--fhr", cfg.f_hr_hz, "embedded pulse frequency, Hz");
    synth->add_option("--amplitude", cfg.pulse_amplitude, "pulse modulation amplitude (0..0.2)");
    synth->add_option("--ppg-fps", cfg.ppg_fps, "ground-truth PPG sampling rate, Hz");

    CLI::App* prepare = app.add_subcommand("prepare", "run the video processing pipeline");
    add_common_options(prepare, cfg);
    add_pipeline_options(prepare, cfg);
    prepare->add_flag("--dump-tensors", cfg.dump_tensors, "write window tensors (UVT1 binary)");
    prepare->add_flag("--dump-frames", cfg.dump_frames,
                      "write the first window's processed frames as images");

    CLI::App* extract = app.add_subcommand("extract", "extract rPPG waveforms");
    add_common_options(extract, cfg);
    add_pipeline_options(extract, cfg);
    extract->add_option("--extractor", cfg.extractor, "green | chrom | pos");
    extract->add_option("--extractor-window", cfg.extractor_window_s,
                        "chrom/pos sliding window in seconds");

    CLI::App* evaluate = app.add_subcommand("evaluate", "estimate pulse rates and report metrics");
    add_common_options(evaluate, cfg);
    evaluate->add_option("--data", cfg.data_dir, "dataset root directory")->required();
    evaluate->add_option("--waveforms", cfg.waveform_dir,
                         "directory of *.waveform.txt files (default: --out)");
    add_eval_options(evaluate, cfg);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            cfg.height = cfg.width;
            const int n = uvrppg::cli::run_synth(cfg);
            std::printf("synth: wrote %d video(s) to %s\n", n, cfg.out_dir.c_str());
        } else if (prepare->parsed()) {
            const int n = uvrppg::cli::run_prepare(cfg);
            std::printf("prepare: processed %d video(s) into %s\n", n, cfg.out_dir.c_str());
        } else if (extract->parsed()) {
            const int n = uvrppg::cli::run_extract(cfg);
            std::printf("extract: wrote %d waveform(s) to %s\n", n, cfg.out_dir.c_str());
        } else if (evaluate->parsed()) {
            const uvrppg::EvalReport report = uvrppg::cli::run_evaluate(cfg);
            std::printf("evaluate: %zu video(s), MAE %.3f BPM, RMSE %.3f BPM -> %s\n",
                        report.per_video.size(), report.overall.mae, report.overall.rmse,
                        cfg.out_dir.c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
