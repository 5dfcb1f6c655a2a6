#include "thz/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "thz/config.hpp"
#include "thz/error.hpp"
#include "thz/pipeline.hpp"
#include "thz/psf.hpp"
#include "thz/text.hpp"

namespace thz {
namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + dir);
}

PipelineConfig load_config(const CommonOpts& opts) {
    KeyValueConfig kv = opts.config_path.empty() ? KeyValueConfig{} : KeyValueConfig::parse_file(opts.config_path);
    for (const auto& ov : opts.overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got: " + ov);
        kv.set(ov.substr(0, eq), ov.substr(eq + 1));
    }
    if (opts.seed_set) kv.set("seed", std::to_string(opts.seed));
    return build_pipeline_config(kv);
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "Pipeline config file (key = value lines)");
    cmd->add_option("--out", opts.out_dir, "Output directory");
    cmd->add_option("--set", opts.overrides, "Override a config key, e.g. --set train.epochs=30");
    cmd->add_option_function<std::uint64_t>(
        "--seed",
        [&opts](const std::uint64_t& v) {
            opts.seed = v;
            opts.seed_set = true;
        },
        "Override the run seed");
}

int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"Frequency-resolved amplitude cube restoration pipeline"};
    app.require_subcommand(1);

    CommonOpts opts;

    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic truth cube and its degraded observation");
    add_common(simulate, opts);

    auto* fft = app.add_subcommand("fft", "Transform a time-domain cube to an amplitude spectral cube");
    add_common(fft, opts);
    std::string fft_in;
    fft->add_option("cube", fft_in, "Input time-domain cube")->required();

    auto* psf = app.add_subcommand("psf", "PSF utilities");
    auto* psf_dump = psf->add_subcommand("dump", "Write the restoration kernel as a CSV grid");
    add_common(psf_dump, opts);
    std::string psf_cube;
    psf_dump->add_option("cube", psf_cube, "Spectral cube providing the frequency axis")->required();

    auto* pca = app.add_subcommand("pca", "PCA utilities");
    auto* pca_dump = pca->add_subcommand("dump", "Write the eigenvalue spectrum as CSV");
    add_common(pca_dump, opts);
    std::string pca_cube;
    pca_dump->add_option("cube", pca_cube, "Input cube")->required();

    auto* train_cmd = app.add_subcommand("train", "Train the denoise/deblur model on a cube");
    add_common(train_cmd, opts);
    std::string train_cube;
    train_cmd->add_option("cube", train_cube, "Input cube (time or spectral)")->required();

    auto* restore = app.add_subcommand("restore", "Restore a cube with a trained checkpoint");
    add_common(restore, opts);
    std::string restore_cube, restore_ckpt;
    restore->add_option("cube", restore_cube, "Input cube (time or spectral)")->required();
    restore->add_option("checkpoint", restore_ckpt, "Trained model checkpoint")->required();

    auto* metrics_cmd = app.add_subcommand("metrics", "Report PSNR/RSE between restored and degraded cubes");
    add_common(metrics_cmd, opts);
    std::string m_restored, m_degraded, m_truth;
    bool m_plot = false;
    metrics_cmd->add_option("restored", m_restored, "Restored cube")->required();
    metrics_cmd->add_option("degraded", m_degraded, "Degraded (original observation) cube")->required();
    metrics_cmd->add_option("--truth", m_truth, "Ground-truth cube (synthetic mode)");
    metrics_cmd->add_flag("--plot", m_plot, "Also write a PSNR-vs-frequency plot PNG");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (simulate->parsed()) {
        const auto out = run_simulate(load_config(opts), opts.out_dir);
        std::cout << "wrote " << out.truth_cube << "\nwrote " << out.degraded_cube << "\nwrote " << out.manifest
                  << '\n';
        return 0;
    }
    if (fft->parsed()) {
        const PipelineConfig cfg = load_config(opts);
        const SpectralCube spec = prepare_spectrum(cfg, fft_in);
        ensure_out_dir(opts.out_dir);
        const std::string out_path = opts.out_dir + "/spectrum.cube";
        write_cube(spec, out_path);
        std::cout << "wrote " << out_path << " (" << spec.bands << " bands, df " << fmt_double(spec.df)
                  << " THz)\n";
        return 0;
    }
    if (psf_dump->parsed()) {
        const PipelineConfig cfg = load_config(opts);
        const SpectralCube spec = prepare_spectrum(cfg, psf_cube);
        const PsfKernel kernel = restoration_kernel(cfg, spec);
        ensure_out_dir(opts.out_dir);
        const std::string out_path = opts.out_dir + "/psf.csv";
        dump_kernel_csv(kernel, out_path);
        std::cout << "wrote " << out_path << " (size " << kernel.size << ", sigma_px "
                  << fmt_double(kernel.sigma_px) << ")\n";
        return 0;
    }
    if (pca_dump->parsed()) {
        const PipelineConfig cfg = load_config(opts);
        const SpectralCube spec = prepare_spectrum(cfg, pca_cube);
        const auto dec = decompose(spec, cfg.retain);
        ensure_out_dir(opts.out_dir);
        const std::string out_path = opts.out_dir + "/eigenvalues.csv";
        dump_eigen_csv(dec.model, out_path);
        std::cout << "wrote " << out_path << " (retained " << dec.model.retained << ")\n";
        return 0;
    }
    if (train_cmd->parsed()) {
        const auto out = run_train(load_config(opts), train_cube, opts.out_dir);
        std::cout << "wrote " << out.checkpoint << "\nwrote " << out.history_csv << '\n';
        return 0;
    }
    if (restore->parsed()) {
        const auto out = run_restore(load_config(opts), restore_cube, restore_ckpt, opts.out_dir);
        std::cout << "wrote " << out.restored_cube << " (+" << out.band_pngs.size() << " band PNGs)\n";
        return 0;
    }
    if (metrics_cmd->parsed()) {
        const auto out = run_metrics(m_restored, m_degraded, m_truth, opts.out_dir);
        if (m_plot) {
            const std::string plot_path = opts.out_dir + "/psnr_plot.png";
            write_psnr_plot_png(out.report, plot_path);
            std::cout << "wrote " << plot_path << '\n';
        }
        double mean_rse = 0.0;
        for (double v : out.report.rse_per_band) mean_rse += v;
        mean_rse /= static_cast<double>(out.report.rse_per_band.size());
        std::cout << "wrote " << out.metrics_csv << "\noverall rse " << fmt_double(out.report.rse_overall)
                  << '\n';
        if (mean_rse > 0.6)
            std::cout << "warning: mean per-band RSE " << fmt_double(mean_rse)
                      << " exceeds 0.6; the processed cube deviates strongly from the observation\n";
        return 0;
    }
    return 0;
}

}  // namespace

int cli_run(const std::vector<std::string>& args) {
    try {
        return dispatch(args);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DegenerateDataError& e) {
        std::cerr << "degenerate data: " << e.what() << '\n';
        return 3;
    } catch (const CheckpointMismatchError& e) {
        std::cerr << "checkpoint mismatch: " << e.what() << '\n';
        return 4;
    } catch (const ShapeMismatchError& e) {
        std::cerr << "shape mismatch: " << e.what() << '\n';
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace thz
