#include "thz/pipeline.hpp"

#include <filesystem>
#include <fstream>

#include "thz/error.hpp"
#include "thz/forward_model.hpp"
#include "thz/pca.hpp"
#include "thz/rng.hpp"
#include "thz/text.hpp"

namespace thz {
namespace {

namespace fs = std::filesystem;

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + dir);
}

}  // namespace

std::uint64_t stage_seed_degrade(std::uint64_t run_seed) { return derive_seed(run_seed, 0x01); }
std::uint64_t stage_seed_r2r(std::uint64_t run_seed) { return derive_seed(run_seed, 0x02); }
std::uint64_t stage_seed_train(std::uint64_t run_seed) { return derive_seed(run_seed, 0x03); }

SpectralCube prepare_spectrum(const PipelineConfig& cfg, const std::string& cube_path) {
    Cube cube = read_cube(cube_path);
    SpectralCube spec;
    if (auto* t = std::get_if<TimeDomainCube>(&cube)) {
        spec = to_spectrum(*t, cfg.fft_window);
    } else {
        spec = std::move(std::get<SpectralCube>(cube));
    }
    if (cfg.band) spec = select_bands(spec, *cfg.band);
    return spec;
}

PsfKernel restoration_kernel(const PipelineConfig& cfg, const SpectralCube& cube) {
    if (cfg.psf_mode == PsfBankMode::PerBand) {
        // The 2-D model trains against one kernel; per-band mode uses the
        // middle bin's kernel as its representative.
        const auto bank =
            make_bank(cfg.optics, cube, PsfBankMode::PerBand, nullptr, cfg.psf_truncation, cfg.psf_max_kernel);
        return bank[bank.size() / 2];
    }
    const BandSelection* sel = cfg.band ? &*cfg.band : nullptr;
    const auto bank =
        make_bank(cfg.optics, cube, PsfBankMode::BandMean, sel, cfg.psf_truncation, cfg.psf_max_kernel);
    return bank.front();
}

SimulateOutputs run_simulate(const PipelineConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    ensure_dir(out_dir);

    PhantomSpec spec = cfg.phantom;
    spec.seed = cfg.seed;
    const Phantom phantom = make_phantom(spec);
    const SpectralCube truth = phantom.to_cube();

    const auto bank = make_bank(cfg.optics, truth, PsfBankMode::PerBand, nullptr, cfg.psf_truncation,
                                cfg.psf_max_kernel);
    const SpectralCube degraded = degrade(phantom, bank, cfg.noise, stage_seed_degrade(cfg.seed));

    SimulateOutputs out;
    out.truth_cube = join(out_dir, "truth.cube");
    out.degraded_cube = join(out_dir, "degraded.cube");
    out.manifest = join(out_dir, "manifest.txt");
    out.stats_csv = join(out_dir, "degraded_stats.csv");

    write_cube(truth, out.truth_cube);
    write_cube(degraded, out.degraded_cube);
    export_band_stats_csv(degraded, out.stats_csv);

    std::ofstream mf(out.manifest, std::ios::trunc);
    if (!mf) throw IoError("cannot write manifest: " + out.manifest);
    for (const auto& [k, v] : describe(cfg)) mf << k << " = " << v << '\n';
    if (!mf) throw IoError("manifest write failed: " + out.manifest);
    return out;
}

TrainOutputs run_train(const PipelineConfig& cfg, const std::string& cube_path, const std::string& out_dir) {
    cfg.validate();
    ensure_dir(out_dir);

    const SpectralCube spec = prepare_spectrum(cfg, cube_path);
    const PcaDecomposition dec = decompose(spec, cfg.retain);
    const PsfKernel kernel = restoration_kernel(cfg, spec);

    R2RConfig r2r = cfg.r2r;
    r2r.seed = stage_seed_r2r(cfg.seed);
    TrainConfig tc = cfg.train;
    tc.seed = stage_seed_train(cfg.seed);

    const TrainResult trained = train(dec.components.images, kernel, r2r, cfg.loss, tc, cfg.arch);

    TrainOutputs out;
    out.checkpoint = join(out_dir, "model.thznet");
    out.history_csv = join(out_dir, "history.csv");
    save_checkpoint(trained.params, out.checkpoint);
    write_history_csv(trained.history, out.history_csv);
    return out;
}

RestoreOutputs run_restore(const PipelineConfig& cfg, const std::string& cube_path,
                           const std::string& checkpoint_path, const std::string& out_dir) {
    cfg.validate();
    ensure_dir(out_dir);

    const NetworkParams params = load_checkpoint(checkpoint_path);
    if (params.arch.widths != cfg.arch.widths)
        throw CheckpointMismatchError("restore: checkpoint architecture does not match the configuration");

    const SpectralCube spec = prepare_spectrum(cfg, cube_path);
    const PcaDecomposition dec = decompose(spec, cfg.retain);
    const ComponentStack processed = apply(params, dec.components);
    const SpectralCube restored = reconstruct(dec.model, processed);

    RestoreOutputs out;
    out.restored_cube = join(out_dir, "restored.cube");
    out.eigen_csv = join(out_dir, "eigenvalues.csv");
    write_cube(restored, out.restored_cube);
    dump_eigen_csv(dec.model, out.eigen_csv);
    for (int b = 0; b < restored.bands; ++b) {
        char name[32];
        std::snprintf(name, sizeof(name), "band_%03d.png", b);
        const std::string path = join(out_dir, name);
        export_band_png(restored, b, path);
        out.band_pngs.push_back(path);
    }
    return out;
}

MetricsOutputs run_metrics(const std::string& restored_path, const std::string& degraded_path,
                           const std::string& truth_path, const std::string& out_dir) {
    ensure_dir(out_dir);
    const SpectralCube restored = read_spectral_cube(restored_path);
    const SpectralCube degraded = read_spectral_cube(degraded_path);

    MetricsOutputs out;
    if (!truth_path.empty()) {
        const SpectralCube truth = read_spectral_cube(truth_path);
        out.report = report(restored, degraded, &truth);
    } else {
        out.report = report(restored, degraded);
    }
    out.metrics_csv = join(out_dir, "metrics.csv");
    write_metrics_csv(out.report, out.metrics_csv);
    return out;
}

}  // namespace thz
