#pragma once

#include <string>

#include "thz/config.hpp"
#include "thz/cube.hpp"
#include "thz/metrics.hpp"
#include "thz/nnet.hpp"

namespace thz {

// Stage entry points shared by the CLI and in-process callers; each stage
// persists its artifacts so runs can be resumed per stage.

struct SimulateOutputs {
    std::string truth_cube;
    std::string degraded_cube;
    std::string manifest;
    std::string stats_csv;
};

// Phantom -> truth cube, degraded cube (per-band PSF bank + noise model),
// manifest with every parameter and seed, per-band stats CSV.
SimulateOutputs run_simulate(const PipelineConfig& cfg, const std::string& out_dir);

struct TrainOutputs {
    std::string checkpoint;
    std::string history_csv;
};

// Cube (time or spectral) -> spectrum -> band selection -> PCA components ->
// recorrupted pairs -> trained model.
TrainOutputs run_train(const PipelineConfig& cfg, const std::string& cube_path, const std::string& out_dir);

struct RestoreOutputs {
    std::string restored_cube;
    std::string eigen_csv;
    std::vector<std::string> band_pngs;
};

RestoreOutputs run_restore(const PipelineConfig& cfg, const std::string& cube_path,
                           const std::string& checkpoint_path, const std::string& out_dir);

struct MetricsOutputs {
    std::string metrics_csv;
    MetricReport report;
};

MetricsOutputs run_metrics(const std::string& restored_path, const std::string& degraded_path,
                           const std::string& truth_path, const std::string& out_dir);

// Load a cube and bring it into the configured spectral form (FFT for
// time-domain input, then band selection when configured).
SpectralCube prepare_spectrum(const PipelineConfig& cfg, const std::string& cube_path);

// Stage sub-seeds derived from the one run seed; the manifest plus these
// make every random draw in a run reproducible.
std::uint64_t stage_seed_degrade(std::uint64_t run_seed);
std::uint64_t stage_seed_r2r(std::uint64_t run_seed);
std::uint64_t stage_seed_train(std::uint64_t run_seed);

// The restoration-side PSF kernel (band-mean by default).
PsfKernel restoration_kernel(const PipelineConfig& cfg, const SpectralCube& cube);

}  // namespace thz
