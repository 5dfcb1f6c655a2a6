#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "thz/forward_model.hpp"
#include "thz/nnet.hpp"
#include "thz/pca.hpp"
#include "thz/psf.hpp"
#include "thz/r2r.hpp"
#include "thz/spectral.hpp"

namespace thz {

// Plain-text `key = value` store with dotted section names. `#` starts a
// comment; repeated keys build a list (used by phantom.shape).
class KeyValueConfig {
  public:
    static KeyValueConfig parse_file(const std::string& path);
    static KeyValueConfig parse_text(const std::string& text);

    void set(const std::string& key, const std::string& value);   // replace
    void append(const std::string& key, const std::string& value);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    std::vector<std::string> get_list(const std::string& key) const;

    // Keys in first-seen order, values joined for lists; used by manifests.
    std::vector<std::pair<std::string, std::string>> entries() const;

  private:
    std::map<std::string, std::vector<std::string>> values_;
    std::vector<std::string> order_;
};

// Everything one pipeline run needs; every Table-style hyperparameter is a
// default here and overridable per key.
struct PipelineConfig {
    std::uint64_t seed = 1;

    PhantomSpec phantom;
    OpticsConfig optics;
    NoiseParams noise;
    R2RConfig r2r;
    LossConfig loss;
    TrainConfig train;
    ArchConfig arch;
    RetainPolicy retain;

    std::optional<BandSelection> band;
    PsfBankMode psf_mode = PsfBankMode::BandMean;
    double psf_truncation = 3.0;
    int psf_max_kernel = 51;
    Window fft_window = Window::None;

    void validate() const;
};

// Build a config from parsed keys; unknown keys are rejected.
PipelineConfig build_pipeline_config(const KeyValueConfig& kv);

// The resolved key set of a config (defaults filled in), for manifests.
std::vector<std::pair<std::string, std::string>> describe(const PipelineConfig& cfg);

}  // namespace thz
