#include "thz/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "thz/error.hpp"
#include "thz/text.hpp"

namespace thz {
namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0') throw ConfigError("config: " + key + " is not a number: " + value);
    return v;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_text(const std::string& text) {
    KeyValueConfig kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + " is not `key = value`");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config: empty key on line " + std::to_string(lineno));
        kv.append(key, value);
    }
    return kv;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("config: cannot open: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_text(buf.str());
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
    if (values_.find(key) == values_.end()) order_.push_back(key);
    values_[key] = {value};
}

void KeyValueConfig::append(const std::string& key, const std::string& value) {
    if (values_.find(key) == values_.end()) order_.push_back(key);
    values_[key].push_back(value);
}

bool KeyValueConfig::has(const std::string& key) const { return values_.find(key) != values_.end(); }

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second.back();
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_double(key, it->second.back());
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
    const double v = get_double(key, static_cast<double>(fallback));
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) throw ConfigError("config: " + key + " must be an integer");
    return i;
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& s = it->second.back();
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0') throw ConfigError("config: " + key + " is not an unsigned integer");
    return v;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& s = it->second.back();
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("config: " + key + " must be a boolean");
}

std::vector<std::string> KeyValueConfig::get_list(const std::string& key) const {
    const auto it = values_.find(key);
    return it == values_.end() ? std::vector<std::string>{} : it->second;
}

std::vector<std::pair<std::string, std::string>> KeyValueConfig::entries() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& key : order_)
        for (const auto& v : values_.at(key)) out.emplace_back(key, v);
    return out;
}

namespace {

Shape parse_shape(const std::string& text) {
    std::istringstream in(text);
    std::string kind;
    in >> kind;
    Shape s;
    if (kind == "disk") {
        s.kind = Shape::Kind::Disk;
        if (!(in >> s.p0 >> s.p1 >> s.p2)) throw ConfigError("phantom.shape: disk needs `cx cy radius`");
    } else if (kind == "rect") {
        s.kind = Shape::Kind::Rect;
        if (!(in >> s.p0 >> s.p1 >> s.p2 >> s.p3)) throw ConfigError("phantom.shape: rect needs `x y w h`");
    } else {
        throw ConfigError("phantom.shape: unknown kind: " + kind);
    }
    std::string prof;
    if (!(in >> prof)) throw ConfigError("phantom.shape: missing amplitude profile");
    if (prof == "flat") {
        s.profile.kind = AmplitudeProfile::Kind::Flat;
        if (!(in >> s.profile.a0)) throw ConfigError("phantom.shape: flat needs a level");
    } else if (prof == "decay") {
        s.profile.kind = AmplitudeProfile::Kind::Decay;
        if (!(in >> s.profile.a0 >> s.profile.a1)) throw ConfigError("phantom.shape: decay needs `level rate`");
    } else if (prof == "ramp") {
        s.profile.kind = AmplitudeProfile::Kind::Ramp;
        if (!(in >> s.profile.a0 >> s.profile.a1)) throw ConfigError("phantom.shape: ramp needs two levels");
    } else {
        throw ConfigError("phantom.shape: unknown profile: " + prof);
    }
    std::string extra;
    if (in >> extra) throw ConfigError("phantom.shape: trailing tokens: " + extra);
    return s;
}

std::string shape_to_string(const Shape& s) {
    std::ostringstream out;
    if (s.kind == Shape::Kind::Disk)
        out << "disk " << s.p0 << ' ' << s.p1 << ' ' << s.p2;
    else
        out << "rect " << s.p0 << ' ' << s.p1 << ' ' << s.p2 << ' ' << s.p3;
    switch (s.profile.kind) {
        case AmplitudeProfile::Kind::Flat:
            out << " flat " << fmt_double(s.profile.a0);
            break;
        case AmplitudeProfile::Kind::Decay:
            out << " decay " << fmt_double(s.profile.a0) << ' ' << fmt_double(s.profile.a1);
            break;
        case AmplitudeProfile::Kind::Ramp:
            out << " ramp " << fmt_double(s.profile.a0) << ' ' << fmt_double(s.profile.a1);
            break;
    }
    return out.str();
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "seed",
        "phantom.height", "phantom.width", "phantom.bands", "phantom.df", "phantom.f_start",
        "phantom.background", "phantom.absorption", "phantom.shape",
        "optics.focal_length", "optics.aperture", "optics.pixel_pitch",
        "noise.sigma0_sq", "noise.beta", "noise.p", "noise.poisson_gain",
        "r2r.alpha", "r2r.background_mode", "r2r.background_q", "r2r.background_fixed",
        "r2r.variance_floor", "r2r.noise_scale",
        "loss.xi", "loss.gamma", "loss.downsample", "loss.detach_deblur_input",
        "train.batch_size", "train.epochs", "train.learning_rate", "train.beta1", "train.beta2",
        "train.eps", "train.patch_size", "train.steps_per_epoch",
        "arch.width0", "arch.width1", "arch.width2",
        "pca.retain", "pca.variance",
        "band.f_initial", "band.f_end",
        "psf.mode", "psf.truncation", "psf.max_kernel",
        "fft.window",
    };
    return keys;
}

}  // namespace

PipelineConfig build_pipeline_config(const KeyValueConfig& kv) {
    for (const auto& [key, value] : kv.entries()) {
        (void)value;
        if (known_keys().find(key) == known_keys().end()) throw ConfigError("config: unknown key: " + key);
    }

    PipelineConfig cfg;
    cfg.seed = kv.get_u64("seed", cfg.seed);

    cfg.phantom.height = kv.get_int("phantom.height", cfg.phantom.height);
    cfg.phantom.width = kv.get_int("phantom.width", cfg.phantom.width);
    cfg.phantom.bands = kv.get_int("phantom.bands", cfg.phantom.bands);
    cfg.phantom.df = kv.get_double("phantom.df", cfg.phantom.df);
    cfg.phantom.f_start = kv.get_double("phantom.f_start", cfg.phantom.f_start);
    cfg.phantom.background = kv.get_double("phantom.background", cfg.phantom.background);
    cfg.phantom.absorption = kv.get_double("phantom.absorption", cfg.phantom.absorption);
    for (const auto& text : kv.get_list("phantom.shape")) cfg.phantom.shapes.push_back(parse_shape(text));
    if (cfg.phantom.shapes.empty() && !kv.has("phantom.shape")) {
        // Default phantom: three disks with distinct spectral profiles.
        cfg.phantom.shapes.push_back(parse_shape("disk 20 20 8 flat 0.35"));
        cfg.phantom.shapes.push_back(parse_shape("disk 44 24 6 decay 0.85 0.3"));
        cfg.phantom.shapes.push_back(parse_shape("disk 30 46 9 ramp 0.15 0.65"));
    }

    cfg.optics.focal_length_mm = kv.get_double("optics.focal_length", cfg.optics.focal_length_mm);
    cfg.optics.aperture_mm = kv.get_double("optics.aperture", cfg.optics.aperture_mm);
    cfg.optics.pixel_pitch_mm = kv.get_double("optics.pixel_pitch", cfg.optics.pixel_pitch_mm);

    cfg.noise.sigma0_sq = kv.get_double("noise.sigma0_sq", cfg.noise.sigma0_sq);
    cfg.noise.beta = kv.get_double("noise.beta", cfg.noise.beta);
    cfg.noise.p = kv.get_double("noise.p", cfg.noise.p);
    cfg.noise.poisson_gain = kv.get_double("noise.poisson_gain", cfg.noise.poisson_gain);

    cfg.r2r.alpha = kv.get_double("r2r.alpha", cfg.r2r.alpha);
    const std::string bg = kv.get_string("r2r.background_mode", "percentile");
    if (bg == "percentile")
        cfg.r2r.background_mode = R2RConfig::Background::Percentile;
    else if (bg == "fixed")
        cfg.r2r.background_mode = R2RConfig::Background::Fixed;
    else
        throw ConfigError("config: r2r.background_mode must be `percentile` or `fixed`");
    cfg.r2r.background_q = kv.get_double("r2r.background_q", cfg.r2r.background_q);
    cfg.r2r.background_fixed = kv.get_double("r2r.background_fixed", cfg.r2r.background_fixed);
    cfg.r2r.variance_floor = kv.get_double("r2r.variance_floor", cfg.r2r.variance_floor);
    // Table-style default: training noise level 25 on the 0-255 scale.
    cfg.r2r.noise_scale = kv.get_double("r2r.noise_scale", 25.0 / 255.0);

    cfg.loss.xi = kv.get_double("loss.xi", cfg.loss.xi);
    cfg.loss.gamma = kv.get_double("loss.gamma", cfg.loss.gamma);
    cfg.loss.downsample_factor = kv.get_int("loss.downsample", cfg.loss.downsample_factor);
    cfg.loss.detach_deblur_input = kv.get_bool("loss.detach_deblur_input", cfg.loss.detach_deblur_input);

    cfg.train.batch_size = kv.get_int("train.batch_size", cfg.train.batch_size);
    cfg.train.epochs = kv.get_int("train.epochs", cfg.train.epochs);
    cfg.train.learning_rate = kv.get_double("train.learning_rate", cfg.train.learning_rate);
    cfg.train.beta1 = kv.get_double("train.beta1", cfg.train.beta1);
    cfg.train.beta2 = kv.get_double("train.beta2", cfg.train.beta2);
    cfg.train.eps = kv.get_double("train.eps", cfg.train.eps);
    cfg.train.patch_size = kv.get_int("train.patch_size", cfg.train.patch_size);
    cfg.train.steps_per_epoch = kv.get_int("train.steps_per_epoch", cfg.train.steps_per_epoch);

    cfg.arch.widths[0] = kv.get_int("arch.width0", cfg.arch.widths[0]);
    cfg.arch.widths[1] = kv.get_int("arch.width1", cfg.arch.widths[1]);
    cfg.arch.widths[2] = kv.get_int("arch.width2", cfg.arch.widths[2]);

    if (kv.has("pca.variance")) {
        cfg.retain.kind = RetainPolicy::Kind::VarianceFraction;
        cfg.retain.fraction = kv.get_double("pca.variance", cfg.retain.fraction);
        if (kv.has("pca.retain")) throw ConfigError("config: set either pca.retain or pca.variance, not both");
    } else {
        cfg.retain.kind = RetainPolicy::Kind::Count;
        cfg.retain.count = kv.get_int("pca.retain", cfg.retain.count);
    }

    if (kv.has("band.f_initial") || kv.has("band.f_end")) {
        if (!kv.has("band.f_initial") || !kv.has("band.f_end"))
            throw ConfigError("config: band selection needs both band.f_initial and band.f_end");
        BandSelection sel;
        sel.f_initial = kv.get_double("band.f_initial", 0.0);
        sel.f_end = kv.get_double("band.f_end", 0.0);
        cfg.band = sel;
    }

    const std::string mode = kv.get_string("psf.mode", "band-mean");
    if (mode == "band-mean")
        cfg.psf_mode = PsfBankMode::BandMean;
    else if (mode == "per-band")
        cfg.psf_mode = PsfBankMode::PerBand;
    else
        throw ConfigError("config: psf.mode must be `band-mean` or `per-band`");
    cfg.psf_truncation = kv.get_double("psf.truncation", cfg.psf_truncation);
    cfg.psf_max_kernel = kv.get_int("psf.max_kernel", cfg.psf_max_kernel);

    const std::string window = kv.get_string("fft.window", "none");
    if (window == "none")
        cfg.fft_window = Window::None;
    else if (window == "hann")
        cfg.fft_window = Window::Hann;
    else
        throw ConfigError("config: fft.window must be `none` or `hann`");

    cfg.validate();
    return cfg;
}

void PipelineConfig::validate() const {
    phantom.validate();
    optics.validate();
    noise.validate();
    r2r.validate();
    loss.validate();
    train.validate();
    arch.validate();
    retain.validate();
    if (band) band->validate();
    if (!(psf_truncation > 0.0)) throw ConfigError("psf.truncation must be > 0");
    if (psf_max_kernel < 1) throw ConfigError("psf.max_kernel must be >= 1");
}

std::vector<std::pair<std::string, std::string>> describe(const PipelineConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> out;
    auto add = [&](const std::string& k, const std::string& v) { out.emplace_back(k, v); };
    add("seed", std::to_string(cfg.seed));
    add("phantom.height", std::to_string(cfg.phantom.height));
    add("phantom.width", std::to_string(cfg.phantom.width));
    add("phantom.bands", std::to_string(cfg.phantom.bands));
    add("phantom.df", fmt_double_full(cfg.phantom.df));
    add("phantom.f_start", fmt_double_full(cfg.phantom.f_start));
    add("phantom.background", fmt_double_full(cfg.phantom.background));
    add("phantom.absorption", fmt_double_full(cfg.phantom.absorption));
    for (const auto& s : cfg.phantom.shapes) add("phantom.shape", shape_to_string(s));
    add("optics.focal_length", fmt_double_full(cfg.optics.focal_length_mm));
    add("optics.aperture", fmt_double_full(cfg.optics.aperture_mm));
    add("optics.pixel_pitch", fmt_double_full(cfg.optics.pixel_pitch_mm));
    add("noise.sigma0_sq", fmt_double_full(cfg.noise.sigma0_sq));
    add("noise.beta", fmt_double_full(cfg.noise.beta));
    add("noise.p", fmt_double_full(cfg.noise.p));
    add("noise.poisson_gain", fmt_double_full(cfg.noise.poisson_gain));
    add("r2r.alpha", fmt_double_full(cfg.r2r.alpha));
    add("r2r.background_mode",
        cfg.r2r.background_mode == R2RConfig::Background::Percentile ? "percentile" : "fixed");
    add("r2r.background_q", fmt_double_full(cfg.r2r.background_q));
    add("r2r.background_fixed", fmt_double_full(cfg.r2r.background_fixed));
    add("r2r.variance_floor", fmt_double_full(cfg.r2r.variance_floor));
    add("r2r.noise_scale", fmt_double_full(cfg.r2r.noise_scale));
    add("loss.xi", fmt_double_full(cfg.loss.xi));
    add("loss.gamma", fmt_double_full(cfg.loss.gamma));
    add("loss.downsample", std::to_string(cfg.loss.downsample_factor));
    add("loss.detach_deblur_input", cfg.loss.detach_deblur_input ? "true" : "false");
    add("train.batch_size", std::to_string(cfg.train.batch_size));
    add("train.epochs", std::to_string(cfg.train.epochs));
    add("train.learning_rate", fmt_double_full(cfg.train.learning_rate));
    add("train.beta1", fmt_double_full(cfg.train.beta1));
    add("train.beta2", fmt_double_full(cfg.train.beta2));
    add("train.eps", fmt_double_full(cfg.train.eps));
    add("train.patch_size", std::to_string(cfg.train.patch_size));
    add("train.steps_per_epoch", std::to_string(cfg.train.steps_per_epoch));
    add("arch.width0", std::to_string(cfg.arch.widths[0]));
    add("arch.width1", std::to_string(cfg.arch.widths[1]));
    add("arch.width2", std::to_string(cfg.arch.widths[2]));
    if (cfg.retain.kind == RetainPolicy::Kind::Count)
        add("pca.retain", std::to_string(cfg.retain.count));
    else
        add("pca.variance", fmt_double_full(cfg.retain.fraction));
    if (cfg.band) {
        add("band.f_initial", fmt_double_full(cfg.band->f_initial));
        add("band.f_end", fmt_double_full(cfg.band->f_end));
    }
    add("psf.mode", cfg.psf_mode == PsfBankMode::BandMean ? "band-mean" : "per-band");
    add("psf.truncation", fmt_double_full(cfg.psf_truncation));
    add("psf.max_kernel", std::to_string(cfg.psf_max_kernel));
    add("fft.window", cfg.fft_window == Window::None ? "none" : "hann");
    return out;
}

}  // namespace thz
