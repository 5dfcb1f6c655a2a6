#include <doctest.h>

#include <cmath>

#include "thz/error.hpp"
#include "thz/psf.hpp"
#include "thz/rng.hpp"

using namespace thz;

namespace {

OpticsConfig f_over_d_4() {
    OpticsConfig o;
    o.focal_length_mm = 100.0;
    o.aperture_mm = 25.0;
    o.pixel_pitch_mm = 0.5;
    return o;
}

}  // namespace

TEST_CASE("beam waist constants at f/D = 4") {
    const OpticsConfig o = f_over_d_4();
    const double lambda_1thz = OpticsConfig::c_mm_per_ps;  // c/f at 1 THz
    CHECK(beam_waist(o, 1.0) / lambda_1thz == doctest::Approx(8.0 / M_PI).epsilon(1e-12));
    CHECK(beam_waist(o, 1.0) / lambda_1thz == doctest::Approx(2.547).epsilon(4e-4));
    CHECK(beam_waist(o, 1.0) == doctest::Approx(0.7636).epsilon(2e-4));

    // doubling frequency halves the waist
    CHECK(beam_waist(o, 2.0) == doctest::Approx(beam_waist(o, 1.0) / 2.0).epsilon(1e-12));

    CHECK_THROWS_AS(beam_waist(o, 0.0), ConfigError);
    OpticsConfig bad = o;
    bad.aperture_mm = 0.0;
    CHECK_THROWS_AS(beam_waist(bad, 1.0), ConfigError);
}

TEST_CASE("sigma is the waist over sqrt(2)") {
    const OpticsConfig o = f_over_d_4();
    const double lambda_1thz = OpticsConfig::c_mm_per_ps;
    CHECK(sigma_for(o, 1.0) / lambda_1thz == doctest::Approx(1.8006).epsilon(1e-4));
    CHECK(sigma_for(o, 1.0) == doctest::Approx(0.5396).epsilon(1e-3));
    for (double f : {0.3, 0.7, 1.9}) {
        CHECK(sigma_for(o, f) / beam_waist(o, f) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
        // frequency doubling halves sigma bitwise: every step of the
        // evaluation scales by an exact power of two
        CHECK(sigma_for(o, 2.0 * f) == sigma_for(o, f) / 2.0);
    }

    OpticsConfig wide = o;
    wide.focal_length_mm = 200.0;  // f/D = 8
    CHECK(sigma_for(wide, 1.0) / lambda_1thz == doctest::Approx(3.6013).epsilon(1e-3));
}

TEST_CASE("continuous psf forms agree analytically") {
    // The closed 3-D form f^2/(6.48 pi c^2) exp(-f^2 r^2 / (6.48 c^2)) must
    // equal the normalized Gaussian with sigma = 1.8 c / f.
    Rng rng(41);
    const double c = OpticsConfig::c_mm_per_ps;
    for (int it = 0; it < 20; ++it) {
        const double f = 0.1 + 2.9 * rng.next_double();
        const double x = (rng.next_double() - 0.5) * 4.0;
        const double y = (rng.next_double() - 0.5) * 4.0;
        const double sigma = 1.8 * c / f;
        const double gauss = 1.0 / (2.0 * M_PI * sigma * sigma) *
                             std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
        const double closed = f * f / (6.48 * M_PI * c * c) *
                              std::exp(-f * f * (x * x + y * y) / (6.48 * c * c));
        CHECK(std::abs(gauss - closed) <= 1e-12 * std::abs(gauss));
    }
}

TEST_CASE("kernel discretization") {
    OpticsConfig o = f_over_d_4();

    // Table-style scanning step 0.5 mm at 1 THz: sigma_px ~ 1.079, size 9.
    const PsfKernel k = make_kernel(o, 1.0);
    CHECK(k.sigma_px == doctest::Approx(1.0796).epsilon(1e-3));
    CHECK(k.size == 9);
    double sum = 0.0;
    for (double v : k.values) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    // center is the max
    const double center = k.values[4 * 9 + 4];
    for (double v : k.values) CHECK(v <= center);

    // sub-0.3-pixel sigma collapses to a delta
    const PsfKernel delta = make_kernel(o, 50.0);
    CHECK(delta.size == 1);
    CHECK(delta.values[0] == 1.0);
    CHECK(delta.is_delta());

    // sigma_px = 1 with truncation 3 gives a 7x7 kernel
    OpticsConfig pitch = o;
    pitch.pixel_pitch_mm = sigma_for(o, 1.0);
    const PsfKernel unit = make_kernel(pitch, 1.0);
    CHECK(unit.sigma_px == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(unit.size == 7);

    // oversized kernels are refused with guidance
    OpticsConfig fine = o;
    fine.pixel_pitch_mm = 0.01;
    CHECK_THROWS_WITH_AS(make_kernel(fine, 1.0), doctest::Contains("coarser"), ConfigError);
}

TEST_CASE("kernel symmetry properties") {
    OpticsConfig o = f_over_d_4();
    for (double f : {0.25, 0.8, 1.6}) {
        const PsfKernel k = make_kernel(o, f);
        const int n = k.size;
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) {
                const double v = k.values[static_cast<std::size_t>(y) * n + x];
                CHECK(v >= 0.0);
                // transpose
                CHECK(v == k.values[static_cast<std::size_t>(x) * n + y]);
                // 180-degree rotation
                CHECK(v == k.values[static_cast<std::size_t>(n - 1 - y) * n + (n - 1 - x)]);
            }
    }
}

TEST_CASE("bank construction modes") {
    OpticsConfig o = f_over_d_4();
    o.pixel_pitch_mm = 1.0;

    SpectralCube cube;
    cube.height = 1;
    cube.width = 1;
    cube.bands = 5;
    cube.df = 0.4;
    cube.f_start = 0.0;  // includes a DC bin
    cube.data.assign(5, 1.0f);

    const auto per_band = make_bank(o, cube, PsfBankMode::PerBand);
    REQUIRE(per_band.size() == 5);
    CHECK(per_band[0].is_delta());  // DC
    for (std::size_t b = 1; b + 1 < per_band.size(); ++b)
        CHECK(per_band[b].size >= per_band[b + 1].size);  // narrower at higher f

    BandSelection sel;
    sel.f_initial = 0.03;
    sel.f_end = 1.93;
    cube.f_start = 0.03;
    const auto mean_bank = make_bank(o, cube, PsfBankMode::BandMean, &sel);
    REQUIRE(mean_bank.size() == 1);
    CHECK(mean_bank[0].freq_thz == doctest::Approx(0.98));

    SpectralCube single;
    single.height = 1;
    single.width = 1;
    single.bands = 1;
    single.df = 0.4;
    single.f_start = 1.0;
    single.data.assign(1, 1.0f);
    CHECK(make_bank(o, single, PsfBankMode::PerBand).size() == 1);
    CHECK(make_bank(o, single, PsfBankMode::BandMean).size() == 1);
}

TEST_CASE("every bank kernel is normalized") {
    OpticsConfig o = f_over_d_4();
    o.pixel_pitch_mm = 1.0;
    SpectralCube cube;
    cube.height = 1;
    cube.width = 1;
    cube.bands = 12;
    cube.df = 0.15;
    cube.f_start = 0.1;
    cube.data.assign(12, 1.0f);
    for (const auto& k : make_bank(o, cube, PsfBankMode::PerBand)) {
        double sum = 0.0;
        for (double v : k.values) sum += v;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}
