#include <doctest.h>

#include <cmath>

#include "thz/error.hpp"
#include "thz/r2r.hpp"
#include "thz/rng.hpp"

using namespace thz;

namespace {

R2RConfig fixed_bg(double b) {
    R2RConfig cfg;
    cfg.background_mode = R2RConfig::Background::Fixed;
    cfg.background_fixed = b;
    return cfg;
}

Image constant(int h, int w, double v) { return Image(h, w, v); }

// Largest relative rounding slack tolerated by the "exact up to 64-bit
// rounding" identities.
bool near_ulp(double a, double b, double scale) {
    return std::abs(a - b) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max({std::abs(a), std::abs(b), scale, 1e-300});
}

}  // namespace

TEST_CASE("sigma estimation on flat and spiked images") {
    // constant image with background equal to the level: floored at sqrt(eps)
    const Image flat = constant(6, 6, 0.4);
    const Image s1 = estimate_sigma(flat, fixed_bg(0.4));
    for (double v : s1.data) CHECK(v == doctest::Approx(std::sqrt(1e-6)).epsilon(1e-12));

    // background 4 below the level: sigma = 2 everywhere
    const Image s2 = estimate_sigma(flat, fixed_bg(0.4 - 4.0));
    for (double v : s2.data) CHECK(v == doctest::Approx(2.0).epsilon(1e-12));

    // 5x5 with one spike of 25: the center box average is 1
    Image spike(5, 5, 0.0);
    spike.at(2, 2) = 25.0;
    const Image s3 = estimate_sigma(spike, fixed_bg(0.0));
    CHECK(s3.at(2, 2) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(estimate_sigma(Image(4, 4, 0.0), fixed_bg(0.0)), ShapeMismatchError);
}

TEST_CASE("sigma map respects the floor everywhere") {
    Rng rng(31);
    Image img(16, 16);
    for (auto& v : img.data) v = rng.next_double();
    R2RConfig cfg;  // percentile background
    cfg.variance_floor = 1e-6;
    const Image sigma = estimate_sigma(img, cfg);
    for (double v : sigma.data) CHECK(v >= std::sqrt(1e-6));
}

TEST_CASE("noise scale enters the variance quadratically") {
    const Image flat = constant(8, 8, 1.0);
    R2RConfig cfg = fixed_bg(0.0);
    cfg.noise_scale = 0.5;
    const Image sigma = estimate_sigma(flat, cfg);
    for (double v : sigma.data) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("recorrupt with zero noise returns the image twice") {
    Rng rng(8);
    Image y(8, 8);
    for (auto& v : y.data) v = rng.next_double();
    const Image zero(8, 8, 0.0);
    const Image sigma(8, 8, 1.0);
    const R2RPair pair = recorrupt(y, zero, sigma, 1.0);
    CHECK(pair.y_hat.data == y.data);
    CHECK(pair.y_tilde.data == y.data);
}

TEST_CASE("pair midpoint identity at alpha = 1") {
    Rng rng(19);
    Image y(16, 16);
    for (auto& v : y.data) v = rng.next_double();  // includes near-zero pixels
    R2RConfig cfg = fixed_bg(0.0);
    cfg.alpha = 1.0;
    cfg.seed = 77;
    const R2RPair pair = make_pair(y, cfg);
    for (std::size_t i = 0; i < y.data.size(); ++i) {
        CHECK(near_ulp(pair.y_hat.data[i] + pair.y_tilde.data[i], 2.0 * y.data[i], 1.0));
        // noise components are negatives of each other at rounding level
        CHECK(near_ulp(pair.y_hat.data[i] - y.data[i], -(pair.y_tilde.data[i] - y.data[i]), 1.0));
    }
}

TEST_CASE("general alpha anti-correlation") {
    Rng rng(20);
    Image y(8, 8);
    for (auto& v : y.data) v = 0.5 + rng.next_double();
    R2RConfig cfg = fixed_bg(0.0);
    cfg.alpha = 2.0;
    cfg.seed = 5;
    const R2RPair pair = make_pair(y, cfg);
    for (std::size_t i = 0; i < y.data.size(); ++i) {
        const double up = (pair.y_hat.data[i] - y.data[i]) / cfg.alpha;
        const double down = (pair.y_tilde.data[i] - y.data[i]) * cfg.alpha;
        CHECK(near_ulp(up, -down, 1.0));
    }
}

TEST_CASE("pair moments match the analytic covariance") {
    // One pixel, many draws: Var(y_hat - y) ~ sigma^2,
    // Cov(y_hat - y, y_tilde - y) ~ -sigma^2.
    const Image y = constant(5, 5, 5.0);
    R2RConfig cfg = fixed_bg(1.0);  // H(y) - b = 4, sigma = 2
    cfg.alpha = 1.0;

    const int draws = 100000;
    double sum_u = 0.0, sum_u2 = 0.0, sum_uv = 0.0;
    for (int it = 0; it < draws; ++it) {
        cfg.seed = static_cast<std::uint64_t>(it);
        const R2RPair pair = make_pair(y, cfg);
        const double u = pair.y_hat.at(2, 2) - 5.0;
        const double v = pair.y_tilde.at(2, 2) - 5.0;
        sum_u += u;
        sum_u2 += u * u;
        sum_uv += u * v;
    }
    const double mean_u = sum_u / draws;
    const double var_u = sum_u2 / draws - mean_u * mean_u;
    const double cov_uv = sum_uv / draws - mean_u * (-mean_u);
    CHECK(var_u == doctest::Approx(4.0).epsilon(0.02));
    CHECK(cov_uv == doctest::Approx(-4.0).epsilon(0.02));
    // unbiasedness: mean within 3 standard errors
    CHECK(std::abs(mean_u) < 3.0 * 2.0 / std::sqrt(static_cast<double>(draws)));
}

TEST_CASE("pair stream determinism and cycling") {
    Rng rng(40);
    std::vector<Image> images;
    for (int i = 0; i < 3; ++i) {
        Image img(8, 8);
        for (auto& v : img.data) v = rng.next_double();
        images.push_back(std::move(img));
    }
    R2RConfig cfg;
    cfg.seed = 11;

    CHECK(pair_stream(images, cfg, 0).empty());

    const auto a = pair_stream(images, cfg, 7);
    const auto b = pair_stream(images, cfg, 7);
    REQUIRE(a.size() == 7);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].y_hat.data == b[i].y_hat.data);
        CHECK(a[i].y_tilde.data == b[i].y_tilde.data);
    }

    // pairs 0 and 3 come from the same image but fresh noise
    CHECK(a[0].y_hat.data != a[3].y_hat.data);

    PairStream stream(images, cfg);
    CHECK(stream.next_image_index() == 0);
    (void)stream.next();
    CHECK(stream.next_image_index() == 1);

    CHECK_THROWS_AS(PairStream({}, cfg), ConfigError);
}

TEST_CASE("config validation") {
    R2RConfig cfg;
    cfg.alpha = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = R2RConfig{};
    cfg.background_q = 150.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = R2RConfig{};
    cfg.variance_floor = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
