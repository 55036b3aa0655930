#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "fc/eval.hpp"
#include "fc/parallel.hpp"
#include "fc/rng.hpp"
#include "fc/synth.hpp"

using namespace fc;

namespace {

FrameStack random_stack(int t, int h, int w, uint64_t seed) {
    FrameStack s(t, h, w);
    Rng rng(seed);
    for (double& v : s.data) v = rng.next_double();
    return s;
}

Image random_frame(int h, int w, uint64_t seed) {
    Image img(h, w);
    Rng rng(seed);
    for (double& v : img.data) v = rng.next_double();
    return img;
}

std::vector<Chip> corpus_chips(int count, uint64_t seed) {
    SceneParams params;
    params.frames = 32;
    params.height = 128;
    params.width = 128;
    params.seed = seed;
    return extract_chips(synthetic_scene(params), count, hash_mix(seed, 0xc4));
}

}  // namespace

TEST_CASE("mse matches a direct summation oracle") {
    const auto a = random_stack(4, 4, 4, 1);
    const auto b = random_stack(4, 4, 4, 2);
    double acc = 0.0;
    for (int t = 0; t < 4; ++t)
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x) {
                const double d = a.at(t, y, x) - b.at(t, y, x);
                acc += d * d;
            }
    CHECK(mse(a, b) == doctest::Approx(acc / 64.0).epsilon(1e-14));
    CHECK(mse(a, a) == 0.0);
    FrameStack shifted = a;
    for (double& v : shifted.data) v += 0.1;
    CHECK(mse(a, shifted) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK_THROWS_AS(mse(a, random_stack(4, 4, 5, 3)), std::invalid_argument);
}

TEST_CASE("ssim is one on identical input and symmetric otherwise") {
    const auto a = random_frame(32, 32, 4);
    const auto b = random_frame(32, 32, 5);
    CHECK(ssim(a, a) == 1.0);
    CHECK(ssim(a, b) == ssim(b, a));
    const double s = ssim(a, b);
    CHECK(s > -1.0);
    CHECK(s < 1.0);
    CHECK_THROWS_AS(ssim(a, random_frame(32, 31, 6)), std::invalid_argument);
    CHECK_THROWS_AS(ssim(random_frame(8, 8, 7), random_frame(8, 8, 8)), std::invalid_argument);
}

TEST_CASE("ssim approaches one as a constant perturbation vanishes") {
    const Image base(24, 24, 0.5);
    Image nudged = base;
    for (double& v : nudged.data) v += 1e-6;
    CHECK(ssim(base, nudged) > 0.9999);
}

TEST_CASE("inverted checkerboards are structurally anti-correlated") {
    Image a(24, 24), b(24, 24);
    for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 24; ++x) {
            a.at(y, x) = (x + y) % 2;
            b.at(y, x) = 1.0 - a.at(y, x);
        }
    CHECK(ssim(a, b) < -0.5);
}

TEST_CASE("more distortion lowers ssim and raises mse") {
    SceneParams params;
    params.frames = 16;
    params.height = 64;
    params.width = 64;
    params.seed = 5;
    const auto clean = synthetic_scene(params);
    double last_ssim = 1.0, last_mse = -1.0;
    for (double level : {0.01, 0.03, 0.09}) {
        FrameStack noisy = clean;
        Rng rng(99);
        for (double& v : noisy.data) v += level * rng.next_gauss();
        const double s = ssim(noisy, clean);
        const double m = mse(noisy, clean);
        CHECK(s < last_ssim);
        CHECK(m > last_mse);
        last_ssim = s;
        last_mse = m;
    }
}

TEST_CASE("temporal activity measures per-pixel variance over time") {
    const FrameStack still(8, 16, 16, 0.5);
    CHECK(temporal_activity(still) == 0.0);
    FrameStack blink(2, 4, 4);
    for (size_t p = 0; p < blink.frame_size(); ++p) blink.data[p] = 1.0;  // frame 0 on, 1 off
    // Each pixel alternates 1, 0: mean 1/2, variance 1/4.
    CHECK(temporal_activity(blink) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("chips concentrate on the moving region and repeat per seed") {
    const auto video = moving_square(32, 192, 192, 24, 60.0, 80.0, 2.0, 0.0);
    const auto chips = extract_chips(video, 20, 42);
    REQUIRE(chips.size() == 20);
    // The square sweeps x in [60, 146), y in [80, 104); only chips that
    // intersect it can pass the activity threshold.
    for (const Chip& chip : chips) {
        CHECK(chip.activity >= 1e-4);
        CHECK(chip.x0 + kChipSize > 60);
        CHECK(chip.x0 < 146);
        CHECK(chip.y0 + kChipSize > 80);
        CHECK(chip.y0 < 104);
    }
    for (size_t i = 0; i < chips.size(); ++i) CHECK(chips[i].id == static_cast<int>(i));
    const auto again = extract_chips(video, 20, 42);
    for (size_t i = 0; i < chips.size(); ++i) {
        CHECK(chips[i].t0 == again[i].t0);
        CHECK(chips[i].y0 == again[i].y0);
        CHECK(chips[i].x0 == again[i].x0);
        CHECK(chips[i].frames.data == again[i].frames.data);
    }
}

TEST_CASE("static sources produce an empty chip list") {
    const FrameStack still(20, 96, 96, 0.3);
    CHECK(extract_chips(still, 5, 7).empty());
    CHECK_THROWS_AS(extract_chips(FrameStack(4, 96, 96), 5, 7), std::invalid_argument);
    CHECK_THROWS_AS(extract_chips(still, 0, 7), std::invalid_argument);
}

TEST_CASE("synthetic scenes are bounded, active, and reproducible") {
    SceneParams params;
    params.frames = 24;
    params.height = 96;
    params.width = 96;
    params.seed = 11;
    const auto scene = synthetic_scene(params);
    for (double v : scene.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    CHECK(temporal_activity(scene) > 1e-4);
    const auto repeat = synthetic_scene(params);
    CHECK(scene.data == repeat.data);
    params.seed = 12;
    CHECK(synthetic_scene(params).data != scene.data);
}

TEST_CASE("noise sweep emits one deterministic record per cell") {
    const auto chips = corpus_chips(2, 21);
    REQUIRE(chips.size() == 2);
    SweepConfig config;
    config.sigmas = {0.0, 0.02};
    config.seed = 77;
    const auto cells = run_noise_sweep(chips, config);
    REQUIRE(cells.size() == 3 * 2 * 2);
    // Nesting order: scheme, then sigma, then chip.
    CHECK(cells[0].scheme == "fc");
    CHECK(cells[0].sigma == 0.0);
    CHECK(cells[0].chip_id == 0);
    CHECK(cells[1].chip_id == 1);
    CHECK(cells[2].sigma == 0.02);
    CHECK(cells[4].scheme == "one-hot");
    CHECK(cells[8].scheme == "pseudo-random");
    for (const auto& c : cells) {
        CHECK(c.error.empty());
        CHECK(c.mse >= 0.0);
        CHECK(c.ssim <= 1.0);
        CHECK(c.ssim >= -1.0);
    }
    const auto csv = sweep_csv(cells);
    CHECK(csv.rfind("scheme,sigma,demosaic,chip_id,mse,ssim\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 13);

    set_thread_count(1);
    const auto serial = run_noise_sweep(chips, config);
    set_thread_count(4);
    const auto threaded = run_noise_sweep(chips, config);
    set_thread_count(0);
    CHECK(sweep_csv(serial) == csv);
    CHECK(sweep_csv(threaded) == csv);
}

TEST_CASE("aggregates group by scheme and sigma in order") {
    const auto chips = corpus_chips(2, 31);
    REQUIRE(chips.size() == 2);
    SweepConfig config;
    config.sigmas = {0.0, 20.0 / 255};
    config.seed = 5;
    const auto cells = run_noise_sweep(chips, config);
    const auto groups = aggregate_sweep(cells);
    REQUIRE(groups.size() == 6);
    CHECK(groups[0].scheme == "fc");
    CHECK(groups[0].sigma == 0.0);
    CHECK(groups[1].sigma == doctest::Approx(20.0 / 255));
    for (const auto& g : groups) {
        CHECK(g.cells == 2);
        CHECK(g.errors == 0);
        CHECK(g.mean_mse >= 0.0);
    }
    // Adding heavy noise must not help any scheme.
    for (int s = 0; s < 3; ++s) CHECK(groups[2 * s + 1].mean_mse > groups[2 * s].mean_mse);
    // The signed two-camera capture averages noise that the one-frame-per-
    // pixel scheme cannot.
    CHECK(groups[1].mean_mse < groups[3].mean_mse);

    const auto json = nlohmann::json::parse(sweep_summary_json(cells));
    CHECK(json["cells"] == cells.size());
    CHECK(json["errors"] == 0);
    CHECK(json["aggregates"].size() == 6);
    CHECK(json["aggregates"][0]["scheme"] == "fc");
}

TEST_CASE("pipeline failures are recorded per cell without aborting") {
    const auto chips = corpus_chips(1, 41);
    REQUIRE(chips.size() == 1);
    SweepConfig config;
    config.sigmas = {0.0};
    config.gen = GeneratorMatrix{{2, 7, 5, 2}};  // 31 cosets, too many for 16 frames
    const auto cells = run_noise_sweep(chips, config);
    REQUIRE(cells.size() == 3);
    CHECK(!cells[0].error.empty());       // fc needs a code per coset
    CHECK(!cells[1].error.empty());       // one-hot likewise
    CHECK(cells[2].error.empty());        // tiled pseudo-random ignores the lattice
    CHECK(std::isnan(cells[0].mse));
    const auto groups = aggregate_sweep(cells);
    int errors = 0;
    for (const auto& g : groups) errors += g.errors;
    CHECK(errors == 2);
    const auto csv = sweep_csv(cells);
    CHECK(csv.find("nan") != std::string::npos);
}

TEST_CASE("sweep validates its inputs") {
    SweepConfig config;
    CHECK_THROWS_AS(run_noise_sweep({}, config), std::invalid_argument);
    auto chips = corpus_chips(1, 51);
    REQUIRE(chips.size() == 1);
    SweepConfig empty_schemes;
    empty_schemes.schemes.clear();
    CHECK_THROWS_AS(run_noise_sweep(chips, empty_schemes), std::invalid_argument);
    Chip bad;
    bad.frames = FrameStack(8, 64, 64);
    CHECK_THROWS_AS(run_noise_sweep({bad}, config), std::invalid_argument);
    CHECK(experiment_scheme_from_name("fc") == ExperimentScheme::FullCoded);
    CHECK_THROWS_AS(experiment_scheme_from_name("cnn"), std::invalid_argument);
}
