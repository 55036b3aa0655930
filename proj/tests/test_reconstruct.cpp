#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "fc/capture.hpp"
#include "fc/fft.hpp"
#include "fc/hadamard.hpp"
#include "fc/lattice.hpp"
#include "fc/parallel.hpp"
#include "fc/reconstruct.hpp"
#include "fc/rng.hpp"

using namespace fc;

namespace {

const GeneratorMatrix kGen7{{2, 3, 1, -2}};    // 7 cosets, pairs with T = 8
const GeneratorMatrix kGen15{{3, 4, 3, -1}};   // 15 cosets, pairs with T = 16

FrameStack random_stack(int t, int h, int w, uint64_t seed) {
    FrameStack s(t, h, w);
    Rng rng(seed);
    for (double& v : s.data) v = rng.next_double();
    return s;
}

// Each frame a single value; the per-pixel residual is then constant on
// every coset, which both demosaickers reproduce exactly.
FrameStack flat_frames(int t, int h, int w, uint64_t seed) {
    FrameStack s(t, h, w);
    Rng rng(seed);
    for (int u = 0; u < t; ++u) {
        const double c = rng.next_double();
        for (size_t p = 0; p < s.frame_size(); ++p) s.data[u * s.frame_size() + p] = c;
    }
    return s;
}

// White noise shaped by the given frequency taps; strictly band-limited.
Image shaped_noise(int h, int w, const std::vector<double>& taps, uint64_t seed) {
    std::vector<std::complex<double>> f(static_cast<size_t>(h) * w);
    Rng rng(seed);
    for (auto& v : f) v = rng.next_gauss();
    auto spec = fft2(f, h, w, false);
    for (size_t i = 0; i < spec.size(); ++i) spec[i] *= taps[i];
    auto back = fft2(spec, h, w, true);
    Image img(h, w);
    for (size_t i = 0; i < img.size(); ++i) img.data[i] = back[i].real();
    return img;
}

// Stack whose coefficient planes all sit inside the demodulation passband:
// h(k, 0) and every AC plane are band-limited, so the frequency-selection
// decode is exact up to rounding.
FrameStack bandlimited_stack(const TmaLattice& tma, int m, double build_cutoff,
                             uint64_t seed) {
    const int t = 1 << m;
    const int n = tma.coset_count();
    REQUIRE(n == t - 1);
    auto sys = build_demodulation(tma, build_cutoff);
    FrameStack spectrum(t, tma.height, tma.width);
    for (int u = 0; u < t; ++u) {
        Image plane = shaped_noise(tma.height, tma.width, sys.lowpass, hash_mix(seed, u));
        std::copy(plane.data.begin(), plane.data.end(),
                  spectrum.data.begin() + u * spectrum.frame_size());
    }
    FrameStack stack(t, tma.height, tma.width);
    std::vector<double> h(t);
    for (size_t p = 0; p < stack.frame_size(); ++p) {
        for (int u = 0; u < t; ++u) h[u] = spectrum.data[u * stack.frame_size() + p];
        inverse_walsh_inplace(h.data(), m);
        for (int u = 0; u < t; ++u) stack.data[u * stack.frame_size() + p] = h[u];
    }
    return stack;
}

double max_abs_diff(const FrameStack& a, const FrameStack& b) {
    REQUIRE(a.same_shape(b));
    double m = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

double rel_l2(const FrameStack& a, const FrameStack& b) {
    REQUIRE(a.same_shape(b));
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        num += d * d;
        den += b.data[i] * b.data[i];
    }
    return std::sqrt(num / den);
}

double mean_sq(const FrameStack& a, const FrameStack& b) {
    REQUIRE(a.same_shape(b));
    double acc = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.data.size());
}

}  // namespace

TEST_CASE("full-code capture reconstructs the stack exactly") {
    const FrameStack stack = random_stack(16, 12, 10, 99);
    const auto cap = encode_design1_full(stack);
    // The lattice argument is unused on the full-code path; a mismatched
    // grid must not matter.
    const auto tma = build_tma(kGen7, 5, 5);
    const auto rec = recon_design1(cap, tma, DemosaicMethod::Bilinear);
    CHECK(rec.method == "design1-full");
    CHECK(rec.frames.same_shape(stack));
    CHECK(max_abs_diff(rec.frames, stack) < 1e-10);
}

TEST_CASE("full-code reconstruction cancels gain and zero offset") {
    const FrameStack stack = random_stack(8, 9, 11, 5);
    const auto cap = encode_design1_full(stack);
    // pos and neg share the offset, so every difference h(k, u) is clean.
    const auto noisy = degrade(cap, 0.0, 0.37, 1.9, 123);
    const auto rec = recon_design1(noisy, build_tma(kGen7, 9, 11), DemosaicMethod::Bilinear);
    CHECK(max_abs_diff(rec.frames, stack) < 1e-10);
}

TEST_CASE("spatially flat frames reconstruct exactly under both designs") {
    const auto tma = build_tma(kGen7, 21, 28);  // 7 | 21 and 7 | 28
    const FrameStack stack = flat_frames(8, 21, 28, 31);
    const auto d1 = encode_design1(stack, tma);
    const auto d2 = encode_design2(stack, tma, 0.4);
    for (auto method : {DemosaicMethod::Bilinear, DemosaicMethod::FrequencySelect}) {
        CHECK(max_abs_diff(recon_design1(d1, tma, method).frames, stack) < 1e-9);
        CHECK(max_abs_diff(recon_design2(d2, tma, method).frames, stack) < 1e-9);
    }
}

TEST_CASE("band-limited scenes survive the full coded round trip") {
    struct Case {
        GeneratorMatrix gen;
        int m, h, w;
    };
    for (const Case& c : {Case{kGen7, 3, 63, 63}, Case{kGen15, 4, 60, 60}}) {
        const auto tma = build_tma(c.gen, c.h, c.w);
        const FrameStack stack = bandlimited_stack(tma, c.m, 0.6, 2024);
        const auto rec1 =
            recon_design1(encode_design1(stack, tma), tma, DemosaicMethod::FrequencySelect, 0.8);
        CHECK(rel_l2(rec1.frames, stack) < 1e-6);
        const auto rec2 = recon_design2(encode_design2(stack, tma, 0.5), tma,
                                        DemosaicMethod::FrequencySelect, 0.8);
        CHECK(rel_l2(rec2.frames, stack) < 1e-6);
        CHECK(rec1.mix_condition == doctest::Approx(1.0).epsilon(1e-6));
        for (double r : rec1.imag_rms) CHECK(r < 1e-9);
    }
}

TEST_CASE("two-camera and beamsplitter decodes agree") {
    const auto tma = build_tma(kGen7, 24, 18);
    const FrameStack stack = random_stack(8, 24, 18, 77);
    const auto a = recon_design1(encode_design1(stack, tma), tma, DemosaicMethod::Bilinear);
    for (double split : {0.5, 0.3}) {
        const auto b = recon_design2(encode_design2(stack, tma, split), tma,
                                     DemosaicMethod::Bilinear);
        // Identical residual and DC algebra, so only rounding differs.
        CHECK(max_abs_diff(a.frames, b.frames) < 1e-9);
    }
}

TEST_CASE("beamsplitter zero offset lands only in the first frame") {
    const auto tma = build_tma(kGen7, 63, 63);
    const FrameStack stack = random_stack(8, 63, 63, 40);
    const auto cap = encode_design2(stack, tma, 0.3);
    for (auto method : {DemosaicMethod::Bilinear, DemosaicMethod::FrequencySelect}) {
        const auto clean = recon_design2(degrade(cap, 0.0, 0.0, 1.3, 8), tma, method);
        for (double eta : {0.1, 0.37}) {
            const auto shifted = recon_design2(degrade(cap, 0.0, eta, 1.3, 8), tma, method);
            CHECK(shifted.frame0_offset_suspect);
            CHECK_FALSE(clean.frame0_offset_suspect);
            // Every coefficient picks up +eta; a constant spectrum inverts
            // to a pulse in frame 0, so later frames must be untouched.
            double frame0 = 0.0, rest = 0.0;
            for (int u = 0; u < 8; ++u)
                for (size_t p = 0; p < stack.frame_size(); ++p) {
                    const double d = std::abs(shifted.frames.data[u * stack.frame_size() + p] -
                                              clean.frames.data[u * stack.frame_size() + p] -
                                              (u == 0 ? eta : 0.0));
                    (u == 0 ? frame0 : rest) = std::max(u == 0 ? frame0 : rest, d);
                }
            CHECK(frame0 < 1e-9);
            CHECK(rest < 1e-9);
        }
    }
}

TEST_CASE("two-camera zero offset spreads uniformly and weakly") {
    const auto tma = build_tma(kGen7, 21, 21);
    const FrameStack stack = random_stack(8, 21, 21, 41);
    const auto cap = encode_design1(stack, tma);
    const auto clean = recon_design1(degrade(cap, 0.0, 0.0, 1.0, 1), tma,
                                     DemosaicMethod::Bilinear);
    const double eta = 0.4;
    const auto shifted = recon_design1(degrade(cap, 0.0, eta, 1.0, 1), tma,
                                       DemosaicMethod::Bilinear);
    CHECK_FALSE(shifted.frame0_offset_suspect);
    // Both cameras add +eta, so only h(k, 0) moves (by 2*eta); the inverse
    // spreads that as 2*eta/T over every frame.
    const double expected = 2.0 * eta / 8.0;
    for (size_t i = 0; i < stack.data.size(); ++i)
        CHECK(shifted.frames.data[i] - clean.frames.data[i] ==
              doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("one-hot decode assigns planes to frames and zeros the remainder") {
    const auto tma = build_tma(kGen7, 14, 14);  // 7 cosets, T = 16 below
    FrameStack stack(16, 14, 14);
    Rng rng(17);
    for (double& v : stack.data) v = rng.next_double();
    const auto code = make_code(CodeKind::OneHot, 4);
    const auto cap = encode_single_binary(stack, code, tma);
    const auto rec = recon_onehot(cap, tma, DemosaicMethod::Bilinear);
    CHECK(rec.method == "one-hot+bilinear");
    // Own-coset pixels copy their frame sample through the interpolator.
    for (int y = 0; y < 14; ++y)
        for (int x = 0; x < 14; ++x) {
            const int u = tma.rank_at(y, x) + 1;
            CHECK(rec.frames.at(u, y, x) == doctest::Approx(stack.at(u, y, x)).epsilon(1e-12));
        }
    // Frame 0 is unobserved and copies frame 1; frames past the coset
    // count have no code assigned anywhere.
    for (size_t p = 0; p < stack.frame_size(); ++p)
        CHECK(rec.frames.data[p] == rec.frames.data[stack.frame_size() + p]);
    for (int u = 8; u < 16; ++u)
        for (size_t p = 0; p < stack.frame_size(); ++p)
            CHECK(rec.frames.data[u * stack.frame_size() + p] == 0.0);
}

TEST_CASE("one-hot decode is exact for a static constant scene") {
    const auto tma = build_tma(kGen15, 30, 30);
    const FrameStack stack(16, 30, 30, 0.625);
    const auto cap = encode_single_binary(stack, make_code(CodeKind::OneHot, 4), tma);
    for (auto method : {DemosaicMethod::Bilinear, DemosaicMethod::FrequencySelect}) {
        const auto rec = recon_onehot(cap, tma, method);
        CHECK(max_abs_diff(rec.frames, stack) < 1e-9);
    }
}

TEST_CASE("signed multiplexing averages sensor noise below one-hot capture") {
    // Oracle bounds, derived before measuring:
    //  - full-code: every coefficient is a two-image difference with
    //    variance 2 sigma^2, and the inverse transform averages T of them
    //    with weights 1/T, so each output sample has variance 2 sigma^2 / T.
    //  - one-hot: each frame sample interpolates >= 1 coded samples with
    //    convex weights w (sum w = 1), so its variance sigma^2 * sum w^2
    //    lies in [sigma^2 / 4, sigma^2] for the four-neighbour scheme.
    // The variance ratio therefore sits in [T/8, T/2] = [2, 8] for T = 16.
    const int t = 16, h = 60, w = 60;
    const double sigma = 0.1;
    const auto tma = build_tma(kGen15, h, w);
    const FrameStack zero(t, h, w);

    const auto fc_cap = degrade(encode_design1_full(zero), sigma, 0.0, 1.0, 303);
    const auto fc_rec = recon_design1(fc_cap, tma, DemosaicMethod::Bilinear);
    const double fc_var = mean_sq(fc_rec.frames, zero);
    const double fc_expected = 2.0 * sigma * sigma / t;
    CHECK(fc_var == doctest::Approx(fc_expected).epsilon(0.05));

    const auto oh_cap =
        degrade(encode_single_binary(zero, make_code(CodeKind::OneHot, 4), tma), sigma, 0.0,
                1.0, 404);
    const auto oh_rec = recon_onehot(oh_cap, tma, DemosaicMethod::Bilinear);
    // Restrict to the observed frames; frames filled by copy or identically
    // zero would dilute the per-sample variance.
    double oh_var = 0.0;
    for (int u = 1; u <= 15; ++u)
        for (size_t p = 0; p < zero.frame_size(); ++p) {
            const double d = oh_rec.frames.data[u * zero.frame_size() + p];
            oh_var += d * d;
        }
    oh_var /= 15.0 * zero.frame_size();
    CHECK(oh_var > sigma * sigma / 4.0 * 0.95);
    CHECK(oh_var < sigma * sigma * 1.05);
    const double ratio = oh_var / fc_var;
    CHECK(ratio > 1.9);
    CHECK(ratio < 8.4);
}

TEST_CASE("reconstruction error grows with sensor noise") {
    // Flat frames decode exactly at sigma = 0, so the noise term dominates
    // the error at every level and the ordering cannot hinge on the
    // signal/noise cross-term.
    const auto tma = build_tma(kGen7, 42, 42);
    const FrameStack stack = flat_frames(8, 42, 42, 55);
    const auto cap = encode_design1(stack, tma);
    double prev = -1.0;
    for (double sigma : {0.0, 0.02, 0.05, 0.1}) {
        const auto rec = recon_design1(degrade(cap, sigma, 0.0, 1.0, 7), tma,
                                       DemosaicMethod::Bilinear);
        const double mse = mean_sq(rec.frames, stack);
        CHECK(mse > prev);
        prev = mse;
    }
}

TEST_CASE("tiled ridge decode recovers flat frames without regularization") {
    const FrameStack stack = flat_frames(16, 32, 32, 88);
    SUBCASE("pseudo-random code, unregularized") {
        const auto code = make_code(CodeKind::PseudoRandom, 4, 9001, 256);
        const auto cap = encode_single_binary_tiled(stack, code, 16);
        const auto rec = recon_random_ls(cap, 0.0);
        CHECK(rec.method == "random-ls");
        CHECK(rec.ridge_condition.size() == 4);
        CHECK(max_abs_diff(rec.frames, stack) < 1e-8);
    }
    SUBCASE("one-hot tile is a permuted identity system") {
        const auto code = make_code(CodeKind::OneHot, 4);
        const auto cap = encode_single_binary_tiled(stack, code, 4);
        const auto rec = recon_random_ls(cap, 0.0);
        CHECK(max_abs_diff(rec.frames, stack) < 1e-10);
        for (double c : rec.ridge_condition) CHECK(c == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("ridge default keeps the solution near the unregularized one") {
    const FrameStack stack = flat_frames(16, 16, 16, 12);
    const auto code = make_code(CodeKind::PseudoRandom, 4, 424, 256);
    const auto cap = encode_single_binary_tiled(stack, code, 16);
    const auto rec = recon_random_ls(cap);  // default lambda
    CHECK(rel_l2(rec.frames, stack) < 0.05);
    for (double c : rec.ridge_condition) {
        CHECK(std::isfinite(c));
        CHECK(c >= 1.0);
    }
}

TEST_CASE("ridge decode rejects rank-deficient tiles when unregularized") {
    const FrameStack stack = flat_frames(4, 6, 6, 3);
    // A 1x1 tile observes one measurement against four unknowns.
    const auto code = make_code(CodeKind::PseudoRandom, 2, 5, 4);
    const auto cap = encode_single_binary_tiled(stack, code, 1);
    CHECK_THROWS_AS(recon_random_ls(cap, 0.0), std::runtime_error);
    CHECK_NOTHROW(recon_random_ls(cap));  // default ridge shores it up
}

TEST_CASE("recorded camera gains are normalized out everywhere") {
    const auto tma = build_tma(kGen7, 21, 21);
    const FrameStack stack = random_stack(8, 21, 21, 66);
    const std::vector<double> gains{1.7, 0.6};

    const auto d1 = encode_design1(stack, tma);
    CHECK(max_abs_diff(
              recon_design1(degrade(d1, 0.0, 0.0, gains, 1), tma, DemosaicMethod::Bilinear).frames,
              recon_design1(d1, tma, DemosaicMethod::Bilinear).frames) < 1e-10);

    const auto d2 = encode_design2(stack, tma, 0.5);
    CHECK(max_abs_diff(
              recon_design2(degrade(d2, 0.0, 0.0, gains, 1), tma, DemosaicMethod::Bilinear).frames,
              recon_design2(d2, tma, DemosaicMethod::Bilinear).frames) < 1e-10);

    const auto oh = encode_single_binary(stack, make_code(CodeKind::OneHot, 3), tma);
    CHECK(max_abs_diff(
              recon_onehot(degrade(oh, 0.0, 0.0, 2.5, 1), tma, DemosaicMethod::Bilinear).frames,
              recon_onehot(oh, tma, DemosaicMethod::Bilinear).frames) < 1e-10);
}

TEST_CASE("decoders validate design, layout, and lattice") {
    const auto tma = build_tma(kGen7, 16, 16);
    const FrameStack stack = random_stack(8, 16, 16, 2);
    const auto d1 = encode_design1(stack, tma);
    const auto d2 = encode_design2(stack, tma, 0.5);
    const auto oh = encode_single_binary(stack, make_code(CodeKind::OneHot, 3), tma);
    const auto ph = encode_single_binary(stack, make_code(CodeKind::PositiveHadamard, 3), tma);
    const auto tiled = encode_single_binary_tiled(
        stack, make_code(CodeKind::PseudoRandom, 3, 11, 16), 4);

    CHECK_THROWS_AS(recon_design1(d2, tma, DemosaicMethod::Bilinear), std::invalid_argument);
    CHECK_THROWS_AS(recon_design2(d1, tma, DemosaicMethod::Bilinear), std::invalid_argument);
    CHECK_THROWS_AS(recon_onehot(d1, tma, DemosaicMethod::Bilinear), std::invalid_argument);
    CHECK_THROWS_AS(recon_onehot(ph, tma, DemosaicMethod::Bilinear), std::invalid_argument);
    CHECK_THROWS_AS(recon_onehot(tiled, tma, DemosaicMethod::Bilinear), std::invalid_argument);
    CHECK_THROWS_AS(recon_random_ls(oh), std::invalid_argument);
    CHECK_THROWS_AS(recon_random_ls(d1), std::invalid_argument);

    const auto wrong = build_tma(kGen7, 8, 8);
    CHECK_THROWS_AS(recon_design1(d1, wrong, DemosaicMethod::Bilinear), std::invalid_argument);
    CHECK_THROWS_AS(recon_design2(d2, wrong, DemosaicMethod::Bilinear), std::invalid_argument);
}

TEST_CASE("reconstruction is independent of the worker count") {
    const auto tma = build_tma(kGen7, 21, 21);
    const FrameStack stack = random_stack(8, 21, 21, 9);
    const auto cap = degrade(encode_design1(stack, tma), 0.02, 0.1, 1.2, 77);
    set_thread_count(1);
    const auto serial = recon_design1(cap, tma, DemosaicMethod::FrequencySelect);
    set_thread_count(4);
    const auto parallel = recon_design1(cap, tma, DemosaicMethod::FrequencySelect);
    set_thread_count(0);
    CHECK(serial.frames.data == parallel.frames.data);
}
