#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "fc/demosaic.hpp"
#include "fc/fft.hpp"
#include "fc/lattice.hpp"
#include "fc/rng.hpp"

using namespace fc;

namespace {

const GeneratorMatrix kGen2I{{2, 0, 0, 2}};
const GeneratorMatrix kGen7{{2, 3, 1, -2}};
const GeneratorMatrix kGen15{{3, 4, 3, -1}};

// Oracle: mixing entries straight from the floating-point carrier angles.
std::complex<double> oracle_mix_entry(const Carrier& nu, const std::array<int, 2>& l) {
    return std::polar(1.0, -(nu.x() * l[0] + nu.y() * l[1]));
}

Image multiplex(const FrameStack& planes, const TmaLattice& tma) {
    Image out(tma.height, tma.width);
    for (int y = 0; y < tma.height; ++y)
        for (int x = 0; x < tma.width; ++x)
            out.at(y, x) = planes.at(tma.rank_at(y, x), y, x);
    return out;
}

// White noise shaped by a frequency-domain tap set; real by tap symmetry.
Image shaped_noise(int h, int w, const std::vector<double>& taps, uint64_t seed) {
    std::vector<std::complex<double>> f(static_cast<size_t>(h) * w);
    Rng rng(seed);
    for (auto& v : f) v = std::complex<double>(rng.next_double() - 0.5, 0.0);
    auto spec = fft2(f, h, w, false);
    for (size_t i = 0; i < spec.size(); ++i) spec[i] *= taps[i];
    auto back = fft2(spec, h, w, true);
    Image img(h, w);
    for (size_t i = 0; i < img.size(); ++i) img.data[i] = back[i].real();
    return img;
}

double rel_l2(const std::vector<double>& got, const std::vector<double>& want) {
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < got.size(); ++i) {
        num += (got[i] - want[i]) * (got[i] - want[i]);
        den += want[i] * want[i];
    }
    return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("mixing matrix matches the carrier-phase oracle and is orthogonal") {
    for (const auto& gen : {kGen2I, kGen7, kGen15}) {
        auto tma = build_tma(gen, 30, 30);
        auto sys = build_demodulation(tma, 0.8);
        const int n = tma.coset_count();
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                auto want = oracle_mix_entry(tma.waves[r], tma.offsets[c]);
                auto got = sys.mix[static_cast<size_t>(r) * n + c];
                CHECK(std::abs(got - want) < 1e-9);
            }
        // Character-table orthogonality: mix * mix^H = N * I.
        for (int r = 0; r < n; ++r)
            for (int s = 0; s < n; ++s) {
                std::complex<double> acc(0, 0);
                for (int c = 0; c < n; ++c)
                    acc += sys.mix[static_cast<size_t>(r) * n + c] *
                           std::conj(sys.mix[static_cast<size_t>(s) * n + c]);
                CHECK(std::abs(acc - (r == s ? std::complex<double>(n, 0)
                                             : std::complex<double>(0, 0))) < 1e-9);
            }
        CHECK(sys.mix_condition == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("doubled-identity lattice yields the 4x4 DFT-like table") {
    auto tma = build_tma(kGen2I, 8, 8);
    auto sys = build_demodulation(tma, 0.8);
    Eigen::MatrixXcd e(4, 4);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) e(r, c) = sys.mix[static_cast<size_t>(r) * 4 + c];
    // All entries are +/-1 (half-turn phases) and |det| = 16.
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            CHECK(std::abs(e(r, c).imag()) < 1e-12);
            CHECK(std::abs(std::abs(e(r, c).real()) - 1.0) < 1e-12);
        }
    CHECK(std::abs(e.determinant()) == doctest::Approx(16.0).epsilon(1e-9));
}

TEST_CASE("lowpass has unit response at zero frequency") {
    auto tma = build_tma(kGen7, 21, 21);
    for (double cutoff : {0.3, 0.8, 1.0}) {
        auto sys = build_demodulation(tma, cutoff);
        CHECK(sys.lowpass[0] == 1.0);
        CHECK(sys.passband_edge == doctest::Approx(cutoff * hexagonality_score(kGen7) / 2));
        CHECK(sys.stopband_edge == doctest::Approx(1.1 * sys.passband_edge));
        for (double tap : sys.lowpass) {
            CHECK(tap >= 0.0);
            CHECK(tap <= 1.0);
        }
    }
}

TEST_CASE("demodulation build validates its inputs") {
    auto tma = build_tma(kGen7, 14, 14);
    CHECK_THROWS_AS(build_demodulation(tma, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(build_demodulation(tma, -0.5), std::invalid_argument);
    CHECK_THROWS_AS(build_demodulation(tma, 1.5), std::invalid_argument);
    // A corrupted carrier set (duplicate row) must trip the condition guard.
    auto broken = tma;
    broken.waves[1] = broken.waves[0];
    CHECK_THROWS_AS(build_demodulation(broken, 0.8), std::runtime_error);
}

TEST_CASE("inverse-distance demosaicking reproduces constants exactly") {
    auto tma = build_tma(kGen7, 17, 13);
    Image residual(17, 13, 0.7);
    auto planes = bilinear_demosaic(residual, tma);
    REQUIRE(planes.planes.frames == 7);
    for (double v : planes.planes.data) CHECK(v == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("interpolation weights form a partition of unity per coset") {
    auto tma = build_tma(kGen15, 20, 22);
    for (int marked = 0; marked < 15; marked += 7) {
        Image residual(20, 22, 0.0);
        for (int y = 0; y < 20; ++y)
            for (int x = 0; x < 22; ++x)
                if (tma.rank_at(y, x) == marked) residual.at(y, x) = 1.0;
        auto planes = bilinear_demosaic(residual, tma);
        for (int c = 0; c < 15; ++c) {
            const double want = c == marked ? 1.0 : 0.0;
            for (int y = 0; y < 20; ++y)
                for (int x = 0; x < 22; ++x)
                    CHECK(planes.planes.at(c, y, x) == doctest::Approx(want).epsilon(1e-12));
        }
    }
}

TEST_CASE("coset samples pass through the interpolator unchanged") {
    auto tma = build_tma(kGen7, 15, 16);
    Image residual(15, 16);
    Rng rng(31);
    for (double& v : residual.data) v = rng.next_double();
    auto planes = bilinear_demosaic(residual, tma);
    for (int y = 0; y < 15; ++y)
        for (int x = 0; x < 16; ++x)
            CHECK(planes.planes.at(tma.rank_at(y, x), y, x) == residual.at(y, x));
}

TEST_CASE("linear ramps interpolate within two percent of their range") {
    auto tma = build_tma(kGen7, 64, 64);
    FrameStack truth(7, 64, 64);
    for (int c = 0; c < 7; ++c)
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x)
                truth.at(c, y, x) =
                    ((c + 1) * x + (7 - c) * y) / (13.0 * 64.0);  // range < 1
    auto residual = multiplex(truth, tma);
    auto planes = bilinear_demosaic(residual, tma);
    // Every plane spans ((c+1) + (7-c)) * 63 / (13 * 64) = 8 * 63 / 832.
    double range = 8.0 * 63 / (13.0 * 64.0), max_err = 0.0, border_err = 0.0;
    for (int c = 0; c < 7; ++c)
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x) {
                const double err = std::abs(planes.planes.at(c, y, x) - truth.at(c, y, x));
                if (y < 2 || y >= 62 || x < 2 || x >= 62)
                    border_err = std::max(border_err, err);
                else
                    max_err = std::max(max_err, err);
            }
    CHECK(max_err < 0.02 * range);
    // The outermost rows see one-sided neighborhoods, so the weighted
    // average extrapolates with a larger but still bounded bias.
    CHECK(border_err < 0.04 * range);
}

TEST_CASE("bandlimited planes are recovered to numerical precision") {
    // Plane spectra built strictly inside the analysis passband; grid dims
    // divisible by |det| so carriers land on DFT bins.
    struct Cfg {
        GeneratorMatrix gen;
        int dim;
    };
    for (const auto& cfg : {Cfg{kGen7, 63}, Cfg{kGen15, 60}}) {
        auto tma = build_tma(cfg.gen, cfg.dim, cfg.dim);
        auto narrow = build_demodulation(tma, 0.6);
        auto sys = build_demodulation(tma, 0.8);
        const int n = tma.coset_count();
        FrameStack truth(n, cfg.dim, cfg.dim);
        for (int c = 0; c < n; ++c) {
            Image p = shaped_noise(cfg.dim, cfg.dim, narrow.lowpass, 1000 + c);
            std::copy(p.data.begin(), p.data.end(),
                      truth.data.begin() + static_cast<size_t>(c) * p.size());
        }
        auto residual = multiplex(truth, tma);
        auto planes = freq_select_demosaic(residual, sys);
        for (int c = 0; c < n; ++c) {
            std::vector<double> got(planes.planes.data.begin() + static_cast<size_t>(c) * residual.size(),
                                    planes.planes.data.begin() +
                                        static_cast<size_t>(c + 1) * residual.size());
            std::vector<double> want(truth.data.begin() + static_cast<size_t>(c) * residual.size(),
                                     truth.data.begin() +
                                         static_cast<size_t>(c + 1) * residual.size());
            CHECK(rel_l2(got, want) < 1e-6);
            CHECK(planes.imag_rms[c] < 1e-9);
        }
    }
}

TEST_CASE("frequency-selection output is real for arbitrary real residuals") {
    auto tma = build_tma(kGen7, 28, 35);
    auto sys = build_demodulation(tma, 0.8);
    Image residual(28, 35);
    Rng rng(77);
    for (double& v : residual.data) v = rng.next_double();
    auto planes = freq_select_demosaic(residual, sys);
    for (double rms : planes.imag_rms) CHECK(rms < 1e-9);
}

TEST_CASE("both demosaickers are linear in the residual") {
    auto tma = build_tma(kGen7, 21, 21);
    auto sys = build_demodulation(tma, 0.8);
    Image r1(21, 21), r2(21, 21), mixsig(21, 21);
    Rng rng(55);
    for (size_t i = 0; i < r1.size(); ++i) {
        r1.data[i] = rng.next_double();
        r2.data[i] = rng.next_double();
        mixsig.data[i] = 1.5 * r1.data[i] - 0.5 * r2.data[i];
    }
    auto fa = freq_select_demosaic(r1, sys), fb = freq_select_demosaic(r2, sys),
         fm = freq_select_demosaic(mixsig, sys);
    auto ba = bilinear_demosaic(r1, tma), bb = bilinear_demosaic(r2, tma),
         bm = bilinear_demosaic(mixsig, tma);
    for (size_t i = 0; i < fm.planes.data.size(); ++i) {
        CHECK(fm.planes.data[i] ==
              doctest::Approx(1.5 * fa.planes.data[i] - 0.5 * fb.planes.data[i]).epsilon(1e-9));
        CHECK(bm.planes.data[i] ==
              doctest::Approx(1.5 * ba.planes.data[i] - 0.5 * bb.planes.data[i]).epsilon(1e-9));
    }
}

TEST_CASE("the two demosaicking paths agree on smooth content") {
    auto tma = build_tma(kGen7, 42, 42);
    auto sys = build_demodulation(tma, 0.8);
    FrameStack truth(7, 42, 42);
    for (int c = 0; c < 7; ++c)
        for (int y = 0; y < 42; ++y)
            for (int x = 0; x < 42; ++x)
                truth.at(c, y, x) = 0.5 + 0.3 * std::sin(2 * 3.14159265358979 * (x + 2.0 * c) / 42.0) *
                                              std::cos(2 * 3.14159265358979 * y / 42.0);
    auto residual = multiplex(truth, tma);
    auto fs = freq_select_demosaic(residual, sys);
    auto bl = bilinear_demosaic(residual, tma);
    CHECK(rel_l2(fs.planes.data, bl.planes.data) < 0.05);
}

TEST_CASE("demosaicking validates dimensions and coset coverage") {
    auto tma = build_tma(kGen7, 10, 10);
    auto sys = build_demodulation(tma, 0.8);
    Image wrong(10, 9, 0.0);
    CHECK_THROWS_AS(bilinear_demosaic(wrong, tma), std::invalid_argument);
    CHECK_THROWS_AS(freq_select_demosaic(wrong, sys), std::invalid_argument);
    // A grid too small to host every coset cannot be interpolated.
    GeneratorMatrix big{{5, 6, 1, -5}};  // |det| = 31
    auto sparse = build_tma(big, 3, 3);
    Image tiny(3, 3, 0.0);
    CHECK_THROWS_AS(bilinear_demosaic(tiny, sparse), std::invalid_argument);
}
