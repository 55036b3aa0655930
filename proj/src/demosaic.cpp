#include "fc/demosaic.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "fc/fft.hpp"
#include "fc/parallel.hpp"

namespace fc {

namespace {

constexpr double kPi = 3.141592653589793238462643383279;
constexpr double kTwoPi = 2.0 * kPi;

void require_grid(const Image& residual, const TmaLattice& tma) {
    if (residual.height != tma.height || residual.width != tma.width)
        throw std::invalid_argument("Residual dimensions do not match the lattice grid.");
}

// Half-sample mirror index: ... 1 0 | 0 1 ... n-1 | n-1 n-2 ...
int reflect(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -1 - i;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

long phase_mod(long v, long n) {
    long r = v % n;
    return r < 0 ? r + n : r;
}

}  // namespace

CoefficientPlanes bilinear_demosaic(const Image& residual, const TmaLattice& tma) {
    require_grid(residual, tma);
    const int n = tma.coset_count();
    const int h = tma.height, w = tma.width;

    std::vector<long> coset_population(n, 0);
    for (int32_t r : tma.code_of_pixel) ++coset_population[r];
    for (int c = 0; c < n; ++c)
        if (coset_population[c] == 0)
            throw std::invalid_argument("Coset " + std::to_string(c) +
                                        " has no samples on this grid.");

    const int pad =
        std::min(24, static_cast<int>(std::ceil(lattice_cell_diameter(tma.gen))) + 2);
    const int radius_cap = pad + std::max(h, w);

    CoefficientPlanes out;
    out.planes = FrameStack(n, h, w);

    for (int c = 0; c < n; ++c) {
        double* plane = out.planes.data.data() + static_cast<size_t>(c) * residual.size();
        parallel_for(0, h, [&, c, plane](int64_t y) {
            std::vector<double> dist2, value;
            for (int x = 0; x < w; ++x) {
                dist2.clear();
                value.clear();
                double fourth = std::numeric_limits<double>::infinity();
                // Grow Chebyshev rings until no closer sample can appear.
                for (int rad = 0; rad <= radius_cap; ++rad) {
                    if (dist2.size() >= 4 &&
                        static_cast<double>(rad) * rad > fourth)
                        break;
                    const int ylo = static_cast<int>(y) - rad, yhi = static_cast<int>(y) + rad;
                    const int xlo = x - rad, xhi = x + rad;
                    for (int py = ylo; py <= yhi; ++py) {
                        if (py < -pad || py >= h + pad) continue;
                        const bool edge_row = (py == ylo || py == yhi);
                        const int step = edge_row ? 1 : (xhi - xlo == 0 ? 1 : xhi - xlo);
                        for (int px = xlo; px <= xhi; px += step) {
                            if (px < -pad || px >= w + pad) continue;
                            const int my = reflect(py, h), mx = reflect(px, w);
                            if (tma.rank_at(my, mx) != c) continue;
                            const double dy = py - static_cast<double>(y), dx = px - x;
                            dist2.push_back(dy * dy + dx * dx);
                            value.push_back(residual.at(my, mx));
                        }
                    }
                    if (dist2.size() >= 4) {
                        std::vector<double> s(dist2);
                        std::nth_element(s.begin(), s.begin() + 3, s.end());
                        fourth = s[3];
                    }
                }
                if (dist2.empty())
                    throw std::runtime_error("Interpolation neighborhood search failed.");
                const double nearest = *std::min_element(dist2.begin(), dist2.end());
                double result;
                if (nearest == 0.0) {
                    // The pixel itself carries this coset: copy exactly.
                    result = value[std::min_element(dist2.begin(), dist2.end()) -
                                   dist2.begin()];
                } else {
                    double wsum = 0.0, acc = 0.0;
                    for (size_t i = 0; i < dist2.size(); ++i) {
                        if (dist2[i] > fourth) continue;
                        const double wi = 1.0 / dist2[i];
                        wsum += wi;
                        acc += wi * value[i];
                    }
                    result = acc / wsum;
                }
                plane[static_cast<size_t>(y) * w + x] = result;
            }
        });
    }
    return out;
}

DemodulationSystem build_demodulation(const TmaLattice& tma, double cutoff) {
    if (!(cutoff > 0.0 && cutoff <= 1.0))
        throw std::invalid_argument("Demodulation cutoff must lie in (0, 1].");
    const int n = tma.coset_count();
    if (static_cast<int>(tma.waves.size()) != n || tma.height <= 0 || tma.width <= 0)
        throw std::invalid_argument("Lattice is not fully built.");

    DemodulationSystem sys;
    sys.tma = tma;
    sys.cutoff = cutoff;

    // Exact unit roots: every phase is an integer multiple of 2*pi/den.
    const long den = tma.gen.coset_count();
    std::vector<std::complex<double>> root(den);
    for (long t = 0; t < den; ++t)
        root[t] = std::polar(1.0, -kTwoPi * static_cast<double>(t) / static_cast<double>(den));

    sys.mix.resize(static_cast<size_t>(n) * n);
    for (int r = 0; r < n; ++r) {
        const Carrier& nu = tma.waves[r];
        for (int c = 0; c < n; ++c) {
            const auto& l = tma.offsets[c];  // {x, y}
            sys.mix[static_cast<size_t>(r) * n + c] =
                root[phase_mod(nu.num_x * l[0] + nu.num_y * l[1], den)];
        }
    }

    Eigen::MatrixXcd e(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) e(r, c) = sys.mix[static_cast<size_t>(r) * n + c];
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(e);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(n - 1);
    sys.mix_condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    if (!(sys.mix_condition <= 1e6))
        throw std::runtime_error("Carrier mixing matrix is ill-conditioned (cond = " +
                                 std::to_string(sys.mix_condition) + ").");
    Eigen::MatrixXcd inv = e.inverse();
    sys.unmix.resize(sys.mix.size());
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) sys.unmix[static_cast<size_t>(r) * n + c] = inv(r, c);

    const double dmin = hexagonality_score(tma.gen);
    sys.passband_edge = cutoff * dmin / 2.0;
    sys.stopband_edge = 1.1 * sys.passband_edge;

    const int h = tma.height, w = tma.width;
    sys.lowpass.resize(static_cast<size_t>(h) * w);
    for (int fy = 0; fy < h; ++fy) {
        const double wy = kTwoPi * (fy <= h / 2 ? fy : fy - h) / h;
        for (int fx = 0; fx < w; ++fx) {
            const double wx = kTwoPi * (fx <= w / 2 ? fx : fx - w) / w;
            const double rho = std::hypot(wx, wy);
            double tap;
            if (rho <= sys.passband_edge)
                tap = 1.0;
            else if (rho >= sys.stopband_edge)
                tap = 0.0;
            else
                tap = 0.5 * (1.0 + std::cos(kPi * (rho - sys.passband_edge) /
                                            (sys.stopband_edge - sys.passband_edge)));
            sys.lowpass[static_cast<size_t>(fy) * w + fx] = tap;
        }
    }
    return sys;
}

CoefficientPlanes freq_select_demosaic(const Image& residual, const DemodulationSystem& sys) {
    require_grid(residual, sys.tma);
    const int n = sys.tma.coset_count();
    const int h = sys.tma.height, w = sys.tma.width;
    const size_t npix = residual.size();
    const long den = sys.tma.gen.coset_count();

    std::vector<std::complex<double>> root(den);
    for (long t = 0; t < den; ++t)
        root[t] = std::polar(1.0, -kTwoPi * static_cast<double>(t) / static_cast<double>(den));

    // Per carrier: demodulate, lowpass, back to space.
    std::vector<std::vector<std::complex<double>>> mixed(n);
    parallel_for(0, n, [&](int64_t r) {
        const Carrier& nu = sys.tma.waves[r];
        std::vector<std::complex<double>> field(npix);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const size_t p = static_cast<size_t>(y) * w + x;
                field[p] = residual.data[p] *
                           root[phase_mod(nu.num_x * static_cast<long>(x) +
                                              nu.num_y * static_cast<long>(y),
                                          den)];
            }
        auto spec = fft2(field, h, w, false);
        for (size_t p = 0; p < npix; ++p) spec[p] *= sys.lowpass[p];
        mixed[r] = fft2(spec, h, w, true);
    });

    CoefficientPlanes out;
    out.planes = FrameStack(n, h, w);
    out.imag_rms.assign(n, 0.0);
    std::vector<double> imag_sq(n, 0.0);

    // planes = unmix * (N * mixed), pixelwise; keeping the real part is the
    // conjugate-pair symmetrization (carriers close under negation and the
    // lowpass is radial, so the imaginary parts cancel up to rounding).
    std::vector<std::vector<double>> imag_partial(n, std::vector<double>(h, 0.0));
    parallel_for(0, h, [&](int64_t y) {
        for (int c = 0; c < n; ++c) {
            double* plane = out.planes.data.data() + static_cast<size_t>(c) * npix;
            const std::complex<double>* um = sys.unmix.data() + static_cast<size_t>(c) * n;
            double row_imag = 0.0;
            for (int x = 0; x < w; ++x) {
                const size_t p = static_cast<size_t>(y) * w + x;
                std::complex<double> acc(0.0, 0.0);
                for (int r = 0; r < n; ++r) acc += um[r] * mixed[r][p];
                acc *= static_cast<double>(n);
                plane[p] = acc.real();
                row_imag += acc.imag() * acc.imag();
            }
            imag_partial[c][y] = row_imag;
        }
    });
    for (int c = 0; c < n; ++c) {
        for (int y = 0; y < h; ++y) imag_sq[c] += imag_partial[c][y];
        out.imag_rms[c] = std::sqrt(imag_sq[c] / static_cast<double>(npix));
    }
    return out;
}

}  // namespace fc
