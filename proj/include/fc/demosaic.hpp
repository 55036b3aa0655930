#pragma once

#include <complex>
#include <vector>

#include "fc/image.hpp"
#include "fc/lattice.hpp"

namespace fc {

// Full-resolution coefficient planes recovered from a lattice-multiplexed
// field.  planes.frame(c) is the plane for coset rank c (temporal code
// u = c + 1).  dc is not produced by demosaicking; the reconstruction
// pipelines fill it from their own DC measurement.
struct CoefficientPlanes {
    FrameStack planes;
    Image dc;
    std::vector<double> imag_rms;  // per-plane diagnostic, frequency path only
};

// Inverse-distance interpolation from each coset's samples: every output
// pixel blends the four nearest samples of its plane's coset (ties at the
// fourth distance included) with 1/d^2 weights; a pixel that belongs to the
// coset keeps its own value.  The image is mirror-extended so border pixels
// see a full neighborhood.  Throws if some coset has no samples.
CoefficientPlanes bilinear_demosaic(const Image& residual, const TmaLattice& tma);

// Carrier-phase mixing system: mix[r*N + c] = e^{-j nu_r . l_c} is the
// character table of the coset group, so mix * mix^H = N * I for any valid
// lattice.  The shared baseband lowpass is a radial raised cosine with
// passband edge cutoff * d_min / 2 (d_min: minimum wrap-around inter-carrier
// distance) and a 10% transition band; its DC tap is exactly 1.
struct DemodulationSystem {
    TmaLattice tma;
    double cutoff = 0.0;
    double passband_edge = 0.0;  // radians/pixel
    double stopband_edge = 0.0;
    double mix_condition = 1.0;
    std::vector<std::complex<double>> mix;    // N x N row-major
    std::vector<std::complex<double>> unmix;  // mix^{-1}
    std::vector<double> lowpass;              // H x W frequency-domain taps
};

// Requires 0 < cutoff <= 1; throws if the mixing matrix condition number
// exceeds 1e6 (cannot happen for a lattice whose cosets/carriers enumerate
// correctly, but guards hand-built systems).
DemodulationSystem build_demodulation(const TmaLattice& tma, double cutoff);

// For each carrier: demodulate the residual to baseband, lowpass in the
// frequency domain (periodic boundary), then apply unmix per pixel and keep
// the real part; the imaginary remainder is reported per plane as an RMS
// diagnostic.  If every plane's spectrum lies strictly inside the passband,
// recovery is exact to numerical precision.
CoefficientPlanes freq_select_demosaic(const Image& residual, const DemodulationSystem& sys);

}  // namespace fc
