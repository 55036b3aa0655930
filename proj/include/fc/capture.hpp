#pragma once

#include <cstdint>
#include <vector>

#include "fc/hadamard.hpp"
#include "fc/image.hpp"
#include "fc/lattice.hpp"

namespace fc {

enum class CaptureDesign { Design1, Design2, SingleBinary };

// Simulated coded-exposure readouts plus the acquisition metadata needed to
// decode them.  Image layout by design:
//   Design1            {ac_pos, ac_neg}
//   Design1 full-code  {pos_0..pos_{T-1}, neg_0..neg_{T-1}}
//   Design2            {ac, dc}
//   SingleBinary       {coded}
struct CodedCapture {
    CaptureDesign design = CaptureDesign::Design1;
    int order_exp = 0;       // m; stacks carry T = 2^m frames
    bool full_code = false;  // every pixel observes all codes via sub-captures
    double split = 0.5;      // Design2 fraction routed to the DC camera
    int tile = 0;            // SingleBinary tiling pitch; 0 = lattice layout
    ExposureCode code;       // SingleBinary only
    std::vector<Image> images;
    std::vector<double> gains;  // per image, unity until degraded
    double noise_sigma = 0.0;
    double offset_eta = 0.0;
    uint64_t noise_seed = 0;
    bool degraded = false;

    int frames() const { return 1 << order_exp; }
    const Image& ac_pos() const { return images.at(0); }
    const Image& ac_neg() const { return images.at(1); }
    const Image& ac() const { return images.at(0); }
    const Image& dc() const { return images.at(1); }
    const Image& coded() const { return images.at(0); }
};

// Two-camera signed multiplexing: the positive camera integrates
// (1 + w_u)/2 and the negative camera (1 - w_u)/2, where w_u is the Walsh
// kernel row selected by the pixel's coset code u = rank + 1.  The two
// images always sum to the plain temporal sum, and their difference is the
// coefficient h(k, u).
CodedCapture encode_design1(const FrameStack& stack, const TmaLattice& tma);

// Design1 with T simulated sub-captures so every pixel observes every code.
CodedCapture encode_design1_full(const FrameStack& stack);

// Beamsplitter design: DC camera integrates split * sum_x f, the AC camera
// (1 - split) * sum_x f * (1 + w_u)/2.  After normalizing each camera by
// its throughput, 2*AC - DC recovers h(k, u).
CodedCapture encode_design2(const FrameStack& stack, const TmaLattice& tma, double split = 0.5);

// Single binary camera on the coset layout; supports OneHot (pixel with
// code u copies frame u) and PositiveHadamard (pixel value (h0 + h_u)/2,
// binary weights from the kernel row's positive part).
CodedCapture encode_single_binary(const FrameStack& stack, const ExposureCode& code,
                                  const TmaLattice& tma);

// Single binary camera with one code per pixel of a tile x tile patch,
// repeated across the image; the PseudoRandom baseline layout.
CodedCapture encode_single_binary_tiled(const FrameStack& stack, const ExposureCode& code,
                                        int tile = 16);

// Sensor model v -> gain * (v + share * eta + n), n ~ N(0, sigma^2) i.i.d.
// per pixel.  eta is the zero offset expressed per unit of camera
// throughput; each image receives eta scaled by its throughput share
// (split / 1 - split for the beamsplitter cameras, 1 elsewhere), so the
// decode-side normalization sees a uniform +eta on every measurement.
// Noise streams derive from (seed, image index, pixel index), so thread
// count and image traversal order cannot change the result.
CodedCapture degrade(const CodedCapture& capture, double sigma, double eta, double gain,
                     uint64_t seed);
CodedCapture degrade(const CodedCapture& capture, double sigma, double eta,
                     const std::vector<double>& per_image_gain, uint64_t seed);

}  // namespace fc
