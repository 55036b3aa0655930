#pragma once

#include <string>
#include <vector>

#include "fc/capture.hpp"
#include "fc/demosaic.hpp"

namespace fc {

enum class DemosaicMethod { Bilinear, FrequencySelect };

const char* demosaic_method_name(DemosaicMethod method);

struct ReconstructionResult {
    FrameStack frames;
    std::string method;
    std::vector<double> imag_rms;         // per-plane, frequency-selection path
    double mix_condition = 1.0;           // carrier system condition (FS path)
    std::vector<double> ridge_condition;  // per-tile normal-equation condition
    bool frame0_offset_suspect = false;   // recorded offset lands in frame 0
};

// Two-camera decode: h(k,0) = pos + neg (full resolution), the residual
// pos - neg is demosaicked into the AC planes, then each pixel's spectrum
// is inverted.  Full-code captures skip demosaicking entirely and invert
// the exact per-pixel spectrum (tma is ignored).  Camera gains recorded by
// degrade are normalized out first.
ReconstructionResult recon_design1(const CodedCapture& capture, const TmaLattice& tma,
                                   DemosaicMethod method, double cutoff = 0.8);

// Beamsplitter decode: normalizes each camera by its throughput, forms
// 2*AC - DC as the residual and DC as h(k,0).  A recorded zero offset adds
// +eta to every coefficient, which the inverse transform confines to
// frame 0 (flagged in the result).
ReconstructionResult recon_design2(const CodedCapture& capture, const TmaLattice& tma,
                                   DemosaicMethod method, double cutoff = 0.8);

// Single-camera one-hot decode: the coded image is demosaicked directly
// (each coset's plane is that frame's sparse observation); no transform is
// inverted.  Frame 0 is never observed (codes start at u = 1) and is copied
// from frame 1; frames beyond the coset count stay zero.
ReconstructionResult recon_onehot(const CodedCapture& capture, const TmaLattice& tma,
                                  DemosaicMethod method, double cutoff = 0.8);

// Tile-resolution ridge baseline for the pseudo-random code: per tile,
// stacks each pixel's binary code row into A and solves
// (A^T A + lambda I) f = A^T v, treating f as constant over the tile per
// frame.  lambda < 0 selects the scale-free default 1e-3 * tr(A^T A) / T.
// This is a conditioning baseline, not a compressive-sensing solver.
ReconstructionResult recon_random_ls(const CodedCapture& capture, double lambda = -1.0);

}  // namespace fc
