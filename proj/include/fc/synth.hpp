#pragma once

#include <cstdint>

#include "fc/image.hpp"

namespace fc {

// Bundled synthetic corpus: a smooth static background, soft Gaussian blobs
// drifting on wrapped straight-line paths, and a pixel-scale moving speckle
// layer. The speckle sits near the sampling limit on purpose: every readout
// scheme pays a visible spatial cost there, which keeps the comparison between
// schemes about their noise behaviour rather than about trivially easy scenes.
// All fields are periodic in space so motion never pops at the borders, and
// values are clamped to [0, 1].
struct SceneParams {
    int frames = 64;
    int height = 192;
    int width = 192;
    double base_level = 0.45;
    double background_contrast = 0.04;  // RMS of the static field
    double background_scale = 112.0;    // correlation length, pixels
    int blob_count = 5;
    double blob_amplitude = 0.14;
    double blob_sigma = 40.0;  // spatial width, pixels
    double blob_speed = 2.5;   // pixels per frame
    double texture_amplitude = 0.05;  // RMS of the moving layer
    double texture_scale = 0.55;      // correlation length, pixels
    double texture_speed = 0.3;       // pixels per frame
    uint64_t seed = 1;
};

FrameStack synthetic_scene(const SceneParams& params);

// Bright square sliding over a flat background; the square is the only
// temporally active region, which makes it an exact motion oracle.
FrameStack moving_square(int frames, int height, int width, int size, double x0, double y0,
                         double vx, double vy, double background = 0.2,
                         double brightness = 0.9);

}  // namespace fc
