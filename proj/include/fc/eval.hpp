#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fc/image.hpp"
#include "fc/lattice.hpp"

namespace fc {

// Mean squared difference over all T*H*W samples.
double mse(const FrameStack& a, const FrameStack& b);

// Windowed structural similarity: 11x11 Gaussian window (sigma 1.5),
// K1 = 0.01, K2 = 0.03, dynamic range 1, averaged over the window positions
// that fit entirely inside the frame.  The stack overload averages over
// frames.
double ssim(const Image& a, const Image& b);
double ssim(const FrameStack& a, const FrameStack& b);

// Mean over pixels of the per-pixel temporal variance; the activity score
// used to reject static chips.
double temporal_activity(const FrameStack& stack);

constexpr int kChipFrames = 16;
constexpr int kChipSize = 64;

struct Chip {
    FrameStack frames;  // 16 x 64 x 64
    int id = 0;
    int t0 = 0, y0 = 0, x0 = 0;  // crop origin in the source video
    double activity = 0.0;
};

// Uniform random crops, rejection-sampled by temporal activity; attempts are
// bounded, so an inactive source yields a partial (possibly empty) list with
// a warning on stderr.  Deterministic per (count, seed).
std::vector<Chip> extract_chips(const FrameStack& video, int count, uint64_t seed,
                                double activity_threshold = 1e-4);

// Capture/reconstruction pipelines compared by the experiment harness.
//   FullCoded     two-camera signed capture, frequency-selection decode
//   OneHot        single binary camera, one frame per coset, bilinear decode
//   PseudoRandom  single binary camera, random tiled codes, ridge decode
enum class ExperimentScheme { FullCoded, OneHot, PseudoRandom };

const char* experiment_scheme_name(ExperimentScheme scheme);
ExperimentScheme experiment_scheme_from_name(const std::string& name);

struct SweepConfig {
    std::vector<ExperimentScheme> schemes{ExperimentScheme::FullCoded,
                                          ExperimentScheme::OneHot,
                                          ExperimentScheme::PseudoRandom};
    std::vector<double> sigmas{0.0, 2.0 / 255, 5.0 / 255, 10.0 / 255, 20.0 / 255};
    GeneratorMatrix gen{{3, 4, 3, -1}};  // 15 cosets for 16 frames
    double cutoff = 0.8;
    int tile = 16;      // pseudo-random tile pitch
    double gain = 1.0;  // camera gain applied during degradation
    double eta = 0.0;   // camera zero offset
    uint64_t seed = 1;
};

struct SweepCell {
    std::string scheme;
    double sigma = 0.0;
    std::string demosaic;
    int chip_id = 0;
    double mse = 0.0;
    double ssim = 0.0;
    std::string error;  // nonempty when the cell's pipeline threw
};

struct SweepAggregate {
    std::string scheme;
    double sigma = 0.0;
    int cells = 0;
    int errors = 0;
    double mean_mse = 0.0;
    double mean_ssim = 0.0;
};

// One cell per (scheme, sigma, chip), in that nesting order.  Cell seeds
// derive from (config seed, chip id, scheme index, sigma index), so results
// do not depend on scheduling.  Pipeline failures are recorded in the cell
// rather than aborting the sweep.
std::vector<SweepCell> run_noise_sweep(const std::vector<Chip>& chips,
                                       const SweepConfig& config);

// Means over the successful cells of each (scheme, sigma) group, in first-
// appearance order.
std::vector<SweepAggregate> aggregate_sweep(const std::vector<SweepCell>& cells);

// CSV with header scheme,sigma,demosaic,chip_id,mse,ssim; failed cells carry
// nan scores.
std::string sweep_csv(const std::vector<SweepCell>& cells);

// Aggregate report as a JSON document.
std::string sweep_summary_json(const std::vector<SweepCell>& cells);

}  // namespace fc
