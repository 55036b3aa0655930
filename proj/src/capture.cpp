#include "fc/capture.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fc/parallel.hpp"
#include "fc/rng.hpp"

namespace fc {

namespace {

int order_from_frames(int frames) {
    if (frames < 2 || (frames & (frames - 1)) != 0 || frames > 256)
        throw std::invalid_argument("Frame count must be a power of two in [2, 256].");
    return std::countr_zero(static_cast<unsigned>(frames));
}

void require_grid_match(const FrameStack& stack, const TmaLattice& tma) {
    if (stack.height != tma.height || stack.width != tma.width)
        throw std::invalid_argument("Lattice grid does not match the frame stack.");
}

void require_codes_fit(const TmaLattice& tma, int frames) {
    if (tma.coset_count() > frames - 1)
        throw std::invalid_argument("Lattice has " + std::to_string(tma.coset_count()) +
                                    " cosets but only " + std::to_string(frames - 1) +
                                    " AC codes are available.");
}

// Kernel rows for codes 1..N, precomputed once per encode.
std::vector<std::vector<int8_t>> code_rows(int m, int n) {
    std::vector<std::vector<int8_t>> rows(n + 1);
    for (int u = 1; u <= n; ++u) rows[u] = walsh_kernel_row(m, u);
    return rows;
}

}  // namespace

CodedCapture encode_design1(const FrameStack& stack, const TmaLattice& tma) {
    require_grid_match(stack, tma);
    const int m = order_from_frames(stack.frames);
    require_codes_fit(tma, stack.frames);

    CodedCapture cap;
    cap.design = CaptureDesign::Design1;
    cap.order_exp = m;
    cap.images.assign(2, Image(stack.height, stack.width));
    cap.gains.assign(2, 1.0);

    const auto rows = code_rows(m, tma.coset_count());
    const int T = stack.frames;
    const size_t fs = stack.frame_size();
    Image& pos = cap.images[0];
    Image& neg = cap.images[1];
    parallel_for(0, stack.height, [&](int64_t y) {
        for (int x = 0; x < stack.width; ++x) {
            const size_t p = static_cast<size_t>(y) * stack.width + x;
            const int8_t* w = rows[tma.code_of_pixel[p] + 1].data();
            double sum = 0.0, dot = 0.0;
            for (int t = 0; t < T; ++t) {
                double v = stack.data[t * fs + p];
                sum += v;
                dot += w[t] * v;
            }
            pos.data[p] = 0.5 * (sum + dot);
            neg.data[p] = 0.5 * (sum - dot);
        }
    });
    return cap;
}

CodedCapture encode_design1_full(const FrameStack& stack) {
    const int m = order_from_frames(stack.frames);
    const int T = stack.frames;

    CodedCapture cap;
    cap.design = CaptureDesign::Design1;
    cap.order_exp = m;
    cap.full_code = true;
    cap.images.assign(2 * static_cast<size_t>(T), Image(stack.height, stack.width));
    cap.gains.assign(2 * static_cast<size_t>(T), 1.0);

    const size_t fs = stack.frame_size();
    parallel_for(0, T, [&](int64_t u) {
        const auto w = walsh_kernel_row(m, static_cast<int>(u));
        Image& pos = cap.images[u];
        Image& neg = cap.images[T + u];
        for (size_t p = 0; p < fs; ++p) {
            double sum = 0.0, dot = 0.0;
            for (int t = 0; t < T; ++t) {
                double v = stack.data[t * fs + p];
                sum += v;
                dot += w[t] * v;
            }
            pos.data[p] = 0.5 * (sum + dot);
            neg.data[p] = 0.5 * (sum - dot);
        }
    });
    return cap;
}

CodedCapture encode_design2(const FrameStack& stack, const TmaLattice& tma, double split) {
    require_grid_match(stack, tma);
    if (!(split > 0.0 && split < 1.0))
        throw std::invalid_argument("Beamsplitter split must lie strictly inside (0, 1).");
    const int m = order_from_frames(stack.frames);
    require_codes_fit(tma, stack.frames);

    CodedCapture cap;
    cap.design = CaptureDesign::Design2;
    cap.order_exp = m;
    cap.split = split;
    cap.images.assign(2, Image(stack.height, stack.width));
    cap.gains.assign(2, 1.0);

    const auto rows = code_rows(m, tma.coset_count());
    const int T = stack.frames;
    const size_t fs = stack.frame_size();
    Image& ac = cap.images[0];
    Image& dc = cap.images[1];
    parallel_for(0, stack.height, [&](int64_t y) {
        for (int x = 0; x < stack.width; ++x) {
            const size_t p = static_cast<size_t>(y) * stack.width + x;
            const int8_t* w = rows[tma.code_of_pixel[p] + 1].data();
            double sum = 0.0, dot = 0.0;
            for (int t = 0; t < T; ++t) {
                double v = stack.data[t * fs + p];
                sum += v;
                dot += w[t] * v;
            }
            dc.data[p] = split * sum;
            ac.data[p] = (1.0 - split) * 0.5 * (sum + dot);
        }
    });
    return cap;
}

CodedCapture encode_single_binary(const FrameStack& stack, const ExposureCode& code,
                                  const TmaLattice& tma) {
    require_grid_match(stack, tma);
    const int m = order_from_frames(stack.frames);
    if (code.order_exp != m)
        throw std::invalid_argument("Code length does not match the frame count.");
    if (code.kind != CodeKind::OneHot && code.kind != CodeKind::PositiveHadamard)
        throw std::invalid_argument(
            "Lattice-layout binary capture supports OneHot and PositiveHadamard codes.");
    require_codes_fit(tma, stack.frames);

    CodedCapture cap;
    cap.design = CaptureDesign::SingleBinary;
    cap.order_exp = m;
    cap.code = code;
    cap.images.assign(1, Image(stack.height, stack.width));
    cap.gains.assign(1, 1.0);

    const int T = stack.frames;
    const size_t fs = stack.frame_size();
    const auto rows = code_rows(m, tma.coset_count());
    Image& out = cap.images[0];
    parallel_for(0, stack.height, [&](int64_t y) {
        for (int x = 0; x < stack.width; ++x) {
            const size_t p = static_cast<size_t>(y) * stack.width + x;
            const int u = tma.code_of_pixel[p] + 1;
            if (code.kind == CodeKind::OneHot) {
                out.data[p] = stack.data[static_cast<size_t>(u) * fs + p];
            } else {
                // Binary weights (1 + w_u)/2 from the kernel row, so the
                // pixel integrates (h0 + h_u)/2.
                const int8_t* w = rows[u].data();
                double acc = 0.0;
                for (int t = 0; t < T; ++t)
                    if (w[t] > 0) acc += stack.data[t * fs + p];
                out.data[p] = acc;
            }
        }
    });
    return cap;
}

CodedCapture encode_single_binary_tiled(const FrameStack& stack, const ExposureCode& code,
                                        int tile) {
    const int m = order_from_frames(stack.frames);
    if (code.order_exp != m)
        throw std::invalid_argument("Code length does not match the frame count.");
    if (tile <= 0) throw std::invalid_argument("Tile pitch must be positive.");
    if (code.kind == CodeKind::SignedHadamard)
        throw std::invalid_argument("A single binary camera cannot realize signed weights.");
    if (code.num_rows < tile * tile)
        throw std::invalid_argument("Tiled capture needs one code row per tile pixel (" +
                                    std::to_string(tile * tile) + ").");

    CodedCapture cap;
    cap.design = CaptureDesign::SingleBinary;
    cap.order_exp = m;
    cap.tile = tile;
    cap.code = code;
    cap.images.assign(1, Image(stack.height, stack.width));
    cap.gains.assign(1, 1.0);

    const int T = stack.frames;
    const size_t fs = stack.frame_size();
    Image& out = cap.images[0];
    parallel_for(0, stack.height, [&](int64_t y) {
        for (int x = 0; x < stack.width; ++x) {
            const size_t p = static_cast<size_t>(y) * stack.width + x;
            const int row = static_cast<int>(y % tile) * tile + (x % tile);
            double acc = 0.0;
            for (int t = 0; t < T; ++t)
                if (code.at(row, t) > 0) acc += stack.data[t * fs + p];
            out.data[p] = acc;
        }
    });
    return cap;
}

CodedCapture degrade(const CodedCapture& capture, double sigma, double eta, double gain,
                     uint64_t seed) {
    return degrade(capture, sigma, eta, std::vector<double>(capture.images.size(), gain), seed);
}

CodedCapture degrade(const CodedCapture& capture, double sigma, double eta,
                     const std::vector<double>& per_image_gain, uint64_t seed) {
    if (sigma < 0.0) throw std::invalid_argument("Noise sigma must be non-negative.");
    if (per_image_gain.size() != capture.images.size())
        throw std::invalid_argument("Need one gain per capture image.");
    for (double g : per_image_gain)
        if (!(g > 0.0)) throw std::invalid_argument("Gains must be positive.");

    CodedCapture out = capture;
    out.noise_sigma = sigma;
    out.offset_eta = eta;
    out.noise_seed = seed;
    out.degraded = true;
    for (size_t i = 0; i < out.images.size(); ++i) {
        out.gains[i] = capture.gains[i] * per_image_gain[i];
        Image& img = out.images[i];
        const double g = per_image_gain[i];
        double share = 1.0;
        if (capture.design == CaptureDesign::Design2)
            share = (i == 0) ? 1.0 - capture.split : capture.split;
        const double offset = share * eta;
        const uint64_t image_seed = hash_mix(seed, static_cast<uint64_t>(i));
        parallel_for(0, static_cast<int64_t>(img.size()), [&](int64_t p) {
            double n = 0.0;
            if (sigma > 0.0) {
                Rng rng(hash_mix(image_seed, static_cast<uint64_t>(p)));
                n = sigma * rng.next_gauss();
            }
            img.data[p] = g * (img.data[p] + offset + n);
        });
    }
    return out;
}

}  // namespace fc
