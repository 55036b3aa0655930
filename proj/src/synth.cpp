#include "fc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "fc/fft.hpp"
#include "fc/parallel.hpp"
#include "fc/rng.hpp"

namespace fc {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Zero-mean, unit-RMS smooth random field, periodic in both axes: white
// noise shaped by a Gaussian frequency response of the given correlation
// length.
Image smooth_field(int height, int width, double scale, uint64_t seed) {
    std::vector<std::complex<double>> f(static_cast<size_t>(height) * width);
    Rng rng(seed);
    for (auto& v : f) v = rng.next_gauss();
    auto spec = fft2(f, height, width, false);
    for (int fy = 0; fy < height; ++fy) {
        const double wy = kTwoPi * (fy <= height / 2 ? fy : fy - height) / height;
        for (int fx = 0; fx < width; ++fx) {
            const double wx = kTwoPi * (fx <= width / 2 ? fx : fx - width) / width;
            spec[static_cast<size_t>(fy) * width + fx] *=
                std::exp(-0.5 * scale * scale * (wx * wx + wy * wy));
        }
    }
    spec[0] = 0.0;  // zero mean
    auto back = fft2(spec, height, width, true);
    Image img(height, width);
    double power = 0.0;
    for (size_t i = 0; i < img.size(); ++i) {
        img.data[i] = back[i].real();
        power += img.data[i] * img.data[i];
    }
    const double rms = std::sqrt(power / img.size());
    if (rms > 0.0)
        for (double& v : img.data) v /= rms;
    return img;
}

double wrap(double v, double period) {
    v = std::fmod(v, period);
    return v < 0.0 ? v + period : v;
}

// Torus bilinear sample.
double sample_wrapped(const Image& img, double x, double y) {
    x = wrap(x, img.width);
    y = wrap(y, img.height);
    const int x0 = static_cast<int>(x), y0 = static_cast<int>(y);
    const int x1 = (x0 + 1) % img.width, y1 = (y0 + 1) % img.height;
    const double fx = x - x0, fy = y - y0;
    return (1 - fy) * ((1 - fx) * img.at(y0, x0) + fx * img.at(y0, x1)) +
           fy * ((1 - fx) * img.at(y1, x0) + fx * img.at(y1, x1));
}

double wrapped_delta(double a, double b, double period) {
    double d = std::fmod(a - b, period);
    if (d < -period / 2) d += period;
    if (d >= period / 2) d -= period;
    return d;
}

struct Blob {
    double x, y, vx, vy, amp;
};

}  // namespace

FrameStack synthetic_scene(const SceneParams& p) {
    if (p.frames <= 0 || p.height <= 0 || p.width <= 0)
        throw std::invalid_argument("Scene dimensions must be positive.");
    if (p.blob_count < 0) throw std::invalid_argument("Blob count must be non-negative.");

    const Image background = smooth_field(p.height, p.width, p.background_scale,
                                          hash_mix(p.seed, 0xb6));
    const Image texture = smooth_field(p.height, p.width, p.texture_scale,
                                       hash_mix(p.seed, 0x7e));

    Rng rng(hash_mix(p.seed, 0xb10b));
    std::vector<Blob> blobs(p.blob_count);
    for (auto& b : blobs) {
        b.x = rng.next_double() * p.width;
        b.y = rng.next_double() * p.height;
        const double angle = rng.next_double() * kTwoPi;
        const double speed = p.blob_speed * (0.5 + rng.next_double());
        b.vx = speed * std::cos(angle);
        b.vy = speed * std::sin(angle);
        b.amp = p.blob_amplitude * (0.6 + 0.4 * rng.next_double());
    }
    const double tex_angle = rng.next_double() * kTwoPi;
    const double tvx = p.texture_speed * std::cos(tex_angle);
    const double tvy = p.texture_speed * std::sin(tex_angle);

    FrameStack stack(p.frames, p.height, p.width);
    const double inv2s2 = 1.0 / (2.0 * p.blob_sigma * p.blob_sigma);
    parallel_for(0, p.frames, [&](int64_t t) {
        double* frame = stack.data.data() + t * stack.frame_size();
        for (int y = 0; y < p.height; ++y)
            for (int x = 0; x < p.width; ++x) {
                double v = p.base_level + p.background_contrast * background.at(y, x) +
                           p.texture_amplitude *
                               sample_wrapped(texture, x - tvx * t, y - tvy * t);
                for (const Blob& b : blobs) {
                    const double dx = wrapped_delta(x, b.x + b.vx * t, p.width);
                    const double dy = wrapped_delta(y, b.y + b.vy * t, p.height);
                    v += b.amp * std::exp(-(dx * dx + dy * dy) * inv2s2);
                }
                frame[static_cast<size_t>(y) * p.width + x] = std::clamp(v, 0.0, 1.0);
            }
    });
    return stack;
}

FrameStack moving_square(int frames, int height, int width, int size, double x0, double y0,
                         double vx, double vy, double background, double brightness) {
    if (frames <= 0 || height <= 0 || width <= 0 || size <= 0)
        throw std::invalid_argument("Square scene dimensions must be positive.");
    FrameStack stack(frames, height, width, background);
    parallel_for(0, frames, [&](int64_t t) {
        double* frame = stack.data.data() + t * stack.frame_size();
        const int left = static_cast<int>(std::lround(x0 + vx * t));
        const int top = static_cast<int>(std::lround(y0 + vy * t));
        for (int y = std::max(0, top); y < std::min(height, top + size); ++y)
            for (int x = std::max(0, left); x < std::min(width, left + size); ++x)
                frame[static_cast<size_t>(y) * width + x] = brightness;
    });
    return stack;
}

}  // namespace fc
