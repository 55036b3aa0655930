#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fc {

// Row-major single-channel image of doubles.
struct Image {
    int height = 0;
    int width = 0;
    std::vector<double> data;

    Image() = default;
    Image(int h, int w, double fill = 0.0) : height(h), width(w) {
        if (h <= 0 || w <= 0) throw std::invalid_argument("Image dimensions must be positive.");
        data.assign(static_cast<size_t>(h) * w, fill);
    }

    double& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
    double at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
    size_t size() const { return data.size(); }
    bool same_shape(const Image& o) const { return height == o.height && width == o.width; }
};

// Frame-major stack of images: data[t*H*W + y*W + x].
struct FrameStack {
    int frames = 0;
    int height = 0;
    int width = 0;
    std::vector<double> data;

    FrameStack() = default;
    FrameStack(int t, int h, int w, double fill = 0.0) : frames(t), height(h), width(w) {
        if (t <= 0 || h <= 0 || w <= 0)
            throw std::invalid_argument("FrameStack dimensions must be positive.");
        data.assign(static_cast<size_t>(t) * h * w, fill);
    }

    double& at(int t, int y, int x) {
        return data[(static_cast<size_t>(t) * height + y) * width + x];
    }
    double at(int t, int y, int x) const {
        return data[(static_cast<size_t>(t) * height + y) * width + x];
    }
    size_t frame_size() const { return static_cast<size_t>(height) * width; }
    size_t size() const { return data.size(); }
    bool same_shape(const FrameStack& o) const {
        return frames == o.frames && height == o.height && width == o.width;
    }

    Image frame(int t) const {
        Image img(height, width);
        const double* src = data.data() + static_cast<size_t>(t) * frame_size();
        std::copy(src, src + frame_size(), img.data.begin());
        return img;
    }
};

}  // namespace fc
