#include "fc/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace fc {

namespace {
// The FFTW planner mutates global state; executing a plan does not.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

std::vector<std::complex<double>> fft2(const std::vector<std::complex<double>>& in, int height,
                                       int width, bool inverse) {
    if (height <= 0 || width <= 0)
        throw std::invalid_argument("fft2 dimensions must be positive.");
    if (in.size() != static_cast<size_t>(height) * width)
        throw std::invalid_argument("fft2 input size does not match the declared dimensions.");

    std::vector<std::complex<double>> out(in.size());
    auto* src = const_cast<fftw_complex*>(reinterpret_cast<const fftw_complex*>(in.data()));
    auto* dst = reinterpret_cast<fftw_complex*>(out.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        // FFTW_ESTIMATE leaves the input untouched during planning.
        plan = fftw_plan_dft_2d(height, width, src, dst,
                                inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
    }
    if (!plan) throw std::runtime_error("FFTW failed to create a plan.");
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    if (inverse) {
        const double scale = 1.0 / (static_cast<double>(height) * width);
        for (auto& v : out) v *= scale;
    }
    return out;
}

}  // namespace fc
