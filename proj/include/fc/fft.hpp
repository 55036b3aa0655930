#pragma once

#include <complex>
#include <vector>

namespace fc {

// 2-D DFT of a row-major h x w complex field.  Forward uses the e^{-j w k}
// kernel, inverse applies the 1/(h*w) normalization so the pair round-trips.
// Plan creation is serialized internally; calls may run concurrently.
std::vector<std::complex<double>> fft2(const std::vector<std::complex<double>>& in, int height,
                                       int width, bool inverse);

}  // namespace fc
