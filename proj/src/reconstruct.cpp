#include "fc/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "fc/hadamard.hpp"
#include "fc/parallel.hpp"

namespace fc {

namespace {

Image normalized(const Image& img, double gain) {
    Image out = img;
    for (double& v : out.data) v /= gain;
    return out;
}

CoefficientPlanes demosaic_residual(const Image& residual, const TmaLattice& tma,
                                    DemosaicMethod method, double cutoff,
                                    ReconstructionResult& diag) {
    if (method == DemosaicMethod::Bilinear) return bilinear_demosaic(residual, tma);
    auto sys = build_demodulation(tma, cutoff);
    diag.mix_condition = sys.mix_condition;
    auto planes = freq_select_demosaic(residual, sys);
    diag.imag_rms = planes.imag_rms;
    return planes;
}

// frames(k, .) = inverse Walsh of (dc(k), planes(k, 0..N-1), 0, ...).
void invert_spectra(const Image& dc, const FrameStack& planes, int m,
                    FrameStack& frames) {
    const int t = 1 << m;
    const int n = planes.frames;
    const size_t npix = dc.size();
    parallel_for(0, dc.height, [&](int64_t y) {
        std::vector<double> h(t);
        for (int x = 0; x < dc.width; ++x) {
            const size_t p = static_cast<size_t>(y) * dc.width + x;
            h.assign(t, 0.0);
            h[0] = dc.data[p];
            for (int c = 0; c < n; ++c) h[c + 1] = planes.data[static_cast<size_t>(c) * npix + p];
            inverse_walsh_inplace(h.data(), m);
            for (int u = 0; u < t; ++u) frames.data[static_cast<size_t>(u) * npix + p] = h[u];
        }
    });
}

void require_lattice(const CodedCapture& capture, const TmaLattice& tma) {
    if (tma.height != capture.images.at(0).height || tma.width != capture.images.at(0).width)
        throw std::invalid_argument("Lattice grid does not match the capture images.");
    if (tma.coset_count() > capture.frames() - 1)
        throw std::invalid_argument("Lattice coset count exceeds the available codes.");
}

}  // namespace

const char* demosaic_method_name(DemosaicMethod method) {
    return method == DemosaicMethod::Bilinear ? "bilinear" : "fs";
}

ReconstructionResult recon_design1(const CodedCapture& capture, const TmaLattice& tma,
                                   DemosaicMethod method, double cutoff) {
    if (capture.design != CaptureDesign::Design1)
        throw std::invalid_argument("recon_design1 requires a Design1 capture.");
    const int m = capture.order_exp;
    const int t = capture.frames();

    ReconstructionResult result;
    if (capture.full_code) {
        if (static_cast<int>(capture.images.size()) != 2 * t)
            throw std::invalid_argument("Full-code capture must carry 2*T images.");
        const Image& first = capture.images[0];
        result.method = "design1-full";
        result.frames = FrameStack(t, first.height, first.width);
        const size_t npix = first.size();
        parallel_for(0, first.height, [&](int64_t y) {
            std::vector<double> h(t);
            for (int x = 0; x < first.width; ++x) {
                const size_t p = static_cast<size_t>(y) * first.width + x;
                for (int u = 0; u < t; ++u)
                    h[u] = capture.images[u].data[p] / capture.gains[u] -
                           capture.images[t + u].data[p] / capture.gains[t + u];
                inverse_walsh_inplace(h.data(), m);
                for (int u = 0; u < t; ++u)
                    result.frames.data[static_cast<size_t>(u) * npix + p] = h[u];
            }
        });
        return result;
    }

    require_lattice(capture, tma);
    if (capture.images.size() != 2)
        throw std::invalid_argument("Design1 capture must carry two images.");
    Image pos = normalized(capture.images[0], capture.gains[0]);
    Image neg = normalized(capture.images[1], capture.gains[1]);
    Image dc(pos.height, pos.width);
    Image residual(pos.height, pos.width);
    for (size_t p = 0; p < pos.size(); ++p) {
        dc.data[p] = pos.data[p] + neg.data[p];
        residual.data[p] = pos.data[p] - neg.data[p];
    }
    result.method = std::string("design1+") + demosaic_method_name(method);
    auto planes = demosaic_residual(residual, tma, method, cutoff, result);
    result.frames = FrameStack(t, pos.height, pos.width);
    invert_spectra(dc, planes.planes, m, result.frames);
    return result;
}

ReconstructionResult recon_design2(const CodedCapture& capture, const TmaLattice& tma,
                                   DemosaicMethod method, double cutoff) {
    if (capture.design != CaptureDesign::Design2)
        throw std::invalid_argument("recon_design2 requires a Design2 capture.");
    require_lattice(capture, tma);
    if (capture.images.size() != 2)
        throw std::invalid_argument("Design2 capture must carry two images.");
    const int m = capture.order_exp;
    const double split = capture.split;

    Image ac = normalized(capture.images[0], capture.gains[0] * (1.0 - split));
    Image dc = normalized(capture.images[1], capture.gains[1] * split);
    Image residual(ac.height, ac.width);
    for (size_t p = 0; p < ac.size(); ++p) residual.data[p] = 2.0 * ac.data[p] - dc.data[p];

    ReconstructionResult result;
    result.method = std::string("design2+") + demosaic_method_name(method);
    result.frame0_offset_suspect = capture.degraded && capture.offset_eta != 0.0;
    auto planes = demosaic_residual(residual, tma, method, cutoff, result);
    result.frames = FrameStack(capture.frames(), ac.height, ac.width);
    invert_spectra(dc, planes.planes, m, result.frames);
    return result;
}

ReconstructionResult recon_onehot(const CodedCapture& capture, const TmaLattice& tma,
                                  DemosaicMethod method, double cutoff) {
    if (capture.design != CaptureDesign::SingleBinary || capture.tile != 0 ||
        capture.code.kind != CodeKind::OneHot)
        throw std::invalid_argument("recon_onehot requires a lattice-layout one-hot capture.");
    require_lattice(capture, tma);
    const Image coded = normalized(capture.images.at(0), capture.gains.at(0));

    ReconstructionResult result;
    result.method = std::string("one-hot+") + demosaic_method_name(method);
    auto planes = demosaic_residual(coded, tma, method, cutoff, result);

    const int t = capture.frames();
    const int n = tma.coset_count();
    const size_t npix = coded.size();
    result.frames = FrameStack(t, coded.height, coded.width);
    for (int u = 1; u <= n; ++u) {
        const double* src = planes.planes.data.data() + static_cast<size_t>(u - 1) * npix;
        std::copy(src, src + npix, result.frames.data.begin() + static_cast<size_t>(u) * npix);
    }
    // Code 0 is never deployed, so frame 0 has no observation of its own.
    std::copy(result.frames.data.begin() + npix, result.frames.data.begin() + 2 * npix,
              result.frames.data.begin());
    return result;
}

ReconstructionResult recon_random_ls(const CodedCapture& capture, double lambda) {
    if (capture.design != CaptureDesign::SingleBinary || capture.tile <= 0)
        throw std::invalid_argument("recon_random_ls requires a tiled single-camera capture.");
    const int tile = capture.tile;
    const int t = capture.frames();
    const ExposureCode& code = capture.code;
    const Image coded = normalized(capture.images.at(0), capture.gains.at(0));
    const int h = coded.height, w = coded.width;

    ReconstructionResult result;
    result.method = "random-ls";
    result.frames = FrameStack(t, h, w);
    const int tiles_y = (h + tile - 1) / tile, tiles_x = (w + tile - 1) / tile;
    result.ridge_condition.assign(static_cast<size_t>(tiles_y) * tiles_x, 0.0);

    parallel_for(0, tiles_y, [&](int64_t ty) {
        for (int tx = 0; tx < tiles_x; ++tx) {
            const int y0 = static_cast<int>(ty) * tile, x0 = tx * tile;
            const int y1 = std::min(y0 + tile, h), x1 = std::min(x0 + tile, w);
            const int rows = (y1 - y0) * (x1 - x0);
            Eigen::MatrixXd a(rows, t);
            Eigen::VectorXd v(rows);
            int row = 0;
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x, ++row) {
                    const int cr = (y % tile) * tile + (x % tile);
                    for (int u = 0; u < t; ++u) a(row, u) = code.at(cr, u) > 0 ? 1.0 : 0.0;
                    v(row) = coded.at(y, x);
                }
            Eigen::MatrixXd normal = a.transpose() * a;
            double lam = lambda;
            if (lam < 0.0) lam = 1e-3 * normal.trace() / t;
            if (lam == 0.0) {
                Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
                if (qr.rank() < t)
                    throw std::runtime_error("Unregularized tile system is rank-deficient.");
            }
            normal.diagonal().array() += lam;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normal);
            const double lo = eig.eigenvalues()(0), hi = eig.eigenvalues()(t - 1);
            result.ridge_condition[static_cast<size_t>(ty) * tiles_x + tx] =
                lo > 0.0 ? std::sqrt(hi / lo) : std::numeric_limits<double>::infinity();
            Eigen::VectorXd f = normal.ldlt().solve(a.transpose() * v);
            for (int u = 0; u < t; ++u)
                for (int y = y0; y < y1; ++y)
                    for (int x = x0; x < x1; ++x)
                        result.frames.at(u, y, x) = f(u);
        }
    });
    return result;
}

}  // namespace fc
