#include "fc/crosstalk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fc/parallel.hpp"
#include "fc/rng.hpp"

namespace fc {

const char* mirror_layout_name(MirrorLayout layout) {
    return layout == MirrorLayout::Grid ? "grid" : "quincunx";
}

MirrorLayout mirror_layout_from_name(const std::string& name) {
    if (name == "grid") return MirrorLayout::Grid;
    if (name == "quincunx") return MirrorLayout::Quincunx;
    throw std::invalid_argument("Unknown mirror layout: " + name);
}

OpticalMap build_optical_map(int mirror_rows, int mirror_cols, int camera_rows,
                             int camera_cols, double sigma_psf, MirrorLayout layout) {
    if (mirror_rows <= 0 || mirror_cols <= 0 || camera_rows <= 0 || camera_cols <= 0)
        throw std::invalid_argument("Grid dimensions must be positive.");
    if (camera_rows < mirror_rows || camera_cols < mirror_cols)
        throw std::invalid_argument("Camera must oversample the mirror grid (>= 1x).");
    if (sigma_psf < 0.0) throw std::invalid_argument("PSF width must be non-negative.");

    OpticalMap map;
    map.mirror_rows = mirror_rows;
    map.mirror_cols = mirror_cols;
    map.camera_rows = camera_rows;
    map.camera_cols = camera_cols;
    map.sigma_psf = sigma_psf;
    map.layout = layout;

    const double sx = static_cast<double>(camera_cols) / mirror_cols;
    const double sy = static_cast<double>(camera_rows) / mirror_rows;
    const double radius = 3.0 * sigma_psf;
    const int mirrors = map.mirrors();

    // Per-mirror footprints first; assembly stays deterministic because the
    // scatter order is fixed by the mirror index.
    std::vector<std::vector<std::pair<int32_t, double>>> feet(mirrors);
    parallel_for(0, mirrors, [&](int64_t mi) {
        const int r = static_cast<int>(mi) / mirror_cols;
        const int c = static_cast<int>(mi) % mirror_cols;
        const double shift = (layout == MirrorLayout::Quincunx && (r & 1)) ? 0.5 : 0.0;
        const double cx = (c + 0.5 + shift) * sx;
        const double cy = (r + 0.5) * sy;
        auto& foot = feet[mi];
        if (sigma_psf > 0.0) {
            const int x0 = std::max(0, static_cast<int>(std::ceil(cx - radius - 0.5)));
            const int x1 = std::min(camera_cols - 1, static_cast<int>(std::floor(cx + radius - 0.5)));
            const int y0 = std::max(0, static_cast<int>(std::ceil(cy - radius - 0.5)));
            const int y1 = std::min(camera_rows - 1, static_cast<int>(std::floor(cy + radius - 0.5)));
            const double inv2s2 = 1.0 / (2.0 * sigma_psf * sigma_psf);
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    const double dx = x + 0.5 - cx;
                    const double dy = y + 0.5 - cy;
                    const double d2 = dx * dx + dy * dy;
                    if (d2 > radius * radius) continue;
                    foot.emplace_back(y * camera_cols + x, std::exp(-d2 * inv2s2));
                }
        }
        if (foot.empty()) {
            // Degenerate or off-center PSF: bind the mirror to its nearest
            // pixel so no column of A vanishes.
            const int x = std::clamp(static_cast<int>(std::floor(cx)), 0, camera_cols - 1);
            const int y = std::clamp(static_cast<int>(std::floor(cy)), 0, camera_rows - 1);
            foot.emplace_back(y * camera_cols + x, 1.0);
        }
        double sum = 0.0;
        for (const auto& e : foot) sum += e.second;
        for (auto& e : foot) e.second /= sum;
    });

    map.col_start.assign(mirrors + 1, 0);
    for (int mi = 0; mi < mirrors; ++mi)
        map.col_start[mi + 1] = map.col_start[mi] + static_cast<int64_t>(feet[mi].size());
    const int64_t nnz = map.col_start[mirrors];
    map.col_pixel.resize(nnz);
    map.col_weight.resize(nnz);
    std::vector<int64_t> row_count(map.pixels(), 0);
    for (int mi = 0; mi < mirrors; ++mi) {
        int64_t at = map.col_start[mi];
        for (const auto& e : feet[mi]) {
            map.col_pixel[at] = e.first;
            map.col_weight[at] = e.second;
            ++row_count[e.first];
            ++at;
        }
    }
    map.row_start.assign(map.pixels() + 1, 0);
    for (int p = 0; p < map.pixels(); ++p) map.row_start[p + 1] = map.row_start[p] + row_count[p];
    map.row_mirror.resize(nnz);
    map.row_weight.resize(nnz);
    std::vector<int64_t> cursor(map.row_start.begin(), map.row_start.end() - 1);
    for (int mi = 0; mi < mirrors; ++mi)
        for (int64_t at = map.col_start[mi]; at < map.col_start[mi + 1]; ++at) {
            const int32_t p = map.col_pixel[at];
            map.row_mirror[cursor[p]] = mi;
            map.row_weight[cursor[p]] = map.col_weight[at];
            ++cursor[p];
        }
    return map;
}

namespace {

void require_mirror_shape(const OpticalMap& map, const Image& img) {
    if (img.height != map.mirror_rows || img.width != map.mirror_cols)
        throw std::invalid_argument("Image does not match the mirror grid.");
}

void require_camera_shape(const OpticalMap& map, const Image& img) {
    if (img.height != map.camera_rows || img.width != map.camera_cols)
        throw std::invalid_argument("Image does not match the camera grid.");
}

std::vector<double> apply_forward(const OpticalMap& map, const std::vector<double>& u) {
    std::vector<double> v(map.pixels());
    parallel_for(0, map.pixels(), [&](int64_t p) {
        double acc = 0.0;
        for (int64_t at = map.row_start[p]; at < map.row_start[p + 1]; ++at)
            acc += map.row_weight[at] * u[map.row_mirror[at]];
        v[p] = acc;
    });
    return v;
}

std::vector<double> apply_adjoint(const OpticalMap& map, const std::vector<double>& v) {
    std::vector<double> u(map.mirrors());
    parallel_for(0, map.mirrors(), [&](int64_t mi) {
        double acc = 0.0;
        for (int64_t at = map.col_start[mi]; at < map.col_start[mi + 1]; ++at)
            acc += map.col_weight[at] * v[map.col_pixel[at]];
        u[mi] = acc;
    });
    return u;
}

// Serial dot products keep the solve bit-identical across worker counts.
double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

struct CgOutcome {
    std::vector<double> x;
    double residual = 0.0;
    int iterations = 0;
};

// Jacobi-preconditioned CG on A^T A x = rhs (rhs in the mirror domain).
CgOutcome cg_normal(const OpticalMap& map, const std::vector<double>& rhs, double tol,
                    int max_iter) {
    std::vector<double> jacobi(map.mirrors());
    for (int mi = 0; mi < map.mirrors(); ++mi) {
        double acc = 0.0;
        for (int64_t at = map.col_start[mi]; at < map.col_start[mi + 1]; ++at)
            acc += map.col_weight[at] * map.col_weight[at];
        jacobi[mi] = acc > 0.0 ? 1.0 / acc : 1.0;
    }

    CgOutcome out;
    out.x.assign(map.mirrors(), 0.0);
    std::vector<double> r = rhs;
    const double rhs_norm = std::sqrt(dot(rhs, rhs));
    if (rhs_norm == 0.0) return out;

    std::vector<double> z(map.mirrors()), p(map.mirrors());
    for (int i = 0; i < map.mirrors(); ++i) z[i] = jacobi[i] * r[i];
    p = z;
    double rz = dot(r, z);
    out.residual = 1.0;
    for (int it = 1; it <= max_iter; ++it) {
        const auto ap = apply_forward(map, p);
        const auto bp = apply_adjoint(map, ap);
        const double denom = dot(p, bp);
        if (denom <= 0.0) break;  // numerical breakdown; report current iterate
        const double alpha = rz / denom;
        for (int i = 0; i < map.mirrors(); ++i) {
            out.x[i] += alpha * p[i];
            r[i] -= alpha * bp[i];
        }
        out.iterations = it;
        out.residual = std::sqrt(dot(r, r)) / rhs_norm;
        if (out.residual <= tol) return out;
        for (int i = 0; i < map.mirrors(); ++i) z[i] = jacobi[i] * r[i];
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (int i = 0; i < map.mirrors(); ++i) p[i] = z[i] + beta * p[i];
    }
    return out;
}

}  // namespace

Image forward_capture(const OpticalMap& map, const Image& mirrors) {
    require_mirror_shape(map, mirrors);
    Image v(map.camera_rows, map.camera_cols);
    v.data = apply_forward(map, mirrors.data);
    return v;
}

Image adjoint_capture(const OpticalMap& map, const Image& camera) {
    require_camera_shape(map, camera);
    Image u(map.mirror_rows, map.mirror_cols);
    u.data = apply_adjoint(map, camera.data);
    return u;
}

CrosstalkSolution correct_crosstalk(const OpticalMap& map, const Image& camera, double tol,
                                    int max_iter) {
    require_camera_shape(map, camera);
    if (!(tol > 0.0)) throw std::invalid_argument("Solver tolerance must be positive.");
    if (max_iter < 1) throw std::invalid_argument("Need at least one solver iteration.");

    const auto rhs = apply_adjoint(map, camera.data);
    auto cg = cg_normal(map, rhs, tol, max_iter);
    if (cg.residual > tol)
        throw ConvergenceError("Crosstalk solve stalled at relative residual " +
                                   std::to_string(cg.residual) + " after " +
                                   std::to_string(cg.iterations) + " iterations.",
                               cg.residual, cg.iterations);
    CrosstalkSolution sol;
    sol.mirrors = Image(map.mirror_rows, map.mirror_cols);
    sol.mirrors.data = std::move(cg.x);
    sol.residual = cg.residual;
    sol.iterations = cg.iterations;
    return sol;
}

double normal_condition_estimate(const OpticalMap& map, int power_iters, uint64_t seed) {
    if (power_iters < 1) throw std::invalid_argument("Need at least one power iteration.");
    const int n = map.mirrors();
    auto normalize = [](std::vector<double>& v) {
        double norm = std::sqrt(dot(v, v));
        for (double& x : v) x /= norm;
        return norm;
    };

    // Top of the spectrum: plain power iteration on A^T A.
    Rng rng(hash_mix(seed, 0x706f7765ull));
    std::vector<double> x(n);
    for (double& v : x) v = rng.next_gauss();
    normalize(x);
    double hi = 0.0;
    for (int it = 0; it < power_iters; ++it) {
        auto y = apply_adjoint(map, apply_forward(map, x));
        hi = dot(x, y);
        x = std::move(y);
        normalize(x);
    }

    // Bottom of the spectrum: inverse iteration, each step a CG solve.
    Rng rng2(hash_mix(seed, 0x696e7665ull));
    std::vector<double> w(n);
    for (double& v : w) v = rng2.next_gauss();
    normalize(w);
    double lo = hi;
    for (int it = 0; it < 12; ++it) {
        auto sol = cg_normal(map, w, 1e-10, 500);
        w = std::move(sol.x);
        const double len = normalize(w);
        // After normalization, B w ~= w_prev / len, so 1/len tracks lambda_min.
        lo = 1.0 / len;
    }
    const auto bw = apply_adjoint(map, apply_forward(map, w));
    lo = dot(w, bw);
    return std::sqrt(hi / lo);
}

}  // namespace fc
