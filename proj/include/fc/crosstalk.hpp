#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fc/image.hpp"

namespace fc {

enum class MirrorLayout { Grid, Quincunx };

const char* mirror_layout_name(MirrorLayout layout);
MirrorLayout mirror_layout_from_name(const std::string& name);

// Sparse optical transfer between a mirror array and an oversampling camera:
// mirror (r, c) images to an isotropic Gaussian of width sigma_psf (camera
// pixels) centered at its projected position, truncated at 3 sigma and
// renormalized so every mirror's weights sum to exactly 1.  Quincunx layout
// shifts odd mirror rows right by half a pitch.  The same matrix is stored
// both per mirror (columns) and per camera pixel (rows).
struct OpticalMap {
    int mirror_rows = 0;
    int mirror_cols = 0;
    int camera_rows = 0;
    int camera_cols = 0;
    double sigma_psf = 0.0;
    MirrorLayout layout = MirrorLayout::Grid;

    std::vector<int64_t> col_start;  // mirrors + 1
    std::vector<int32_t> col_pixel;
    std::vector<double> col_weight;
    std::vector<int64_t> row_start;  // pixels + 1
    std::vector<int32_t> row_mirror;
    std::vector<double> row_weight;

    int mirrors() const { return mirror_rows * mirror_cols; }
    int pixels() const { return camera_rows * camera_cols; }
};

// Requires camera dims >= mirror dims (oversampling >= 1) and
// sigma_psf >= 0; sigma_psf = 0 degenerates to one nearest pixel per mirror.
OpticalMap build_optical_map(int mirror_rows, int mirror_cols, int camera_rows,
                             int camera_cols, double sigma_psf, MirrorLayout layout);

// v = A u and its adjoint u = A^T v; both deterministic for any worker count.
Image forward_capture(const OpticalMap& map, const Image& mirrors);
Image adjoint_capture(const OpticalMap& map, const Image& camera);

struct ConvergenceError : std::runtime_error {
    double residual;
    int iterations;
    ConvergenceError(const std::string& what, double r, int it)
        : std::runtime_error(what), residual(r), iterations(it) {}
};

struct CrosstalkSolution {
    Image mirrors;
    double residual = 0.0;  // relative normal-equation residual achieved
    int iterations = 0;
};

// Least-squares mirror recovery min ||A u - v||_2 by Jacobi-preconditioned
// conjugate gradient on the normal equations, run until
// ||A^T (v - A u)|| <= tol * ||A^T v||.  Throws ConvergenceError (carrying
// the achieved residual) if max_iter pass without reaching tol.
CrosstalkSolution correct_crosstalk(const OpticalMap& map, const Image& camera,
                                    double tol = 1e-8, int max_iter = 500);

// sqrt(cond(A^T A)) estimated by power iteration for the top eigenvalue and
// inverse (CG-solved) power iteration for the bottom one; deterministic per
// seed.  Used as the stability gate on sigma_psf.
double normal_condition_estimate(const OpticalMap& map, int power_iters = 100,
                                 uint64_t seed = 1);

}  // namespace fc
