#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace fc {

// Integer sampling-lattice generator; columns are the basis vectors in
// (x, y) pixel coordinates.  Row-major entries [[a, b], [c, d]].
struct GeneratorMatrix {
    std::array<int, 4> m{1, 0, 0, 1};

    int a() const { return m[0]; }
    int b() const { return m[1]; }
    int c() const { return m[2]; }
    int d() const { return m[3]; }
    long det() const { return static_cast<long>(m[0]) * m[3] - static_cast<long>(m[1]) * m[2]; }
    int coset_count() const;  // |det|, throws on det == 0
};

// Spatial carrier frequency: nu = 2*pi * (num_x, num_y) / den, with the
// numerators folded so each component lies in [-pi, pi).
struct Carrier {
    long num_x = 0;
    long num_y = 0;
    long den = 1;
    double x() const;
    double y() const;
    bool is_zero() const { return num_x == 0 && num_y == 0; }
};

// Coset offsets: the |det| integer points of M[0,1)^2, sorted
// lexicographically by (y, x).
std::vector<std::array<int, 2>> cosets(const GeneratorMatrix& gen);

// The |det| carrier frequencies 2*pi*M^-T Z^2 folded into [-pi, pi)^2,
// zero frequency first, then lexicographic by folded (x, y).
std::vector<Carrier> carriers(const GeneratorMatrix& gen);

// Minimum pairwise wrap-around distance between carriers; equals the
// shortest nonzero vector of the dual lattice because the carrier set is
// a subgroup of the torus.  Invariant under M -> M*U for unimodular U.
double hexagonality_score(const GeneratorMatrix& gen);

// Exhaustive search over entries in [-bound, bound] for |det| = n with the
// best hexagonality score; ties resolved toward the lexicographically
// smallest (a, b, c, d).  Throws if no candidate matches.
GeneratorMatrix search_generator(int n, int bound);

// Pixel-to-coset assignment over an image grid.  code_of_pixel holds the
// coset rank r in canonical order; the temporal AC code is r + 1.
struct TmaLattice {
    GeneratorMatrix gen;
    int height = 0;
    int width = 0;
    std::vector<std::array<int, 2>> offsets;
    std::vector<Carrier> waves;
    std::vector<int32_t> code_of_pixel;  // coset rank per pixel, row-major

    int coset_count() const { return static_cast<int>(offsets.size()); }
    int rank_at(int y, int x) const { return code_of_pixel[static_cast<size_t>(y) * width + x]; }
};

TmaLattice build_tma(const GeneratorMatrix& gen, int height, int width);

// Fundamental-cell diameter bound, used to size interpolation windows.
double lattice_cell_diameter(const GeneratorMatrix& gen);

}  // namespace fc
