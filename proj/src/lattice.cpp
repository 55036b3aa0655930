#include "fc/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace fc {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void require_nonsingular(const GeneratorMatrix& gen) {
    if (gen.det() == 0) throw std::invalid_argument("Generator matrix must be nonsingular.");
}

// adj(M) with M = [[a,b],[c,d]] is [[d,-b],[-c,a]]; adj(M)*M = det*I.
std::array<long, 4> adjugate(const GeneratorMatrix& g) {
    return {g.d(), -g.b(), -g.c(), g.a()};
}

long positive_mod(long v, long n) {
    long r = v % n;
    return r < 0 ? r + n : r;
}

// Shortest nonzero squared norm of the integer lattice spanned by u, v
// (Lagrange-Gauss reduction; exact for 2-D lattices).
long shortest_sq(std::array<long, 2> u, std::array<long, 2> v) {
    auto norm2 = [](const std::array<long, 2>& w) { return w[0] * w[0] + w[1] * w[1]; };
    auto dot = [](const std::array<long, 2>& p, const std::array<long, 2>& q) {
        return p[0] * q[0] + p[1] * q[1];
    };
    if (norm2(u) > norm2(v)) std::swap(u, v);
    while (true) {
        long nu = norm2(u);
        long mu = std::lround(static_cast<double>(dot(u, v)) / static_cast<double>(nu));
        v[0] -= mu * u[0];
        v[1] -= mu * u[1];
        if (norm2(v) >= nu) break;
        std::swap(u, v);
    }
    return norm2(u);
}

long dual_shortest_sq(const GeneratorMatrix& gen) {
    // Dual lattice basis (before the 2*pi/|det| scale): columns of adj(M)^T.
    auto adj = adjugate(gen);
    return shortest_sq({adj[0], adj[1]}, {adj[2], adj[3]});
}

}  // namespace

int GeneratorMatrix::coset_count() const {
    long d = det();
    if (d == 0) throw std::invalid_argument("Generator matrix must be nonsingular.");
    return static_cast<int>(d < 0 ? -d : d);
}

double Carrier::x() const { return kTwoPi * static_cast<double>(num_x) / static_cast<double>(den); }
double Carrier::y() const { return kTwoPi * static_cast<double>(num_y) / static_cast<double>(den); }

std::vector<std::array<int, 2>> cosets(const GeneratorMatrix& gen) {
    require_nonsingular(gen);
    const long det = gen.det();
    const auto adj = adjugate(gen);
    // Bounding box of the fundamental parallelepiped {M t : t in [0,1)^2}.
    const int xs[] = {0, gen.a(), gen.b(), gen.a() + gen.b()};
    const int ys[] = {0, gen.c(), gen.d(), gen.c() + gen.d()};
    const int x0 = *std::min_element(xs, xs + 4), x1 = *std::max_element(xs, xs + 4);
    const int y0 = *std::min_element(ys, ys + 4), y1 = *std::max_element(ys, ys + 4);

    std::vector<std::array<int, 2>> pts;
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            // k in M[0,1)^2 iff both components of adj*k
            // lie in [0, det) for det > 0, or (det, 0] for det < 0.
            long t1 = adj[0] * x + adj[1] * y;
            long t2 = adj[2] * x + adj[3] * y;
            bool inside = det > 0 ? (t1 >= 0 && t1 < det && t2 >= 0 && t2 < det)
                                  : (t1 <= 0 && t1 > det && t2 <= 0 && t2 > det);
            if (inside) pts.push_back({x, y});
        }
    }
    std::sort(pts.begin(), pts.end(), [](const auto& p, const auto& q) {
        return p[1] != q[1] ? p[1] < q[1] : p[0] < q[0];
    });
    if (static_cast<long>(pts.size()) != (det < 0 ? -det : det))
        throw std::runtime_error("Coset enumeration does not match |det|.");
    return pts;
}

std::vector<Carrier> carriers(const GeneratorMatrix& gen) {
    require_nonsingular(gen);
    const long det = gen.det();
    const long n = det < 0 ? -det : det;
    const auto adj = adjugate(gen);
    const long sign = det < 0 ? -1 : 1;

    // 2*pi*M^-T q = 2*pi * adj(M)^T q / det; q over [0, n)^2 covers every
    // residue because n*Z^2 is a sublattice of M^T Z^2.
    std::map<std::pair<long, long>, Carrier> found;
    for (long q1 = 0; q1 < n; ++q1) {
        for (long q2 = 0; q2 < n; ++q2) {
            long px = sign * (adj[0] * q1 + adj[2] * q2);
            long py = sign * (adj[1] * q1 + adj[3] * q2);
            long nx = positive_mod(px, n);
            long ny = positive_mod(py, n);
            if (2 * nx >= n) nx -= n;  // fold into [-1/2, 1/2) turns
            if (2 * ny >= n) ny -= n;
            Carrier c;
            c.num_x = nx;
            c.num_y = ny;
            c.den = n;
            found.emplace(std::make_pair(nx, ny), c);
        }
    }
    if (static_cast<long>(found.size()) != n)
        throw std::runtime_error("Carrier enumeration does not match |det|.");

    std::vector<Carrier> out;
    out.reserve(found.size());
    for (auto& [key, c] : found)
        if (c.is_zero()) out.push_back(c);
    for (auto& [key, c] : found)
        if (!c.is_zero()) out.push_back(c);
    return out;
}

double hexagonality_score(const GeneratorMatrix& gen) {
    require_nonsingular(gen);
    const long n = gen.coset_count();
    return kTwoPi * std::sqrt(static_cast<double>(dual_shortest_sq(gen))) /
           static_cast<double>(n);
}

GeneratorMatrix search_generator(int n, int bound) {
    if (n <= 0) throw std::invalid_argument("search_generator requires n > 0.");
    if (bound <= 0) throw std::invalid_argument("search_generator requires bound > 0.");
    bool found = false;
    GeneratorMatrix best;
    long best_sq = -1;
    // |det| fixed at n, so scores compare via the integer shortest-vector
    // norm alone; lexicographic enumeration gives the deterministic tie-break.
    for (int a = -bound; a <= bound; ++a)
        for (int b = -bound; b <= bound; ++b)
            for (int c = -bound; c <= bound; ++c)
                for (int d = -bound; d <= bound; ++d) {
                    GeneratorMatrix g{{a, b, c, d}};
                    long det = g.det();
                    if (det != n && det != -n) continue;
                    long sq = dual_shortest_sq(g);
                    if (!found || sq > best_sq) {
                        found = true;
                        best = g;
                        best_sq = sq;
                    }
                }
    if (!found)
        throw std::invalid_argument("No generator with |det| = " + std::to_string(n) +
                                    " within entry bound " + std::to_string(bound) + ".");
    return best;
}

TmaLattice build_tma(const GeneratorMatrix& gen, int height, int width) {
    if (height <= 0 || width <= 0)
        throw std::invalid_argument("build_tma requires positive dimensions.");
    TmaLattice tma;
    tma.gen = gen;
    tma.height = height;
    tma.width = width;
    tma.offsets = cosets(gen);
    tma.waves = carriers(gen);

    const long det = gen.det();
    const long n = tma.offsets.size();
    const auto adj = adjugate(gen);
    const long absdet = det < 0 ? -det : det;

    // Residue of k under adj(M) mod |det| identifies its coset.
    std::map<std::pair<long, long>, int> rank_of_residue;
    for (int r = 0; r < n; ++r) {
        const auto& l = tma.offsets[r];
        long t1 = positive_mod(adj[0] * l[0] + adj[1] * l[1], absdet);
        long t2 = positive_mod(adj[2] * l[0] + adj[3] * l[1], absdet);
        rank_of_residue[{t1, t2}] = r;
    }

    tma.code_of_pixel.resize(static_cast<size_t>(height) * width);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            long t1 = positive_mod(adj[0] * x + adj[1] * y, absdet);
            long t2 = positive_mod(adj[2] * x + adj[3] * y, absdet);
            auto it = rank_of_residue.find({t1, t2});
            if (it == rank_of_residue.end())
                throw std::runtime_error("Pixel residue missing from coset table.");
            tma.code_of_pixel[static_cast<size_t>(y) * width + x] = it->second;
        }
    }
    return tma;
}

double lattice_cell_diameter(const GeneratorMatrix& gen) {
    double c1 = std::hypot(gen.a(), gen.c());
    double c2 = std::hypot(gen.b(), gen.d());
    return c1 + c2;
}

}  // namespace fc
