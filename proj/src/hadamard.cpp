#include "fc/hadamard.hpp"

#include <bit>
#include <stdexcept>
#include <string>

#include "fc/rng.hpp"

namespace fc {

namespace {

bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

int log2_exact(size_t n) {
    if (!is_pow2(n)) throw std::invalid_argument("Signal length must be a power of two.");
    return std::countr_zero(n);
}

// Reverse the low m bits of v.
inline uint32_t bit_reverse(uint32_t v, int m) {
    uint32_t r = 0;
    for (int i = 0; i < m; ++i) r |= ((v >> i) & 1u) << (m - 1 - i);
    return r;
}

// Standard in-place butterfly: computes the Sylvester-ordered transform.
void butterfly(double* data, size_t n) {
    for (size_t h = 1; h < n; h <<= 1) {
        for (size_t i = 0; i < n; i += h << 1) {
            for (size_t j = i; j < i + h; ++j) {
                double a = data[j];
                double b = data[j + h];
                data[j] = a + b;
                data[j + h] = a - b;
            }
        }
    }
}

void permute_bit_reversed(double* data, int m) {
    const uint32_t n = 1u << m;
    for (uint32_t i = 0; i < n; ++i) {
        uint32_t j = bit_reverse(i, m);
        if (j > i) std::swap(data[i], data[j]);
    }
}

}  // namespace

HadamardMatrix hadamard_matrix(int m) {
    if (m < 1 || m > 8)
        throw std::invalid_argument("hadamard_matrix requires 1 <= m <= 8, got " +
                                    std::to_string(m) + ".");
    const int n = 1 << m;
    HadamardMatrix h;
    h.order_exp = m;
    h.size = n;
    h.entries.assign(static_cast<size_t>(n) * n, 1);
    // Kronecker doubling: each step copies the current block with signs.
    for (int half = 1; half < n; half <<= 1) {
        for (int r = 0; r < half; ++r) {
            for (int c = 0; c < half; ++c) {
                int8_t v = h.entries[static_cast<size_t>(r) * n + c];
                h.entries[static_cast<size_t>(r) * n + c + half] = v;
                h.entries[static_cast<size_t>(r + half) * n + c] = v;
                h.entries[static_cast<size_t>(r + half) * n + c + half] = static_cast<int8_t>(-v);
            }
        }
    }
    return h;
}

int walsh_sign(int m, int u, int x) {
    if (m < 1) throw std::invalid_argument("walsh_sign requires m >= 1.");
    const int n = 1 << m;
    if (u < 0 || u >= n || x < 0 || x >= n)
        throw std::invalid_argument("walsh_sign indices out of range.");
    // Pairing b_i(x) with b_{m-1-i}(u) == popcount parity of x & bitrev(u).
    uint32_t ru = bit_reverse(static_cast<uint32_t>(u), m);
    return (std::popcount(ru & static_cast<uint32_t>(x)) & 1) ? -1 : 1;
}

std::vector<int8_t> walsh_kernel_row(int m, int u) {
    const int n = 1 << m;
    std::vector<int8_t> row(n);
    for (int x = 0; x < n; ++x) row[x] = static_cast<int8_t>(walsh_sign(m, u, x));
    return row;
}

void forward_walsh_inplace(double* data, int m) {
    butterfly(data, size_t{1} << m);
    permute_bit_reversed(data, m);
}

void inverse_walsh_inplace(double* data, int m) {
    const size_t n = size_t{1} << m;
    permute_bit_reversed(data, m);
    butterfly(data, n);
    const double scale = 1.0 / static_cast<double>(n);
    for (size_t i = 0; i < n; ++i) data[i] *= scale;
}

std::vector<double> forward_walsh(const std::vector<double>& f) {
    int m = log2_exact(f.size());
    std::vector<double> h = f;
    if (m > 0) forward_walsh_inplace(h.data(), m);
    return h;
}

std::vector<double> inverse_walsh(const std::vector<double>& h) {
    int m = log2_exact(h.size());
    std::vector<double> f = h;
    if (m > 0) inverse_walsh_inplace(f.data(), m);
    return f;
}

ExposureCode make_code(CodeKind kind, int m, std::optional<uint64_t> seed, int num_rows) {
    if (m < 1 || m > 8) throw std::invalid_argument("make_code requires 1 <= m <= 8.");
    const int n = 1 << m;
    if (num_rows < 0) num_rows = n;
    if (num_rows == 0) throw std::invalid_argument("make_code requires at least one row.");
    if (kind != CodeKind::PseudoRandom && num_rows != n)
        throw std::invalid_argument("Only PseudoRandom codes support a custom row count.");
    if (kind == CodeKind::PseudoRandom && !seed)
        throw std::invalid_argument("PseudoRandom codes require a seed.");

    ExposureCode code;
    code.kind = kind;
    code.order_exp = m;
    code.length = n;
    code.num_rows = num_rows;
    code.seed = seed.value_or(0);
    code.weights.assign(static_cast<size_t>(num_rows) * n, 0);

    switch (kind) {
        case CodeKind::OneHot:
            for (int u = 0; u < n; ++u) code.weights[static_cast<size_t>(u) * n + u] = 1;
            break;
        case CodeKind::PseudoRandom:
            for (int r = 0; r < num_rows; ++r) {
                // Row seed depends only on (seed, r): stable under row-count changes.
                Rng rng(hash_mix(code.seed, static_cast<uint64_t>(r)));
                for (int slot : rng.sample_subset(n, n / 2))
                    code.weights[static_cast<size_t>(r) * n + slot] = 1;
            }
            break;
        case CodeKind::PositiveHadamard:
        case CodeKind::NegativeHadamard:
        case CodeKind::SignedHadamard: {
            HadamardMatrix h = hadamard_matrix(m);
            for (size_t i = 0; i < h.entries.size(); ++i) {
                int v = h.entries[i];
                if (kind == CodeKind::SignedHadamard)
                    code.weights[i] = static_cast<int8_t>(v);
                else if (kind == CodeKind::PositiveHadamard)
                    code.weights[i] = static_cast<int8_t>((1 + v) / 2);
                else
                    code.weights[i] = static_cast<int8_t>((1 - v) / 2);
            }
            break;
        }
    }
    return code;
}

const char* code_kind_name(CodeKind kind) {
    switch (kind) {
        case CodeKind::OneHot: return "one-hot";
        case CodeKind::PseudoRandom: return "pseudo-random";
        case CodeKind::PositiveHadamard: return "positive-hadamard";
        case CodeKind::NegativeHadamard: return "negative-hadamard";
        case CodeKind::SignedHadamard: return "signed-hadamard";
    }
    return "unknown";
}

CodeKind code_kind_from_name(const std::string& name) {
    for (CodeKind kind : {CodeKind::OneHot, CodeKind::PseudoRandom, CodeKind::PositiveHadamard,
                          CodeKind::NegativeHadamard, CodeKind::SignedHadamard})
        if (name == code_kind_name(kind)) return kind;
    throw std::invalid_argument("Unknown code kind: " + name);
}

}  // namespace fc
