#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fc {

// Signed Hadamard matrix of order 2^m built by the Kronecker recursion
// H_1 = [[1,1],[1,-1]], H_m = H_1 (x) H_{m-1}.  Entries are +/-1 and
// H * H^T = 2^m * I holds exactly in integer arithmetic.
struct HadamardMatrix {
    int order_exp = 0;            // m
    int size = 0;                 // 2^m
    std::vector<int8_t> entries;  // row-major +/-1

    int at(int r, int c) const { return entries[static_cast<size_t>(r) * size + c]; }
};

HadamardMatrix hadamard_matrix(int m);  // requires 1 <= m <= 8

// Walsh kernel sign (-1)^(sum_i b_i(x) * b_{m-1-i}(u)); symmetric in (u, x).
// Rows of this kernel are the Sylvester rows in bit-reversed order, so the
// kernel and hadamard_matrix differ only by a row permutation.
int walsh_sign(int m, int u, int x);
std::vector<int8_t> walsh_kernel_row(int m, int u);

// Forward transform h(u) = sum_x f(x) * walsh_sign(m, u, x).
// h(0) always equals the plain sum of f.  Length must be a power of two.
std::vector<double> forward_walsh(const std::vector<double>& f);
// Inverse f(x) = 2^-m * sum_u h(u) * walsh_sign(m, u, x); exact inverse of
// forward_walsh up to floating-point rounding.
std::vector<double> inverse_walsh(const std::vector<double>& h);

// In-place variants used by the per-pixel reconstruction loops.
void forward_walsh_inplace(double* data, int m);
void inverse_walsh_inplace(double* data, int m);

enum class CodeKind { OneHot, PseudoRandom, PositiveHadamard, NegativeHadamard, SignedHadamard };

// Temporal exposure codes over 2^m slots.  Hadamard-derived kinds use the
// Sylvester row order of hadamard_matrix; binary kinds store 0/1 weights,
// SignedHadamard stores +/-1.
struct ExposureCode {
    CodeKind kind;
    int order_exp = 0;  // m
    int length = 0;     // 2^m slots per row
    int num_rows = 0;
    uint64_t seed = 0;            // meaningful for PseudoRandom only
    std::vector<int8_t> weights;  // row-major

    int at(int row, int slot) const { return weights[static_cast<size_t>(row) * length + slot]; }
};

// PseudoRandom requires a seed and draws each row as a uniformly random
// subset of exactly 2^(m-1) active slots, rows independent of num_rows.
// num_rows < 0 selects the natural count 2^m.
ExposureCode make_code(CodeKind kind, int m, std::optional<uint64_t> seed = std::nullopt,
                       int num_rows = -1);

const char* code_kind_name(CodeKind kind);
CodeKind code_kind_from_name(const std::string& name);

}  // namespace fc
