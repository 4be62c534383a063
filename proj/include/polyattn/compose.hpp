#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "polyattn/exact.hpp"
#include "polyattn/poly.hpp"

namespace polyattn {

// r-fold function composition task: functions f_1..f_r on [n] and a start
// value x; the answer is f_r(f_{r-1}(...f_1(x)...)).
struct CompositionInstance {
    int r = 0;
    int n = 0;
    std::vector<std::vector<int>> f;  // f[j][i-1] = f_{j+1}(i), values in [1, n]
    int x = 0;

    int token_count() const { return r * n + 1; }
    void validate() const;
};

int compose_direct(const CompositionInstance& inst);

// Attention instance realizing the task with one head of chain-polynomial
// attention over N = r*n + 1 tokens of width 3*(r+1).
struct CompositionEncoding {
    AttentionPolynomial h_chain;
    std::vector<Matrix> Q;  // r+1 matrices, N x 3(r+1)
    std::vector<Matrix> V;  // r matrices
    double scale_a = 0.0;   // A
    double d_scale = 1.0;
    int r = 0;
    int n = 0;
};

// Path polynomial x1x2 + x2x3 + ... + x_r x_{r+1}.
AttentionPolynomial build_chain_polynomial(int r);

// Builds the token sequence phi and the query/value matrices so that the
// chain polynomial evaluates to -A^2 ln(n) * (sum of squared pointer
// mismatches). Requires A > sqrt(r + 2).
CompositionEncoding encode_composition(const CompositionInstance& inst, double A);

inline double default_composition_scale(int r) { return std::sqrt(static_cast<double>(r) + 3.0); }

struct CompositionResult {
    int value = 0;      // decoded answer in [1, n] when ok
    bool ok = false;    // false: rounded readout fell outside the valid block
    double raw = 0.0;   // readout before rounding and offset removal
};

// Runs the tree engine on the encoding, reads row N column 1, rounds, and
// removes the (r-1)*n block offset.
CompositionResult solve_composition(const CompositionEncoding& enc);

// JSON round-trip: {"r": ..., "n": ..., "f": [[...]], "x": ...}.
std::string composition_to_json(const CompositionInstance& inst);
CompositionInstance composition_from_json(const std::string& text);

} // namespace polyattn
