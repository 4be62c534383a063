#pragma once

#include <string>
#include <vector>

#include "polyattn/matrix.hpp"
#include "polyattn/poly.hpp"
#include "polyattn/structure.hpp"

namespace polyattn {

// Inputs to one poly-attention evaluation. Q[0] is the query matrix and may
// have a different row count than the keys (used internally for row-constant
// branches). V[j-2] is the value matrix of variable x_j, j in [2, t]. The
// softmax exponent is h(rows) / d_scale; d_scale defaults to d.
struct AttentionInputs {
    AttentionPolynomial h;
    std::vector<Matrix> Q;  // t matrices
    std::vector<Matrix> V;  // t-1 matrices
    double d_scale = 0.0;   // 0 means "use d"

    int n() const { return Q.empty() ? 0 : Q[0].rows; }
    int d() const { return Q.empty() ? 0 : Q[0].cols; }
    double scale() const { return d_scale > 0.0 ? d_scale : static_cast<double>(d()); }

    // Shape/consistency checks shared by every engine.
    void validate() const;
};

struct AttentionOutput {
    Matrix out;                 // n x d
    std::string engine;
    std::vector<double> denom;  // per-row softmax normalizers
};

struct BruteForceOptions {
    double budget = 1e8;     // max number of (l2..lt) summand tuples
    bool stabilize = false;  // per-row log-sum-exp shift (oracle hardening only)
};

// Direct evaluation of the defining sum: row l1 is the softmax-weighted sum
// over all (l2,...,lt) in [n]^{t-1} of the Hadamard product of value rows.
// Serves as the oracle for every other engine.
AttentionOutput attend_bruteforce(const AttentionInputs& in, const BruteForceOptions& opts = {});

// Quadratic-time engine for degree-2 polynomials whose graph is a tree or
// forest. Numerator/denominator vectors are built bottom-up per output
// column; sibling subtrees combine by entry-wise products; components not
// containing x1 contribute a row-constant factor computed once.
AttentionOutput attend_tree(const AttentionInputs& in);

// Exact engine for a polynomial that is a single pure cycle through all of
// its variables: per column, the numerator is the diagonal of the chain of
// exponentiated Gram matrices along the cycle with value diagonals
// interleaved; the denominator is the same chain without them.
AttentionOutput attend_cycle(const AttentionInputs& in);

// Structure-aware dispatcher: separates h into branches, routes each branch
// to the tree / cycle / brute-force path, and combines branch outputs by
// entry-wise products of numerators and denominators.
AttentionOutput attend_exact(const AttentionInputs& in, const BruteForceOptions& opts = {});

// Exponent arguments beyond this overflow exp(); engines reject them instead
// of stabilizing (the factored forms do not admit per-row shifting).
inline constexpr double kMaxExpArg = 709.0;

} // namespace polyattn
