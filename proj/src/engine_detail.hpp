#pragma once

// Internals shared by the exact and approximate engines. Not part of the
// public API.

#include <functional>
#include <vector>

#include "polyattn/exact.hpp"
#include "polyattn/matrix.hpp"
#include "polyattn/structure.hpp"

namespace polyattn::detail {

inline int key_rows(const AttentionInputs& in) {
    return in.h.t >= 2 ? in.Q[1].rows : in.Q[0].rows;
}

// Numerator matrix and per-row denominator of one attention computation
// before the final division. Row-constant factors carry a single row.
struct Factor {
    Matrix num;               // rows x d
    std::vector<double> den;  // length rows
};

// Rooted view of one tree branch. Node 0 is the root (the query variable or
// a synthetic zero-row query); children are visited in increasing variable
// index order.
struct RootedTree {
    std::vector<const Matrix*> q;            // per node
    std::vector<const Matrix*> v;            // per node, nullptr for the root
    std::vector<std::vector<int>> children;  // node ids
};

RootedTree build_rooted_tree(const AttentionInputs& in, const Branch& branch, const Matrix& dummy_q);

// y = G * (w (.) x), with w == nullptr meaning all-ones.
std::vector<double> gram_apply(const Matrix& G, const std::vector<double>& x, const double* w);

Factor bruteforce_factor(const AttentionInputs& in, const BruteForceOptions& opts);

// Separates h, applies branch_fn per branch, folds the factors together, and
// multiplies in the column-mean factor of every value variable that appears
// in no monomial.
using BranchFn = std::function<Factor(const AttentionInputs&, const Branch&)>;
AttentionOutput combine_branches(const AttentionInputs& in, const BranchFn& branch_fn,
                                 const char* engine_name);

AttentionOutput factor_to_output(Factor f, const char* engine_name);

// Rejects all-underflow softmax rows instead of emitting NaN.
void require_nonzero_denominator(double den);

} // namespace polyattn::detail
