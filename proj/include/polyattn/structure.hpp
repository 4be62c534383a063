#pragma once

#include "polyattn/poly.hpp"

namespace polyattn {

enum class PolyClass { TreeForest, SingleCycle, General };

const char* to_string(PolyClass c);

// One piece of the variable separation: a sub-polynomial sharing at most x1
// with every other branch.
struct Branch {
    AttentionPolynomial poly;  // monomials in original variable indices, same t
    std::vector<int> vars;     // sorted variable indices used by the branch
    bool contains_x1 = false;
};

// Graphical representation and classification of an attention polynomial.
// The adjacency graph exists only for degree-2 polynomials; higher degrees
// classify as General with no graph.
struct PolyStructure {
    PolyClass cls = PolyClass::General;
    bool has_graph = false;
    std::vector<std::vector<int>> adj;  // adj[v-1]: 1-based neighbor indices, sorted
    int cycle_length = 0;               // r, set when cls == SingleCycle
    std::vector<int> cycle_vertices;    // cycle order, starting at smallest index
    std::vector<Branch> branches;
};

PolyStructure build_structure(const AttentionPolynomial& h);

// Maximal decomposition of h into branches: monomials are grouped by the
// connected components of variable co-occurrence after deleting x1. Monomials
// containing x1 join the component of their other variables; the union of
// branch monomials is exactly h.
std::vector<Branch> separate_variables(const AttentionPolynomial& h);

} // namespace polyattn
