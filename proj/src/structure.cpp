#include "polyattn/structure.hpp"

#include <algorithm>
#include <numeric>

namespace polyattn {

const char* to_string(PolyClass c) {
    switch (c) {
        case PolyClass::TreeForest: return "tree-forest";
        case PolyClass::SingleCycle: return "single-cycle";
        case PolyClass::General: return "general";
    }
    return "general";
}

namespace {

struct UnionFind {
    std::vector<int> parent;

    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

} // namespace

std::vector<Branch> separate_variables(const AttentionPolynomial& h) {
    // Components of variable co-occurrence after deleting x1.
    UnionFind uf(h.t + 1);
    for (const auto& m : h.monomials) {
        int first = 0;
        for (int v : m.vars) {
            if (v == 1) continue;
            if (first == 0) {
                first = v;
            } else {
                uf.unite(first, v);
            }
        }
    }
    // Group monomials by the component of their non-x1 variables. Every
    // monomial has one (degree >= 2 and multilinear), except none: x1 alone
    // cannot form a monomial.
    std::vector<std::pair<int, std::vector<Monomial>>> groups;  // (component root, monomials)
    for (const auto& m : h.monomials) {
        int root = -1;
        for (int v : m.vars) {
            if (v != 1) {
                root = uf.find(v);
                break;
            }
        }
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const auto& g) { return g.first == root; });
        if (it == groups.end()) {
            groups.push_back({root, {m}});
        } else {
            it->second.push_back(m);
        }
    }
    std::vector<Branch> branches;
    for (auto& [root, monos] : groups) {
        Branch b;
        for (const auto& m : monos) {
            for (int v : m.vars) b.vars.push_back(v);
        }
        std::sort(b.vars.begin(), b.vars.end());
        b.vars.erase(std::unique(b.vars.begin(), b.vars.end()), b.vars.end());
        b.contains_x1 = !b.vars.empty() && b.vars.front() == 1;
        b.poly = make_polynomial(std::move(monos), h.t);
        branches.push_back(std::move(b));
    }
    // Deterministic order: by the smallest non-x1 variable (unique per branch).
    std::sort(branches.begin(), branches.end(), [](const Branch& a, const Branch& b) {
        int ka = a.vars[a.contains_x1 ? 1 : 0];
        int kb = b.vars[b.contains_x1 ? 1 : 0];
        return ka < kb;
    });
    return branches;
}

PolyStructure build_structure(const AttentionPolynomial& h) {
    PolyStructure st;
    st.branches = separate_variables(h);
    if (h.degree() != 2) {
        st.cls = PolyClass::General;
        return st;
    }

    st.has_graph = true;
    st.adj.assign(h.t, {});
    for (const auto& m : h.monomials) {
        st.adj[m.vars[0] - 1].push_back(m.vars[1]);
        st.adj[m.vars[1] - 1].push_back(m.vars[0]);
    }
    for (auto& nbrs : st.adj) std::sort(nbrs.begin(), nbrs.end());

    UnionFind uf(h.t);
    for (const auto& m : h.monomials) uf.unite(m.vars[0] - 1, m.vars[1] - 1);
    int components = 0;
    for (int v = 0; v < h.t; ++v) {
        if (uf.find(v) == v) ++components;
    }
    const int edges = h.sparsity();
    if (edges == h.t - components) {
        st.cls = PolyClass::TreeForest;
        return st;
    }
    if (edges != h.t - components + 1) {
        st.cls = PolyClass::General;  // more than one independent cycle
        return st;
    }

    // Exactly one cycle: peel leaves, what remains is the cycle.
    std::vector<int> deg(h.t);
    for (int v = 0; v < h.t; ++v) deg[v] = static_cast<int>(st.adj[v].size());
    std::vector<int> residual = deg;
    std::vector<int> queue;
    for (int v = 0; v < h.t; ++v) {
        if (residual[v] == 1) queue.push_back(v);
    }
    std::vector<bool> removed(h.t, false);
    while (!queue.empty()) {
        int v = queue.back();
        queue.pop_back();
        removed[v] = true;
        for (int u1 : st.adj[v]) {
            int u = u1 - 1;
            if (!removed[u] && --residual[u] == 1) queue.push_back(u);
        }
    }
    std::vector<int> cycle;
    for (int v = 0; v < h.t; ++v) {
        if (!removed[v] && residual[v] > 0) cycle.push_back(v + 1);
    }
    // Pure cycle: every cycle vertex has total degree exactly 2 (pendant
    // trees hanging off the cycle downgrade to General).
    for (int v1 : cycle) {
        if (deg[v1 - 1] != 2) {
            st.cls = PolyClass::General;
            return st;
        }
    }
    st.cls = PolyClass::SingleCycle;
    st.cycle_length = static_cast<int>(cycle.size());
    // Walk the cycle starting at the smallest index, toward its smaller
    // neighbor (orientation does not change the attention value).
    int start = *std::min_element(cycle.begin(), cycle.end());
    std::vector<bool> visited(h.t + 1, false);
    int cur = start;
    for (int step = 0; step < st.cycle_length; ++step) {
        st.cycle_vertices.push_back(cur);
        visited[cur] = true;
        int next = 0;
        for (int nb : st.adj[cur - 1]) {
            if (deg[nb - 1] == 2 && !visited[nb]) {
                next = nb;
                break;
            }
        }
        if (next == 0) break;  // closing the loop
        cur = next;
    }
    return st;
}

} // namespace polyattn
