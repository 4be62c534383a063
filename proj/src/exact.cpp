#include "polyattn/exact.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "engine_detail.hpp"

namespace polyattn {

void AttentionInputs::validate() const {
    if (h.t < 2) throw std::invalid_argument("attention inputs: t must be >= 2");
    if (static_cast<int>(Q.size()) != h.t)
        throw std::invalid_argument("attention inputs: expected t query-key matrices");
    if (static_cast<int>(V.size()) != h.t - 1)
        throw std::invalid_argument("attention inputs: expected t-1 value matrices");
    const int d0 = Q[0].cols;
    const int nk = detail::key_rows(*this);
    if (Q[0].rows < 1 || d0 < 1) throw std::invalid_argument("attention inputs: empty query matrix");
    for (size_t j = 0; j < Q.size(); ++j) {
        if (Q[j].cols != d0) throw std::invalid_argument("attention inputs: query-key width mismatch");
        if (j >= 1 && Q[j].rows != nk)
            throw std::invalid_argument("attention inputs: key row counts disagree");
    }
    for (const auto& v : V) {
        if (v.rows != nk || v.cols != d0)
            throw std::invalid_argument("attention inputs: value matrix shape mismatch");
    }
    if (scale() <= 0.0) throw std::invalid_argument("attention inputs: d_scale must be positive");
}

namespace detail {

struct ExpOverflow {
    bool hit = false;
    double value = 0.0;
};

Factor bruteforce_factor(const AttentionInputs& in, const BruteForceOptions& opts) {
    const int t = in.h.t;
    const int n = key_rows(in);
    const int n1 = in.Q[0].rows;
    const int d = in.d();
    const double scale = in.scale();

    double tuples = 1.0;
    for (int j = 1; j < t; ++j) tuples *= n;
    if (tuples > opts.budget) {
        std::ostringstream os;
        os << "brute force budget exceeded: n^(t-1) = " << tuples << " > " << opts.budget;
        throw std::invalid_argument(os.str());
    }

    Factor f{Matrix(n1, d), std::vector<double>(n1, 0.0)};
    ExpOverflow overflow;

#pragma omp parallel for schedule(static)
    for (int l1 = 0; l1 < n1; ++l1) {
        std::vector<const double*> rows(t);
        rows[0] = in.Q[0].row_ptr(l1);
        std::vector<int> idx(t - 1, 0);

        double shift = 0.0;
        if (opts.stabilize) {
            double emax = -HUGE_VAL;
            while (true) {
                for (int j = 1; j < t; ++j) rows[j] = in.Q[j].row_ptr(idx[j - 1]);
                emax = std::max(emax, evaluate_rows(in.h, rows, d) / scale);
                int pos = t - 2;
                while (pos >= 0 && ++idx[pos] == n) idx[pos--] = 0;
                if (pos < 0) break;
            }
            shift = emax;
            std::fill(idx.begin(), idx.end(), 0);
        }

        double den = 0.0;
        double* num = f.num.row_ptr(l1);
        while (true) {
            for (int j = 1; j < t; ++j) rows[j] = in.Q[j].row_ptr(idx[j - 1]);
            const double e = evaluate_rows(in.h, rows, d) / scale - shift;
            if (e > kMaxExpArg) {
#pragma omp critical
                {
                    overflow.hit = true;
                    overflow.value = e;
                }
                break;
            }
            const double w = std::exp(e);
            den += w;
            for (int c = 0; c < d; ++c) {
                double prod = w;
                for (int j = 1; j < t; ++j) prod *= in.V[j - 1].at(idx[j - 1], c);
                num[c] += prod;
            }
            int pos = t - 2;
            while (pos >= 0 && ++idx[pos] == n) idx[pos--] = 0;
            if (pos < 0) break;
        }
        f.den[l1] = den;
    }

    if (overflow.hit) {
        std::ostringstream os;
        os << "brute force: exponent " << overflow.value << " overflows exp()";
        throw std::domain_error(os.str());
    }
    return f;
}

RootedTree build_rooted_tree(const AttentionInputs& in, const Branch& branch, const Matrix& dummy_q) {
    RootedTree tree;
    std::vector<int> node_var;  // variable index per node, 0 for the dummy
    if (branch.contains_x1) {
        tree.q.push_back(&in.Q[0]);
        node_var.push_back(1);
    } else {
        tree.q.push_back(&dummy_q);
        node_var.push_back(0);
    }
    tree.v.push_back(nullptr);
    tree.children.push_back({});

    std::vector<std::pair<int, int>> edges;  // variable index pairs
    for (const auto& m : branch.poly.monomials) edges.push_back({m.vars[0], m.vars[1]});
    if (!branch.contains_x1) {
        edges.push_back({0, branch.vars.front()});  // synthetic edge, Gram == ones
    }

    std::vector<bool> used(edges.size(), false);
    std::vector<int> frontier = {0};
    while (!frontier.empty()) {
        int node = frontier.front();
        frontier.erase(frontier.begin());
        int var = node_var[node];
        std::vector<std::pair<int, size_t>> next;  // (child var, edge id)
        for (size_t e = 0; e < edges.size(); ++e) {
            if (used[e]) continue;
            if (edges[e].first == var) next.push_back({edges[e].second, e});
            else if (edges[e].second == var) next.push_back({edges[e].first, e});
        }
        std::sort(next.begin(), next.end());
        for (auto [child_var, e] : next) {
            used[e] = true;
            int id = static_cast<int>(tree.q.size());
            tree.q.push_back(&in.Q[child_var - 1]);
            tree.v.push_back(&in.V[child_var - 2]);
            node_var.push_back(child_var);
            tree.children.push_back({});
            tree.children[node].push_back(id);
            frontier.push_back(id);
        }
    }
    return tree;
}

std::vector<double> gram_apply(const Matrix& G, const std::vector<double>& x, const double* w) {
    std::vector<double> y(G.rows);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < G.rows; ++i) {
        const double* g = G.row_ptr(i);
        double acc = 0.0;
        if (w) {
            for (int j = 0; j < G.cols; ++j) acc += g[j] * (w[j] * x[j]);
        } else {
            for (int j = 0; j < G.cols; ++j) acc += g[j] * x[j];
        }
        y[i] = acc;
    }
    return y;
}

AttentionOutput combine_branches(const AttentionInputs& in, const BranchFn& branch_fn,
                                 const char* engine_name) {
    const int n1 = in.Q[0].rows;
    const int n = key_rows(in);
    const int d = in.d();

    Matrix num = Matrix::ones(n1, d);
    std::vector<double> den(n1, 1.0);
    auto fold = [&](const Factor& f) {
        const bool broadcast = f.num.rows == 1;
        for (int i = 0; i < n1; ++i) {
            const int src = broadcast ? 0 : i;
            den[i] *= f.den[src];
            double* nrow = num.row_ptr(i);
            const double* frow = f.num.row_ptr(src);
            for (int c = 0; c < d; ++c) nrow[c] *= frow[c];
        }
    };

    std::vector<bool> var_used(in.h.t + 1, false);
    for (const Branch& branch : separate_variables(in.h)) {
        for (int v : branch.vars) var_used[v] = true;
        fold(branch_fn(in, branch));
    }

    // Variables absent from every monomial still sum over their value rows:
    // a column-mean factor per unused value variable.
    for (int v = 2; v <= in.h.t; ++v) {
        if (var_used[v]) continue;
        const Matrix& V = in.V[v - 2];
        for (int c = 0; c < d; ++c) {
            double colsum = 0.0;
            for (int i = 0; i < n; ++i) colsum += V.at(i, c);
            for (int i = 0; i < n1; ++i) num.at(i, c) *= colsum;
        }
        for (int i = 0; i < n1; ++i) den[i] *= n;
    }

    AttentionOutput out{Matrix(n1, d), engine_name, den};
    for (int i = 0; i < n1; ++i) {
        require_nonzero_denominator(den[i]);
        for (int c = 0; c < d; ++c) out.out.at(i, c) = num.at(i, c) / den[i];
    }
    return out;
}

AttentionOutput factor_to_output(Factor f, const char* engine_name) {
    AttentionOutput out{Matrix(f.num.rows, f.num.cols), engine_name, std::move(f.den)};
    for (int i = 0; i < out.out.rows; ++i) {
        require_nonzero_denominator(out.denom[i]);
        for (int c = 0; c < out.out.cols; ++c) out.out.at(i, c) = f.num.at(i, c) / out.denom[i];
    }
    return out;
}

void require_nonzero_denominator(double den) {
    if (den == 0.0) {
        throw std::domain_error(
            "softmax denominator underflowed to zero: every exponent weight vanished");
    }
}

} // namespace detail

namespace {

using detail::Factor;

// One tree edge: multiplies the exponentiated Gram of (Q_u, Q_c) into the
// child's numerator columns and denominator vector without materializing the
// n x n matrix (Gram rows are built, exponentiated, and consumed in place;
// summation stays j-ascending, so outputs are bitwise identical to the
// materialized form).
void fused_edge_apply(const Matrix& qu, const Matrix& qc, double inv_scale,
                      const std::vector<double>& den_in, const Matrix& num_in,
                      std::vector<double>& den_out, Matrix& num_out) {
    const int d = qu.cols;
    detail::ExpOverflow overflow;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < qu.rows; ++i) {
        const double* qi = qu.row_ptr(i);
        double accd = 0.0;
        double* accn = num_out.row_ptr(i);
        for (int c = 0; c < d; ++c) accn[c] = 0.0;
        for (int j = 0; j < qc.rows; ++j) {
            const double* qj = qc.row_ptr(j);
            double dot = 0.0;
            for (int k = 0; k < d; ++k) dot += qi[k] * qj[k];
            const double arg = dot * inv_scale;
            if (arg > kMaxExpArg) {
#pragma omp critical
                {
                    overflow.hit = true;
                    overflow.value = dot;
                }
                break;
            }
            const double e = std::exp(arg);
            accd += e * den_in[j];
            const double* nj = num_in.row_ptr(j);
            for (int c = 0; c < d; ++c) accn[c] += e * nj[c];
        }
        den_out[i] = accd;
    }
    if (overflow.hit) {
        std::ostringstream os;
        os << "tree engine: exponent input " << overflow.value
           << " overflows exp(); entries exceed the safe bound";
        throw std::domain_error(os.str());
    }
}

Factor tree_factor(const AttentionInputs& in, const Branch& branch) {
    const int d = in.d();
    const double scale = in.scale();
    const Matrix dummy_q(1, d);
    detail::RootedTree tree = detail::build_rooted_tree(in, branch, dummy_q);
    const int nodes = static_cast<int>(tree.q.size());

    // Denominator vectors carry no value columns and are shared by every
    // column: S(u) = prod over children c of G_{u,c} * S(c). Numerators run
    // all d columns through each Gram in one pass:
    // S(u) = prod over children of G_{u,c} * (V_c (.) S(c)).
    std::vector<std::vector<double>> den_vec(nodes);
    std::vector<Matrix> num_mat(nodes);
    for (int u = nodes - 1; u >= 0; --u) {
        std::vector<double> s(tree.q[u]->rows, 1.0);
        Matrix sm = Matrix::ones(tree.q[u]->rows, d);
        std::vector<double> cden(tree.q[u]->rows);
        Matrix cnum(tree.q[u]->rows, d);
        for (int c : tree.children[u]) {
            fused_edge_apply(*tree.q[u], *tree.q[c], 1.0 / scale, den_vec[c],
                             hadamard(*tree.v[c], num_mat[c]), cden, cnum);
            for (size_t i = 0; i < s.size(); ++i) s[i] *= cden[i];
            sm = hadamard(sm, cnum);
            den_vec[c].clear();
            num_mat[c] = Matrix();
        }
        den_vec[u] = std::move(s);
        num_mat[u] = std::move(sm);
    }
    return Factor{std::move(num_mat[0]), std::move(den_vec[0])};
}

std::vector<double> column_of(const Matrix& m, int col) {
    std::vector<double> v(m.rows);
    for (int i = 0; i < m.rows; ++i) v[i] = m.at(i, col);
    return v;
}

// Pure cycle through the variables listed in cycle order. With x1 on the
// cycle the result is per query row (diagonal extraction of the chain with
// r-1 interleaved value diagonals); otherwise it is the row-constant trace
// of the chain with all r diagonals.
Factor cycle_factor(const AttentionInputs& in, const std::vector<int>& cycle) {
    const int r = static_cast<int>(cycle.size());
    const int d = in.d();
    const double scale = in.scale();
    const bool query_on_cycle = cycle[0] == 1;

    std::vector<Matrix> gram(r);  // edge c_j -> c_{j+1} (wrapping)
    for (int j = 0; j < r; ++j) {
        const Matrix& a = in.Q[cycle[j] - 1];
        const Matrix& b = in.Q[cycle[(j + 1) % r] - 1];
        gram[j] = entrywise_exp(matmul(a, transpose(b)), 1.0 / scale);
    }
    std::vector<const Matrix*> chain(r);
    for (int j = 0; j < r; ++j) chain[j] = &gram[j];

    if (query_on_cycle) {
        const int n1 = gram[0].rows;
        Factor f{Matrix(n1, d), diag_of_chain(chain)};
        for (int col = 0; col < d; ++col) {
            Matrix P = scale_columns(gram[0], column_of(in.V[cycle[1] - 2], col));
            for (int j = 1; j + 1 < r; ++j) {
                P = scale_columns(matmul(P, gram[j]), column_of(in.V[cycle[j + 1] - 2], col));
            }
            const Matrix& last = gram[r - 1];
            for (int i = 0; i < n1; ++i) {
                const double* p = P.row_ptr(i);
                double acc = 0.0;
                for (int j = 0; j < last.rows; ++j) acc += p[j] * last.at(j, i);
                f.num.at(i, col) = acc;
            }
        }
        return f;
    }

    Factor f{Matrix(1, d), std::vector<double>(1, 0.0)};
    {
        std::vector<double> diag = diag_of_chain(chain);
        double tr = 0.0;
        for (double x : diag) tr += x;
        f.den[0] = tr;
    }
    for (int col = 0; col < d; ++col) {
        Matrix P = scale_rows(column_of(in.V[cycle[0] - 2], col), gram[0]);
        for (int j = 1; j < r; ++j) {
            P = matmul(scale_columns(P, column_of(in.V[cycle[j] - 2], col)), gram[j]);
        }
        double tr = 0.0;
        for (int i = 0; i < P.rows; ++i) tr += P.at(i, i);
        f.num.at(0, col) = tr;
    }
    return f;
}

AttentionPolynomial compact_polynomial(const AttentionPolynomial& poly, const std::vector<int>& vars,
                                       int offset) {
    std::vector<int> rank(poly.t + 1, 0);
    for (size_t i = 0; i < vars.size(); ++i) rank[vars[i]] = static_cast<int>(i) + 1 + offset;
    std::vector<Monomial> ms;
    for (const auto& m : poly.monomials) {
        Monomial cm;
        for (int v : m.vars) cm.vars.push_back(rank[v]);
        ms.push_back(std::move(cm));
    }
    return make_polynomial(std::move(ms), static_cast<int>(vars.size()) + offset);
}

// Brute force restricted to the branch's own variables; branches without x1
// get a synthetic zero query row and come out row-constant.
Factor brute_branch_factor(const AttentionInputs& in, const Branch& branch,
                           const BruteForceOptions& opts) {
    AttentionInputs sub;
    sub.d_scale = in.scale();
    if (branch.contains_x1) {
        sub.h = compact_polynomial(branch.poly, branch.vars, 0);
        for (int v : branch.vars) sub.Q.push_back(in.Q[v - 1]);
        for (int v : branch.vars) {
            if (v != 1) sub.V.push_back(in.V[v - 2]);
        }
    } else {
        sub.h = compact_polynomial(branch.poly, branch.vars, 1);
        sub.Q.push_back(Matrix(1, in.d()));
        for (int v : branch.vars) sub.Q.push_back(in.Q[v - 1]);
        for (int v : branch.vars) sub.V.push_back(in.V[v - 2]);
    }
    return detail::bruteforce_factor(sub, opts);
}

enum class BranchEngine { Tree, Cycle, Brute };

BranchEngine classify_branch(const Branch& branch, std::vector<int>* cycle_out) {
    PolyStructure st = build_structure(branch.poly);
    if (branch.poly.degree() == 2 && st.cls == PolyClass::TreeForest) return BranchEngine::Tree;
    if (st.cls == PolyClass::SingleCycle &&
        st.cycle_length == static_cast<int>(branch.vars.size()) &&
        st.cycle_length == branch.poly.sparsity()) {
        *cycle_out = st.cycle_vertices;
        return BranchEngine::Cycle;
    }
    return BranchEngine::Brute;
}

} // namespace

AttentionOutput attend_bruteforce(const AttentionInputs& in, const BruteForceOptions& opts) {
    in.validate();
    return detail::factor_to_output(detail::bruteforce_factor(in, opts), "brute");
}

AttentionOutput attend_tree(const AttentionInputs& in) {
    in.validate();
    PolyStructure st = build_structure(in.h);
    if (st.cls != PolyClass::TreeForest)
        throw std::invalid_argument("tree engine: polynomial class is " +
                                    std::string(to_string(st.cls)) + ", needs tree-forest");
    return detail::combine_branches(in, tree_factor, "tree");
}

AttentionOutput attend_cycle(const AttentionInputs& in) {
    in.validate();
    PolyStructure st = build_structure(in.h);
    if (st.cls != PolyClass::SingleCycle || st.cycle_length != in.h.t ||
        st.cycle_length != in.h.sparsity()) {
        throw std::invalid_argument(
            "cycle engine: polynomial must be a single pure cycle through all variables");
    }
    return detail::factor_to_output(cycle_factor(in, st.cycle_vertices), "cycle");
}

AttentionOutput attend_exact(const AttentionInputs& in, const BruteForceOptions& opts) {
    in.validate();
    std::vector<std::string> used;
    auto note = [&used](const char* name) {
        if (std::find(used.begin(), used.end(), name) == used.end()) used.push_back(name);
    };
    auto dispatch = [&](const AttentionInputs& full, const Branch& branch) -> Factor {
        std::vector<int> cycle;
        switch (classify_branch(branch, &cycle)) {
            case BranchEngine::Tree:
                note("tree");
                return tree_factor(full, branch);
            case BranchEngine::Cycle:
                note("cycle");
                return cycle_factor(full, cycle);
            case BranchEngine::Brute:
                break;
        }
        note("brute");
        return brute_branch_factor(full, branch, opts);
    };
    AttentionOutput out = detail::combine_branches(in, dispatch, "exact");
    std::string tag = "exact(";
    for (size_t i = 0; i < used.size(); ++i) tag += (i ? "+" : "") + used[i];
    out.engine = tag + ")";
    return out;
}

} // namespace polyattn
