#include "polyattn/approx.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "engine_detail.hpp"

namespace polyattn {

double ExpPolynomial::eval(double x) const {
    double acc = 0.0;
    for (size_t i = coeffs.size(); i-- > 0;) acc = acc * x + coeffs[i];
    return acc;
}

ExpPolynomial exp_approx_poly(double gamma_bound, double eps, int degree_cap) {
    if (gamma_bound < 0.0) throw std::invalid_argument("exp_approx_poly: radius must be >= 0");
    if (!(eps > 0.0 && eps < 0.1))
        throw std::invalid_argument("exp_approx_poly: eps must lie in (0, 0.1)");
    // Lagrange remainder of the Taylor series at 0: |e^a - P_deg(a)| <=
    // e^G G^(deg+1) / (deg+1)! on [-G, G], and e^a >= e^-G there.
    const double target = eps * std::exp(-gamma_bound);
    double term = std::exp(gamma_bound);  // e^G G^(m+1)/(m+1)! for m = -1
    int deg = -1;
    while (true) {
        term *= gamma_bound / static_cast<double>(deg + 2);
        ++deg;
        if (term <= target) break;
        if (deg >= degree_cap) {
            std::ostringstream os;
            os << "exp_approx_poly: radius " << gamma_bound << " needs degree > " << degree_cap
               << " for eps " << eps << "; entries exceed the admissible bound";
            throw std::invalid_argument(os.str());
        }
    }
    ExpPolynomial p;
    p.valid_radius = gamma_bound;
    p.rel_error = eps;
    p.coeffs.resize(deg + 1);
    p.coeffs[0] = 1.0;
    for (int m = 1; m <= deg; ++m) p.coeffs[m] = p.coeffs[m - 1] / m;
    return p;
}

namespace {

double max_abs(const Matrix& m) {
    double v = 0.0;
    for (double x : m.data) v = std::max(v, std::fabs(x));
    return v;
}

double binomial(int n, int k) {
    double acc = 1.0;
    for (int i = 1; i <= k; ++i) acc = acc * (n - k + i) / i;
    return acc;
}

// Monomial feature basis over `dim` coordinates up to the polynomial's
// degree: one feature per sorted coordinate multiset J, with weight
// c_{|J|} * multinomial(J) / d_scale^{|J|}. Feature matrices split the
// weight evenly across the participating factors.
struct FeatureBasis {
    int dim = 0;
    std::vector<std::vector<int>> multisets;
    std::vector<double> weights;
};

void enumerate_multisets(int dim, int max_size, std::vector<int>& cur,
                         std::vector<std::vector<int>>& out, int start) {
    out.push_back(cur);
    if (static_cast<int>(cur.size()) == max_size) return;
    for (int j = start; j < dim; ++j) {
        cur.push_back(j);
        enumerate_multisets(dim, max_size, cur, out, j);
        cur.pop_back();
    }
}

FeatureBasis build_feature_basis(int dim, const ExpPolynomial& poly, double d_scale, int rank_cap) {
    const int deg = poly.degree();
    const double rank = binomial(dim + deg, deg);
    if (rank > static_cast<double>(rank_cap)) {
        std::ostringstream os;
        os << "feature basis rank C(" << dim + deg << "," << deg << ") = " << rank
           << " exceeds the cap " << rank_cap;
        throw std::invalid_argument(os.str());
    }
    FeatureBasis basis;
    basis.dim = dim;
    std::vector<int> cur;
    enumerate_multisets(dim, deg, cur, basis.multisets, 0);
    basis.weights.reserve(basis.multisets.size());
    for (const auto& J : basis.multisets) {
        // c_m * m! / prod(count_u!) = 1 / prod(count_u!) for the Taylor
        // coefficients; computed directly to avoid m!-sized intermediates.
        double w = 1.0;
        int run = 1;
        for (size_t i = 1; i < J.size(); ++i) {
            if (J[i] == J[i - 1]) {
                ++run;
                w /= run;
            } else {
                run = 1;
            }
        }
        for (size_t i = 0; i < J.size(); ++i) w /= d_scale;
        basis.weights.push_back(w);
    }
    return basis;
}

// F[i, J] = weight_J^(1/split_ways) * prod_{j in J} M[i, j].
Matrix feature_matrix(const Matrix& M, const FeatureBasis& basis, int split_ways) {
    const int r = static_cast<int>(basis.multisets.size());
    Matrix F(M.rows, r);
    std::vector<double> split(r);
    for (int j = 0; j < r; ++j) {
        split[j] = split_ways == 2 ? std::sqrt(basis.weights[j])
                                   : std::pow(basis.weights[j], 1.0 / split_ways);
    }
#pragma omp parallel for schedule(static)
    for (int i = 0; i < M.rows; ++i) {
        const double* row = M.row_ptr(i);
        double* out = F.row_ptr(i);
        for (int j = 0; j < r; ++j) {
            double prod = split[j];
            for (int c : basis.multisets[j]) prod *= row[c];
            out[j] = prod;
        }
    }
    return F;
}

} // namespace

LowRankFactors lowrank_exp_factor(const Matrix& A, const Matrix& B, double d_scale, double eps,
                                  int rank_cap) {
    if (A.cols != B.cols) throw std::invalid_argument("lowrank_exp_factor: widths disagree");
    if (d_scale <= 0.0) throw std::invalid_argument("lowrank_exp_factor: d_scale must be positive");
    const double radius = A.cols * max_abs(A) * max_abs(B) / d_scale;
    ExpPolynomial poly = exp_approx_poly(radius, eps);
    FeatureBasis basis = build_feature_basis(A.cols, poly, d_scale, rank_cap);
    LowRankFactors f;
    f.U = feature_matrix(A, basis, 2);
    f.W = feature_matrix(B, basis, 2);
    f.rank = static_cast<int>(basis.multisets.size());
    return f;
}

namespace {

std::vector<double> column_of(const Matrix& m, int col) {
    std::vector<double> v(m.rows);
    for (int i = 0; i < m.rows; ++i) v[i] = m.at(i, col);
    return v;
}

const AttentionPolynomial& strassen_polynomial() {
    static const AttentionPolynomial h = parse_polynomial("x1*x2+x1*x3+x2*x3");
    return h;
}

using detail::Factor;

Factor tree_approx_factor(const AttentionInputs& in, const Branch& branch, double eps) {
    const int d = in.d();
    const double scale = in.scale();
    const Matrix dummy_q(1, d);
    detail::RootedTree tree = detail::build_rooted_tree(in, branch, dummy_q);
    const int nodes = static_cast<int>(tree.q.size());

    // Low-rank factors per edge instead of the n x n exponentiated Gram:
    // every product against the Gram becomes U * (W^T x) in O(n * rank),
    // with all d numerator columns pushed through at once.
    std::vector<std::vector<double>> den_vec(nodes);
    std::vector<Matrix> num_mat(nodes);
    for (int u = nodes - 1; u >= 0; --u) {
        std::vector<double> s(tree.q[u]->rows, 1.0);
        Matrix sm = Matrix::ones(tree.q[u]->rows, d);
        for (int c : tree.children[u]) {
            LowRankFactors lr = lowrank_exp_factor(*tree.q[u], *tree.q[c], scale, eps);
            const Matrix Wt = transpose(lr.W);
            std::vector<double> tmp(lr.rank, 0.0);
            for (int j = 0; j < lr.W.rows; ++j) {
                const double* wrow = lr.W.row_ptr(j);
                for (int k = 0; k < lr.rank; ++k) tmp[k] += wrow[k] * den_vec[c][j];
            }
            std::vector<double> contrib = detail::gram_apply(lr.U, tmp, nullptr);
            for (size_t i = 0; i < s.size(); ++i) s[i] *= contrib[i];
            sm = hadamard(sm, matmul(lr.U, matmul(Wt, hadamard(*tree.v[c], num_mat[c]))));
            den_vec[c].clear();
            num_mat[c] = Matrix();
        }
        den_vec[u] = std::move(s);
        num_mat[u] = std::move(sm);
    }
    return Factor{std::move(num_mat[0]), std::move(den_vec[0])};
}

} // namespace

AttentionOutput attend_strassen_approx(const AttentionInputs& in, double eps) {
    in.validate();
    if (!(in.h == strassen_polynomial()))
        throw std::invalid_argument("strassen approx: polynomial must be x1*x2+x1*x3+x2*x3");
    const int n = in.Q[0].rows;
    const int d = in.d();
    const double scale = in.scale();

    // Low-rank pairs for the three cycle-edge Gram matrices.
    LowRankFactors f12 = lowrank_exp_factor(in.Q[0], in.Q[1], scale, eps);
    LowRankFactors f23 = lowrank_exp_factor(in.Q[1], in.Q[2], scale, eps);
    LowRankFactors f31 = lowrank_exp_factor(in.Q[2], in.Q[0], scale, eps);

    const Matrix W1t = transpose(f12.W);
    // A = (W^1)^T U^2 (W^2)^T U^3, shared by every output entry.
    const Matrix mid_den = matmul(matmul(W1t, f23.U), matmul(transpose(f23.W), f31.U));

    AttentionOutput res{Matrix(n, d), "strassen-approx", std::vector<double>(n, 0.0)};
    const Matrix den_left = matmul(f12.U, mid_den);  // n x r3
    for (int i = 0; i < n; ++i) {
        const double* a = den_left.row_ptr(i);
        const double* b = f31.W.row_ptr(i);
        double acc = 0.0;
        for (int k = 0; k < f31.rank; ++k) acc += a[k] * b[k];
        detail::require_nonzero_denominator(acc);
        res.denom[i] = acc;
    }

    for (int col = 0; col < d; ++col) {
        // Value diagonals folded into the middle factors (steps 4-5).
        const Matrix u2 = scale_rows(column_of(in.V[0], col), f23.U);
        const Matrix w2 = scale_rows(column_of(in.V[1], col), f23.W);
        const Matrix mid_num = matmul(matmul(W1t, u2), matmul(transpose(w2), f31.U));
        const Matrix num_left = matmul(f12.U, mid_num);
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            const double* a = num_left.row_ptr(i);
            const double* b = f31.W.row_ptr(i);
            double acc = 0.0;
            for (int k = 0; k < f31.rank; ++k) acc += a[k] * b[k];
            res.out.at(i, col) = acc / res.denom[i];
        }
    }
    return res;
}

AttentionOutput attend_tree_approx(const AttentionInputs& in, double eps) {
    in.validate();
    PolyStructure st = build_structure(in.h);
    if (st.cls != PolyClass::TreeForest)
        throw std::invalid_argument("tree approx: polynomial class is " +
                                    std::string(to_string(st.cls)) + ", needs tree-forest");
    auto fn = [eps](const AttentionInputs& full, const Branch& branch) {
        return tree_approx_factor(full, branch, eps);
    };
    return detail::combine_branches(in, fn, "tree-approx");
}

TensorReduction reduce_to_tensor(const AttentionInputs& in) {
    in.validate();
    const int s = in.h.sparsity();
    const int d = in.d();
    TensorReduction red;
    red.h = in.h;
    red.d = d;
    for (int j = 1; j <= in.h.t; ++j) {
        const Matrix& q = in.Q[j - 1];
        Matrix k(q.rows, s * d);
        for (int b = 0; b < s; ++b) {
            const bool carries = in.h.monomials[b].contains(j);
            for (int i = 0; i < q.rows; ++i) {
                double* out = k.row_ptr(i) + b * d;
                if (carries) {
                    const double* src = q.row_ptr(i);
                    for (int c = 0; c < d; ++c) out[c] = src[c];
                } else {
                    for (int c = 0; c < d; ++c) out[c] = 1.0;
                }
            }
        }
        red.K.push_back(std::move(k));
    }
    for (int j = 2; j <= in.h.t; ++j) {
        const Matrix& v = in.V[j - 2];
        Matrix w(v.rows, s * d);
        for (int i = 0; i < v.rows; ++i) {
            const double* src = v.row_ptr(i);
            double* out = w.row_ptr(i);
            for (int c = 0; c < d; ++c) out[c] = src[c];
        }
        red.Wv.push_back(std::move(w));
    }
    return red;
}

AttentionOutput attend_tensor_approx(const TensorReduction& red, double eps, double d_scale,
                                     int rank_cap) {
    const int t = red.h.t;
    if (static_cast<int>(red.K.size()) != t || static_cast<int>(red.Wv.size()) != t - 1)
        throw std::invalid_argument("tensor approx: malformed reduction");
    if (d_scale <= 0.0) throw std::invalid_argument("tensor approx: d_scale must be positive");
    const int sd = red.K[0].cols;
    const int d = red.d;
    const int n1 = red.K[0].rows;

    // Rigorous exponent bound: per coordinate, the product of column maxima
    // across the t key matrices.
    double radius = 0.0;
    for (int c = 0; c < sd; ++c) {
        double prod = 1.0;
        for (int j = 0; j < t; ++j) {
            double colmax = 0.0;
            for (int i = 0; i < red.K[j].rows; ++i)
                colmax = std::max(colmax, std::fabs(red.K[j].at(i, c)));
            prod *= colmax;
        }
        radius += prod;
    }
    radius /= d_scale;

    ExpPolynomial poly = exp_approx_poly(radius, eps);
    FeatureBasis basis = build_feature_basis(sd, poly, d_scale, rank_cap);
    const int r = static_cast<int>(basis.multisets.size());

    // The coordinate products split across the key matrices: one feature
    // matrix per K^(j), weights distributed as t-th roots.
    std::vector<Matrix> phi;
    phi.reserve(t);
    for (int j = 0; j < t; ++j) phi.push_back(feature_matrix(red.K[j], basis, t));

    // Denominator: per feature, the product over j >= 2 of the column sums.
    std::vector<double> u(r, 1.0);
    for (int j = 1; j < t; ++j) {
        for (int k = 0; k < r; ++k) {
            double colsum = 0.0;
            for (int i = 0; i < phi[j].rows; ++i) colsum += phi[j].at(i, k);
            u[k] *= colsum;
        }
    }
    std::vector<double> den = detail::gram_apply(phi[0], u, nullptr);

    // Numerator: per feature and output column, the product over j >= 2 of
    // sum_l phi^j[l, k] * Wv^j[l, col]; only the first d value columns are
    // nonzero.
    Matrix G = Matrix::ones(r, d);
    for (int j = 1; j < t; ++j) {
        const Matrix& wv = red.Wv[j - 1];
#pragma omp parallel for schedule(static)
        for (int k = 0; k < r; ++k) {
            for (int col = 0; col < d; ++col) {
                double acc = 0.0;
                for (int i = 0; i < phi[j].rows; ++i) acc += phi[j].at(i, k) * wv.at(i, col);
                G.at(k, col) *= acc;
            }
        }
    }

    Matrix num = matmul(phi[0], G);
    AttentionOutput res{Matrix(n1, d), "tensor-approx", den};
    for (int i = 0; i < n1; ++i) {
        detail::require_nonzero_denominator(den[i]);
        for (int col = 0; col < d; ++col) res.out.at(i, col) = num.at(i, col) / den[i];
    }
    return res;
}

} // namespace polyattn
