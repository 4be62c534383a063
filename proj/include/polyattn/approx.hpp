#pragma once

#include <vector>

#include "polyattn/exact.hpp"
#include "polyattn/matrix.hpp"
#include "polyattn/poly.hpp"

namespace polyattn {

// Truncated Taylor polynomial of e^x at 0 whose factorial remainder bound
// guarantees |P(a) - e^a| <= rel_error * e^a for all |a| <= valid_radius.
struct ExpPolynomial {
    std::vector<double> coeffs;  // c0..cdeg, c0 = 1
    double valid_radius = 0.0;
    double rel_error = 0.0;

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
    double eval(double x) const;
};

// Smallest degree such that e^G * G^(deg+1) / (deg+1)! <= eps * e^(-G).
// Rejects if the required degree exceeds degree_cap (the radius is too large
// for the requested accuracy).
ExpPolynomial exp_approx_poly(double gamma_bound, double eps, int degree_cap = 64);

// Low-rank pair with U W^T entry-wise approximating exp(A B^T / d_scale)
// within relative eps. rank = C(d + deg, deg) over the monomial feature basis.
struct LowRankFactors {
    Matrix U;  // n_A x rank
    Matrix W;  // n_B x rank
    int rank = 0;
};

inline constexpr int kDefaultRankCap = 20000;

LowRankFactors lowrank_exp_factor(const Matrix& A, const Matrix& B, double d_scale, double eps,
                                  int rank_cap = kDefaultRankCap);

// Entry-wise approximation of Strassen attention via three low-rank factor
// pairs and r x r quadratic forms per output entry.
AttentionOutput attend_strassen_approx(const AttentionInputs& in, double eps);

// Tree engine with every exponentiated Gram matrix replaced by its low-rank
// factors; each matrix-vector product costs O(n * rank).
AttentionOutput attend_tree_approx(const AttentionInputs& in, double eps);

// Reduction of poly-attention to t-tensor attention over n x (s*d) matrices:
// block i of K^(j) is Q^(j) when x_j is in monomial m_i and all-ones
// otherwise; Wv^(j) carries V^(j) in the first d columns, zeros elsewhere.
struct TensorReduction {
    AttentionPolynomial h;
    std::vector<Matrix> K;   // t matrices, n x (s*d)
    std::vector<Matrix> Wv;  // t-1 matrices, n x (s*d)
    int d = 0;               // original embedding width
};

TensorReduction reduce_to_tensor(const AttentionInputs& in);

// Entry-wise approximation of the reduced tensor attention: the feature
// expansion over coordinate multisets factorizes across the key matrices, so
// each output column costs O(n * rank * t). Returns the first d columns.
AttentionOutput attend_tensor_approx(const TensorReduction& red, double eps, double d_scale,
                                     int rank_cap = kDefaultRankCap);

} // namespace polyattn
