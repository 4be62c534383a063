#pragma once

#include <optional>
#include <string>
#include <vector>

#include "polyattn/exact.hpp"
#include "polyattn/poly.hpp"

namespace polyattn {

// General polynomial over x1..xt: integer coefficients, degree-1 terms and
// powers allowed (unlike attention polynomials).
struct GeneralTerm {
    long long coeff = 0;
    std::vector<int> powers;  // powers[v-1] = exponent of x_v

    int total_degree() const;
};

struct GeneralPolynomial {
    int t = 0;
    std::vector<GeneralTerm> terms;

    int degree() const;  // k0
    double eval(const std::vector<double>& y) const;
};

// Grammar extends the attention-polynomial one with integer coefficients,
// '-' and powers: e.g. "x1^2*x2 - 3*x3 + 5".
GeneralPolynomial parse_general_polynomial(const std::string& text, int t_override = 0);
std::string render(const GeneralPolynomial& p);

GeneralPolynomial square(const GeneralPolynomial& p);

// Attention polynomial whose degree-k monomials contain the support of every
// monomial of p^2; the default choice is the single monomial x1*...*xt
// (t padded to 2 when p uses fewer variables).
AttentionPolynomial derive_h_for_p(const GeneralPolynomial& p);

// Two-head attention instance whose summed outputs encode a minimizing tuple
// of p^2 over S^t in each row.
struct RootFindingInstance {
    GeneralPolynomial p;
    std::vector<double> S;
    AttentionPolynomial h;
    double c_gap = 0.0;
    int embed_dim = 0;
    Matrix X;                    // token embeddings (1, y, y^2, ..., y^{2k0}, 0...)
    AttentionInputs head1;       // h evaluates to -c_gap * p(y_{l1},...,y_{lt})^2
    AttentionInputs head2;       // adds y_{l1} into coordinate 1
};

// Sufficient gap for planted instances with min nonzero p^2 >= 1 at
// tolerance 1e-6.
double default_root_gap(int t, int n);

RootFindingInstance encode_root_finding(const GeneralPolynomial& p, const std::vector<double>& S,
                                        double c_gap);

// Computes both heads, sums them, snaps coordinates to S (nearest, then
// second-nearest retries bounded to 2^t combos), and returns the first
// row-verified root scanning l1 ascending; empty when no row verifies.
std::optional<std::vector<double>> solve_root_finding(const RootFindingInstance& inst);

// Exhaustive scan of S^t used by the CLI cross-check.
std::optional<std::vector<double>> brute_force_root_scan(const GeneralPolynomial& p,
                                                         const std::vector<double>& S);

// Shared root test: exact zero for integer data, tolerant for general reals.
bool is_root_value(double value);

// JSON round-trip: {"p": "<polynomial>", "S": [reals]}.
std::string root_task_to_json(const GeneralPolynomial& p, const std::vector<double>& S);
void root_task_from_json(const std::string& text, GeneralPolynomial* p, std::vector<double>* S);

} // namespace polyattn
