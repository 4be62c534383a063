#pragma once

#include <string>
#include <vector>

namespace polyattn {

// One multilinear monomial: its variable indices, 1-based, strictly
// increasing, degree between 2 and t.
struct Monomial {
    std::vector<int> vars;

    int degree() const { return static_cast<int>(vars.size()); }
    bool contains(int v) const;

    bool operator==(const Monomial& other) const { return vars == other.vars; }
};

// Preference order used everywhere monomials are sorted: higher degree first,
// then lexicographic (the monomial owning the smallest differing variable
// index comes first). Returns <0 if a precedes b, 0 if equal, >0 otherwise.
int monomial_order_cmp(const Monomial& a, const Monomial& b);

// Multilinear {0,1}-coefficient polynomial over variables x1..xt.
// Monomials are kept sorted by the preference order; coefficients are
// implicitly 1 and duplicates are rejected.
struct AttentionPolynomial {
    int t = 0;
    std::vector<Monomial> monomials;

    int degree() const;    // k: maximum monomial degree
    int sparsity() const { return static_cast<int>(monomials.size()); }  // s
    bool has_variable(int v) const;

    bool operator==(const AttentionPolynomial& other) const {
        return t == other.t && monomials == other.monomials;
    }
};

// Validates invariants, sorts, infers t as the max index unless t_override>0.
AttentionPolynomial make_polynomial(std::vector<Monomial> monomials, int t_override = 0);

// Grammar: poly := term ('+' term)* ; term := var ('*' var)+ ; var := 'x' digits.
// Whitespace is ignored. Rejects degree-1 terms, repeated variables within a
// term, duplicate terms, and index 0.
AttentionPolynomial parse_polynomial(const std::string& text, int t_override = 0);

// Canonical text form: terms joined by '+', variables by '*', no whitespace,
// terms in preference order. parse(render(h)) == h.
std::string render(const AttentionPolynomial& h);

// h(Y_1,...,Y_t) = sum over monomials of the generalized inner product
// <Y_{j1},...,Y_{jk}> = sum_l prod_i Y_{ji}[l]. All vectors must share one
// length d >= 1.
double evaluate(const AttentionPolynomial& h, const std::vector<std::vector<double>>& Y);

// Same, over borrowed row pointers of common length d (hot path for engines).
double evaluate_rows(const AttentionPolynomial& h, const std::vector<const double*>& rows, int d);

} // namespace polyattn
