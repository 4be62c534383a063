#include "polyattn/poly.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>

namespace polyattn {

bool Monomial::contains(int v) const {
    return std::binary_search(vars.begin(), vars.end(), v);
}

int monomial_order_cmp(const Monomial& a, const Monomial& b) {
    if (a.degree() != b.degree()) return a.degree() > b.degree() ? -1 : 1;
    // Equal degree: the monomial holding the smallest differing index wins.
    for (size_t i = 0; i < a.vars.size(); ++i) {
        if (a.vars[i] != b.vars[i]) return a.vars[i] < b.vars[i] ? -1 : 1;
    }
    return 0;
}

int AttentionPolynomial::degree() const {
    int k = 0;
    for (const auto& m : monomials) k = std::max(k, m.degree());
    return k;
}

bool AttentionPolynomial::has_variable(int v) const {
    for (const auto& m : monomials) {
        if (m.contains(v)) return true;
    }
    return false;
}

AttentionPolynomial make_polynomial(std::vector<Monomial> monomials, int t_override) {
    if (monomials.empty()) throw std::invalid_argument("attention polynomial needs at least one monomial");
    int max_index = 0;
    for (auto& m : monomials) {
        std::sort(m.vars.begin(), m.vars.end());
        if (m.degree() < 2) throw std::invalid_argument("monomial degree below 2: all monomials need degree >= 2");
        for (size_t i = 0; i < m.vars.size(); ++i) {
            if (m.vars[i] < 1) throw std::invalid_argument("variable index must be >= 1");
            if (i > 0 && m.vars[i] == m.vars[i - 1])
                throw std::invalid_argument("repeated variable in monomial (polynomial must be multilinear)");
        }
        max_index = std::max(max_index, m.vars.back());
    }
    std::sort(monomials.begin(), monomials.end(),
              [](const Monomial& a, const Monomial& b) { return monomial_order_cmp(a, b) < 0; });
    for (size_t i = 1; i < monomials.size(); ++i) {
        if (monomials[i] == monomials[i - 1]) throw std::invalid_argument("duplicate monomial");
    }
    AttentionPolynomial h;
    h.monomials = std::move(monomials);
    if (t_override > 0) {
        if (t_override < max_index)
            throw std::invalid_argument("t override smaller than the largest variable index");
        h.t = t_override;
    } else {
        h.t = max_index;
    }
    return h;
}

namespace {

// Single shared scanner for "x<digits>" tokens with skipped whitespace.
struct Cursor {
    const std::string& s;
    size_t pos = 0;

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool done() {
        skip_ws();
        return pos >= s.size();
    }
    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }
    [[noreturn]] void fail(const std::string& msg) const {
        std::ostringstream os;
        os << "parse error at offset " << pos << ": " << msg;
        throw std::invalid_argument(os.str());
    }
    int read_var() {
        skip_ws();
        if (pos >= s.size() || s[pos] != 'x') fail("expected variable 'x<digits>'");
        ++pos;
        if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos]))) fail("expected digits after 'x'");
        long v = 0;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            v = v * 10 + (s[pos] - '0');
            if (v > 1000000) fail("variable index too large");
            ++pos;
        }
        if (v == 0) fail("variable index 0 is not allowed");
        return static_cast<int>(v);
    }
};

} // namespace

AttentionPolynomial parse_polynomial(const std::string& text, int t_override) {
    Cursor c{text};
    std::vector<Monomial> monomials;
    while (true) {
        Monomial m;
        m.vars.push_back(c.read_var());
        while (c.peek() == '*') {
            ++c.pos;
            m.vars.push_back(c.read_var());
        }
        if (m.vars.size() < 2) c.fail("degree-1 term: every term needs at least two variables");
        monomials.push_back(std::move(m));
        if (c.done()) break;
        if (c.peek() != '+') c.fail("expected '+' or end of input");
        ++c.pos;
    }
    return make_polynomial(std::move(monomials), t_override);
}

std::string render(const AttentionPolynomial& h) {
    std::string out;
    for (size_t i = 0; i < h.monomials.size(); ++i) {
        if (i > 0) out += '+';
        const auto& m = h.monomials[i];
        for (size_t j = 0; j < m.vars.size(); ++j) {
            if (j > 0) out += '*';
            out += 'x';
            out += std::to_string(m.vars[j]);
        }
    }
    return out;
}

double evaluate(const AttentionPolynomial& h, const std::vector<std::vector<double>>& Y) {
    if (static_cast<int>(Y.size()) != h.t)
        throw std::invalid_argument("evaluate: expected one vector per variable");
    if (Y.empty() || Y[0].empty()) throw std::invalid_argument("evaluate: vectors must have length >= 1");
    const int d = static_cast<int>(Y[0].size());
    std::vector<const double*> rows(Y.size());
    for (size_t j = 0; j < Y.size(); ++j) {
        if (static_cast<int>(Y[j].size()) != d)
            throw std::invalid_argument("evaluate: mismatched vector lengths");
        rows[j] = Y[j].data();
    }
    return evaluate_rows(h, rows, d);
}

double evaluate_rows(const AttentionPolynomial& h, const std::vector<const double*>& rows, int d) {
    double total = 0.0;
    for (const auto& m : h.monomials) {
        double ip = 0.0;
        for (int l = 0; l < d; ++l) {
            double prod = 1.0;
            for (int v : m.vars) prod *= rows[v - 1][l];
            ip += prod;
        }
        total += ip;
    }
    return total;
}

} // namespace polyattn
