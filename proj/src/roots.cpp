#include "polyattn/roots.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace polyattn {

int GeneralTerm::total_degree() const {
    int deg = 0;
    for (int p : powers) deg += p;
    return deg;
}

int GeneralPolynomial::degree() const {
    int k = 0;
    for (const auto& term : terms) k = std::max(k, term.total_degree());
    return k;
}

double GeneralPolynomial::eval(const std::vector<double>& y) const {
    double acc = 0.0;
    for (const auto& term : terms) {
        double v = static_cast<double>(term.coeff);
        for (int j = 0; j < static_cast<int>(term.powers.size()); ++j) {
            for (int e = 0; e < term.powers[j]; ++e) v *= y[j];
        }
        acc += v;
    }
    return acc;
}

namespace {

GeneralPolynomial collect(int t, std::map<std::vector<int>, long long> acc) {
    GeneralPolynomial p;
    p.t = t;
    for (auto& [powers, coeff] : acc) {
        if (coeff == 0) continue;
        GeneralTerm term;
        term.coeff = coeff;
        term.powers = powers;
        term.powers.resize(t, 0);
        p.terms.push_back(std::move(term));
    }
    // Preference order on general monomials: degree first, then the term
    // owning the smallest variable with the larger exponent.
    std::sort(p.terms.begin(), p.terms.end(), [](const GeneralTerm& a, const GeneralTerm& b) {
        if (a.total_degree() != b.total_degree()) return a.total_degree() > b.total_degree();
        return a.powers > b.powers;
    });
    return p;
}

struct RootsCursor {
    const std::string& s;
    size_t pos = 0;

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw std::invalid_argument("polynomial parse error at offset " + std::to_string(pos) +
                                    ": " + msg);
    }
    long long read_int() {
        skip_ws();
        long long v = 0;
        bool any = false;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            v = v * 10 + (s[pos] - '0');
            if (v > 1000000000LL) fail("integer too large");
            ++pos;
            any = true;
        }
        if (!any) fail("expected digits");
        return v;
    }
};

} // namespace

GeneralPolynomial parse_general_polynomial(const std::string& text, int t_override) {
    RootsCursor c{text};
    std::map<std::vector<int>, long long> acc;
    int max_var = 0;

    bool first = true;
    while (true) {
        long long sign = 1;
        char ch = c.peek();
        if (ch == '+' || ch == '-') {
            sign = ch == '-' ? -1 : 1;
            ++c.pos;
        } else if (!first) {
            if (ch == '\0') break;
            c.fail("expected '+' or '-' between terms");
        }
        first = false;

        long long coeff = sign;
        std::vector<int> powers;
        bool saw_factor = false;
        while (true) {
            char f = c.peek();
            if (f == 'x') {
                ++c.pos;
                long long var = c.read_int();
                if (var < 1) c.fail("variable index must be >= 1");
                long long exp = 1;
                if (c.peek() == '^') {
                    ++c.pos;
                    exp = c.read_int();
                    if (exp > 16) c.fail("exponent too large");
                }
                if (static_cast<int>(var) > max_var) max_var = static_cast<int>(var);
                if (powers.size() < static_cast<size_t>(var)) powers.resize(var, 0);
                powers[var - 1] += static_cast<int>(exp);
                saw_factor = true;
            } else if (std::isdigit(static_cast<unsigned char>(f))) {
                coeff *= c.read_int();
                saw_factor = true;
            } else {
                c.fail("expected a variable or integer");
            }
            if (c.peek() == '*') {
                ++c.pos;
                continue;
            }
            break;
        }
        if (!saw_factor) c.fail("empty term");
        acc[powers] += coeff;
        if (c.peek() == '\0') break;
    }

    int t = t_override > 0 ? t_override : max_var;
    if (t_override > 0 && t_override < max_var)
        throw std::invalid_argument("t override smaller than the largest variable index");
    return collect(t, std::move(acc));
}

std::string render(const GeneralPolynomial& p) {
    if (p.terms.empty()) return "0";
    std::string out;
    for (size_t i = 0; i < p.terms.size(); ++i) {
        const auto& term = p.terms[i];
        long long coeff = term.coeff;
        if (i == 0) {
            if (coeff < 0) out += '-';
        } else {
            out += coeff < 0 ? '-' : '+';
        }
        coeff = std::llabs(coeff);
        bool printed = false;
        if (coeff != 1 || term.total_degree() == 0) {
            out += std::to_string(coeff);
            printed = true;
        }
        for (int v = 0; v < static_cast<int>(term.powers.size()); ++v) {
            if (term.powers[v] == 0) continue;
            if (printed) out += '*';
            out += 'x';
            out += std::to_string(v + 1);
            if (term.powers[v] > 1) {
                out += '^';
                out += std::to_string(term.powers[v]);
            }
            printed = true;
        }
    }
    return out;
}

GeneralPolynomial square(const GeneralPolynomial& p) {
    std::map<std::vector<int>, long long> acc;
    for (const auto& a : p.terms) {
        for (const auto& b : p.terms) {
            std::vector<int> powers(p.t, 0);
            for (int v = 0; v < p.t; ++v) {
                int pa = v < static_cast<int>(a.powers.size()) ? a.powers[v] : 0;
                int pb = v < static_cast<int>(b.powers.size()) ? b.powers[v] : 0;
                powers[v] = pa + pb;
            }
            acc[powers] += a.coeff * b.coeff;
        }
    }
    return collect(p.t, std::move(acc));
}

AttentionPolynomial derive_h_for_p(const GeneralPolynomial& p) {
    const int t = std::max(2, p.t);
    Monomial all;
    for (int v = 1; v <= t; ++v) all.vars.push_back(v);
    return make_polynomial({all});
}

double default_root_gap(int t, int n) {
    return (t + 1) * std::log(static_cast<double>(std::max(2, n))) + std::log(1e6);
}

bool is_root_value(double value) { return std::fabs(value) <= 1e-9; }

RootFindingInstance encode_root_finding(const GeneralPolynomial& p, const std::vector<double>& S,
                                        double c_gap) {
    if (S.empty()) throw std::invalid_argument("root finding: S must be nonempty");
    for (size_t i = 0; i < S.size(); ++i) {
        for (size_t j = i + 1; j < S.size(); ++j) {
            if (S[i] == S[j]) throw std::invalid_argument("root finding: S must hold distinct values");
        }
    }
    if (c_gap <= 0.0) throw std::invalid_argument("root finding: c_gap must be positive");

    RootFindingInstance inst;
    inst.p = p;
    inst.p.t = std::max(2, p.t);
    inst.S = S;
    inst.h = derive_h_for_p(p);
    inst.c_gap = c_gap;
    const int t = inst.h.t;
    const int n = static_cast<int>(S.size());
    const int k0 = std::max(1, p.degree());
    const GeneralPolynomial p2 = square(inst.p);
    const int s0 = static_cast<int>(p2.terms.size());
    // s0 * s > 2 k0 + 1, padding the block count upward; head 2 needs three
    // live columns and the readout needs coordinates 1..t.
    inst.embed_dim = std::max({s0, 2 * k0 + 2, 3, t});

    inst.X = Matrix(n, inst.embed_dim);
    for (int i = 0; i < n; ++i) {
        double v = 1.0;
        for (int q = 0; q <= 2 * k0 && q < inst.embed_dim; ++q) {
            inst.X.at(i, q) = v;
            v *= S[i];
        }
    }

    // Head 1: column j of the inner product carries the j-th monomial of
    // -c_gap * p^2, with the whole gap factor on the lowest participating
    // variable so products stay exact.
    inst.head1.h = inst.h;
    inst.head1.d_scale = 1.0;
    for (int v = 1; v <= t; ++v) inst.head1.Q.push_back(Matrix(n, inst.embed_dim));
    for (int j = 0; j < s0; ++j) {
        const GeneralTerm& term = p2.terms[j];
        int lead = 0;
        for (int v = 1; v <= t; ++v) {
            int e = v <= static_cast<int>(term.powers.size()) ? term.powers[v - 1] : 0;
            if (e > 0) {
                lead = v;
                break;
            }
        }
        for (int v = 1; v <= t; ++v) {
            int e = v <= static_cast<int>(term.powers.size()) ? term.powers[v - 1] : 0;
            Matrix& q = inst.head1.Q[v - 1];
            for (int i = 0; i < n; ++i) {
                double val = 1.0;
                for (int rep = 0; rep < e; ++rep) val *= S[i];
                if (v == lead || (lead == 0 && v == 1)) {
                    val *= -c_gap * static_cast<double>(term.coeff);
                }
                q.at(i, j) = val;
            }
        }
    }
    for (int v = 2; v <= t; ++v) {
        Matrix vm(n, inst.embed_dim);
        for (int i = 0; i < n; ++i) {
            for (int q = 2; q <= t; ++q) vm.at(i, q - 1) = q == v ? S[i] : 1.0;
        }
        inst.head1.V.push_back(std::move(vm));
    }

    // Head 2: exponent -c_gap (y_{l1} - y_{l2})^2, value column 1 carries y,
    // so the row's own element lands in coordinate 1.
    inst.head2.h = inst.h;
    inst.head2.d_scale = 1.0;
    for (int v = 1; v <= t; ++v) inst.head2.Q.push_back(Matrix(n, inst.embed_dim));
    for (int i = 0; i < n; ++i) {
        const double y = S[i];
        inst.head2.Q[0].at(i, 0) = -c_gap * y * y;
        inst.head2.Q[0].at(i, 1) = 2.0 * c_gap * y;
        inst.head2.Q[0].at(i, 2) = -c_gap;
        inst.head2.Q[1].at(i, 0) = 1.0;
        inst.head2.Q[1].at(i, 1) = y;
        inst.head2.Q[1].at(i, 2) = y * y;
        for (int v = 3; v <= t; ++v) {
            inst.head2.Q[v - 1].at(i, 0) = 1.0;
            inst.head2.Q[v - 1].at(i, 1) = 1.0;
            inst.head2.Q[v - 1].at(i, 2) = 1.0;
        }
    }
    for (int v = 2; v <= t; ++v) {
        Matrix vm(n, inst.embed_dim);
        for (int i = 0; i < n; ++i) vm.at(i, 0) = v == 2 ? S[i] : 1.0;
        inst.head2.V.push_back(std::move(vm));
    }
    return inst;
}

namespace {

// The two S elements nearest to x, ties broken toward the smaller value.
std::vector<double> snap_candidates(const std::vector<double>& S, double x) {
    std::vector<double> sorted = S;
    std::sort(sorted.begin(), sorted.end(), [&](double a, double b) {
        double da = std::fabs(a - x), db = std::fabs(b - x);
        if (da != db) return da < db;
        return a < b;
    });
    if (sorted.size() > 2) sorted.resize(2);
    return sorted;
}

} // namespace

std::optional<std::vector<double>> solve_root_finding(const RootFindingInstance& inst) {
    const int t = inst.h.t;
    const int n = static_cast<int>(inst.S.size());
    // Stabilized evaluation: rows whose completions all have large p^2 would
    // otherwise underflow every weight; the shift keeps their softmax defined
    // (those rows then fail verification and are skipped).
    BruteForceOptions opts;
    opts.stabilize = true;
    AttentionOutput out1 = attend_bruteforce(inst.head1, opts);
    AttentionOutput out2 = attend_bruteforce(inst.head2, opts);

    for (int l1 = 0; l1 < n; ++l1) {
        std::vector<std::vector<double>> candidates(t);
        for (int q = 0; q < t; ++q) {
            const double coord = out1.out.at(l1, q) + out2.out.at(l1, q);
            candidates[q] = snap_candidates(inst.S, coord);
        }
        // Nearest snap first, then the second-nearest retries: at most 2^t
        // combinations per row.
        std::vector<size_t> pick(t, 0);
        while (true) {
            std::vector<double> y(t);
            bool valid = true;
            for (int q = 0; q < t; ++q) {
                if (pick[q] >= candidates[q].size()) {
                    valid = false;
                    break;
                }
                y[q] = candidates[q][pick[q]];
            }
            if (valid && is_root_value(inst.p.eval(y))) return y;
            int pos = t - 1;
            while (pos >= 0 && ++pick[pos] == 2) pick[pos--] = 0;
            if (pos < 0) break;
        }
    }
    return std::nullopt;
}

std::string root_task_to_json(const GeneralPolynomial& p, const std::vector<double>& S) {
    nlohmann::json j;
    j["p"] = render(p);
    j["S"] = S;
    return j.dump();
}

void root_task_from_json(const std::string& text, GeneralPolynomial* p, std::vector<double>* S) {
    nlohmann::json j = nlohmann::json::parse(text);
    *p = parse_general_polynomial(j.at("p").get<std::string>());
    *S = j.at("S").get<std::vector<double>>();
}

std::optional<std::vector<double>> brute_force_root_scan(const GeneralPolynomial& p,
                                                         const std::vector<double>& S) {
    const int t = std::max(2, p.t);
    const int n = static_cast<int>(S.size());
    std::vector<int> idx(t, 0);
    std::vector<double> y(t);
    while (true) {
        for (int q = 0; q < t; ++q) y[q] = S[idx[q]];
        if (is_root_value(p.eval(y))) return y;
        int pos = t - 1;
        while (pos >= 0 && ++idx[pos] == n) idx[pos--] = 0;
        if (pos < 0) return std::nullopt;
    }
}

} // namespace polyattn
