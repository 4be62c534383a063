#include "polyattn/compose.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace polyattn {

void CompositionInstance::validate() const {
    if (r < 2) throw std::invalid_argument("composition: r must be >= 2");
    if (n < 2) throw std::invalid_argument("composition: n must be >= 2");
    if (static_cast<int>(f.size()) != r) throw std::invalid_argument("composition: expected r functions");
    for (const auto& fj : f) {
        if (static_cast<int>(fj.size()) != n)
            throw std::invalid_argument("composition: every function needs n values");
        for (int v : fj) {
            if (v < 1 || v > n) throw std::invalid_argument("composition: function value outside [1, n]");
        }
    }
    if (x < 1 || x > n) throw std::invalid_argument("composition: start value outside [1, n]");
}

int compose_direct(const CompositionInstance& inst) {
    inst.validate();
    int v = inst.x;
    for (int j = 0; j < inst.r; ++j) v = inst.f[j][v - 1];
    return v;
}

AttentionPolynomial build_chain_polynomial(int r) {
    if (r < 2) throw std::invalid_argument("chain polynomial: r must be >= 2");
    std::vector<Monomial> ms;
    for (int j = 1; j <= r; ++j) ms.push_back(Monomial{{j, j + 1}});
    return make_polynomial(std::move(ms));
}

CompositionEncoding encode_composition(const CompositionInstance& inst, double A) {
    inst.validate();
    if (!(A > std::sqrt(static_cast<double>(inst.r) + 2.0))) {
        std::ostringstream os;
        os << "composition: scale A = " << A << " must exceed sqrt(r + 2) = "
           << std::sqrt(static_cast<double>(inst.r) + 2.0);
        throw std::invalid_argument(os.str());
    }
    const int r = inst.r;
    const int n = inst.n;
    const int N = inst.token_count();
    const int width = 3 * (r + 1);
    const double a = A * std::sqrt(std::log(static_cast<double>(n)));

    // Token sequence: block j holds f_j, the final token holds x.
    std::vector<int> phi(N + 1, 0);  // 1-based
    for (int j = 1; j <= r; ++j) {
        for (int l = 1; l <= n; ++l) phi[l + (j - 1) * n] = inst.f[j - 1][l - 1];
    }
    phi[N] = inst.x;

    CompositionEncoding enc;
    enc.h_chain = build_chain_polynomial(r);
    enc.scale_a = A;
    // The softmax gap analysis runs on the raw exponent -A^2 ln(n) * mismatch,
    // so the encoding pins d_scale to 1 instead of the matrix width.
    enc.d_scale = 1.0;
    enc.r = r;
    enc.n = n;

    for (int j = 1; j <= r + 1; ++j) {
        Matrix q(N, width);
        for (int l = 1; l <= N; ++l) {
            double* row = q.row_ptr(l - 1);
            const double p = static_cast<double>(phi[l]);
            if (j == 1) {
                row[0] = a * p * p;
                row[1] = a * p;
                row[2] = a;
            } else {
                const double m = static_cast<double>(l - (j - 2) * n);
                double* pointer = row + 3 * (j - 2);
                pointer[0] = -a;
                pointer[1] = a * 2.0 * m;
                pointer[2] = -a * m * m;
                double* self = row + 3 * (j - 1);
                self[0] = a * p * p;
                self[1] = a * p;
                self[2] = a;
            }
        }
        enc.Q.push_back(std::move(q));
    }

    // Value matrices: pass-through ones for the inner variables; the last one
    // carries the block-offset answer phi(l) + (r-1)n so the decode step can
    // strip a fixed offset.
    for (int j = 2; j <= r + 1; ++j) {
        Matrix v(N, width);
        for (int l = 1; l <= N; ++l) {
            v.at(l - 1, 0) = (j == r + 1)
                                 ? static_cast<double>(phi[l] + (r - 1) * n)
                                 : 1.0;
        }
        enc.V.push_back(std::move(v));
    }
    return enc;
}

CompositionResult solve_composition(const CompositionEncoding& enc) {
    AttentionInputs in;
    in.h = enc.h_chain;
    in.Q = enc.Q;
    in.V = enc.V;
    in.d_scale = enc.d_scale;
    AttentionOutput out = attend_tree(in);

    CompositionResult res;
    res.raw = out.out.at(enc.r * enc.n, 0);  // row N (1-based), column 1
    const long long rounded = std::llround(res.raw);
    const long long lo = 1 + static_cast<long long>(enc.r - 1) * enc.n;
    const long long hi = static_cast<long long>(enc.r) * enc.n;
    if (rounded < lo || rounded > hi) {
        res.ok = false;
        return res;
    }
    res.ok = true;
    res.value = static_cast<int>(rounded - (enc.r - 1) * enc.n);
    return res;
}

std::string composition_to_json(const CompositionInstance& inst) {
    nlohmann::json j;
    j["r"] = inst.r;
    j["n"] = inst.n;
    j["f"] = inst.f;
    j["x"] = inst.x;
    return j.dump();
}

CompositionInstance composition_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    CompositionInstance inst;
    inst.r = j.at("r").get<int>();
    inst.n = j.at("n").get<int>();
    inst.f = j.at("f").get<std::vector<std::vector<int>>>();
    inst.x = j.at("x").get<int>();
    inst.validate();
    return inst;
}

} // namespace polyattn
