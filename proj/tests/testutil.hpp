#pragma once

// Helpers shared by the unit and acceptance suites. The naive attention
// evaluator here is written against the defining formula with scalar loops
// only, independent of the library's engine code paths.

#include <cmath>
#include <vector>

#include "polyattn/exact.hpp"
#include "polyattn/instgen.hpp"
#include "polyattn/poly.hpp"

namespace testutil {

using polyattn::AttentionInputs;
using polyattn::Matrix;

// Direct scalar-loop softmax attention over all index tuples; no shared code
// with the engines beyond the Matrix container.
inline Matrix naive_attention(const AttentionInputs& in) {
    const int t = in.h.t;
    const int n = in.Q[1].rows;
    const int n1 = in.Q[0].rows;
    const int d = in.Q[0].cols;
    const double scale = in.scale();
    Matrix out(n1, d);

    std::vector<int> idx(t - 1, 0);
    for (int l1 = 0; l1 < n1; ++l1) {
        std::vector<double> num(d, 0.0);
        double den = 0.0;
        std::fill(idx.begin(), idx.end(), 0);
        while (true) {
            double e = 0.0;
            for (const auto& mono : in.h.monomials) {
                for (int c = 0; c < d; ++c) {
                    double prod = 1.0;
                    for (int v : mono.vars) {
                        prod *= v == 1 ? in.Q[0].at(l1, c) : in.Q[v - 1].at(idx[v - 2], c);
                    }
                    e += prod;
                }
            }
            const double w = std::exp(e / scale);
            den += w;
            for (int c = 0; c < d; ++c) {
                double prod = w;
                for (int j = 2; j <= t; ++j) prod *= in.V[j - 2].at(idx[j - 2], c);
                num[c] += prod;
            }
            int pos = t - 2;
            while (pos >= 0 && ++idx[pos] == n) idx[pos--] = 0;
            if (pos < 0) break;
        }
        for (int c = 0; c < d; ++c) out.at(l1, c) = num[c] / den;
    }
    return out;
}

inline double max_abs(const Matrix& m) {
    double v = 0.0;
    for (double x : m.data) v = std::max(v, std::fabs(x));
    return v;
}

} // namespace testutil
