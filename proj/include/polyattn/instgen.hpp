#pragma once

#include "polyattn/exact.hpp"
#include "polyattn/poly.hpp"
#include "polyattn/rng.hpp"

namespace polyattn {

// Seeded random instance: every Q and V entry uniform in [-bound, bound],
// drawn in a fixed (matrix, row, column) order so runs are bit-reproducible.
inline AttentionInputs random_inputs(const AttentionPolynomial& h, int n, int d, double bound,
                                     uint64_t seed, double d_scale = 0.0) {
    SplitMix64 rng(seed);
    AttentionInputs in;
    in.h = h;
    in.d_scale = d_scale;
    for (int j = 0; j < h.t; ++j) {
        Matrix q(n, d);
        for (double& v : q.data) v = rng.uniform(-bound, bound);
        in.Q.push_back(std::move(q));
    }
    for (int j = 0; j < h.t - 1; ++j) {
        Matrix v(n, d);
        for (double& x : v.data) x = rng.uniform(-bound, bound);
        in.V.push_back(std::move(v));
    }
    return in;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        double diff = a.data[i] - b.data[i];
        if (diff < 0) diff = -diff;
        if (diff > m) m = diff;
    }
    return m;
}

} // namespace polyattn
