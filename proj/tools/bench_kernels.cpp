// Kernel benchmark: OpenMP kernels against their serial references.
// Emits CSV (kernel, n, serial_ns, parallel_ns, speedup) and checks that the
// two paths agree bitwise before timing.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

#include "polyattn/matrix.hpp"
#include "polyattn/reference.hpp"
#include "polyattn/rng.hpp"

using namespace polyattn;

namespace {

int64_t now_ns() {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

Matrix random_matrix(int r, int c, SplitMix64& rng) {
    Matrix m(r, c);
    for (double& v : m.data) v = rng.uniform(-1.0, 1.0);
    return m;
}

template <typename F>
int64_t best_of(int reps, F&& fn) {
    int64_t best = INT64_MAX;
    for (int i = 0; i < reps; ++i) {
        const int64_t start = now_ns();
        fn();
        const int64_t t = now_ns() - start;
        if (t < best) best = t;
    }
    return best;
}

} // namespace

int main(int argc, char** argv) {
    const int reps = argc > 1 ? std::atoi(argv[1]) : 3;
    std::vector<int> sizes = {128, 256, 512, 1024};
    if (argc > 2) {
        sizes.clear();
        for (int i = 2; i < argc; ++i) sizes.push_back(std::atoi(argv[i]));
    }

#if defined(_OPENMP)
    std::printf("# threads=%d\n", omp_get_max_threads());
#else
    std::printf("# threads=1 (compiled without OpenMP)\n");
#endif
    std::printf("kernel,n,serial_ns,parallel_ns,speedup\n");

    SplitMix64 rng(7);
    for (int n : sizes) {
        Matrix a = random_matrix(n, n, rng);
        Matrix b = random_matrix(n, n, rng);

        {
            // The comparison doubles as a warm-up for both paths.
            Matrix ref = reference::matmul(a, b);
            Matrix par = matmul(a, b);
            if (!(ref == par)) {
                std::fprintf(stderr, "matmul mismatch at n=%d\n", n);
                return 1;
            }
            int64_t ts = best_of(reps, [&] { reference::matmul(a, b); });
            int64_t tp = best_of(reps, [&] { matmul(a, b); });
            std::printf("matmul,%d,%lld,%lld,%.2f\n", n, static_cast<long long>(ts),
                        static_cast<long long>(tp), static_cast<double>(ts) / tp);
        }
        {
            Matrix ref = reference::entrywise_exp(a, 0.5);
            Matrix par = entrywise_exp(a, 0.5);
            if (!(ref == par)) {
                std::fprintf(stderr, "entrywise_exp mismatch at n=%d\n", n);
                return 1;
            }
            int64_t ts = best_of(reps, [&] { reference::entrywise_exp(a, 0.5); });
            int64_t tp = best_of(reps, [&] { entrywise_exp(a, 0.5); });
            std::printf("entrywise_exp,%d,%lld,%lld,%.2f\n", n, static_cast<long long>(ts),
                        static_cast<long long>(tp), static_cast<double>(ts) / tp);
        }
        {
            Matrix wide_a = random_matrix(n, 64, rng);
            Matrix wide_b = random_matrix(64, 64, rng);
            Matrix kr_b = random_matrix(n >= 64 ? 64 : n, 64, rng);
            Matrix ref = reference::rowwise_kron(wide_a, kr_b);
            Matrix par = rowwise_kron(wide_a, kr_b);
            if (!(ref == par)) {
                std::fprintf(stderr, "rowwise_kron mismatch at n=%d\n", n);
                return 1;
            }
            (void)wide_b;
            int64_t ts = best_of(reps, [&] { reference::rowwise_kron(wide_a, kr_b); });
            int64_t tp = best_of(reps, [&] { rowwise_kron(wide_a, kr_b); });
            std::printf("rowwise_kron,%d,%lld,%lld,%.2f\n", n, static_cast<long long>(ts),
                        static_cast<long long>(tp), static_cast<double>(ts) / tp);
        }
    }
    return 0;
}
