#pragma once

#include <cmath>

#include "polyattn/matrix.hpp"

// Serial reference kernels: the same index-increasing loops as the OpenMP
// versions, with no pragmas. Tests compare against these bitwise; the kernel
// benchmark measures the speedup of the parallel versions over them.
namespace polyattn::reference {

inline Matrix matmul(const Matrix& A, const Matrix& B) {
    Matrix C(A.rows, B.cols);
    for (int i = 0; i < A.rows; ++i) {
        for (int j = 0; j < B.cols; ++j) {
            double acc = 0.0;
            for (int k = 0; k < A.cols; ++k) {
                acc += A.at(i, k) * B.at(k, j);
            }
            C.at(i, j) = acc;
        }
    }
    return C;
}

inline Matrix hadamard(const Matrix& A, const Matrix& B) {
    Matrix C(A.rows, A.cols);
    for (size_t i = 0; i < C.data.size(); ++i) C.data[i] = A.data[i] * B.data[i];
    return C;
}

inline Matrix rowwise_kron(const Matrix& A, const Matrix& B) {
    Matrix C(A.rows * B.rows, A.cols);
    for (int i = 0; i < A.rows; ++i) {
        for (int j = 0; j < B.rows; ++j) {
            double* out = C.row_ptr(i * B.rows + j);
            const double* a = A.row_ptr(i);
            const double* b = B.row_ptr(j);
            for (int c = 0; c < A.cols; ++c) out[c] = a[c] * b[c];
        }
    }
    return C;
}

inline Matrix entrywise_exp(const Matrix& A, double scale) {
    Matrix C(A.rows, A.cols);
    for (size_t i = 0; i < C.data.size(); ++i) C.data[i] = std::exp(scale * A.data[i]);
    return C;
}

// diag of the fully materialized chain product.
inline std::vector<double> diag_full_product(const std::vector<const Matrix*>& ms) {
    Matrix P = *ms[0];
    for (size_t q = 1; q < ms.size(); ++q) P = reference::matmul(P, *ms[q]);
    std::vector<double> d(P.rows);
    for (int i = 0; i < P.rows; ++i) d[i] = P.at(i, i);
    return d;
}

} // namespace polyattn::reference
