#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace polyattn {

// Dense row-major double matrix. Kernels use a fixed index-increasing
// summation order so repeat runs are bitwise identical; the OpenMP variants
// only split independent output elements across threads and preserve that
// order within each element.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

    double& at(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
    double at(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }
    double* row_ptr(int i) { return data.data() + static_cast<size_t>(i) * cols; }
    const double* row_ptr(int i) const { return data.data() + static_cast<size_t>(i) * cols; }

    static Matrix zeros(int r, int c) { return Matrix(r, c); }
    static Matrix ones(int r, int c);
    static Matrix identity(int n);

    // Throws if any entry is NaN or infinite (construction-time contract for
    // user-facing inputs).
    void require_finite(const std::string& what) const;

    bool operator==(const Matrix& o) const {
        return rows == o.rows && cols == o.cols && data == o.data;
    }
};

// C = A * B, exact triple loop, inner index k ascending.
Matrix matmul(const Matrix& A, const Matrix& B);

// Entry-wise product; shapes must match.
Matrix hadamard(const Matrix& A, const Matrix& B);

// Row-wise Kronecker (Khatri-Rao on rows): row (i-1)*m + j of the result is
// A_i (Hadamard) B_j. Column counts must match.
Matrix rowwise_kron(const Matrix& A, const Matrix& B);

// Entry-wise exp(scale * a). Rejects results that overflow to Inf, naming the
// largest offending input.
Matrix entrywise_exp(const Matrix& A, double scale);

// diag(M1 * M2 * ... * Mq) for a telescoping chain whose product is square
// (typically all factors n x n), chain length >= 2. Full products for the
// first q-2 factors, then an O(n^2) diagonal step.
std::vector<double> diag_of_chain(const std::vector<const Matrix*>& ms);

Matrix transpose(const Matrix& A);

// A * diag(v): scales column j of A by v[j].
Matrix scale_columns(const Matrix& A, const std::vector<double>& v);

// diag(v) * A: scales row i of A by v[i].
Matrix scale_rows(const std::vector<double>& v, const Matrix& A);

} // namespace polyattn
