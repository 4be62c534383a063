#include "polyattn/matrix.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace polyattn {

namespace {

void require_shape(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

std::string shape_str(const Matrix& m) {
    return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

} // namespace

Matrix Matrix::ones(int r, int c) {
    Matrix m(r, c);
    std::fill(m.data.begin(), m.data.end(), 1.0);
    return m;
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

void Matrix::require_finite(const std::string& what) const {
    for (double v : data) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument(what + ": matrix has a non-finite entry");
        }
    }
}

Matrix matmul(const Matrix& A, const Matrix& B) {
    require_shape(A.cols == B.rows, "matmul: inner dimensions disagree (" + shape_str(A) + " * " + shape_str(B) + ")");
    Matrix C(A.rows, B.cols);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < A.rows; ++i) {
        const double* a = A.row_ptr(i);
        double* c = C.row_ptr(i);
        for (int j = 0; j < B.cols; ++j) {
            double acc = 0.0;
            for (int k = 0; k < A.cols; ++k) {
                acc += a[k] * B.at(k, j);
            }
            c[j] = acc;
        }
    }
    return C;
}

Matrix hadamard(const Matrix& A, const Matrix& B) {
    require_shape(A.rows == B.rows && A.cols == B.cols,
                  "hadamard: shapes disagree (" + shape_str(A) + " vs " + shape_str(B) + ")");
    Matrix C(A.rows, A.cols);
    const long total = static_cast<long>(C.data.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < total; ++i) {
        C.data[i] = A.data[i] * B.data[i];
    }
    return C;
}

Matrix rowwise_kron(const Matrix& A, const Matrix& B) {
    require_shape(A.cols == B.cols,
                  "rowwise_kron: column counts disagree (" + shape_str(A) + " vs " + shape_str(B) + ")");
    Matrix C(A.rows * B.rows, A.cols);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < A.rows; ++i) {
        const double* a = A.row_ptr(i);
        for (int j = 0; j < B.rows; ++j) {
            const double* b = B.row_ptr(j);
            double* out = C.row_ptr(i * B.rows + j);
            for (int c = 0; c < A.cols; ++c) out[c] = a[c] * b[c];
        }
    }
    return C;
}

Matrix entrywise_exp(const Matrix& A, double scale) {
    Matrix C(A.rows, A.cols);
    const long total = static_cast<long>(C.data.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < total; ++i) {
        C.data[i] = std::exp(scale * A.data[i]);
    }
    for (long i = 0; i < total; ++i) {
        if (std::isinf(C.data[i])) {
            std::ostringstream os;
            os << "entrywise_exp: overflow at input " << A.data[i] << " (scale " << scale
               << "); entries exceed the safe exponent bound";
            throw std::domain_error(os.str());
        }
    }
    return C;
}

std::vector<double> diag_of_chain(const std::vector<const Matrix*>& ms) {
    require_shape(ms.size() >= 2, "diag_of_chain: chain length must be >= 2");
    const int n = ms[0]->rows;
    for (size_t q = 0; q + 1 < ms.size(); ++q) {
        require_shape(ms[q]->cols == ms[q + 1]->rows, "diag_of_chain: factors do not chain");
    }
    require_shape(ms.back()->cols == n, "diag_of_chain: chain ends must close to a square product");
    Matrix P = *ms[0];
    for (size_t q = 1; q + 1 < ms.size(); ++q) P = matmul(P, *ms[q]);
    const Matrix& last = *ms.back();
    std::vector<double> diag(n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const double* p = P.row_ptr(i);
        double acc = 0.0;
        for (int j = 0; j < last.rows; ++j) acc += p[j] * last.at(j, i);
        diag[i] = acc;
    }
    return diag;
}

Matrix transpose(const Matrix& A) {
    Matrix T(A.cols, A.rows);
    for (int i = 0; i < A.rows; ++i) {
        for (int j = 0; j < A.cols; ++j) T.at(j, i) = A.at(i, j);
    }
    return T;
}

Matrix scale_columns(const Matrix& A, const std::vector<double>& v) {
    require_shape(static_cast<int>(v.size()) == A.cols, "scale_columns: vector length must match cols");
    Matrix C(A.rows, A.cols);
    for (int i = 0; i < A.rows; ++i) {
        const double* a = A.row_ptr(i);
        double* c = C.row_ptr(i);
        for (int j = 0; j < A.cols; ++j) c[j] = a[j] * v[j];
    }
    return C;
}

Matrix scale_rows(const std::vector<double>& v, const Matrix& A) {
    require_shape(static_cast<int>(v.size()) == A.rows, "scale_rows: vector length must match rows");
    Matrix C(A.rows, A.cols);
    for (int i = 0; i < A.rows; ++i) {
        const double* a = A.row_ptr(i);
        double* c = C.row_ptr(i);
        for (int j = 0; j < A.cols; ++j) c[j] = v[i] * a[j];
    }
    return C;
}

} // namespace polyattn
