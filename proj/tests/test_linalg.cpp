#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "polyattn/io.hpp"
#include "polyattn/matrix.hpp"
#include "polyattn/reference.hpp"
#include "polyattn/rng.hpp"

using namespace polyattn;

namespace {

Matrix random_matrix(int r, int c, SplitMix64& rng, double lo = -1, double hi = 1) {
    Matrix m(r, c);
    for (double& v : m.data) v = rng.uniform(lo, hi);
    return m;
}

Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows.begin()->size()));
    int i = 0;
    for (const auto& row : rows) {
        int j = 0;
        for (double v : row) m.at(i, j++) = v;
        ++i;
    }
    return m;
}

} // namespace

TEST_CASE("matmul basics") {
    Matrix a = from_rows({{1, 2}, {3, 4}});
    CHECK(matmul(Matrix::identity(2), a) == a);
    Matrix b = from_rows({{0}, {1}});
    Matrix c = matmul(a, b);
    CHECK(c.rows == 2);
    CHECK(c.cols == 1);
    CHECK(c.at(0, 0) == 2);
    CHECK(c.at(1, 0) == 4);
    CHECK_THROWS(matmul(a, Matrix(3, 2)));
}

TEST_CASE("matmul matches the serial reference bitwise") {
    SplitMix64 rng(1);
    for (int trial = 0; trial < 10; ++trial) {
        Matrix a = random_matrix(5, 5, rng);
        Matrix b = random_matrix(5, 5, rng);
        CHECK(matmul(a, b) == reference::matmul(a, b));
    }
    // Rectangular shapes too.
    Matrix a = random_matrix(7, 3, rng);
    Matrix b = random_matrix(3, 9, rng);
    CHECK(matmul(a, b) == reference::matmul(a, b));
}

TEST_CASE("matmul associativity within 1e-9") {
    SplitMix64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        Matrix a = random_matrix(6, 6, rng);
        Matrix b = random_matrix(6, 6, rng);
        Matrix c = random_matrix(6, 6, rng);
        Matrix left = matmul(matmul(a, b), c);
        Matrix right = matmul(a, matmul(b, c));
        for (size_t i = 0; i < left.data.size(); ++i) {
            CHECK(std::fabs(left.data[i] - right.data[i]) <= 1e-9);
        }
        // Deterministic summation: repeat runs are bitwise equal.
        CHECK(matmul(matmul(a, b), c) == left);
    }
}

TEST_CASE("hadamard") {
    Matrix a = from_rows({{1, 2}, {3, 4}});
    Matrix b = from_rows({{5, 6}, {7, 8}});
    CHECK(hadamard(a, b) == from_rows({{5, 12}, {21, 32}}));
    CHECK(hadamard(a, Matrix::ones(2, 2)) == a);
    CHECK(hadamard(a, Matrix(2, 2)) == Matrix(2, 2));
    CHECK_THROWS(hadamard(a, Matrix(2, 3)));
}

TEST_CASE("rowwise_kron definition and shapes") {
    Matrix a = from_rows({{1, 2}});
    Matrix b = from_rows({{3, 4}, {5, 6}});
    CHECK(rowwise_kron(a, b) == from_rows({{3, 8}, {5, 12}}));
    Matrix ones_row = Matrix::ones(1, 2);
    Matrix c = from_rows({{1, 2}, {3, 4}});
    CHECK(rowwise_kron(c, ones_row) == c);
    CHECK(rowwise_kron(Matrix(2, 3), Matrix(4, 3)).rows == 8);
    CHECK(rowwise_kron(Matrix(2, 3), Matrix(4, 3)).cols == 3);
    CHECK_THROWS(rowwise_kron(Matrix(2, 3), Matrix(2, 4)));
}

TEST_CASE("rowwise_kron index pattern under row permutation") {
    SplitMix64 rng(3);
    Matrix a = random_matrix(3, 4, rng);
    Matrix b = random_matrix(2, 4, rng);
    Matrix k = rowwise_kron(a, b);
    // Row (i-1)*m + j is A_i (.) B_j: check every pair explicitly.
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 2; ++j) {
            for (int c = 0; c < 4; ++c) {
                CHECK(k.at(i * 2 + j, c) == a.at(i, c) * b.at(j, c));
            }
        }
    }
}

TEST_CASE("entrywise_exp") {
    CHECK(entrywise_exp(Matrix(3, 2), 1.0) == Matrix::ones(3, 2));
    Matrix one = from_rows({{1}});
    CHECK(entrywise_exp(one, 1.0).at(0, 0) == doctest::Approx(std::exp(1.0)));
    SplitMix64 rng(4);
    Matrix grid = random_matrix(6, 6, rng, -3, 3);
    Matrix e = entrywise_exp(grid, 0.7);
    for (size_t i = 0; i < e.data.size(); ++i) {
        CHECK(e.data[i] == std::exp(0.7 * grid.data[i]));  // scalar oracle, bitwise
    }
    Matrix big = from_rows({{800.0}});
    CHECK_THROWS_AS(entrywise_exp(big, 1.0), std::domain_error);
    try {
        entrywise_exp(big, 1.0);
    } catch (const std::domain_error& err) {
        CHECK(std::string(err.what()).find("800") != std::string::npos);  // names the input
    }
}

TEST_CASE("diag_of_chain vs full product") {
    SplitMix64 rng(5);
    SUBCASE("identity") {
        Matrix i2 = Matrix::identity(2);
        std::vector<const Matrix*> chain = {&i2, &i2};
        CHECK(diag_of_chain(chain) == std::vector<double>{1.0, 1.0});
    }
    SUBCASE("pair") {
        Matrix a = random_matrix(3, 3, rng);
        Matrix b = random_matrix(3, 3, rng);
        std::vector<const Matrix*> chain = {&a, &b};
        auto got = diag_of_chain(chain);
        auto want = reference::diag_full_product(chain);
        for (int i = 0; i < 3; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
    SUBCASE("triple and longer") {
        for (int len = 3; len <= 5; ++len) {
            std::vector<Matrix> ms;
            for (int i = 0; i < len; ++i) ms.push_back(random_matrix(4, 4, rng));
            std::vector<const Matrix*> chain;
            for (auto& m : ms) chain.push_back(&m);
            auto got = diag_of_chain(chain);
            auto want = reference::diag_full_product(chain);
            for (int i = 0; i < 4; ++i) CHECK(std::fabs(got[i] - want[i]) <= 1e-12);
        }
    }
    SUBCASE("n <= 16 tolerance 1e-12") {
        Matrix a = random_matrix(16, 16, rng);
        Matrix b = random_matrix(16, 16, rng);
        Matrix c = random_matrix(16, 16, rng);
        std::vector<const Matrix*> chain = {&a, &b, &c};
        auto got = diag_of_chain(chain);
        auto want = reference::diag_full_product(chain);
        for (int i = 0; i < 16; ++i) CHECK(std::fabs(got[i] - want[i]) <= 1e-12);
    }
    SUBCASE("shape mismatch") {
        Matrix a(2, 3), b(2, 2);
        std::vector<const Matrix*> chain = {&a, &b};
        CHECK_THROWS(diag_of_chain(chain));
    }
}

TEST_CASE("csv round trip at 17 significant digits") {
    SplitMix64 rng(6);
    Matrix m = random_matrix(4, 3, rng);
    m.at(0, 0) = 1.0 / 3.0;
    m.at(1, 2) = -1e-17;
    const std::string path = "test_linalg_roundtrip.csv";
    write_matrix_csv(path, m);
    Matrix back = read_matrix_csv(path);
    CHECK(back == m);  // 17 significant digits restore doubles exactly
    std::remove(path.c_str());

    CHECK_THROWS(parse_matrix_csv("1,2\n3\n", "test"));
    CHECK_THROWS(parse_matrix_csv("", "test"));
    CHECK_THROWS(parse_matrix_csv("1,abc\n", "test"));
}

TEST_CASE("finite-entry contract") {
    Matrix m(2, 2);
    m.at(0, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS(m.require_finite("test"));
    CHECK_THROWS(parse_matrix_csv("1,inf\n", "test"));
}
