#include "polyattn/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace polyattn {

Matrix parse_matrix_csv(const std::string& text, const std::string& origin) {
    std::vector<std::vector<double>> rows;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<double> row;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            size_t consumed = 0;
            double v = 0.0;
            try {
                v = std::stod(cell, &consumed);
            } catch (const std::exception&) {
                throw std::invalid_argument(origin + ": bad number '" + cell + "'");
            }
            if (cell.find_first_not_of(" \t\r", consumed) != std::string::npos)
                throw std::invalid_argument(origin + ": trailing junk in cell '" + cell + "'");
            row.push_back(v);
        }
        if (row.empty()) throw std::invalid_argument(origin + ": empty row");
        if (!rows.empty() && row.size() != rows[0].size())
            throw std::invalid_argument(origin + ": ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::invalid_argument(origin + ": no data");
    Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int i = 0; i < m.rows; ++i) {
        for (int j = 0; j < m.cols; ++j) m.at(i, j) = rows[i][j];
    }
    m.require_finite(origin);
    return m;
}

Matrix read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open matrix file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_matrix_csv(buf.str(), path);
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write matrix file: " + path);
    char buf[64];
    for (int i = 0; i < m.rows; ++i) {
        for (int j = 0; j < m.cols; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m.at(i, j));
            if (j > 0) out << ',';
            out << buf;
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace polyattn
