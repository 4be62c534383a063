#pragma once

#include <string>

#include "polyattn/matrix.hpp"

namespace polyattn {

// CSV matrix format: one row per line, comma-separated decimal floats,
// dimensions inferred. The writer emits 17 significant digits.
Matrix read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Matrix& m);

Matrix parse_matrix_csv(const std::string& text, const std::string& origin);

} // namespace polyattn
