#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lmem/types.hpp"

namespace lmem::csv {

/// Shortest round-trip text for a double ("%.17g"); NaN and inf are spelled
/// "nan", "inf", "-inf".
std::string format(double x);

/// Matrix with a one-line header: `corner,<col_labels...>`; each row starts
/// with its row label.
std::string matrix_text(const Matrix& m, const std::string& corner, const Vector& col_labels,
                        const Vector& row_labels);

/// Plain table: header line plus rows of preformatted cells.
std::string table_text(const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows);

void write_file(const std::filesystem::path& path, const std::string& text);

/// Numeric matrix from a comma-separated file. Lines starting with '#' and a
/// leading non-numeric header line are skipped.
Matrix read_matrix(const std::filesystem::path& path);

}  // namespace lmem::csv
