#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "jbmir/grid.hpp"

namespace jbmir {

/// Dense row-major table read from or written to CSV; '#' lines are header comments.
struct CsvMatrix {
    std::vector<std::string> comments;  // without the leading "# "
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
};

/// Round-trip exact (17 significant digits).
void write_csv_matrix(const std::filesystem::path& path, const CsvMatrix& m);
/// Throws DataError naming the path on a missing file or ragged/non-numeric content.
CsvMatrix read_csv_matrix(const std::filesystem::path& path);

/// ny rows by nx values, row 0 = top, no header.
void write_field_csv(const std::filesystem::path& path, const ScalarField& f);
ScalarField read_field_csv(const std::filesystem::path& path, const GridGeometry& g);

struct DisplayWindow {
    double lo = 0.0;
    double hi = 1.0;
};

/// 16-bit binary PGM (P5, maxval 65535), values clipped to the window and mapped linearly.
/// The window is recorded as a header comment.
void write_field_pgm(const std::filesystem::path& path, const ScalarField& f, DisplayWindow w);

}  // namespace jbmir
