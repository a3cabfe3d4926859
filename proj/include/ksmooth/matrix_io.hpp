#pragma once

// Plain-text matrix format:
//
//   dim <rows> <cols>
//   <re> <im>          one line per entry, row-major
//
// Values are written with 17 significant digits so a save/load round trip is
// exact.

#include "ksmooth/linalg.hpp"

#include <filesystem>
#include <iosfwd>

namespace ksmooth {

void write_matrix(std::ostream& os, const Matrix& m);
Matrix read_matrix(std::istream& is);

void save_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix load_matrix(const std::filesystem::path& path);

}  // namespace ksmooth
