#include "ksmooth/matrix_io.hpp"

#include "ksmooth/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace ksmooth {

void write_matrix(std::ostream& os, const Matrix& m) {
  os << "dim " << m.rows() << " " << m.cols() << "\n";
  char buf[96];
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g %.17g\n", m(r, c).real(), m(r, c).imag());
      os << buf;
    }
}

Matrix read_matrix(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("matrix file: missing header line");
  std::istringstream header(line);
  std::string tag;
  long rows = 0, cols = 0;
  if (!(header >> tag >> rows >> cols) || tag != "dim" || rows <= 0 || cols <= 0)
    throw IoError("matrix file: header must read 'dim <rows> <cols>', got '" + line + "'");

  Matrix m(rows, cols);
  long lineno = 1;
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c) {
      ++lineno;
      if (!std::getline(is, line))
        throw IoError("matrix file: truncated at line " + std::to_string(lineno));
      std::istringstream entry(line);
      double re = 0, im = 0;
      if (!(entry >> re >> im))
        throw IoError("matrix file: line " + std::to_string(lineno) + " is not a 're im' pair");
      m(r, c) = cplx(re, im);
    }
  return m;
}

void save_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_matrix(os, m);
  if (!os) throw IoError("write failed for " + path.string());
}

Matrix load_matrix(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  return read_matrix(is);
}

}  // namespace ksmooth
