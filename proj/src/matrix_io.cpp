#include "kspec/matrix_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>

namespace kspec {

namespace {

static_assert(std::endian::native == std::endian::little, "binary export assumes a little-endian host");

void put_u32(std::ofstream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }

std::uint32_t get_u32(std::ifstream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  return v;
}

}  // namespace

void write_binary(const std::string& path, const Matrix& M) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  put_u32(out, static_cast<std::uint32_t>(M.rows()));
  put_u32(out, static_cast<std::uint32_t>(M.cols()));
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      double v = M(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  if (!out) throw std::runtime_error("write failed for " + path);
}

Matrix read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::uint32_t rows = get_u32(in), cols = get_u32(in);
  Matrix M(rows, cols);
  for (std::uint32_t i = 0; i < rows; ++i)
    for (std::uint32_t j = 0; j < cols; ++j) {
      double v = 0;
      in.read(reinterpret_cast<char*>(&v), sizeof v);
      M(i, j) = v;
    }
  if (!in) throw std::runtime_error("truncated matrix file " + path);
  return M;
}

void write_csv(const std::string& path, const Matrix& M) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) out << (j ? "," : "") << M(i, j);
    out << '\n';
  }
}

}  // namespace kspec
