#pragma once

#include <string>

#include "kspec/ensembles.hpp"

namespace kspec {

// Little-endian row-major doubles after an 8-byte header: uint32 rows, uint32 cols.
void write_binary(const std::string& path, const Matrix& M);
Matrix read_binary(const std::string& path);

void write_csv(const std::string& path, const Matrix& M);

}  // namespace kspec
