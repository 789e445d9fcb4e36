#pragma once

#include <filesystem>

#include "stad/core.hpp"

namespace stad {

/// Covariance file format: UTF-8 CSV. First line is the dimension p, then
/// p lines each carrying 2p comma-separated decimal fields interleaving
/// real,imag for that row. Values are written with 17 significant digits,
/// making write/load round-trips bit-faithful.
HermitianMatrix load_covariance(const std::filesystem::path& path);
void save_covariance(const std::filesystem::path& path,
                     const HermitianMatrix& r);

/// Vector file: first line p, then p lines "real,imag".
CVector load_cvector(const std::filesystem::path& path);
void save_cvector(const std::filesystem::path& path, const CVector& v);

/// General complex matrix (training data): first line "p,n", then p lines of
/// 2n interleaved real,imag fields.
CMatrix load_cmatrix(const std::filesystem::path& path);
void save_cmatrix(const std::filesystem::path& path, const CMatrix& m);

/// 17-significant-digit decimal rendering used by every CSV writer.
std::string format_double(double x);

}  // namespace stad
