#include "stad/covariance_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace stad {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open file: " + path.string());
  }
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw InputError("cannot open file for writing: " + path.string());
  }
  return out;
}

double parse_field(const std::string& field, const std::filesystem::path& path,
                   Index row, std::size_t col) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw InputError(path.string() + ": row " + std::to_string(row) +
                     ", field " + std::to_string(col) +
                     ": cannot parse '" + field + "' as a number");
  }
  return value;
}

std::vector<double> parse_row(const std::string& line,
                              const std::filesystem::path& path, Index row,
                              std::size_t expected_fields) {
  std::vector<double> fields;
  fields.reserve(expected_fields);
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    fields.push_back(parse_field(field, path, row, fields.size()));
  }
  if (fields.size() != expected_fields) {
    throw InputError(path.string() + ": row " + std::to_string(row) +
                     " has " + std::to_string(fields.size()) +
                     " fields, expected " + std::to_string(expected_fields));
  }
  return fields;
}

std::string read_line(std::ifstream& in, const std::filesystem::path& path,
                      Index row) {
  std::string line;
  if (!std::getline(in, line)) {
    throw InputError(path.string() + ": unexpected end of file at row " +
                     std::to_string(row));
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  return line;
}

CMatrix read_complex_rows(std::ifstream& in, const std::filesystem::path& path,
                          Index p, Index n) {
  CMatrix m(p, n);
  for (Index i = 0; i < p; ++i) {
    const std::string line = read_line(in, path, i + 1);
    const auto fields =
        parse_row(line, path, i + 1, static_cast<std::size_t>(2 * n));
    for (Index j = 0; j < n; ++j) {
      m(i, j) = Complex(fields[static_cast<std::size_t>(2 * j)],
                        fields[static_cast<std::size_t>(2 * j + 1)]);
    }
  }
  return m;
}

void write_complex_rows(std::ofstream& out, const CMatrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(m(i, j).real()) << ','
          << format_double(m(i, j).imag());
    }
    out << '\n';
  }
}

Index parse_dim(const std::string& line, const std::filesystem::path& path) {
  const double v = parse_field(line, path, 0, 0);
  const Index p = static_cast<Index>(v);
  if (p < 1 || static_cast<double>(p) != v) {
    throw InputError(path.string() + ": invalid dimension '" + line + "'");
  }
  return p;
}

}  // namespace

HermitianMatrix load_covariance(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  const Index p = parse_dim(read_line(in, path, 0), path);
  const CMatrix raw = read_complex_rows(in, path, p, p);
  const double scale = raw.norm();
  const double asym = (raw - raw.adjoint()).norm();
  if (asym > 1e-8 * std::max(scale, 1e-300) && asym > 1e-8) {
    throw InputError(path.string() +
                     ": matrix is not Hermitian (asymmetry " +
                     std::to_string(asym) + ")");
  }
  HermitianMatrix r((0.5 * (raw + raw.adjoint())).eval());
  r.require_psd(path.string());
  return r;
}

void save_covariance(const std::filesystem::path& path,
                     const HermitianMatrix& r) {
  std::ofstream out = open_output(path);
  out << r.dim() << '\n';
  write_complex_rows(out, r.mat());
}

CVector load_cvector(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  const Index p = parse_dim(read_line(in, path, 0), path);
  const CMatrix m = read_complex_rows(in, path, p, 1);
  return m.col(0);
}

void save_cvector(const std::filesystem::path& path, const CVector& v) {
  std::ofstream out = open_output(path);
  out << v.size() << '\n';
  write_complex_rows(out, v);
}

CMatrix load_cmatrix(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  const std::string header = read_line(in, path, 0);
  const auto comma = header.find(',');
  if (comma == std::string::npos) {
    throw InputError(path.string() + ": matrix header must be 'p,n'");
  }
  const Index p = parse_dim(header.substr(0, comma), path);
  const Index n = parse_dim(header.substr(comma + 1), path);
  return read_complex_rows(in, path, p, n);
}

void save_cmatrix(const std::filesystem::path& path, const CMatrix& m) {
  std::ofstream out = open_output(path);
  out << m.rows() << ',' << m.cols() << '\n';
  write_complex_rows(out, m);
}

}  // namespace stad
