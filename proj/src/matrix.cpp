#include "mtest/matrix.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mtest {

DistanceMatrix::DistanceMatrix(std::size_t n, std::vector<double> row_major)
    : n_(n), data_(std::move(row_major)) {
  if (data_.size() != n * n) throw InvalidArgument("DistanceMatrix: data size is not n*n");
}

double DistanceMatrix::at(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_) throw std::out_of_range("DistanceMatrix::at");
  return data_[i * n_ + j];
}

bool DistanceMatrix::is_symmetric() const {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      if (data_[i * n_ + j] != data_[j * n_ + i]) return false;
  return true;
}

DistanceMatrix DistanceMatrix::permuted(std::span<const Index> perm) const {
  if (perm.size() != n_) throw InvalidArgument("permuted: permutation size mismatch");
  DistanceMatrix out(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) out.set_entry(perm[i], perm[j], (*this)(i, j));
  return out;
}

DistanceMatrix DistanceMatrix::submatrix(std::span<const Index> indices) const {
  const std::size_t k = indices.size();
  DistanceMatrix out(k);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) out.set_entry(a, b, (*this)(indices[a], indices[b]));
  return out;
}

std::size_t DistanceMatrix::count_differences(const DistanceMatrix& other) const {
  if (other.n_ != n_) throw InvalidArgument("count_differences: size mismatch");
  std::size_t count = 0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      if (i != j && data_[i * n_ + j] != other.data_[i * n_ + j]) ++count;
  return count;
}

namespace {

void check_symmetric_or_throw(const DistanceMatrix& m) {
  const std::size_t n = m.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (m(i, j) != m(j, i))
        throw AsymmetryError(static_cast<Index>(i), static_cast<Index>(j),
                             "asymmetric entry at (" + std::to_string(i) + "," +
                                 std::to_string(j) + ")");
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

}  // namespace

DistanceMatrix parse_text_matrix(const std::string& text, LoadMode mode) {
  std::istringstream in(text);
  std::string line;

  auto next_nonblank = [&](std::string& out) {
    while (std::getline(in, out)) {
      for (char c : out)
        if (!is_space(c)) return true;
    }
    return false;
  };

  if (!next_nonblank(line)) throw ParseError("empty matrix file");
  std::size_t n = 0;
  {
    const char* b = line.data();
    const char* e = b + line.size();
    while (b < e && is_space(*b)) ++b;
    auto [p, ec] = std::from_chars(b, e, n);
    if (ec != std::errc{}) throw ParseError("bad header: expected point count");
    while (p < e && is_space(*p)) ++p;
    if (p != e) throw ParseError("bad header: trailing characters");
    if (n == 0) throw ParseError("bad header: n must be positive");
  }

  std::vector<double> data;
  data.reserve(n * n);
  for (std::size_t r = 0; r < n; ++r) {
    if (!next_nonblank(line))
      throw ParseError("expected " + std::to_string(n) + " rows, got " + std::to_string(r));
    const char* p = line.data();
    const char* e = p + line.size();
    std::size_t count = 0;
    while (true) {
      while (p < e && is_space(*p)) ++p;
      if (p == e) break;
      double v = 0;
      auto [q, ec] = std::from_chars(p, e, v);
      if (ec != std::errc{} || (q < e && !is_space(*q)))
        throw ParseError("row " + std::to_string(r) + ": malformed entry");
      if (!std::isfinite(v)) throw ParseError("row " + std::to_string(r) + ": non-finite entry");
      data.push_back(v);
      ++count;
      p = q;
    }
    if (count != n)
      throw ParseError("row " + std::to_string(r) + ": expected " + std::to_string(n) +
                       " entries, got " + std::to_string(count));
  }
  if (next_nonblank(line)) throw ParseError("trailing rows after matrix");

  DistanceMatrix m(n, std::move(data));
  if (mode == LoadMode::strict) check_symmetric_or_throw(m);
  return m;
}

std::string format_text_matrix(const DistanceMatrix& m) {
  std::string out = std::to_string(m.size());
  out += '\n';
  char buf[64];
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (j) out += ' ';
      auto [p, ec] = std::to_chars(buf, buf + sizeof buf, m(i, j));
      out.append(buf, p);
    }
    out += '\n';
  }
  return out;
}

namespace {

std::uint64_t read_le64(const std::byte* p) {
  std::uint64_t v = 0;
  for (int k = 7; k >= 0; --k) v = (v << 8) | std::to_integer<std::uint64_t>(p[k]);
  return v;
}

void write_le64(std::vector<std::byte>& out, std::uint64_t v) {
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<std::byte>((v >> (8 * k)) & 0xff));
}

}  // namespace

DistanceMatrix parse_binary_matrix(std::span<const std::byte> bytes, LoadMode mode) {
  if (bytes.size() < 8) throw ParseError("binary matrix: truncated header");
  const std::uint64_t n = read_le64(bytes.data());
  if (n == 0) throw ParseError("binary matrix: n must be positive");
  if (n > (1u << 20) || bytes.size() != 8 + n * n * 8)
    throw ParseError("binary matrix: size does not match header");
  std::vector<double> data(n * n);
  for (std::size_t k = 0; k < n * n; ++k) {
    double v = std::bit_cast<double>(read_le64(bytes.data() + 8 + 8 * k));
    if (!std::isfinite(v)) throw ParseError("binary matrix: non-finite entry");
    data[k] = v;
  }
  DistanceMatrix m(n, std::move(data));
  if (mode == LoadMode::strict) check_symmetric_or_throw(m);
  return m;
}

std::vector<std::byte> format_binary_matrix(const DistanceMatrix& m) {
  std::vector<std::byte> out;
  out.reserve(8 + m.size() * m.size() * 8);
  write_le64(out, m.size());
  for (double v : m.data()) write_le64(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

namespace {

bool is_binary_path(const std::filesystem::path& p) { return p.extension() == ".dmatb"; }

}  // namespace

DistanceMatrix load_matrix(const std::filesystem::path& path, LoadMode mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (is_binary_path(path)) {
    auto bytes = std::as_bytes(std::span<const char>(content.data(), content.size()));
    return parse_binary_matrix(bytes, mode);
  }
  return parse_text_matrix(content, mode);
}

void save_matrix(const DistanceMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  if (is_binary_path(path)) {
    auto bytes = format_binary_matrix(m);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  } else {
    out << format_text_matrix(m);
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace mtest
