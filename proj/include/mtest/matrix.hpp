#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mtest/common.hpp"

namespace mtest {

/// Dense n x n matrix of 64-bit distances, stored as the full square in
/// row-major order so every row is contiguous.
///
/// The type itself can hold "raw" (asymmetric, negative, non-zero diagonal)
/// content so that cleanliness checks are testable. `set` writes both (i,j)
/// and (j,i); `set_entry` writes a single cell.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}
  DistanceMatrix(std::size_t n, std::vector<double> row_major);

  std::size_t size() const { return n_; }
  bool empty() const { return n_ == 0; }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  double at(std::size_t i, std::size_t j) const;

  void set(std::size_t i, std::size_t j, double v) {
    data_[i * n_ + j] = v;
    data_[j * n_ + i] = v;
  }
  void set_entry(std::size_t i, std::size_t j, double v) { data_[i * n_ + j] = v; }

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * n_, n_}; }
  std::span<const double> data() const { return data_; }

  bool is_symmetric() const;

  /// Copy with rows/columns relabelled: result(perm[i], perm[j]) = (*this)(i, j).
  DistanceMatrix permuted(std::span<const Index> perm) const;

  /// Principal submatrix on `indices` in the given order.
  DistanceMatrix submatrix(std::span<const Index> indices) const;

  /// Number of ordered off-diagonal entries that differ from `other`.
  std::size_t count_differences(const DistanceMatrix& other) const;

  friend bool operator==(const DistanceMatrix&, const DistanceMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

enum class LoadMode {
  strict,  // asymmetric input is an error
  raw      // keep whatever the file says
};

/// Text format (.dmat): first line n, then n rows of n decimal entries.
DistanceMatrix parse_text_matrix(const std::string& text, LoadMode mode = LoadMode::strict);
std::string format_text_matrix(const DistanceMatrix& m);

/// Binary format (.dmatb): little-endian u64 n, then n*n little-endian f64.
DistanceMatrix parse_binary_matrix(std::span<const std::byte> bytes,
                                   LoadMode mode = LoadMode::strict);
std::vector<std::byte> format_binary_matrix(const DistanceMatrix& m);

/// Dispatches on the extension: ".dmatb" is binary, anything else is text.
DistanceMatrix load_matrix(const std::filesystem::path& path, LoadMode mode = LoadMode::strict);
void save_matrix(const DistanceMatrix& m, const std::filesystem::path& path);

}  // namespace mtest
