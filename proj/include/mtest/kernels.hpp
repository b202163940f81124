#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

#include "mtest/common.hpp"

namespace mtest {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);

/// Inner loops over a dense row-major s x s block `w`.
///
/// The scan functions search positions a<b<c (<d) in lexicographic order and
/// return the first hit; the collect functions append every hit in the same
/// order. Every variant must produce identical results to the scalar one.
struct KernelTable {
  Isa isa;
  bool (*first_triangle)(const double* w, std::size_t s, double tol, std::array<Index, 3>& out);
  bool (*first_ultra)(const double* w, std::size_t s, double tol, std::array<Index, 3>& out);
  bool (*first_tree)(const double* w, std::size_t s, double tol, std::array<Index, 4>& out);
  void (*collect_triangles)(const double* w, std::size_t s, double tol,
                            std::vector<std::array<Index, 3>>& out);
  void (*collect_ultra)(const double* w, std::size_t s, double tol,
                        std::vector<std::array<Index, 3>>& out);
  void (*collect_tree)(const double* w, std::size_t s, double tol,
                       std::vector<std::array<Index, 4>>& out);
  /// dst[j] = min(dst[j], base + src[j]) for j < len.
  void (*minplus_relax)(double* dst, const double* src, double base, std::size_t len);
};

bool isa_available(Isa isa);
const KernelTable& kernel_table(Isa isa);

/// The table used by library code. Defaults to the best available ISA; the
/// environment variable MTEST_ISA=scalar forces the reference kernels.
const KernelTable& kernels();
Isa active_isa();
void set_isa(Isa isa);

namespace detail {
extern const KernelTable scalar_kernels;
#if defined(MTEST_HAVE_AVX2)
extern const KernelTable avx2_kernels;
#endif
}  // namespace detail

}  // namespace mtest
