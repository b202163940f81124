// AVX2 variants of the scan kernels. Built with -mavx2 and only reached after
// a runtime CPU check. The innermost index is processed four lanes at a time;
// each lane evaluates the same expression tree as predicates.hpp so results
// match the scalar kernels exactly.

#include <immintrin.h>

#include "mtest/kernels.hpp"
#include "mtest/predicates.hpp"

namespace mtest::detail {
namespace {

inline __m256d gt(__m256d a, __m256d b) { return _mm256_cmp_pd(a, b, _CMP_GT_OQ); }

inline __m256d triangle_mask(__m256d dab, __m256d x, __m256d y, __m256d tol) {
  const __m256d m1 = gt(dab, _mm256_add_pd(_mm256_add_pd(x, y), tol));
  const __m256d m2 = gt(x, _mm256_add_pd(_mm256_add_pd(dab, y), tol));
  const __m256d m3 = gt(y, _mm256_add_pd(_mm256_add_pd(dab, x), tol));
  return _mm256_or_pd(_mm256_or_pd(m1, m2), m3);
}

inline __m256d ultra_mask(__m256d a, __m256d b, __m256d c, __m256d tol) {
  const __m256d at = _mm256_add_pd(a, tol);
  const __m256d bt = _mm256_add_pd(b, tol);
  const __m256d ct = _mm256_add_pd(c, tol);
  const __m256d ma = _mm256_and_pd(gt(a, bt), gt(a, ct));
  const __m256d mb = _mm256_and_pd(gt(b, at), gt(b, ct));
  const __m256d mc = _mm256_and_pd(gt(c, at), gt(c, bt));
  return _mm256_or_pd(_mm256_or_pd(ma, mb), mc);
}

struct TriangleOp {
  static __m256d mask(__m256d dab, __m256d x, __m256d y, __m256d tol) {
    return triangle_mask(dab, x, y, tol);
  }
  static bool one(double dab, double x, double y, double tol) {
    return is_violating_triangle(dab, x, y, tol);
  }
};

struct UltraOp {
  static __m256d mask(__m256d dab, __m256d x, __m256d y, __m256d tol) {
    return ultra_mask(dab, x, y, tol);
  }
  static bool one(double dab, double x, double y, double tol) {
    return is_violating_ultra_triple(dab, x, y, tol);
  }
};

template <class Op, class Emit>
bool scan3(const double* w, std::size_t s, double tol, Emit emit) {
  const __m256d vtol = _mm256_set1_pd(tol);
  for (std::size_t a = 0; a < s; ++a) {
    const double* ra = w + a * s;
    for (std::size_t b = a + 1; b < s; ++b) {
      const double* rb = w + b * s;
      const double dab = ra[b];
      const __m256d vdab = _mm256_set1_pd(dab);
      std::size_t c = b + 1;
      for (; c + 4 <= s; c += 4) {
        const __m256d x = _mm256_loadu_pd(ra + c);
        const __m256d y = _mm256_loadu_pd(rb + c);
        int bits = _mm256_movemask_pd(Op::mask(vdab, x, y, vtol));
        while (bits) {
          const int lane = __builtin_ctz(bits);
          bits &= bits - 1;
          if (!emit(std::array<Index, 3>{Index(a), Index(b), Index(c + lane)})) return true;
        }
      }
      for (; c < s; ++c) {
        if (Op::one(dab, ra[c], rb[c], tol)) {
          if (!emit(std::array<Index, 3>{Index(a), Index(b), Index(c)})) return true;
        }
      }
    }
  }
  return false;
}

template <class Emit>
bool scan4(const double* w, std::size_t s, double tol, Emit emit) {
  const __m256d vtol = _mm256_set1_pd(tol);
  for (std::size_t i = 0; i < s; ++i) {
    const double* ri = w + i * s;
    for (std::size_t j = i + 1; j < s; ++j) {
      const double* rj = w + j * s;
      const double dij = ri[j];
      const __m256d vdij = _mm256_set1_pd(dij);
      for (std::size_t k = j + 1; k < s; ++k) {
        const double* rk = w + k * s;
        const double dik = ri[k], djk = rj[k];
        const __m256d vdik = _mm256_set1_pd(dik);
        const __m256d vdjk = _mm256_set1_pd(djk);
        std::size_t l = k + 1;
        for (; l + 4 <= s; l += 4) {
          const __m256d s1 = _mm256_add_pd(vdij, _mm256_loadu_pd(rk + l));
          const __m256d s2 = _mm256_add_pd(vdik, _mm256_loadu_pd(rj + l));
          const __m256d s3 = _mm256_add_pd(_mm256_loadu_pd(ri + l), vdjk);
          int bits = _mm256_movemask_pd(ultra_mask(s1, s2, s3, vtol));
          while (bits) {
            const int lane = __builtin_ctz(bits);
            bits &= bits - 1;
            if (!emit(std::array<Index, 4>{Index(i), Index(j), Index(k), Index(l + lane)}))
              return true;
          }
        }
        for (; l < s; ++l) {
          if (is_violating_tree_quadruple(dij, dik, ri[l], djk, rj[l], rk[l], tol)) {
            if (!emit(std::array<Index, 4>{Index(i), Index(j), Index(k), Index(l)})) return true;
          }
        }
      }
    }
  }
  return false;
}

bool first_triangle(const double* w, std::size_t s, double tol, std::array<Index, 3>& out) {
  return scan3<TriangleOp>(w, s, tol, [&](const auto& t) { out = t; return false; });
}

bool first_ultra(const double* w, std::size_t s, double tol, std::array<Index, 3>& out) {
  return scan3<UltraOp>(w, s, tol, [&](const auto& t) { out = t; return false; });
}

bool first_tree(const double* w, std::size_t s, double tol, std::array<Index, 4>& out) {
  return scan4(w, s, tol, [&](const auto& q) { out = q; return false; });
}

void collect_triangles(const double* w, std::size_t s, double tol,
                       std::vector<std::array<Index, 3>>& out) {
  scan3<TriangleOp>(w, s, tol, [&](const auto& t) { out.push_back(t); return true; });
}

void collect_ultra(const double* w, std::size_t s, double tol,
                   std::vector<std::array<Index, 3>>& out) {
  scan3<UltraOp>(w, s, tol, [&](const auto& t) { out.push_back(t); return true; });
}

void collect_tree(const double* w, std::size_t s, double tol,
                  std::vector<std::array<Index, 4>>& out) {
  scan4(w, s, tol, [&](const auto& q) { out.push_back(q); return true; });
}

void minplus_relax(double* dst, const double* src, double base, std::size_t len) {
  const __m256d vb = _mm256_set1_pd(base);
  std::size_t j = 0;
  for (; j + 4 <= len; j += 4) {
    const __m256d cand = _mm256_add_pd(vb, _mm256_loadu_pd(src + j));
    // min_pd(a, b) yields a only where a < b, matching the scalar update.
    _mm256_storeu_pd(dst + j, _mm256_min_pd(cand, _mm256_loadu_pd(dst + j)));
  }
  for (; j < len; ++j) {
    const double cand = base + src[j];
    if (cand < dst[j]) dst[j] = cand;
  }
}

}  // namespace

const KernelTable avx2_kernels{Isa::avx2,       first_triangle, first_ultra,
                               first_tree,      collect_triangles, collect_ultra,
                               collect_tree,    minplus_relax};

}  // namespace mtest::detail
