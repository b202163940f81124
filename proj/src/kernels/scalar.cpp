#include "mtest/kernels.hpp"
#include "mtest/predicates.hpp"

namespace mtest::detail {
namespace {

// Visits violating triples in lexicographic order; `emit` returns false to stop.
template <class Pred, class Emit>
bool scan3(const double* w, std::size_t s, double tol, Pred pred, Emit emit) {
  for (std::size_t a = 0; a < s; ++a) {
    const double* ra = w + a * s;
    for (std::size_t b = a + 1; b < s; ++b) {
      const double* rb = w + b * s;
      const double dab = ra[b];
      for (std::size_t c = b + 1; c < s; ++c) {
        if (pred(dab, ra[c], rb[c], tol)) {
          if (!emit(std::array<Index, 3>{Index(a), Index(b), Index(c)})) return true;
        }
      }
    }
  }
  return false;
}

bool triangle_pred(double a, double b, double c, double tol) {
  return is_violating_triangle(a, b, c, tol);
}
bool ultra_pred(double a, double b, double c, double tol) {
  return is_violating_ultra_triple(a, b, c, tol);
}

template <class Emit>
bool scan4(const double* w, std::size_t s, double tol, Emit emit) {
  for (std::size_t i = 0; i < s; ++i) {
    const double* ri = w + i * s;
    for (std::size_t j = i + 1; j < s; ++j) {
      const double* rj = w + j * s;
      const double dij = ri[j];
      for (std::size_t k = j + 1; k < s; ++k) {
        const double* rk = w + k * s;
        const double dik = ri[k], djk = rj[k];
        for (std::size_t l = k + 1; l < s; ++l) {
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
  return scan3(w, s, tol, triangle_pred, [&](const auto& t) { out = t; return false; });
}

bool first_ultra(const double* w, std::size_t s, double tol, std::array<Index, 3>& out) {
  return scan3(w, s, tol, ultra_pred, [&](const auto& t) { out = t; return false; });
}

bool first_tree(const double* w, std::size_t s, double tol, std::array<Index, 4>& out) {
  return scan4(w, s, tol, [&](const auto& q) { out = q; return false; });
}

void collect_triangles(const double* w, std::size_t s, double tol,
                       std::vector<std::array<Index, 3>>& out) {
  scan3(w, s, tol, triangle_pred, [&](const auto& t) { out.push_back(t); return true; });
}

void collect_ultra(const double* w, std::size_t s, double tol,
                   std::vector<std::array<Index, 3>>& out) {
  scan3(w, s, tol, ultra_pred, [&](const auto& t) { out.push_back(t); return true; });
}

void collect_tree(const double* w, std::size_t s, double tol,
                  std::vector<std::array<Index, 4>>& out) {
  scan4(w, s, tol, [&](const auto& q) { out.push_back(q); return true; });
}

void minplus_relax(double* dst, const double* src, double base, std::size_t len) {
  for (std::size_t j = 0; j < len; ++j) {
    const double cand = base + src[j];
    if (cand < dst[j]) dst[j] = cand;
  }
}

}  // namespace

const KernelTable scalar_kernels{Isa::scalar,      first_triangle, first_ultra,
                                 first_tree,       collect_triangles, collect_ultra,
                                 collect_tree,     minplus_relax};

}  // namespace mtest::detail
