#pragma once

namespace mtest {

// Violation predicates. All comparisons are strict: ties never violate.
// `tol` widens the non-violating region and defaults to 0. The SIMD kernels
// evaluate exactly these expressions in the same order, so keep them in sync.

/// Some side is longer than the other two combined.
inline bool is_violating_triangle(double a, double b, double c, double tol = 0.0) {
  return a > b + c + tol || b > a + c + tol || c > a + b + tol;
}

/// The largest of the three values is unique.
inline bool is_violating_ultra_triple(double a, double b, double c, double tol = 0.0) {
  return (a > b + tol && a > c + tol) || (b > a + tol && b > c + tol) ||
         (c > a + tol && c > b + tol);
}

/// Four-point condition for points i<j<k<l, arguments in sorted pair order.
/// Violates when the largest of the three matching sums is unique.
inline bool is_violating_tree_quadruple(double d_ij, double d_ik, double d_il, double d_jk,
                                        double d_jl, double d_kl, double tol = 0.0) {
  const double s1 = d_ij + d_kl;
  const double s2 = d_ik + d_jl;
  const double s3 = d_il + d_jk;
  return is_violating_ultra_triple(s1, s2, s3, tol);
}

}  // namespace mtest
