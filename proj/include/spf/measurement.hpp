#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spf/types.hpp"

namespace spf {

/// Linear map C^{n1 x n2} -> C^m defined by m dense complex matrices:
/// component ell of the image is trace(A_ell^* X). Immutable after
/// construction and safe to share read-only across threads.
struct MeasurementOperator {
  Index n1 = 0;
  Index n2 = 0;
  Index m = 0;
  std::uint64_t seed = 0;
  std::vector<CMatrix> matrices;

  const CMatrix& matrix(Index ell) const {
    return matrices[static_cast<std::size_t>(ell)];
  }

  /// y(ell) = trace(A_ell^* X).
  CVector apply(const CMatrix& X) const;

  /// apply(x y^*) without materializing the outer product. Zero entries of
  /// x and y are skipped, so sparse factors cost O(m |supp x| |supp y|).
  CVector apply_rank_one(const CVector& x, const CVector& y) const;

  /// Adjoint under the trace inner product: sum_ell b(ell) A_ell.
  CMatrix adjoint(const CVector& b) const;

  /// m x n1 matrix with row ell = y^* A_ell^*;  f_matrix(y) * x equals
  /// apply_rank_one(x, y).
  CMatrix f_matrix(const CVector& y) const;

  /// m x n2 matrix with row ell = x^* A_ell;  conj(g_matrix(x) * y) equals
  /// apply_rank_one(x, y).
  CMatrix g_matrix(const CVector& x) const;
};

/// i.i.d. entries with independent real/imaginary parts N(0, 1/(2m)),
/// so E|entry|^2 = 1/m. Bit-identical regeneration for equal
/// (n1, n2, m, seed).
MeasurementOperator make_gaussian_operator(Index n1, Index n2, Index m,
                                           std::uint64_t seed);

/// Binary dump: 16-byte header (n1, n2, m, version; little-endian u32)
/// followed by row-major (re, im) doubles for each matrix in order.
void save_operator(const MeasurementOperator& op, const std::string& path);
MeasurementOperator load_operator(const std::string& path);

}  // namespace spf
