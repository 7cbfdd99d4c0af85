#pragma once

#include <optional>
#include <vector>

#include "spf/measurement.hpp"
#include "spf/types.hpp"

namespace spf {

struct SpfConfig {
  Index s1 = 1;
  Index s2 = 1;
  int max_outer_iter = 50;
  int max_htp_iter = 50;
  double rel_change_tol = 1e-8;
  TieBreak tie_break = TieBreak::kLowestIndex;
};

struct RecoveryResult {
  CVector u_hat;  // unit norm, phase-normalized
  CVector v_hat;  // carries the magnitude of the rank-one estimate
  int iterations = 0;
  bool converged = false;
  // Relative Frobenius error of u_t v_t^* against the supplied ground truth,
  // one entry per outer iteration. Empty when no truth was given.
  std::vector<double> error_trace;
};

struct GroundTruth {
  CVector u;
  CVector v;
};

/// k indices maximizing the restricted l2 energy of w; ties go to the
/// lower index. Ascending order.
IndexSet top_k_support(const CVector& w, Index k,
                       TieBreak tie_break = TieBreak::kLowestIndex);

/// arg min ||Ax - b|| over vectors supported on J, via Householder QR of
/// the column submatrix. Throws SingularSystemError when the submatrix has
/// smallest singular value < 1e-10 times its largest.
CVector restricted_least_squares(const CMatrix& A, const CVector& b,
                                 const IndexSet& J);

/// Hard Thresholding Pursuit from x0 = 0: proxy step
/// w = x + A^*(b - Ax), support selection, restricted least squares.
/// Stops when the selected support repeats or after cfg.max_htp_iter.
CVector htp(const CMatrix& A, const CVector& b, Index s, const SpfConfig& cfg);

/// Sparse power factorization: alternate s1-sparse updates of the left
/// factor against f_matrix(v) and s2-sparse updates of the right factor
/// against conj(b) and g_matrix(u), normalizing between steps. A factor
/// whose budget equals its dimension is updated by unrestricted least
/// squares instead. Stops when the rank-one iterate's relative change
/// drops below cfg.rel_change_tol.
RecoveryResult sparse_power_factorization(
    const MeasurementOperator& op, const CVector& b, const SpfConfig& cfg,
    const CVector& v0, const std::optional<GroundTruth>& truth = std::nullopt);

}  // namespace spf
