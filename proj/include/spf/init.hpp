#pragma once

#include "spf/measurement.hpp"
#include "spf/types.hpp"

namespace spf {

struct InitOptions {
  // The printed algorithm selects "the s2 largest" row scores for the row
  // support even though that set estimates the s1-sparse left factor; the
  // default reads this as a typo and uses s1. Set for literal fidelity.
  bool j1_cardinality_from_s2 = false;
  // On an all-zero restricted adjoint matrix, fall back to the normalized
  // indicator of the column support instead of throwing.
  bool fallback_on_zero = true;
  TieBreak tie_break = TieBreak::kLowestIndex;
};

struct InitResult {
  IndexSet j1_hat;
  IndexSet j2_hat;
  CVector v0;           // unit norm, supported on j2_hat
  double sigma1 = 0.0;  // leading singular value of the restricted matrix
  bool used_fallback = false;
  bool power_iteration_converged = true;
};

struct SingularPair {
  CVector v;
  double sigma = 0.0;
  bool converged = true;
};

/// Score per row: l2 norm of its best s2-sparse approximation.
RVector row_scores(const CMatrix& adj_b, Index s2);

/// Indices of the `count` largest scores, ties to the lower index.
IndexSet select_row_support(const RVector& scores, Index count,
                            TieBreak tie_break = TieBreak::kLowestIndex);

/// The s2 columns of the row-restricted matrix with largest l2 norms (the
/// Frobenius argmax over column subsets separates column-wise).
IndexSet select_col_support(const CMatrix& adj_b, const IndexSet& j1_hat,
                            Index s2,
                            TieBreak tie_break = TieBreak::kLowestIndex);

/// Leading right singular vector and singular value by power iteration on
/// M^* M: deterministic all-ones start, tolerance 1e-12, cap 1000 sweeps
/// (converged=false past the cap). Phase-normalized so the largest entry
/// is real positive. Throws DegenerateInputError for M = 0.
SingularPair leading_right_singular_vector(const CMatrix& M);

/// Thresholding initialization: adjoint image, row scores, two-stage
/// support estimate, restricted leading right singular vector embedded
/// into C^{n2}.
InitResult thresholding_init(const MeasurementOperator& op, const CVector& b,
                             Index s1, Index s2,
                             const InitOptions& options = {});

}  // namespace spf
