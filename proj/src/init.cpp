#include "spf/init.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace spf {

RVector row_scores(const CMatrix& adj_b, Index s2) {
  if (s2 < 1 || s2 > adj_b.cols()) {
    throw std::invalid_argument("row_scores: s2 out of range");
  }
  RVector scores(adj_b.rows());
  std::vector<double> sq(static_cast<std::size_t>(adj_b.cols()));
  for (Index i = 0; i < adj_b.rows(); ++i) {
    for (Index j = 0; j < adj_b.cols(); ++j) {
      sq[static_cast<std::size_t>(j)] = std::norm(adj_b(i, j));
    }
    // descending-sorted summation, bit-reproducible across selection paths
    std::sort(sq.begin(), sq.end(), std::greater<double>());
    double acc = 0.0;
    for (Index j = 0; j < s2; ++j) acc += sq[static_cast<std::size_t>(j)];
    scores(i) = std::sqrt(acc);
  }
  return scores;
}

IndexSet select_row_support(const RVector& scores, Index count, TieBreak) {
  if (count < 1 || count > scores.size()) {
    throw std::invalid_argument("select_row_support: count out of range");
  }
  IndexSet idx(static_cast<std::size_t>(scores.size()));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::sort(idx.begin(), idx.end(), [&scores](Index a, Index b) {
    if (scores(a) != scores(b)) return scores(a) > scores(b);
    return a < b;
  });
  idx.resize(static_cast<std::size_t>(count));
  std::sort(idx.begin(), idx.end());
  return idx;
}

IndexSet select_col_support(const CMatrix& adj_b, const IndexSet& j1_hat,
                            Index s2, TieBreak tie_break) {
  if (s2 < 1 || s2 > adj_b.cols()) {
    throw std::invalid_argument("select_col_support: s2 out of range");
  }
  RVector col_norms(adj_b.cols());
  for (Index j = 0; j < adj_b.cols(); ++j) {
    double acc = 0.0;
    for (const Index i : j1_hat) {
      if (i < 0 || i >= adj_b.rows()) {
        throw std::invalid_argument("select_col_support: row index out of range");
      }
      acc += std::norm(adj_b(i, j));
    }
    col_norms(j) = acc;
  }
  return select_row_support(col_norms, s2, tie_break);
}

SingularPair leading_right_singular_vector(const CMatrix& M) {
  if (M.size() == 0 || M.norm() == 0.0) {
    throw DegenerateInputError("leading_right_singular_vector: zero matrix");
  }
  constexpr double kTol = 1e-12;
  constexpr int kMaxSweeps = 1000;

  const CMatrix gram = M.adjoint() * M;
  const Index n = gram.cols();
  CVector v = CVector::Constant(n, Complex{1.0, 0.0});
  v /= v.norm();

  SingularPair out;
  out.converged = false;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    CVector next = gram * v;
    const double norm = next.norm();
    if (norm == 0.0) {
      // Start vector lies in the kernel; restart off-axis deterministically.
      for (Index i = 0; i < n; ++i) {
        next(i) = Complex{1.0, static_cast<double>(i + 1)};
      }
      next /= next.norm();
      v = next;
      continue;
    }
    next /= norm;
    const double delta = (next - v).norm();
    v = next;
    if (delta < kTol) {
      out.converged = true;
      break;
    }
  }

  out.sigma = (M * v).norm();
  // Largest entry real positive; ties to the lower index.
  Index peak = 0;
  double best = -1.0;
  for (Index i = 0; i < n; ++i) {
    const double mag = std::abs(v(i));
    if (mag > best) {
      best = mag;
      peak = i;
    }
  }
  if (best > 0.0) v /= v(peak) / best;
  out.v = std::move(v);
  return out;
}

InitResult thresholding_init(const MeasurementOperator& op, const CVector& b,
                             Index s1, Index s2, const InitOptions& options) {
  if (s1 < 1 || s1 > op.n1 || s2 < 1 || s2 > op.n2) {
    throw std::invalid_argument("thresholding_init: sparsity out of range");
  }
  const CMatrix adj_b = op.adjoint(b);

  InitResult result;
  const Index j1_count = options.j1_cardinality_from_s2 ? std::min(s2, op.n1)
                                                        : s1;
  result.j1_hat = select_row_support(row_scores(adj_b, s2), j1_count,
                                     options.tie_break);
  result.j2_hat =
      select_col_support(adj_b, result.j1_hat, s2, options.tie_break);

  CMatrix restricted(static_cast<Index>(result.j1_hat.size()),
                     static_cast<Index>(result.j2_hat.size()));
  for (std::size_t r = 0; r < result.j1_hat.size(); ++r) {
    for (std::size_t c = 0; c < result.j2_hat.size(); ++c) {
      restricted(static_cast<Index>(r), static_cast<Index>(c)) =
          adj_b(result.j1_hat[r], result.j2_hat[c]);
    }
  }

  CVector v_small;
  if (restricted.norm() == 0.0) {
    if (!options.fallback_on_zero) {
      throw DegenerateInputError("thresholding_init: zero restricted matrix");
    }
    result.used_fallback = true;
    result.sigma1 = 0.0;
    v_small = CVector::Constant(static_cast<Index>(result.j2_hat.size()),
                                Complex{1.0, 0.0});
    v_small /= v_small.norm();
  } else {
    SingularPair pair = leading_right_singular_vector(restricted);
    result.sigma1 = pair.sigma;
    result.power_iteration_converged = pair.converged;
    v_small = std::move(pair.v);
  }

  result.v0 = CVector::Zero(op.n2);
  for (std::size_t c = 0; c < result.j2_hat.size(); ++c) {
    result.v0(result.j2_hat[c]) = v_small(static_cast<Index>(c));
  }
  return result;
}

}  // namespace spf
