#include "spf/solvers.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "spf/signals.hpp"

namespace spf {

IndexSet top_k_support(const CVector& w, Index k, TieBreak) {
  if (k < 1 || k > w.size()) {
    throw std::invalid_argument("top_k_support: k out of range");
  }
  IndexSet idx(static_cast<std::size_t>(w.size()));
  std::iota(idx.begin(), idx.end(), Index{0});
  // Stable under ties: magnitude descending, then index ascending.
  std::sort(idx.begin(), idx.end(), [&w](Index a, Index b) {
    const double na = std::norm(w(a));
    const double nb = std::norm(w(b));
    if (na != nb) return na > nb;
    return a < b;
  });
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

CVector restricted_least_squares(const CMatrix& A, const CVector& b,
                                 const IndexSet& J) {
  if (b.size() != A.rows()) {
    throw std::invalid_argument("restricted_least_squares: length mismatch");
  }
  if (J.empty() || static_cast<Index>(J.size()) > A.rows()) {
    throw std::invalid_argument("restricted_least_squares: bad support size");
  }
  const Index cols = static_cast<Index>(J.size());
  CMatrix sub(A.rows(), cols);
  for (Index c = 0; c < cols; ++c) {
    const Index j = J[static_cast<std::size_t>(c)];
    if (j < 0 || j >= A.cols()) {
      throw std::invalid_argument("restricted_least_squares: index out of range");
    }
    sub.col(c) = A.col(j);
  }

  const Eigen::JacobiSVD<CMatrix> svd(sub);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(cols - 1);
  if (smax == 0.0 || smin < 1e-10 * smax) {
    throw SingularSystemError("restricted_least_squares: rank-deficient support",
                              J);
  }

  const CVector coeffs = sub.householderQr().solve(b);
  CVector x = CVector::Zero(A.cols());
  for (Index c = 0; c < cols; ++c) {
    x(J[static_cast<std::size_t>(c)]) = coeffs(c);
  }
  return x;
}

CVector htp(const CMatrix& A, const CVector& b, Index s, const SpfConfig& cfg) {
  const Index n = A.cols();
  if (s < 1 || s > n || s > A.rows()) {
    throw std::invalid_argument("htp: sparsity out of range");
  }
  if (b.size() != A.rows()) {
    throw std::invalid_argument("htp: length mismatch");
  }
  if (cfg.max_htp_iter < 1) {
    throw std::invalid_argument("htp: max_htp_iter must be >= 1");
  }

  CVector x = CVector::Zero(n);
  IndexSet support;
  for (int t = 0; t < cfg.max_htp_iter; ++t) {
    const CVector w = x + A.adjoint() * (b - A * x);
    IndexSet next = top_k_support(w, s, cfg.tie_break);
    if (next == support) break;  // fixed point
    x = restricted_least_squares(A, b, next);
    support = std::move(next);
  }
  return x;
}

namespace {

CVector unrestricted_least_squares(const CMatrix& A, const CVector& b) {
  return A.householderQr().solve(b);
}

// Relative Frobenius change between successive rank-one iterates,
// evaluated in factored form.
double rel_change(const CVector& u_prev, const CVector& v_prev,
                  const CVector& u_cur, const CVector& v_cur) {
  const double prev_sq = u_prev.squaredNorm() * v_prev.squaredNorm();
  if (prev_sq == 0.0) return std::numeric_limits<double>::infinity();
  const double cur_sq = u_cur.squaredNorm() * v_cur.squaredNorm();
  const Complex cross = u_cur.dot(u_prev) * v_prev.dot(v_cur);
  const double diff_sq =
      std::max(0.0, cur_sq + prev_sq - 2.0 * cross.real());
  return std::sqrt(diff_sq / prev_sq);
}

// Rotate u so its largest-modulus entry is real positive; v absorbs the
// inverse phase so u v^* is unchanged.
void normalize_phase(CVector& u, CVector& v) {
  Index peak = 0;
  double best = -1.0;
  for (Index i = 0; i < u.size(); ++i) {
    const double mag = std::abs(u(i));
    if (mag > best) {
      best = mag;
      peak = i;
    }
  }
  if (best <= 0.0) return;
  const Complex phase = u(peak) / best;
  u /= phase;
  v *= std::conj(phase);  // (u/p)(v p^bar)^* = u v^*
}

}  // namespace

RecoveryResult sparse_power_factorization(
    const MeasurementOperator& op, const CVector& b, const SpfConfig& cfg,
    const CVector& v0, const std::optional<GroundTruth>& truth) {
  if (v0.size() != op.n2) {
    throw std::invalid_argument("spf: v0 length mismatch");
  }
  if (v0.norm() == 0.0) {
    throw std::invalid_argument("spf: v0 must be nonzero");
  }
  if (b.size() != op.m) {
    throw std::invalid_argument("spf: measurement length mismatch");
  }
  if (cfg.s1 < 1 || cfg.s1 > op.n1 || cfg.s2 < 1 || cfg.s2 > op.n2) {
    throw std::invalid_argument("spf: sparsity out of range");
  }
  if (cfg.max_outer_iter < 1 || cfg.max_htp_iter < 1 ||
      cfg.rel_change_tol < 0.0) {
    throw std::invalid_argument("spf: bad iteration caps or tolerance");
  }

  const CVector b_conj = b.conjugate();
  CVector v = v0;
  CVector u;
  CVector u_prev, v_prev;

  RecoveryResult result;
  for (int t = 1; t <= cfg.max_outer_iter; ++t) {
    v.normalize();
    assert(std::abs(v.norm() - 1.0) < 1e-9);

    const CMatrix fv = op.f_matrix(v);
    u = (cfg.s1 < op.n1) ? htp(fv, b, cfg.s1, cfg)
                         : unrestricted_least_squares(fv, b);
    const double u_norm = u.norm();
    if (u_norm == 0.0) {
      // b has no component along this direction: the estimate is the zero
      // matrix. Keep a canonical unit left factor.
      u = CVector::Zero(op.n1);
      u(0) = Complex{1.0, 0.0};
      v = CVector::Zero(op.n2);
      result.iterations = t;
      if (truth) {
        result.error_trace.push_back(rel_error(u, v, truth->u, truth->v));
      }
      break;
    }
    u /= u_norm;

    const CMatrix gu = op.g_matrix(u);
    v = (cfg.s2 < op.n2) ? htp(gu, b_conj, cfg.s2, cfg)
                         : unrestricted_least_squares(gu, b_conj);

    result.iterations = t;
    if (truth) {
      result.error_trace.push_back(rel_error(u, v, truth->u, truth->v));
    }
    if (v.norm() == 0.0) break;  // zero estimate is stationary

    if (t > 1) {
      if (rel_change(u_prev, v_prev, u, v) < cfg.rel_change_tol) {
        result.converged = true;
        break;
      }
    }
    u_prev = u;
    v_prev = v;
  }

  result.u_hat = std::move(u);
  result.v_hat = std::move(v);
  normalize_phase(result.u_hat, result.v_hat);
  return result;
}

}  // namespace spf
