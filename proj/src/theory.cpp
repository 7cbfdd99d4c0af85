#include "spf/theory.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "spf/rng.hpp"

namespace spf {

double c_delta(double delta) {
  if (delta < 0.0 || delta >= 1.0) {
    throw std::domain_error("c_delta: delta must lie in [0, 1)");
  }
  const double root = std::sqrt(2.0 / (1.0 - delta * delta));
  const double denom = 1.0 - root * delta;
  if (denom <= 0.0) {
    throw std::domain_error("c_delta: sqrt(2/(1-d^2)) * d must be < 1");
  }
  return 1.1 * (root + 1.0 / (1.0 - delta)) / denom;
}

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

// Feasibility of omega for the defining condition. With omega in [0, pi/2)
// and an arcsin argument in [0, 1], "omega >= arcsin(arg)" is equivalent to
// "sin(omega) >= arg" (and an argument > 1 is infeasible, matching
// sin <= 1). Multiplying through by cos(omega) > 0 clears the poles:
//   sin(omega) cos(omega) - C delta sin(omega) - C (1+delta) nu >= 0.
bool omega_feasible_at(double omega, double c, double delta, double nu) {
  const double s = std::sin(omega);
  const double cs = std::cos(omega);
  return s * cs - c * delta * s - c * (1.0 + delta) * nu >= 0.0;
}

}  // namespace

OmegaSup omega_sup(double delta, double nu) {
  if (delta < 0.0 || nu < 0.0) {
    throw std::domain_error("omega_sup: delta and nu must be >= 0");
  }
  const double c = c_delta(delta);

  constexpr int kGridPoints = 10000;
  constexpr double kBisectTol = 1e-10;
  const double step = kHalfPi / kGridPoints;

  // Largest feasible grid point; the defining set need not be an interval,
  // so scan everything.
  int last_feasible = -1;
  for (int i = 0; i < kGridPoints; ++i) {
    if (omega_feasible_at(i * step, c, delta, nu)) last_feasible = i;
  }
  OmegaSup out;
  if (last_feasible < 0) return out;  // empty: omega = 0, flagged

  out.feasible = true;
  double lo = last_feasible * step;        // feasible
  double hi = (last_feasible + 1) * step;  // infeasible or pi/2
  while (hi - lo > kBisectTol) {
    const double mid = 0.5 * (lo + hi);
    if (omega_feasible_at(mid, c, delta, nu)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.omega = lo;
  return out;
}

double m_delta_nu(double delta, double nu) {
  if (delta < 0.0 || nu < 0.0) {
    throw std::domain_error("m_delta_nu: delta and nu must be >= 0");
  }
  return 2.0 * (delta + nu + delta * nu);
}

double angle_bound(double pu, double pv_perp, double delta, double nu) {
  const double slack = delta + nu + delta * nu;
  const double denom = pu - slack;
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  return (pu * pv_perp + slack) / denom;
}

bool sufficient_condition(double pu, double pv, double delta, double nu) {
  const double sin_w = std::sin(omega_sup(delta, nu).omega);
  const double slack = delta + nu + delta * nu;
  const double lhs = pu * pu;
  const double first = sin_w * pu - (1.0 + sin_w) * slack;
  // The squared form certifies the angle condition only on the branch where
  // the squared term is nonnegative; squaring a negative value would admit
  // spurious certificates.
  if (first < 0.0) return false;
  const double rhs = first * first + pu * pu * pv * pv;
  return lhs < rhs;
}

namespace {

// Random unit-Frobenius X of rank <= r supported on s1 rows x s2 columns,
// returned as factor pairs so the operator can be applied sparsely.
struct SparseLowRank {
  std::vector<CVector> left;
  std::vector<CVector> right;
};

SparseLowRank random_sparse_low_rank(Index n1, Index n2, Index s1, Index s2,
                                     int r, Rng& rng) {
  const auto rows = sample_support(n1, s1, rng);
  const auto cols = sample_support(n2, s2, rng);
  SparseLowRank x;
  for (int q = 0; q < r; ++q) {
    CVector a = CVector::Zero(n1);
    CVector b = CVector::Zero(n2);
    for (const auto i : rows) a(i) = rng.next_cgaussian();
    for (const auto j : cols) b(j) = rng.next_cgaussian();
    x.left.push_back(std::move(a));
    x.right.push_back(std::move(b));
  }
  // Frobenius normalization of sum_q left_q right_q^* via the factored Gram.
  double norm_sq = 0.0;
  for (int p = 0; p < r; ++p) {
    for (int q = 0; q < r; ++q) {
      const Complex cross =
          x.left[static_cast<std::size_t>(p)].dot(x.left[static_cast<std::size_t>(q)]) *
          x.right[static_cast<std::size_t>(q)].dot(x.right[static_cast<std::size_t>(p)]);
      norm_sq += cross.real();
    }
  }
  const double scale = 1.0 / std::sqrt(norm_sq);
  for (auto& a : x.left) a *= scale;
  return x;
}

double rip_deviation(const MeasurementOperator& op, const SparseLowRank& x) {
  CVector image = CVector::Zero(op.m);
  for (std::size_t q = 0; q < x.left.size(); ++q) {
    image += op.apply_rank_one(x.left[q], x.right[q]);
  }
  return std::abs(image.squaredNorm() - 1.0);
}

}  // namespace

double estimate_rip_constant(const MeasurementOperator& op, Index s1, Index s2,
                             int r, int trials, std::uint64_t seed) {
  if (r != 1 && r != 2) {
    throw std::invalid_argument("estimate_rip_constant: r must be 1 or 2");
  }
  if (trials < 1) {
    throw std::invalid_argument("estimate_rip_constant: trials must be >= 1");
  }
  if (s1 < 1 || s1 > op.n1 || s2 < 1 || s2 > op.n2) {
    throw std::invalid_argument("estimate_rip_constant: sparsity out of range");
  }
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    const auto x = random_sparse_low_rank(op.n1, op.n2, s1, s2, r, rng);
    worst = std::max(worst, rip_deviation(op, x));
  }
  return worst;
}

double enumerate_rip_constant(const MeasurementOperator& op, Index s1,
                              Index s2, int fillings_per_support,
                              std::uint64_t seed) {
  if (s1 < 1 || s1 > op.n1 || s2 < 1 || s2 > op.n2) {
    throw std::invalid_argument("enumerate_rip_constant: sparsity out of range");
  }
  if (fillings_per_support < 1) {
    throw std::invalid_argument("enumerate_rip_constant: fillings must be >= 1");
  }

  // Enumerate ascending index subsets with the classic odometer.
  const auto for_each_subset = [](Index n, Index k, auto&& body) {
    std::vector<Index> subset(static_cast<std::size_t>(k));
    std::iota(subset.begin(), subset.end(), Index{0});
    while (true) {
      body(subset);
      Index pos = k - 1;
      while (pos >= 0 && subset[static_cast<std::size_t>(pos)] == n - k + pos) {
        --pos;
      }
      if (pos < 0) break;
      ++subset[static_cast<std::size_t>(pos)];
      for (Index q = pos + 1; q < k; ++q) {
        subset[static_cast<std::size_t>(q)] =
            subset[static_cast<std::size_t>(q - 1)] + 1;
      }
    }
  };

  double worst = 0.0;
  std::uint64_t support_counter = 0;
  for_each_subset(op.n1, s1, [&](const std::vector<Index>& rows) {
    for_each_subset(op.n2, s2, [&](const std::vector<Index>& cols) {
      Rng rng(derive_seed(seed, support_counter++));
      for (int f = 0; f < fillings_per_support; ++f) {
        CVector a = CVector::Zero(op.n1);
        CVector b = CVector::Zero(op.n2);
        for (const auto i : rows) a(i) = rng.next_cgaussian();
        for (const auto j : cols) b(j) = rng.next_cgaussian();
        const double scale = a.norm() * b.norm();
        if (scale == 0.0) continue;
        a /= scale;
        const double dev =
            std::abs(op.apply_rank_one(a, b).squaredNorm() - 1.0);
        worst = std::max(worst, dev);
      }
    });
  });
  return worst;
}

namespace {

double restricted_spectral_norm(const CMatrix& full, const IndexSet& j1,
                                const IndexSet& j2) {
  if (j1.empty() || j2.empty()) return 0.0;
  CMatrix sub(static_cast<Index>(j1.size()), static_cast<Index>(j2.size()));
  for (std::size_t r = 0; r < j1.size(); ++r) {
    for (std::size_t c = 0; c < j2.size(); ++c) {
      sub(static_cast<Index>(r), static_cast<Index>(c)) = full(j1[r], j2[c]);
    }
  }
  if (sub.norm() == 0.0) return 0.0;
  return Eigen::JacobiSVD<CMatrix>(sub).singularValues()(0);
}

void check_index_set(const IndexSet& j, Index bound, const char* what) {
  for (const Index i : j) {
    if (i < 0 || i >= bound) throw std::invalid_argument(what);
  }
}

}  // namespace

double near_isometry_residual(const MeasurementOperator& op, const CVector& u,
                              const CVector& v, const IndexSet& j1,
                              const IndexSet& j2) {
  if (u.size() != op.n1 || v.size() != op.n2) {
    throw std::invalid_argument("near_isometry_residual: length mismatch");
  }
  check_index_set(j1, op.n1, "near_isometry_residual: j1 out of range");
  check_index_set(j2, op.n2, "near_isometry_residual: j2 out of range");
  if (u.norm() == 0.0 || v.norm() == 0.0) return 0.0;
  const CMatrix residual =
      op.adjoint(op.apply_rank_one(u, v)) - u * v.adjoint();
  return restricted_spectral_norm(residual, j1, j2);
}

double adjoint_noise_norm(const MeasurementOperator& op, const CVector& z,
                          const IndexSet& j1, const IndexSet& j2) {
  if (z.size() != op.m) {
    throw std::invalid_argument("adjoint_noise_norm: length mismatch");
  }
  check_index_set(j1, op.n1, "adjoint_noise_norm: j1 out of range");
  check_index_set(j2, op.n2, "adjoint_noise_norm: j2 out of range");
  if (z.norm() == 0.0) return 0.0;
  return restricted_spectral_norm(op.adjoint(z), j1, j2);
}

TheoryReport make_theory_report(double delta, double nu, double pu,
                                double pv) {
  TheoryReport report;
  report.delta = delta;
  report.nu = nu;
  report.c_delta = c_delta(delta);
  const OmegaSup w = omega_sup(delta, nu);
  report.omega_sup = w.omega;
  report.omega_feasible = w.feasible;
  report.m_delta_nu = m_delta_nu(delta, nu);
  report.pu = pu;
  report.pv = pv;
  const double pv_perp = std::sqrt(std::max(0.0, 1.0 - pv * pv));
  report.angle_bound = angle_bound(pu, pv_perp, delta, nu);
  report.condition_holds = sufficient_condition(pu, pv, delta, nu);
  report.within_sin_bound_limits =
      delta <= kSinBoundDeltaNuLimit && nu <= kSinBoundDeltaNuLimit;
  report.within_guarantee_limits =
      delta <= kGuaranteeDeltaNuLimit && nu <= kGuaranteeDeltaNuLimit;
  return report;
}

}  // namespace spf
