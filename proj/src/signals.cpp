#include "spf/signals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spf/rng.hpp"

namespace spf {

double k_largest_norm(const CVector& x, Index k) {
  if (k < 1 || k > x.size()) {
    throw std::invalid_argument("k_largest_norm: k out of range");
  }
  // Descending-sorted summation keeps the value bit-reproducible for any
  // selection path over the same entries.
  std::vector<double> sq(static_cast<std::size_t>(x.size()));
  for (Index i = 0; i < x.size(); ++i) {
    sq[static_cast<std::size_t>(i)] = std::norm(x(i));
  }
  std::sort(sq.begin(), sq.end(), std::greater<double>());
  double acc = 0.0;
  for (Index i = 0; i < k; ++i) acc += sq[static_cast<std::size_t>(i)];
  return std::sqrt(acc);
}

namespace {

constexpr double kFeasibilityTol = 1e-12;

// Shared builder: head entries at modulus head_mod on `head` positions,
// remaining mass spread over the rest of the support.
CVector build_sparse_vector(Index n, Index s, Index k, double head_mod,
                            std::uint64_t seed, TailStyle tail) {
  Rng rng(seed);
  const std::vector<std::int64_t> support = sample_support(n, s, rng);
  // Head positions: a uniform k-subset of the support.
  std::vector<std::int64_t> head_pos = sample_support(s, k, rng);

  const double head_mass = static_cast<double>(k) * head_mod * head_mod;
  const double tail_mass = std::max(0.0, 1.0 - head_mass);
  const Index t = s - k;

  std::vector<double> tail_mod(static_cast<std::size_t>(t), 0.0);
  if (t > 0 && tail_mass > 0.0) {
    if (tail == TailStyle::kEqualMagnitude) {
      const double mod = std::sqrt(tail_mass / static_cast<double>(t));
      std::fill(tail_mod.begin(), tail_mod.end(), mod);
    } else {
      double sum_sq = 0.0;
      for (auto& mod : tail_mod) {
        mod = std::abs(rng.next_gaussian());
        sum_sq += mod * mod;
      }
      if (sum_sq == 0.0) {
        const double mod = std::sqrt(tail_mass / static_cast<double>(t));
        std::fill(tail_mod.begin(), tail_mod.end(), mod);
      } else {
        const double scale = std::sqrt(tail_mass / sum_sq);
        for (auto& mod : tail_mod) mod *= scale;
      }
    }
  }

  std::vector<bool> is_head(static_cast<std::size_t>(s), false);
  for (const auto p : head_pos) is_head[static_cast<std::size_t>(p)] = true;

  CVector out = CVector::Zero(n);
  std::size_t tail_at = 0;
  for (Index p = 0; p < s; ++p) {
    const double mod = is_head[static_cast<std::size_t>(p)]
                           ? head_mod
                           : tail_mod[tail_at++];
    out(support[static_cast<std::size_t>(p)]) = mod * rng.next_phase();
  }
  return out;
}

}  // namespace

CVector gen_peaky_vector(Index n, Index s, double mu, std::uint64_t seed,
                         TailStyle tail) {
  if (s < 1 || s > n) throw std::invalid_argument("gen_peaky_vector: bad s");
  const double lo = 1.0 / std::sqrt(static_cast<double>(s));
  if (mu < lo - kFeasibilityTol || mu > 1.0 + kFeasibilityTol) {
    throw std::invalid_argument("gen_peaky_vector: mu outside [1/sqrt(s), 1]");
  }
  return build_sparse_vector(n, s, 1, std::min(mu, 1.0), seed, tail);
}

CVector gen_k_peaky_vector(Index n, Index s, Index k, double xi,
                           std::uint64_t seed, TailStyle tail) {
  if (s < 1 || s > n || k < 1 || k > s) {
    throw std::invalid_argument("gen_k_peaky_vector: need 1 <= k <= s <= n");
  }
  const double lo = std::sqrt(static_cast<double>(k) / static_cast<double>(s));
  if (xi < lo - kFeasibilityTol || xi > 1.0 + kFeasibilityTol) {
    throw std::invalid_argument(
        "gen_k_peaky_vector: xi outside [sqrt(k/s), 1]");
  }
  const double head_mod = std::min(xi, 1.0) / std::sqrt(static_cast<double>(k));
  return build_sparse_vector(n, s, k, head_mod, seed, tail);
}

CVector noise_for_ratio(const MeasurementOperator& op, const CVector& u,
                        const CVector& v, double nu_target,
                        std::uint64_t seed) {
  if (nu_target < 0.0) {
    throw std::invalid_argument("noise_for_ratio: nu_target must be >= 0");
  }
  const double signal = op.apply_rank_one(u, v).norm();
  if (signal == 0.0) {
    throw DegenerateInputError("noise_for_ratio: zero signal");
  }
  CVector z = CVector::Zero(op.m);
  if (nu_target == 0.0) return z;
  Rng rng(seed);
  for (Index ell = 0; ell < op.m; ++ell) z(ell) = rng.next_cgaussian();
  const double g = z.norm();
  if (g == 0.0) throw DegenerateInputError("noise_for_ratio: zero direction");
  return (nu_target * signal / g) * z;
}

double sin_angle(const CVector& a, const CVector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    throw std::invalid_argument("sin_angle: zero vector");
  }
  const double c = std::abs(a.dot(b)) / (na * nb);
  return std::sqrt(std::max(0.0, 1.0 - std::min(c, 1.0) * std::min(c, 1.0)));
}

double rel_error(const CVector& u_hat, const CVector& v_hat, const CVector& u,
                 const CVector& v) {
  // ||a c^* - b d^*||_F^2 expands through the factored Gram terms.
  const double ref_sq = u.squaredNorm() * v.squaredNorm();
  if (ref_sq == 0.0) {
    throw std::invalid_argument("rel_error: zero reference matrix");
  }
  const double est_sq = u_hat.squaredNorm() * v_hat.squaredNorm();
  const Complex cross = u_hat.dot(u) * v.dot(v_hat);
  const double diff_sq =
      std::max(0.0, est_sq + ref_sq - 2.0 * cross.real());
  return std::sqrt(diff_sq / ref_sq);
}

double rel_error(const CMatrix& x_hat, const CVector& u, const CVector& v) {
  const double ref = std::sqrt(u.squaredNorm() * v.squaredNorm());
  if (ref == 0.0) {
    throw std::invalid_argument("rel_error: zero reference matrix");
  }
  return (x_hat - u * v.adjoint()).norm() / ref;
}

ProblemInstance generate_instance(const MeasurementOperator& op,
                                  const InstanceParams& params) {
  if (params.n1 != op.n1 || params.n2 != op.n2 || params.m != op.m) {
    throw std::invalid_argument("generate_instance: params/operator mismatch");
  }
  ProblemInstance inst;
  inst.params = params;
  inst.u = gen_k_peaky_vector(params.n1, params.s1, params.k, params.xi,
                              derive_seed(params.seed, 1));
  inst.v = gen_peaky_vector(params.n2, params.s2, params.mu,
                            derive_seed(params.seed, 2));
  inst.z =
      noise_for_ratio(op, inst.u, inst.v, params.nu, derive_seed(params.seed, 3));
  inst.b = op.apply_rank_one(inst.u, inst.v) + inst.z;
  return inst;
}

}  // namespace spf
