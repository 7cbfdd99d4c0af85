#pragma once

#include <cstdint>

#include "spf/measurement.hpp"
#include "spf/types.hpp"

namespace spf {

/// How non-peak mass is distributed in generated test signals.
enum class TailStyle { kEqualMagnitude, kGaussianMagnitude };

/// l2 norm of the k largest-modulus entries of x.
double k_largest_norm(const CVector& x, Index k);

/// Unit-norm s-sparse vector whose largest entry modulus is exactly mu.
/// Support and peak position drawn uniformly, phases uniform. Feasible for
/// 1/sqrt(s) <= mu <= 1. With kGaussianMagnitude tails the off-peak moduli
/// are random (the peak entry still has modulus mu but may not dominate).
CVector gen_peaky_vector(Index n, Index s, double mu, std::uint64_t seed,
                         TailStyle tail = TailStyle::kEqualMagnitude);

/// Unit-norm s-sparse vector with k_largest_norm(., k) exactly xi: k head
/// entries of modulus xi/sqrt(k), s-k tail entries of modulus
/// sqrt((1-xi^2)/(s-k)), uniform phases and support. Feasible for
/// sqrt(k/s) <= xi <= 1.
CVector gen_k_peaky_vector(Index n, Index s, Index k, double xi,
                           std::uint64_t seed,
                           TailStyle tail = TailStyle::kEqualMagnitude);

/// Isotropic complex Gaussian direction rescaled so that
/// ||z|| / ||op.apply(u v^*)|| equals nu_target exactly.
CVector noise_for_ratio(const MeasurementOperator& op, const CVector& u,
                        const CVector& v, double nu_target,
                        std::uint64_t seed);

/// sin of the principal angle: sqrt(1 - |<a,b>|^2 / (||a||^2 ||b||^2)).
double sin_angle(const CVector& a, const CVector& b);

/// || u_hat v_hat^* - u v^* ||_F / || u v^* ||_F, evaluated in factored form.
double rel_error(const CVector& u_hat, const CVector& v_hat, const CVector& u,
                 const CVector& v);

/// Same metric for an explicit estimate matrix.
double rel_error(const CMatrix& x_hat, const CVector& u, const CVector& v);

/// Generation record for a planted instance; everything is regenerable from
/// these numbers.
struct InstanceParams {
  Index n1 = 0;
  Index n2 = 0;
  Index m = 0;
  Index s1 = 1;
  Index s2 = 1;
  Index k = 1;       // head size for u
  double xi = 1.0;   // k-peakiness of u
  double mu = 1.0;   // peakiness of v
  double nu = 0.0;   // target noise-to-signal ratio
  std::uint64_t seed = 0;
};

struct ProblemInstance {
  CVector u;  // unit norm, s1-sparse
  CVector v;  // unit norm, s2-sparse
  CVector z;
  CVector b;  // op.apply(u v^*) + z
  InstanceParams params;
};

/// u is k-peaky (xi), v is peaky (mu), z hits nu exactly. Sub-seeds are
/// derived from params.seed, so the instance is a pure function of
/// (operator, params).
ProblemInstance generate_instance(const MeasurementOperator& op,
                                  const InstanceParams& params);

}  // namespace spf
