#pragma once

#include <cstdint>

#include "spf/measurement.hpp"
#include "spf/types.hpp"

namespace spf {

// Limits under which the closed-form bounds below are stated. The sin
// estimates hold for delta, nu <= 0.04; the local-convergence guarantee is
// stated up to 0.08. Both are exposed; callers pick the one their check
// relies on.
constexpr double kSinBoundDeltaNuLimit = 0.04;
constexpr double kGuaranteeDeltaNuLimit = 0.08;

/// C_delta = 1.1 (sqrt(2/(1-d^2)) + 1/(1-d)) / (1 - sqrt(2/(1-d^2)) d).
/// Domain: d >= 0 with sqrt(2/(1-d^2)) d < 1.
double c_delta(double delta);

struct OmegaSup {
  double omega = 0.0;  // radians, in [0, pi/2]
  bool feasible = false;
};

/// sup of the angles omega in [0, pi/2) satisfying
/// omega >= arcsin(C_delta [delta tan(omega) + (1+delta) nu sec(omega)]),
/// located by a 10^4-point grid scan refined by bisection to 1e-10.
/// Empty feasible set reports omega = 0 with feasible = false.
OmegaSup omega_sup(double delta, double nu);

/// 2 (delta + nu + delta nu).
double m_delta_nu(double delta, double nu);

/// (pu * pv_perp + (d + nu + d nu)) / (pu - (d + nu + d nu)); +infinity
/// when the denominator is not positive.
double angle_bound(double pu, double pv_perp, double delta, double nu);

/// Initialization sufficient condition:
/// pu^2 < (sin(w) pu - (1 + sin(w)) (d + nu + d nu))^2 + pu^2 pv^2
/// with w = omega_sup(delta, nu).
bool sufficient_condition(double pu, double pv, double delta, double nu);

/// Monte Carlo lower bound on the (s1, s2, r)-restricted isometry constant:
/// max over random unit-Frobenius rank-<=r matrices with s1 nonzero rows
/// and s2 nonzero columns of |  ||A(X)||^2 - 1 |. A sampled lower bound,
/// not a certificate.
double estimate_rip_constant(const MeasurementOperator& op, Index s1, Index s2,
                             int r, int trials, std::uint64_t seed);

/// Exhaustive toy-scale variant (r = 1): every support pair, several random
/// rank-one fillings each. Tighter than sampling at small dimensions.
double enumerate_rip_constant(const MeasurementOperator& op, Index s1,
                              Index s2, int fillings_per_support,
                              std::uint64_t seed);

/// Spectral norm of the (J1 x J2)-restricted residual (A^* A - I)(u v^*).
double near_isometry_residual(const MeasurementOperator& op, const CVector& u,
                              const CVector& v, const IndexSet& j1,
                              const IndexSet& j2);

/// Spectral norm of the (J1 x J2)-restricted adjoint image of z.
double adjoint_noise_norm(const MeasurementOperator& op, const CVector& z,
                          const IndexSet& j1, const IndexSet& j2);

struct TheoryReport {
  double delta = 0.0;
  double nu = 0.0;
  double c_delta = 0.0;
  double omega_sup = 0.0;  // radians
  bool omega_feasible = false;
  double m_delta_nu = 0.0;
  double pu = 1.0;          // ||P_{J1} u|| used for the bounds
  double pv = 1.0;          // ||P_{J2} v||
  double angle_bound = 0.0; // sin angle bound from the support energies
  bool condition_holds = false;
  bool within_sin_bound_limits = false;    // delta, nu <= 0.04
  bool within_guarantee_limits = false;  // delta, nu <= 0.08
};

TheoryReport make_theory_report(double delta, double nu, double pu = 1.0,
                                double pv = 1.0);

}  // namespace spf
