// Acceptance suite: end-to-end checks of the operator identities, solver
// recovery rates, closed-form bound grids, and harness determinism. Each
// criterion prints a single PASS/FAIL line; the exit code is the number of
// failures.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "spf/experiments.hpp"
#include "spf/init.hpp"
#include "spf/rng.hpp"
#include "spf/signals.hpp"
#include "spf/solvers.hpp"
#include "spf/theory.hpp"

using namespace spf;

namespace {

// Deterministic parallel trial runner: trial t only touches slot t.
void parallel_trials(int count, const std::function<void(int)>& body) {
  const int workers = std::max(2u, std::thread::hardware_concurrency());
  std::atomic<int> cursor{0};
  const auto drain = [&] {
    while (true) {
      const int t = cursor.fetch_add(1);
      if (t >= count) break;
      body(t);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(drain);
  for (auto& th : pool) th.join();
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream buf;
  buf << is.rdbuf();
  return buf.str();
}

// Least-squares slope of e_t against e_{t-1}; the contraction factor of a
// linearly converging trace. Flat or too-short traces count as converged.
double fit_convergence_rate(const std::vector<double>& trace) {
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t t = 1; t < trace.size(); ++t) {
    if (trace[t - 1] < 1e-13) break;
    pairs.emplace_back(trace[t - 1], trace[t]);
  }
  if (pairs.size() < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pairs) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(pairs.size());
  my /= static_cast<double>(pairs.size());
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : pairs) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx < 1e-30) return 0.0;
  return sxy / sxx;
}

InstanceParams regime_params(Index n, Index s, Index m, Index k, double xi,
                             double mu, double nu, std::uint64_t seed) {
  InstanceParams p;
  p.n1 = p.n2 = n;
  p.m = m;
  p.s1 = p.s2 = s;
  p.k = k;
  p.xi = xi;
  p.mu = mu;
  p.nu = nu;
  p.seed = seed;
  return p;
}

// --- criteria ---------------------------------------------------------

bool operator_identities(std::string& detail) {
  const int instances = 200;
  std::vector<double> worst(instances, 0.0);
  parallel_trials(instances, [&](int t) {
    Rng setup(derive_seed(101, static_cast<std::uint64_t>(t)));
    const Index n1 = 2 + static_cast<Index>(setup.uniform_below(31));
    const Index n2 = 2 + static_cast<Index>(setup.uniform_below(31));
    const Index m = 8 + static_cast<Index>(setup.uniform_below(249));
    const auto op = make_gaussian_operator(n1, n2, m, setup.next_u64());

    Rng rng(derive_seed(102, static_cast<std::uint64_t>(t)));
    const CMatrix x = test::random_cmatrix(n1, n2, rng);
    const CVector b = test::random_cvector(m, rng);
    const CVector ax = op.apply(x);
    const Complex lhs = ax.dot(b);
    const Complex rhs = x.conjugate().cwiseProduct(op.adjoint(b)).sum();
    double dev = std::abs(lhs - rhs) / std::max(1e-300, ax.norm() * b.norm());

    const CVector xv = test::random_cvector(n1, rng);
    const CVector yv = test::random_cvector(n2, rng);
    const CVector reference = op.apply(xv * yv.adjoint());
    const double scale = reference.norm();
    dev = std::max(dev, (op.apply_rank_one(xv, yv) - reference).norm() / scale);
    dev = std::max(dev, (op.f_matrix(yv) * xv - reference).norm() / scale);
    dev = std::max(
        dev, ((op.g_matrix(xv) * yv).conjugate() - reference).norm() / scale);
    worst[static_cast<std::size_t>(t)] = dev;
  });
  double max_dev = 0.0;
  for (const double d : worst) max_dev = std::max(max_dev, d);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%d instances, max relative deviation %.2e",
                instances, max_dev);
  detail = buf;
  return max_dev <= 1e-10;
}

bool htp_oracle_recovery(std::string& detail) {
  const int trials = 100;
  std::vector<int> hit(trials, 0);
  parallel_trials(trials, [&](int t) {
    Rng rng(derive_seed(202, static_cast<std::uint64_t>(t)));
    CMatrix a = test::random_cmatrix(80, 40, rng);
    a /= std::sqrt(80.0);  // entries CN(0, 1/80)
    CVector x0 = CVector::Zero(40);
    const auto support = sample_support(40, 4, rng);
    for (const auto i : support) x0(i) = rng.next_cgaussian();
    x0.normalize();

    SpfConfig cfg;
    const CVector x = htp(a, CVector(a * x0), 4, cfg);
    IndexSet recovered;
    for (Index i = 0; i < 40; ++i) {
      if (x(i) != Complex{0.0, 0.0}) recovered.push_back(i);
    }
    const bool support_ok =
        recovered == IndexSet(support.begin(), support.end());
    hit[static_cast<std::size_t>(t)] =
        (support_ok && (x - x0).norm() <= 1e-8) ? 1 : 0;
  });
  int hits = 0;
  for (const int h : hit) hits += h;
  detail = std::to_string(hits) + "/100 exact recoveries";
  return hits >= 95;
}

constexpr Index kRegimeN = 64;
constexpr Index kRegimeS = 3;

Index regime_m() {
  return static_cast<Index>(std::ceil(
      8.0 * (kRegimeS + kRegimeS) *
      std::log(static_cast<double>(kRegimeN) / kRegimeS)));
}

bool noiseless_spf_recovery(std::string& detail) {
  const Index m = regime_m();
  const int trials = 100;
  std::vector<int> hit(trials, 0);
  parallel_trials(trials, [&](int t) {
    const std::uint64_t seed = derive_seed(303, static_cast<std::uint64_t>(t));
    const auto op = make_gaussian_operator(kRegimeN, kRegimeN, m, seed);
    const auto inst = generate_instance(
        op, regime_params(kRegimeN, kRegimeS, m, 1, 0.8, 0.8, 0.0, seed + 1));
    SpfConfig cfg;
    cfg.s1 = cfg.s2 = kRegimeS;
    const auto init = thresholding_init(op, inst.b, kRegimeS, kRegimeS);
    const auto res =
        sparse_power_factorization(op, inst.b, cfg, init.v0,
                                   GroundTruth{inst.u, inst.v});
    const double err = rel_error(res.u_hat, res.v_hat, inst.u, inst.v);
    hit[static_cast<std::size_t>(t)] = err <= 1e-4 ? 1 : 0;
  });
  int hits = 0;
  for (const int h : hit) hits += h;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "m = %lld, %d/100 at rel error <= 1e-4",
                static_cast<long long>(m), hits);
  detail = buf;
  return hits >= 90;
}

bool noisy_steady_state(std::string& detail) {
  const Index m = regime_m();
  const double nu = 0.01;
  const double bound = 8.3 * nu + 1e-2;
  const int trials = 100;
  std::vector<int> hit(trials, 0);
  std::vector<double> rho(trials, 0.0);
  parallel_trials(trials, [&](int t) {
    const std::uint64_t seed = derive_seed(404, static_cast<std::uint64_t>(t));
    const auto op = make_gaussian_operator(kRegimeN, kRegimeN, m, seed);
    const auto inst = generate_instance(
        op, regime_params(kRegimeN, kRegimeS, m, 1, 0.8, 0.8, nu, seed + 1));
    SpfConfig cfg;
    cfg.s1 = cfg.s2 = kRegimeS;
    const auto init = thresholding_init(op, inst.b, kRegimeS, kRegimeS);
    const auto res =
        sparse_power_factorization(op, inst.b, cfg, init.v0,
                                   GroundTruth{inst.u, inst.v});
    const double err = rel_error(res.u_hat, res.v_hat, inst.u, inst.v);
    const double r = fit_convergence_rate(res.error_trace);
    rho[static_cast<std::size_t>(t)] = r;
    hit[static_cast<std::size_t>(t)] = (err <= bound && r < 1.0) ? 1 : 0;
  });
  int hits = 0;
  double rho_max = 0.0;
  for (int t = 0; t < trials; ++t) {
    hits += hit[static_cast<std::size_t>(t)];
    rho_max = std::max(rho_max, rho[static_cast<std::size_t>(t)]);
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "%d/100 at rel error <= %.3f with fitted rho < 1 (max rho %.3f)",
                hits, bound, rho_max);
  detail = buf;
  return hits >= 90;
}

bool k_peaky_phase_transition(std::string& detail) {
  ExperimentConfig cfg;
  cfg.n1 = {64};
  cfg.n2 = {64};
  cfg.m = {45, 90, 180, 360, 720, 1440};
  cfg.s1 = {16};
  cfg.s2 = {16};
  cfg.k = {4};
  cfg.xi = {0.8};
  cfg.mu = {0.8};
  cfg.nu = {0.0};
  cfg.trials = 25;
  cfg.base_seed = 505;
  const auto records =
      run_grid(cfg, static_cast<int>(
                        std::max(2u, std::thread::hardware_concurrency())));

  std::vector<double> rates;
  for (std::size_t c = 0; c < cfg.m.size(); ++c) {
    int hits = 0;
    for (int t = 0; t < cfg.trials; ++t) {
      hits += records[c * static_cast<std::size_t>(cfg.trials) +
                      static_cast<std::size_t>(t)]
                      .success
                  ? 1
                  : 0;
    }
    rates.push_back(static_cast<double>(hits) / cfg.trials);
  }

  const double lo = (16 + 16) * std::log(64.0 / 16.0);
  const double hi = 40.0 * lo;
  int cross = -1;
  for (std::size_t i = 1; i < rates.size(); ++i) {
    if (rates[i - 1] < 0.5 && rates[i] >= 0.5) {
      cross = static_cast<int>(i);
      break;
    }
  }
  const bool cross_in_bracket =
      cross > 0 && static_cast<double>(cfg.m[static_cast<std::size_t>(cross - 1)]) >= lo &&
      static_cast<double>(cfg.m[static_cast<std::size_t>(cross)]) <= hi;

  // empirical monotonicity up to 3-trial noise
  const double slack = 3.0 / cfg.trials;
  bool monotone = true;
  for (std::size_t i = 1; i < rates.size(); ++i) {
    if (rates[i] < rates[i - 1] - slack) monotone = false;
  }

  std::ostringstream os;
  os << "rates over m:";
  for (std::size_t i = 0; i < rates.size(); ++i) {
    os << " " << cfg.m[i] << ":" << rates[i];
  }
  os << (cross_in_bracket ? ", crossing inside bracket" : ", no valid crossing");
  os << " [" << static_cast<long long>(std::ceil(lo)) << ", "
     << static_cast<long long>(std::floor(hi)) << "]";
  detail = os.str();
  return cross_in_bracket && monotone;
}

bool theory_bound_grid(std::string& detail) {
  const int grid = 100;
  std::vector<int> bad(grid, 0);
  parallel_trials(grid, [&](int gi) {
    for (int gj = 0; gj < grid; ++gj) {
      const double delta = 0.04 * gi / (grid - 1);
      const double nu = 0.04 * gj / (grid - 1);
      const double c = c_delta(delta);
      if (c < 2.0 || c > 5.0) {
        bad[static_cast<std::size_t>(gi)] = 1;
        return;
      }
      const auto w = omega_sup(delta, nu);
      const double sin_w = std::sin(w.omega);
      if (!w.feasible || sin_w < 0.5 || sin_w > 1.0) {
        bad[static_cast<std::size_t>(gi)] = 1;
        return;
      }
      const double slack = delta + 2.0 * delta * nu + 2.0 * nu;
      if (sin_w < 1.0 - c * c * slack * slack - 1e-12) {
        bad[static_cast<std::size_t>(gi)] = 1;
        return;
      }
    }
  });
  int violations = 0;
  for (const int b : bad) violations += b;
  detail = "100x100 grid on [0, 0.04]^2, " +
           std::to_string(violations) + " violating rows";
  return violations == 0;
}

bool initialization_angle(std::string& detail) {
  const Index m = regime_m();
  const int trials = 100;
  std::vector<int> hit(trials, 0);
  parallel_trials(trials, [&](int t) {
    const std::uint64_t seed = derive_seed(707, static_cast<std::uint64_t>(t));
    const auto op = make_gaussian_operator(kRegimeN, kRegimeN, m, seed);
    const auto inst = generate_instance(
        op, regime_params(kRegimeN, kRegimeS, m, 1, 0.8, 0.8, 0.0, seed + 1));
    const auto init = thresholding_init(op, inst.b, kRegimeS, kRegimeS);

    const double delta_hat = estimate_rip_constant(
        op, std::min<Index>(3 * kRegimeS, kRegimeN),
        std::min<Index>(3 * kRegimeS, kRegimeN), 2, 500, seed + 2);
    const double nu_measured =
        inst.z.norm() / op.apply_rank_one(inst.u, inst.v).norm();

    double pu_sq = 0.0;
    for (const Index i : init.j1_hat) pu_sq += std::norm(inst.u(i));
    double pv_sq = 0.0;
    for (const Index j : init.j2_hat) pv_sq += std::norm(inst.v(j));
    const double pu = std::sqrt(pu_sq);
    const double pv_perp = std::sqrt(std::max(0.0, 1.0 - pv_sq));

    const double bound = angle_bound(pu, pv_perp, delta_hat, nu_measured);
    const double measured = sin_angle(init.v0, inst.v);
    hit[static_cast<std::size_t>(t)] = measured <= bound ? 1 : 0;
  });
  int hits = 0;
  for (const int h : hit) hits += h;
  detail = std::to_string(hits) + "/100 angles within the bound";
  return hits >= 90;
}

bool brute_force_equivalence(std::string& detail) {
  int checks = 0;
  bool ok = true;
  Rng rng(808);

  for (int t = 0; t < 20; ++t) {
    const CVector w = test::random_cvector(12, rng);
    const auto [best, energy] = test::best_subset_by_energy(w, 5);
    ok = ok && top_k_support(w, 5) == best;
    ++checks;
  }
  for (int t = 0; t < 20; ++t) {
    const CVector x = test::random_cvector(9, rng);
    const auto [subset, energy] = test::best_subset_by_energy(x, 4);
    ok = ok && std::abs(k_largest_norm(x, 4) - std::sqrt(energy)) == 0.0;
    ++checks;
  }
  for (int t = 0; t < 10; ++t) {
    const CMatrix a = test::random_cmatrix(6, 7, rng);
    const RVector scores = row_scores(a, 3);
    for (Index i = 0; i < 6; ++i) {
      const auto [subset, energy] =
          test::best_subset_by_energy(CVector(a.row(i).transpose()), 3);
      ok = ok && scores(i) == std::sqrt(energy);
      ++checks;
    }
  }
  for (int t = 0; t < 10; ++t) {
    const CMatrix a = test::random_cmatrix(8, 9, rng);
    const IndexSet j1{0, 2, 3, 6};
    double best_energy = -1.0;
    IndexSet best;
    test::for_each_subset(9, 3, [&](const std::vector<Index>& cols) {
      double energy = 0.0;
      for (const Index i : j1) {
        for (const Index j : cols) energy += std::norm(a(i, j));
      }
      if (energy > best_energy) {
        best_energy = energy;
        best = cols;
      }
    });
    ok = ok && select_col_support(a, j1, 3) == best;
    ++checks;
  }
  detail = std::to_string(checks) + " exhaustive comparisons, exact agreement";
  return ok;
}

bool csv_determinism(std::string& detail) {
  ExperimentConfig cfg;
  cfg.n1 = {24};
  cfg.n2 = {24};
  cfg.m = {40, 55, 70};
  cfg.s1 = {2};
  cfg.s2 = {2};
  cfg.k = {1};
  cfg.xi = {0.85};
  cfg.mu = {0.85};
  cfg.nu = {0.0, 0.01, 0.02};
  cfg.trials = 10;
  cfg.base_seed = 909;

  const std::string dir = "/tmp/spf_acceptance";
  std::filesystem::create_directories(dir);
  const std::string one = dir + "/grid_w1.csv";
  const std::string eight = dir + "/grid_w8.csv";
  write_csv(run_grid(cfg, 1), one);
  write_csv(run_grid(cfg, 8), eight);
  const bool same = slurp(one) == slurp(eight);
  std::filesystem::remove_all(dir);
  detail = std::string("3x3 grid x 10 trials, 1 vs 8 workers: ") +
           (same ? "byte-identical CSV" : "CSV outputs differ");
  return same;
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  bool (*body)(std::string&);
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "operator identities", 10.0, operator_identities},
      {2, "HTP oracle recovery", 30.0, htp_oracle_recovery},
      {3, "noiseless SPF recovery", 300.0, noiseless_spf_recovery},
      {4, "noisy steady-state bound", 300.0, noisy_steady_state},
      {5, "k-peaky phase transition", 900.0, k_peaky_phase_transition},
      {6, "closed-form bound grid", 5.0, theory_bound_grid},
      {7, "initialization angle bound", 300.0, initialization_angle},
      {8, "brute-force oracle equivalence", 60.0, brute_force_equivalence},
      {9, "grid determinism across workers", 120.0, csv_determinism},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool pass = false;
    try {
      pass = c.body(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    const bool in_budget = seconds < c.budget_seconds;
    pass = pass && in_budget;
    if (!pass) ++failures;
    std::printf("%s  %d. %s: %s [%.1f s%s]\n", pass ? "PASS" : "FAIL", c.id,
                c.name, detail.c_str(), seconds,
                in_budget ? "" : ", over budget");
    std::fflush(stdout);
  }
  if (failures == 0) {
    std::printf("all %zu acceptance criteria passed\n", std::size(criteria));
  } else {
    std::printf("%d acceptance criteria failed\n", failures);
  }
  return failures;
}
