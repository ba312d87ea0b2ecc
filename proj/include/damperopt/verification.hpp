#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "damperopt/lyapunov.hpp"
#include "damperopt/modal_models.hpp"
#include "damperopt/trace_formula.hpp"

namespace damperopt {

/// One line of the verification report.
struct SuiteResult {
  std::string name;
  bool passed = false;
  std::size_t checks = 0;
  double worst = 0.0;  // worst relative error (or other suite-specific measure)
  std::string note;
};

inline double relative_error(double got, double want) {
  const double scale = std::max(std::abs(want), std::numeric_limits<double>::min());
  return std::abs(got - want) / scale;
}

/// A random chain instance whose damper leaves no mode undamped.
struct ChainInstance {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t offset = 0;
  std::size_t count = 0;
};

inline ChainInstance random_chain_instance(std::mt19937_64& rng, std::size_t n_min, std::size_t n_max) {
  ChainInstance c;
  c.n = std::uniform_int_distribution<std::size_t>(n_min, n_max)(rng);
  // gcd(k, n+1) = 1 <=> no entry sin(jkπ/(n+1)) vanishes.
  do {
    c.k = std::uniform_int_distribution<std::size_t>(1, c.n)(rng);
  } while (std::gcd(c.k, c.n + 1) != 1);
  c.count = std::uniform_int_distribution<std::size_t>(1, c.n)(rng);
  c.offset = std::uniform_int_distribution<std::size_t>(0, c.n - c.count)(rng);
  return c;
}

/// Closed-form trace against the dense Lyapunov oracle on random chains.
inline SuiteResult verify_oracle_equivalence(std::size_t instances = 30, std::uint64_t seed = 20240611) {
  SuiteResult r{"oracle_equivalence"};
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < instances; ++i) {
    const auto inst = random_chain_instance(rng, 3, 12);
    const auto model = chain_model(inst.n);
    const auto damper = chain_damper(inst.k, inst.n);
    const auto crit = i % 2 == 0 ? Criterion::Energy : Criterion::Displacement;
    const auto weights = make_weights(crit, inst.offset, inst.count, model);
    const auto coeffs = trace_coefficients(model, damper, weights);
    for (double v : {0.3, 1.0, 3.0}) {
      const double err = relative_error(trace_at(coeffs, v), oracle_weighted_trace(model, damper, weights, v));
      r.worst = std::max(r.worst, err);
      ++r.checks;
    }
  }
  r.passed = r.worst <= 1e-8;
  return r;
}

inline SuiteResult verify_duality(std::size_t instances = 20, std::uint64_t seed = 77) {
  SuiteResult r{"duality"};
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < instances; ++i) {
    const auto inst = random_chain_instance(rng, 2, 12);
    const auto model = chain_model(inst.n);
    const auto weights = make_weights(i % 2 == 0 ? Criterion::Energy : Criterion::Displacement, inst.offset,
                                      inst.count, model);
    const auto pm = assemble_A(model, chain_damper(inst.k, inst.n), 0.5 + static_cast<double>(i % 4));
    const auto d = dual_trace_check(pm, weight_matrix(weights));
    r.worst = std::max(r.worst, relative_error(d.dual, d.primal));
    ++r.checks;
  }
  r.passed = r.worst <= 1e-8;
  return r;
}

inline SuiteResult verify_definiteness(std::size_t instances = 10, std::uint64_t seed = 5) {
  SuiteResult r{"hatX_positive_definite"};
  std::mt19937_64 rng(seed);
  bool all = true;
  for (std::size_t i = 0; i < instances; ++i) {
    const auto inst = random_chain_instance(rng, 1, 12);
    const auto model = chain_model(inst.n);
    const auto weights = displacement_weights(0, inst.n, model);
    const auto pm = assemble_A(model, chain_damper(inst.k, inst.n), 1.0);
    all = all && hatX_definiteness(pm, weight_matrix(weights));
    ++r.checks;
  }
  r.passed = all;
  return r;
}

/// ∫‖x(t)‖²dt by time stepping against y₀ᵀX̂y₀.
inline SuiteResult verify_time_integral(std::uint64_t seed = 11) {
  SuiteResult r{"time_domain_integral"};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;

  auto check = [&](const ModalModel& model, const DamperVector& damper, double v, const Eigen::VectorXd& y0) {
    const auto pm = assemble_A(model, damper, v);
    const auto weights = displacement_weights(0, model.n(), model);
    const auto xhat = solve_lyapunov(pm, weight_matrix(weights));
    const double want = y0.dot(xhat.X * y0);
    const auto got = simulate_displacement_integral(pm, y0);
    r.worst = std::max(r.worst, relative_error(got.value, want));
    ++r.checks;
  };

  // Single critically damped mode (ω = π, v·c² = 2ω).
  {
    const auto model = string_model(1);
    const double w = model.omega(0);
    const DamperVector damper({1.0}, 0.5);
    Eigen::VectorXd y0(2);
    y0 << 1.0, 0.0;
    check(model, damper, 2.0 * w, y0);
  }
  for (std::size_t k = 1; k <= 3; ++k) {
    const std::size_t n = 4;
    const auto model = chain_model(n);
    Eigen::VectorXd y0(2 * n);
    for (auto& x : y0) x = gauss(rng);
    check(model, chain_damper(k, n), 1.0, y0);
  }
  r.passed = r.worst <= 1e-4;
  return r;
}

inline SuiteResult verify_one_dof() {
  SuiteResult r{"one_dof"};
  const auto e = one_dof_closed_forms(1.0, 1.0, 2.0, Criterion::Energy);
  const auto d = one_dof_closed_forms(1.0, 1.0, std::sqrt(2.0), Criterion::Displacement);
  r.worst = std::max({relative_error(e.trace, 2.0), relative_error(e.v_opt, 2.0),
                      relative_error(d.trace, std::sqrt(2.0)), relative_error(d.v_opt, std::sqrt(2.0))});
  r.checks = 4;
  r.passed = r.worst <= 1e-12;
  r.note = "energy=(" + std::to_string(e.v_opt) + "," + std::to_string(e.trace) + ") displacement=(" +
           std::to_string(d.v_opt) + "," + std::to_string(d.trace) + ")";
  return r;
}

/// A damper on a node of a weighted mode: the closed form must flag the
/// position and the oracle must refuse the solve.
inline SuiteResult verify_expected_degenerate() {
  SuiteResult r{"expected_degenerate"};
  const auto model = string_model(3);
  const auto damper = string_damper(1.0 / 3.0, 3);
  const auto weights = energy_weights(0, 3, model);
  const bool formula_flags = !trace_coefficients(model, damper, weights).finite;
  bool oracle_refuses = false;
  try {
    (void)oracle_weighted_trace(model, damper, weights, 1.0);
  } catch (const Error& e) {
    oracle_refuses = e.code() == ErrorCode::Degenerate;
  }
  r.checks = 2;
  r.passed = formula_flags && oracle_refuses && damper.is_zero_mode(2);
  r.note = "string y=1/3 mode 3";
  return r;
}

inline std::vector<SuiteResult> run_verification() {
  return {verify_oracle_equivalence(), verify_duality(),      verify_definiteness(),
          verify_time_integral(),      verify_one_dof(),      verify_expected_degenerate()};
}

}  // namespace damperopt
