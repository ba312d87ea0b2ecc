// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance 3 5        run the listed criteria
//
// Exit status is 0 only if every selected criterion passes.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "damperopt/damperopt.hpp"

using namespace damperopt;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string fmt(double x, int digits = 6) { return format_g(x, digits); }

BestPosition chain_best(std::size_t n, Criterion c, std::size_t offset, std::size_t count) {
  const auto model = chain_model(n);
  return best_position(sweep_positions(model, make_weights(c, offset, count, model)));
}

// 1. Closed form against the dense Lyapunov solve on random small chains.
void oracle_equivalence(Outcome& o) {
  std::mt19937_64 rng(0xACCE55);
  double worst = 0.0;
  std::size_t comparisons = 0;
  for (int i = 0; i < 30; ++i) {
    const auto inst = random_chain_instance(rng, 1, 12);
    const auto model = chain_model(inst.n);
    const auto damper = chain_damper(inst.k, inst.n);
    for (auto crit : {Criterion::Energy, Criterion::Displacement}) {
      const auto weights = make_weights(crit, inst.offset, inst.count, model);
      const auto coeffs = trace_coefficients(model, damper, weights);
      const Eigen::MatrixXd Z = weight_matrix(weights);
      for (double v : {0.3, 1.0, 3.0}) {
        const auto traces = dual_trace_check(assemble_A(model, damper, v), Z);
        const double formula = trace_at(coeffs, v);
        worst = std::max({worst, relative_error(formula, traces.primal), relative_error(formula, traces.dual)});
        ++comparisons;
      }
    }
  }
  o.detail << "comparisons=" << comparisons << " max_rel_err=" << fmt(worst, 3);
  o.require(worst <= 1e-8, "relative error <= 1e-8");
}

// 2. Single oscillator: the formula on the modal model against exact values.
void one_dof(Outcome& o) {
  double worst = 0.0;
  for (auto [m, k] : {std::pair{1.0, 1.0}, std::pair{1.0, 4.0}, std::pair{2.0, 3.0}}) {
    const double w = std::sqrt(k / m);
    const auto model = rod_model(1, 0.0, w * w / (std::numbers::pi * std::numbers::pi));
    const DamperVector damper({1.0 / std::sqrt(m)}, 0.5);

    const auto e = trace_coefficients(model, damper, energy_weights(0, 1, model));
    const double e_v = 2.0 * std::sqrt(m * k);
    const double e_t = 2.0 * std::sqrt(m / k);
    // The modal displacement weight measures ‖x̃‖² = m·x².
    const auto d = trace_coefficients(model, damper, displacement_weights(0, 1, model));
    const double d_v = std::sqrt(2.0) * std::sqrt(m * k);
    const double d_t = std::sqrt(2.0) * std::sqrt(m / (k * k * k));

    const auto ce = one_dof_closed_forms(m, k, e_v, Criterion::Energy);
    const auto cd = one_dof_closed_forms(m, k, d_v, Criterion::Displacement);
    worst = std::max({worst, relative_error(optimal_viscosity(e), e_v), relative_error(optimal_trace(e), e_t),
                      relative_error(optimal_viscosity(d), d_v), relative_error(optimal_trace(d) / m, d_t),
                      relative_error(ce.v_opt, e_v), relative_error(ce.trace, e_t), relative_error(cd.v_opt, d_v),
                      relative_error(cd.trace, d_t)});
  }
  o.detail << "cases=3 max_rel_err=" << fmt(worst, 3);
  o.require(worst <= 1e-12, "relative error <= 1e-12");
}

// 3. Optimal chain positions at n = 2000.
void tables(Outcome& o) {
  struct Case {
    int table;
    Criterion c;
    std::size_t offset;
    std::size_t want;
  };
  for (const Case& t : {Case{1, Criterion::Energy, 0, 991}, Case{2, Criterion::Energy, 100, 6},
                        Case{3, Criterion::Displacement, 0, 838}, Case{4, Criterion::Displacement, 100, 7}}) {
    const auto k = chain_best(2000, t.c, t.offset, 100).design.position_index;
    o.detail << "table" << t.table << "=" << k << " ";
    o.require(k == t.want, "table " + std::to_string(t.table) + " index " + std::to_string(t.want));
  }
}

// 4. Sweep regimes at n = 600.
void figures(Outcome& o) {
  const auto full = chain_best(600, Criterion::Energy, 0, 600);
  const auto low = chain_best(600, Criterion::Energy, 0, 20);
  const auto shifted = chain_best(600, Criterion::Energy, 50, 20);
  o.detail << "full=" << full.design.position_index << " band(0,20) p=" << fmt(low.design.position_p)
           << " band(50,20) k=" << shifted.design.position_index << " p=" << fmt(shifted.design.position_p);
  o.require(full.design.position_index == 300 || full.design.position_index == 301, "full band at 300/301");
  o.require(low.design.position_p >= 0.47 && low.design.position_p <= 0.49, "band (0,20) p in [0.47, 0.49]");
  o.require(shifted.design.position_index == 5, "band (50,20) index 5");
}

// 5. S(k) reference values.
void s_values(Outcome& o) {
  const std::vector<std::pair<std::size_t, double>> ref = {{1, 0.468064}, {2, 0.867021},  {3, 0.940901},
                                                           {4, 0.96676},  {10, 0.994687}, {100, 0.999953}};
  double worst = 0.0;
  for (auto [k, want] : ref) worst = std::max(worst, std::abs(S_of_k(k) - want));
  o.detail << "max_abs_err=" << fmt(worst, 3);
  o.require(worst <= 1e-4, "|S(k) - ref| <= 1e-4");
}

// 6. trace_opt / n^e at fixed p across n.
void scaling(Outcome& o) {
  const std::vector<std::size_t> ns = {2000, 4000, 8000};
  const auto energy = scaling_fit(Criterion::Energy, 0, 100, 0.495, ns, 1);
  const auto disp = scaling_fit(Criterion::Displacement, 0, 100, 0.495, ns, 3);
  const auto control = scaling_fit(Criterion::Energy, 0, 100, 0.495, ns, 3);
  o.detail << "energy/n=";
  for (const auto& r : energy.rows) o.detail << fmt(r.ratio) << (r.n == ns.back() ? "" : ",");
  o.detail << " spread=" << fmt(energy.spread_all, 3) << " displacement/n^3 spread=" << fmt(disp.spread_all, 3)
           << " control drift=" << fmt(control.drift, 3);
  o.require(energy.spread_all <= 0.03, "energy spread <= 3%");
  o.require(disp.spread_all <= 0.05, "displacement spread <= 5%");
  o.require(control.drift >= 4.0, "negative control drift >= 4x");
}

// 7. Measured coefficient slopes at n = 10^4 against the analytic limits.
void limits(Outcome& o) {
  const std::size_t n = 10000;
  for (auto [p, s] : {std::pair{0.3, std::size_t{5}}, std::pair{0.45, std::size_t{20}}}) {
    const auto c = chain_coefficients(n, index_for(p, n), Criterion::Energy, 0, s, PhaseBlocks::Both);
    const double nn = static_cast<double>(n);
    const double a1 = alpha1(p, s);
    const double b1 = b1_limit(p, s);
    const std::string tag = "(" + fmt(p) + "," + std::to_string(s) + ")";
    o.detail << tag << " a/n=" << fmt(c.a / nn) << " alpha1=" << fmt(a1) << " b1/n=" << fmt(c.b1 / nn)
             << " b1_limit=" << fmt(b1) << " b2/n=" << fmt(c.b2 / nn) << " b3/n=" << fmt(c.b3 / nn) << "; ";
    o.require(std::isfinite(a1) && std::abs(c.a / nn - a1) <= 0.01 * a1, tag + " a/n within 1% of alpha1");
    o.require(std::abs(c.b1 / nn - b1) <= 0.01 * b1, tag + " b1/n within 1% of limit");
    o.require(c.b2 / nn <= 1.05 * static_cast<double>(s), tag + " b2 bound");
    o.require(c.b3 / nn <= 1.05 * b3_bound(p, s), tag + " b3 bound");
  }
}

// 8. Structural invariants.
void invariants(Outcome& o) {
  double sym = 0.0;
  for (auto crit : {Criterion::Energy, Criterion::Displacement}) {
    const auto model = chain_model(600);
    const auto sweep = sweep_positions(model, make_weights(crit, 0, 20, model));
    for (std::size_t k = 1; k <= 600; ++k) {
      const auto& a = sweep.rows[k - 1];
      const auto& b = sweep.rows[600 - k];
      if (a.admissible != b.admissible) sym = std::numeric_limits<double>::infinity();
      if (a.admissible) sym = std::max(sym, relative_error(b.trace_opt, a.trace_opt));
    }
  }
  const auto duality = verify_duality(20, 0xD0A1);
  const auto definite = verify_definiteness(20, 0xDEF);
  const auto integral = verify_time_integral(0x1A7);

  bool scaling_exact = true;
  const auto model = chain_model(40);
  for (auto crit : {Criterion::Energy, Criterion::Displacement}) {
    const auto w = make_weights(crit, 3, 17, model);
    for (std::size_t k : {1u, 9u, 20u, 33u}) {
      const auto damper = chain_damper(k, 40);
      const double v = optimal_viscosity(trace_coefficients(model, damper, w));
      for (double lambda : {0.125, 2.0, 4.0}) {
        scaling_exact = scaling_exact && optimal_viscosity(trace_coefficients(model, damper, w.scaled(lambda))) == v;
      }
    }
  }
  o.detail << "symmetry=" << fmt(sym, 3) << " duality=" << fmt(duality.worst, 3)
           << " definite=" << (definite.passed ? "yes" : "no") << " integral=" << fmt(integral.worst, 3)
           << " scaling=" << (scaling_exact ? "exact" : "inexact");
  o.require(sym <= 1e-10, "positional symmetry 1e-10");
  o.require(duality.worst <= 1e-8, "duality 1e-8");
  o.require(definite.passed, "hatX positive definite");
  o.require(integral.worst <= 1e-4, "time integral 1e-4");
  o.require(scaling_exact, "v_opt invariant under weight scaling");
}

struct Criterion_ {
  int id;
  const char* name;
  std::function<void(Outcome&)> run;
  double budget_s;  // 0: no runtime limit
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion_> all = {
      {1, "oracle equivalence", oracle_equivalence, 30}, {2, "one-DOF exact values", one_dof, 0},
      {3, "table positions", tables, 300},              {4, "figure regimes", figures, 60},
      {5, "S(k) values", s_values, 10},                 {6, "scaling laws", scaling, 180},
      {7, "analytic limits", limits, 0},                {8, "invariant suites", invariants, 0},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const int id = std::atoi(argv[i]);
    if (id < 1 || id > 8) {
      std::cerr << "unknown criterion '" << argv[i] << "' (expected 1..8)\n";
      return 2;
    }
    selected.push_back(id);
  }
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8};

  bool all_pass = true;
  for (int id : selected) {
    const auto& c = all[static_cast<std::size_t>(id - 1)];
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0) o.require(secs <= c.budget_s, "runtime <= " + fmt(c.budget_s) + "s");
    all_pass = all_pass && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << c.name << "): " << o.detail.str()
              << " time=" << fmt(secs, 3) << "s" << std::endl;
  }
  return all_pass ? 0 : 1;
}
