#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "damperopt/error.hpp"
#include "damperopt/modal_models.hpp"
#include "damperopt/trace_formula.hpp"

namespace damperopt {

struct SweepRow {
  std::size_t k = 0;
  double p = 0.0;
  double v_opt = 0.0;
  double trace_opt = 0.0;
  bool admissible = false;
};

struct SweepResult {
  std::size_t n = 0;
  std::string model;
  std::string weights;
  std::vector<SweepRow> rows;
};

struct SweepOptions {
  std::size_t threads = 0;  // 0: hardware concurrency
  std::size_t grid = 0;     // spectral models only; 0: one position per mode
};

inline std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Number of candidate positions and the damper at position k (1-based).
/// Chain: k = 1..n at p = k/n. String/rod: y = k/(grid+1), k = 1..grid.
class PositionGrid {
 public:
  PositionGrid(const ModalModel& model, std::size_t grid = 0) : model_(model) {
    size_ = model.kind() == ModelKind::Chain || grid == 0 ? model.n() : grid;
  }

  std::size_t size() const { return size_; }

  double position(std::size_t k) const {
    if (model_.kind() == ModelKind::Chain) return static_cast<double>(k) / static_cast<double>(model_.n());
    return static_cast<double>(k) / static_cast<double>(size_ + 1);
  }

  DamperVector damper(std::size_t k) const {
    if (model_.kind() == ModelKind::Chain) return chain_damper(k, model_.n());
    return string_damper(position(k), model_.n());
  }

 private:
  const ModalModel& model_;
  std::size_t size_ = 0;
};

/// Optimal viscosity and trace for every grid position, rows in ascending k.
/// Rows are computed in parallel; row order does not depend on scheduling.
inline SweepResult sweep_positions(const ModalModel& model, const SpectralWeights& weights, SweepOptions opts = {}) {
  if (weights.n() != model.n()) throw Error(ErrorCode::ShapeMismatch, "weights/model dimension mismatch");
  const PositionGrid grid(model, opts.grid);
  const CoefficientEngine engine(model, weights);

  SweepResult out;
  out.n = model.n();
  out.model = model.describe();
  out.weights = weights.describe();
  out.rows.resize(grid.size());

  std::atomic<std::size_t> next{1};
  auto worker = [&] {
    for (std::size_t k = next++; k <= grid.size(); k = next++) {
      const auto coeffs = engine.evaluate(grid.damper(k));
      SweepRow& row = out.rows[k - 1];
      row.k = k;
      row.p = grid.position(k);
      row.admissible = coeffs.finite;
      row.v_opt = optimal_viscosity(coeffs);
      row.trace_opt = optimal_trace(coeffs);
    }
  };

  const std::size_t threads = std::min(resolve_threads(opts.threads), std::max<std::size_t>(grid.size(), 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return out;
}

struct BestPosition {
  DampingDesign design;
  std::optional<SweepRow> partner;  // mirror position k' = n+1-k with equal trace
};

inline constexpr double tie_tolerance = 1e-10;

/// Minimal-trace row; ties within 1e-10 relative go to the smallest index.
inline BestPosition best_position(const SweepResult& sweep) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : sweep.rows) {
    if (r.admissible && r.trace_opt < best) best = r.trace_opt;
  }
  if (!std::isfinite(best)) throw Error(ErrorCode::NoAdmissiblePosition, "every position leaves a weighted mode undamped");

  const SweepRow* chosen = nullptr;
  for (const auto& r : sweep.rows) {
    if (r.admissible && r.trace_opt <= best * (1.0 + tie_tolerance)) {
      chosen = &r;
      break;
    }
  }
  BestPosition out;
  out.design.position_index = chosen->k;
  out.design.position_p = chosen->p;
  out.design.v_opt = chosen->v_opt;
  out.design.trace_opt = chosen->trace_opt;
  out.design.admissible = true;

  const std::size_t m = sweep.rows.size();
  const std::size_t mirror = m + 1 - chosen->k;
  if (mirror != chosen->k) {
    const auto& r = sweep.rows[mirror - 1];
    if (r.admissible && std::abs(r.trace_opt - chosen->trace_opt) <= tie_tolerance * chosen->trace_opt) {
      out.partner = r;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Large-n limit expressions for the chain with p fixed.

inline double csc2pi(double x) {
  const double s = sinpi(x);
  return 1.0 / (s * s);
}

/// Slope of a(n): Σ_{k=1..s} csc²(πkp); +∞ when some k·p is an integer.
inline double alpha1(double p, std::size_t s) {
  double sum = 0.0;
  for (std::size_t k = 1; k <= s; ++k) {
    const double kp = static_cast<double>(k) * p;
    if (is_node(kp)) return std::numeric_limits<double>::infinity();
    sum += csc2pi(kp);
  }
  return sum;
}

/// Σ_{k=1..s} 2·sin²(πkp)/(π²k²).
inline double b1_limit(double p, std::size_t s) {
  double sum = 0.0;
  for (std::size_t k = 1; k <= s; ++k) {
    const double kk = static_cast<double>(k);
    const double sn = sinpi(kk * p);
    sum += 2.0 * sn * sn / (pi * pi * kk * kk);
  }
  return sum;
}

/// H_m = Σ_{j=1..m} 1/j.
inline double harmonic(std::size_t m) {
  CompensatedSum acc;
  for (std::size_t j = m; j >= 1; --j) acc += 1.0 / static_cast<double>(j);
  return acc.value();
}

/// S(k) = (4/π²)·Σ_{j≥1, j≠k} (j² + 2k²)/((j−k)²(j+k)²).
///
/// Summed to J terms. The remainder splits as Σ_{j>J} 1/(j²−k²), which
/// telescopes to (H_{J+k} − H_{J−k})/(2k) exactly, plus 3k²·Σ_{j>J} 1/(j²−k²)²,
/// approximated by k²/(J−k)³; J doubles until that approximation is below tol.
inline double S_of_k(std::size_t k, double tol = 1e-10) {
  if (k == 0) throw Error(ErrorCode::InvalidParameter, "S(k) needs k >= 1");
  const double kk = static_cast<double>(k);
  std::size_t J = std::max<std::size_t>(1'000'000, 10'000 * k);
  while (kk * kk / std::pow(static_cast<double>(J) - kk, 3) > tol) J *= 2;

  CompensatedSum acc;
  for (std::size_t j = J; j >= 1; --j) {
    if (j == k) continue;
    const double jj = static_cast<double>(j);
    const double d = (jj - kk) * (jj + kk);
    acc += (jj * jj + 2.0 * kk * kk) / (d * d);
  }
  CompensatedSum telescoped;
  for (std::size_t m = J + k; m > J - k; --m) telescoped += 1.0 / static_cast<double>(m);
  acc += telescoped.value() / (2.0 * kk);
  acc += kk * kk / std::pow(static_cast<double>(J) - kk, 3);
  return 4.0 / (pi * pi) * acc.value();
}

/// T(k) = Σ_{j=1..k−1} 1/(k²−j²) + H_{2k}/(2k).
inline double T_of_k(std::size_t k) {
  if (k == 0) throw Error(ErrorCode::InvalidParameter, "T(k) needs k >= 1");
  const double kk = static_cast<double>(k);
  CompensatedSum acc;
  for (std::size_t j = 1; j < k; ++j) {
    const double jj = static_cast<double>(j);
    acc += 1.0 / ((kk - jj) * (kk + jj));
  }
  acc += harmonic(2 * k) / (2.0 * kk);
  return acc.value();
}

/// Upper bound on lim b3(n)/n: Σ csc²(πkp)·T(k).
inline double b3_bound(double p, std::size_t s) {
  double sum = 0.0;
  for (std::size_t k = 1; k <= s; ++k) {
    const double kp = static_cast<double>(k) * p;
    if (is_node(kp)) return std::numeric_limits<double>::infinity();
    sum += csc2pi(kp) * T_of_k(k);
  }
  return sum;
}

struct DisplacementLimits {
  double aK_limit = 0.0;   // lim a_K/n³
  double bK1_limit = 0.0;  // lim b_K1/n³
  double bK2_bound = 0.0;  // bound on lim b_K2/n³
  double bK3_bound = 0.0;  // bound on lim b_K3/n³
};

inline DisplacementLimits displacement_limits(double p, std::size_t s) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  DisplacementLimits d;
  bool node = false;
  for (std::size_t k = 1; k <= s; ++k) {
    const double kk = static_cast<double>(k);
    const double k2pi2 = kk * kk * pi * pi;
    const double kp = kk * p;
    const double sn = sinpi(kp);
    d.bK1_limit += 2.0 * sn * sn / (k2pi2 * k2pi2);
    d.bK2_bound += 1.0 / k2pi2;
    if (is_node(kp)) {
      node = true;
      continue;
    }
    d.aK_limit += csc2pi(kp) / k2pi2;
    d.bK3_bound += csc2pi(kp) * T_of_k(k) / k2pi2;
  }
  if (node) {
    d.aK_limit = inf;
    d.bK3_bound = inf;
  }
  return d;
}

/// Round-half-up index for a fixed normalised position.
inline std::size_t index_for(double p, std::size_t n) {
  const auto k = static_cast<std::size_t>(std::floor(p * static_cast<double>(n) + 0.5));
  return std::clamp<std::size_t>(k, 1, n);
}

/// Trace coefficients of the chain of order n at position index k.
inline TraceCoefficients chain_coefficients(std::size_t n, std::size_t k, Criterion criterion, std::size_t offset,
                                            std::size_t count, PhaseBlocks blocks) {
  const auto model = chain_model(n);
  auto weights = make_weights(criterion, offset, count, model);
  weights.blocks = blocks;
  return trace_coefficients(model, chain_damper(k, n), weights);
}

struct ScalingRow {
  std::size_t n = 0;
  std::size_t index = 0;
  double trace_opt = 0.0;
  double ratio = 0.0;
  bool substituted = false;
  bool excluded = false;
};

struct ScalingFit {
  std::vector<ScalingRow> rows;
  double max_rel_spread = 0.0;  // over the largest half of the n values
  double spread_all = 0.0;      // over every admitted n
  double drift = 0.0;           // max ratio / min ratio over every admitted n
};

/// trace_opt(n)/n^e at the index nearest p·n, for each n. An index whose
/// coefficients are not finite is replaced by the nearest admissible one.
inline ScalingFit scaling_fit(Criterion criterion, std::size_t offset, std::size_t count, double p,
                              std::vector<std::size_t> n_list, int exponent) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::InvalidPosition, "p must lie in (0, 1)");
  std::sort(n_list.begin(), n_list.end());
  ScalingFit fit;
  for (std::size_t n : n_list) {
    ScalingRow row;
    row.n = n;
    const auto model = chain_model(n);
    const auto weights = make_weights(criterion, offset, count, model);
    const CoefficientEngine engine(model, weights);
    const std::size_t k0 = index_for(p, n);
    std::optional<TraceCoefficients> found;
    for (std::size_t step = 0; step < n && !found; ++step) {
      for (int dir : {-1, 1}) {
        if (step == 0 && dir == 1) continue;
        const auto cand = static_cast<long long>(k0) + dir * static_cast<long long>(step);
        if (cand < 1 || cand > static_cast<long long>(n)) continue;
        const auto c = engine.evaluate(chain_damper(static_cast<std::size_t>(cand), n));
        if (c.finite) {
          found = c;
          row.index = static_cast<std::size_t>(cand);
          row.substituted = step != 0;
          break;
        }
      }
    }
    if (!found) {
      row.excluded = true;
    } else {
      row.trace_opt = optimal_trace(*found);
      row.ratio = row.trace_opt / std::pow(static_cast<double>(n), exponent);
    }
    fit.rows.push_back(row);
  }

  auto spread = [](const std::vector<double>& r) {
    if (r.empty()) return 0.0;
    const auto [mn, mx] = std::minmax_element(r.begin(), r.end());
    return (*mx - *mn) / *mn;
  };
  std::vector<double> all;
  for (const auto& r : fit.rows) {
    if (!r.excluded) all.push_back(r.ratio);
  }
  const std::size_t half = (all.size() + 1) / 2;
  fit.max_rel_spread = spread(std::vector<double>(all.end() - static_cast<std::ptrdiff_t>(half), all.end()));
  fit.spread_all = spread(all);
  fit.drift = fit.spread_all + 1.0;
  return fit;
}

struct AsymptoticReport {
  double p = 0.0;
  std::size_t s = 0;
  double alpha1 = 0.0;
  double b1_limit = 0.0;
  double b2_bound = 0.0;
  double b3_bound = 0.0;
  double eta1_bound = 0.0;
  DisplacementLimits displacement;
  ScalingFit energy;        // trace_opt/n
  ScalingFit displacement_fit;  // trace_opt/n³
};

inline AsymptoticReport asymptotic_report(double p, std::size_t s, const std::vector<std::size_t>& n_list) {
  AsymptoticReport r;
  r.p = p;
  r.s = s;
  r.alpha1 = alpha1(p, s);
  r.b1_limit = b1_limit(p, s);
  r.b2_bound = static_cast<double>(s);
  r.b3_bound = b3_bound(p, s);
  r.eta1_bound = 2.0 * std::sqrt(r.alpha1 * (r.b1_limit + r.b2_bound + r.b3_bound));
  r.displacement = displacement_limits(p, s);
  r.energy = scaling_fit(Criterion::Energy, 0, s, p, n_list, 1);
  r.displacement_fit = scaling_fit(Criterion::Displacement, 0, s, p, n_list, 3);
  return r;
}

}  // namespace damperopt
