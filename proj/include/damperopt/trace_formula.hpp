#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "damperopt/error.hpp"
#include "damperopt/modal_models.hpp"
#include "damperopt/summation.hpp"

namespace damperopt {

enum class Criterion { Energy, Displacement };

inline const char* to_string(Criterion c) { return c == Criterion::Energy ? "energy" : "displacement"; }

/// Which halves of the 2n phase space carry the diagonal weights.
/// Energy weights both the position and velocity blocks; displacement only
/// measures y₁ = Ωx̃, so the velocity block is left unweighted.
enum class PhaseBlocks { Both, PositionOnly };

/// Diagonal of the weighting matrix Z_Δ restricted to one phase block.
struct SpectralWeights {
  std::vector<double> z;
  std::size_t offset = 0;  // first weighted mode is offset+1
  std::size_t count = 0;
  Criterion criterion = Criterion::Energy;
  PhaseBlocks blocks = PhaseBlocks::Both;

  std::size_t n() const { return z.size(); }

  SpectralWeights scaled(double lambda) const {
    SpectralWeights w = *this;
    for (double& x : w.z) x *= lambda;
    return w;
  }

  std::string describe() const {
    return std::string(to_string(criterion)) + " band " + std::to_string(offset + 1) + "-" +
           std::to_string(offset + count);
  }
};

namespace detail {
inline void check_band(std::size_t offset, std::size_t count, std::size_t n) {
  if (count == 0) throw Error(ErrorCode::InvalidBand, "band must contain at least one mode");
  if (offset + count > n) {
    throw Error(ErrorCode::InvalidBand, "band " + std::to_string(offset + 1) + "-" +
                                            std::to_string(offset + count) + " exceeds dimension " +
                                            std::to_string(n));
  }
}
}  // namespace detail

/// Indicator weights on modes offset+1 .. offset+count, both phase blocks.
inline SpectralWeights energy_weights(std::size_t offset, std::size_t count, const ModalModel& model) {
  detail::check_band(offset, count, model.n());
  SpectralWeights w;
  w.z.assign(model.n(), 0.0);
  for (std::size_t k = offset; k < offset + count; ++k) w.z[k] = 1.0;
  w.offset = offset;
  w.count = count;
  w.criterion = Criterion::Energy;
  w.blocks = PhaseBlocks::Both;
  return w;
}

/// z_k = 1/ω_k² on the band, position block only (Z = diag(Ω⁻², 0) ⊕ 0).
inline SpectralWeights displacement_weights(std::size_t offset, std::size_t count, const ModalModel& model) {
  detail::check_band(offset, count, model.n());
  SpectralWeights w;
  w.z.assign(model.n(), 0.0);
  for (std::size_t k = offset; k < offset + count; ++k) w.z[k] = 1.0 / model.omega_sq(k);
  w.offset = offset;
  w.count = count;
  w.criterion = Criterion::Displacement;
  w.blocks = PhaseBlocks::PositionOnly;
  return w;
}

inline SpectralWeights make_weights(Criterion c, std::size_t offset, std::size_t count, const ModalModel& model) {
  return c == Criterion::Energy ? energy_weights(offset, count, model)
                                : displacement_weights(offset, count, model);
}

/// trace(Z·X(v)) = a/v + b·v, b = b1 + b2 + b3.
struct TraceCoefficients {
  double a = 0.0;
  double b = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double b3 = 0.0;
  bool finite = true;
};

struct DampingDesign {
  std::size_t position_index = 0;
  double position_p = 0.0;
  double v_opt = std::numeric_limits<double>::infinity();
  double trace_opt = std::numeric_limits<double>::infinity();
  bool admissible = false;
};

namespace detail {

inline TraceCoefficients inadmissible_coefficients() {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return TraceCoefficients{inf, inf, inf, inf, inf, false};
}

// Per-mode contributions before block assembly. With D = ω_k² − ω_j²:
//   position block: z·(c_k²/(2ω_k²) + Σ (2ω_k²c_j² + ω_k²c_k²)/D² + (ω_k²/c_k²)(Σ c_j²/D)²)
//   velocity block: z·(Σ (ω_k²c_j² + ω_j²c_j² + ω_j²c_k²)/D² + (ω_k²/c_k²)(Σ c_j²/D)²)
//   a per block:    z/c_k²
struct BlockSums {
  CompensatedSum a_half, b1, b2_pos, b2_vel, b3_half;
};

inline TraceCoefficients assemble(const BlockSums& s, PhaseBlocks blocks) {
  TraceCoefficients t;
  const double half_a = s.a_half.value();
  const double b3 = s.b3_half.value();
  t.b1 = s.b1.value();
  if (blocks == PhaseBlocks::Both) {
    t.a = 2.0 * half_a;
    t.b2 = s.b2_pos.value() + s.b2_vel.value();
    t.b3 = 2.0 * b3;
  } else {
    t.a = half_a;
    t.b2 = s.b2_pos.value();
    t.b3 = b3;
  }
  t.b = t.b1 + t.b2 + t.b3;
  t.finite = true;
  return t;
}

inline void check_shapes(const ModalModel& model, const DamperVector& damper, const SpectralWeights& weights) {
  if (damper.size() != model.n() || weights.n() != model.n()) {
    throw Error(ErrorCode::ShapeMismatch, "model, damper and weights must share dimension " +
                                              std::to_string(model.n()));
  }
}

}  // namespace detail

/// Evaluates the trace coefficients for many damper positions against one
/// (model, weights) pair. The ω² gaps for the weighted modes are tabulated
/// once in factored form; each evaluation is then O(s·n).
class CoefficientEngine {
 public:
  static constexpr std::size_t max_table_entries = 25'000'000;

  CoefficientEngine(const ModalModel& model, const SpectralWeights& weights)
      : model_(model), weights_(weights) {
    if (weights.n() != model.n()) throw Error(ErrorCode::ShapeMismatch, "weights/model dimension mismatch");
    const std::size_t n = model.n();
    for (std::size_t k = 0; k < n; ++k) {
      if (weights.z[k] != 0.0) modes_.push_back(k);
    }
    tabulated_ = modes_.size() * n <= max_table_entries;
    const auto w2 = model.omegas_sq();
    sum_inv_d2_.resize(modes_.size());
    sum_w2_inv_d2_.resize(modes_.size());
    if (tabulated_) {
      inv_d_.assign(modes_.size() * n, 0.0);
      inv_d2_.assign(modes_.size() * n, 0.0);
    }
    for (std::size_t m = 0; m < modes_.size(); ++m) {
      const std::size_t k = modes_[m];
      CompensatedSum s3, s4;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == k) continue;
        const double inv = 1.0 / model.omega_sq_gap(k, j);
        const double inv2 = inv * inv;
        if (tabulated_) {
          inv_d_[m * n + j] = inv;
          inv_d2_[m * n + j] = inv2;
        }
        s3 += inv2;
        s4 += w2[j] * inv2;
      }
      sum_inv_d2_[m] = s3.value();
      sum_w2_inv_d2_[m] = s4.value();
    }
  }

  const ModalModel& model() const { return model_; }
  const SpectralWeights& weights() const { return weights_; }

  TraceCoefficients evaluate(const DamperVector& damper) const {
    detail::check_shapes(model_, damper, weights_);
    const std::size_t n = model_.n();
    const auto w2 = model_.omegas_sq();
    std::vector<double> c2(n);
    for (std::size_t j = 0; j < n; ++j) c2[j] = damper[j] * damper[j];
    for (std::size_t k : modes_) {
      if (c2[k] == 0.0) return detail::inadmissible_coefficients();
    }
    // Undamped modes decouple and drop out of every j-sum.
    std::vector<std::size_t> nodes;
    for (std::size_t j = 0; j < n; ++j) {
      if (c2[j] == 0.0) nodes.push_back(j);
    }

    std::vector<double> row_d, row_d2;
    if (!tabulated_) {
      row_d.resize(n);
      row_d2.resize(n);
    }

    detail::BlockSums acc;
    for (std::size_t m = 0; m < modes_.size(); ++m) {
      const std::size_t k = modes_[m];
      const double z = weights_.z[k];
      const double* inv_d;
      const double* inv_d2;
      if (tabulated_) {
        inv_d = inv_d_.data() + m * n;
        inv_d2 = inv_d2_.data() + m * n;
      } else {
        for (std::size_t j = 0; j < n; ++j) {
          const double inv = j == k ? 0.0 : 1.0 / model_.omega_sq_gap(k, j);
          row_d[j] = inv;
          row_d2[j] = inv * inv;
        }
        inv_d = row_d.data();
        inv_d2 = row_d2.data();
      }
      CompensatedSum c2_d2, w2c2_d2, c2_d;
      for (std::size_t j = 0; j < n; ++j) {
        const double t = c2[j] * inv_d2[j];
        c2_d2 += t;
        w2c2_d2 += w2[j] * t;
        c2_d += c2[j] * inv_d[j];
      }
      const double wk2 = w2[k];
      const double ck2 = c2[k];
      const double s1 = c2_d2.value();
      const double s2 = w2c2_d2.value();
      const double s5 = c2_d.value();
      CompensatedSum node_d2(sum_inv_d2_[m]), node_w2d2(sum_w2_inv_d2_[m]);
      for (std::size_t j : nodes) {
        node_d2 += -inv_d2[j];
        node_w2d2 += -w2[j] * inv_d2[j];
      }
      acc.a_half += z / ck2;
      acc.b1 += z * ck2 / (2.0 * wk2);
      acc.b2_pos += z * (2.0 * wk2 * s1 + wk2 * ck2 * node_d2.value());
      acc.b2_vel += z * (wk2 * s1 + s2 + ck2 * node_w2d2.value());
      acc.b3_half += z * (wk2 / ck2) * s5 * s5;
    }
    return detail::assemble(acc, weights_.blocks);
  }

 private:
  ModalModel model_;
  SpectralWeights weights_;
  std::vector<std::size_t> modes_;
  bool tabulated_ = true;
  std::vector<double> inv_d_, inv_d2_;
  std::vector<double> sum_inv_d2_, sum_w2_inv_d2_;
};

/// Closed-form trace coefficients for rank-one damping v·c·cᵀ and diagonal
/// weighting. Gaps ω_k² − ω_j² are taken in factored form; see
/// trace_coefficients_raw for the literal evaluation.
inline TraceCoefficients trace_coefficients(const ModalModel& model, const DamperVector& damper,
                                            const SpectralWeights& weights) {
  detail::check_shapes(model, damper, weights);
  return CoefficientEngine(model, weights).evaluate(damper);
}

/// Literal evaluation: direct subtraction of ω², ungrouped numerators
/// 3ω_k²c_j² + ω_k²c_k² + ω_j²c_j² + ω_j²c_k² split into the two blocks.
inline TraceCoefficients trace_coefficients_raw(const ModalModel& model, const DamperVector& damper,
                                                const SpectralWeights& weights) {
  detail::check_shapes(model, damper, weights);
  const std::size_t n = model.n();
  detail::BlockSums acc;
  for (std::size_t k = 0; k < n; ++k) {
    const double z = weights.z[k];
    if (z == 0.0) continue;
    const double ck = damper[k];
    if (ck == 0.0) return detail::inadmissible_coefficients();
    const double wk2 = model.omega(k) * model.omega(k);
    const double ck2 = ck * ck;
    CompensatedSum pos, vel, inner;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == k || damper[j] == 0.0) continue;
      const double wj2 = model.omega(j) * model.omega(j);
      const double cj2 = damper[j] * damper[j];
      const double d = wk2 - wj2;
      pos += (2.0 * wk2 * cj2 + wk2 * ck2) / (d * d);
      vel += (wk2 * cj2 + wj2 * cj2 + wj2 * ck2) / (d * d);
      inner += cj2 / d;
    }
    acc.a_half += z / ck2;
    acc.b1 += z * ck2 / (2.0 * wk2);
    acc.b2_pos += z * pos.value();
    acc.b2_vel += z * vel.value();
    acc.b3_half += z * (wk2 / ck2) * inner.value() * inner.value();
  }
  return detail::assemble(acc, weights.blocks);
}

inline double trace_at(const TraceCoefficients& t, double v) {
  if (!(v > 0.0)) throw Error(ErrorCode::InvalidParameter, "viscosity must be positive");
  if (!t.finite) return std::numeric_limits<double>::infinity();
  return t.a / v + t.b * v;
}

inline double optimal_viscosity(const TraceCoefficients& t) {
  if (!t.finite) return std::numeric_limits<double>::infinity();
  return std::sqrt(t.a / t.b);
}

inline double optimal_trace(const TraceCoefficients& t) {
  if (!t.finite) return std::numeric_limits<double>::infinity();
  return 2.0 * std::sqrt(t.a * t.b);
}

inline DampingDesign design_from(const TraceCoefficients& t, std::size_t index, double p) {
  DampingDesign d;
  d.position_index = index;
  d.position_p = p;
  d.admissible = t.finite;
  d.v_opt = optimal_viscosity(t);
  d.trace_opt = optimal_trace(t);
  return d;
}

struct OneDofResult {
  double trace = 0.0;
  double v_opt = 0.0;
};

/// m·x'' + c·x' + k·x = 0: the averaged trace at damping c and the optimal c.
inline OneDofResult one_dof_closed_forms(double m, double k, double c, Criterion criterion) {
  if (!(m > 0.0) || !(k > 0.0) || !(c > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "oscillator needs m, k, c > 0");
  }
  if (criterion == Criterion::Energy) {
    return {2.0 * m / c + c / (2.0 * k), 2.0 * std::sqrt(m * k)};
  }
  return {m / (k * c) + c / (2.0 * k * k), std::sqrt(2.0) * std::sqrt(m * k)};
}

}  // namespace damperopt
