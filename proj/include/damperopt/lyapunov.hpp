#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "damperopt/error.hpp"
#include "damperopt/modal_models.hpp"
#include "damperopt/trace_formula.hpp"

namespace damperopt {

/// First-order phase-space matrix A = [[0, Ω], [−Ω, −v·c·cᵀ]] of order 2n.
struct PhaseMatrix {
  std::size_t n = 0;
  Eigen::MatrixXd A;

  double omega(std::size_t i) const { return A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n + i)); }
};

struct LyapunovSolution {
  Eigen::MatrixXd X;
  double residual_norm = 0.0;  // max-norm of AᵀX + XA + rhs
};

inline PhaseMatrix assemble_A(const ModalModel& model, const DamperVector& damper, double v) {
  if (damper.size() != model.n()) throw Error(ErrorCode::ShapeMismatch, "damper length differs from model dimension");
  if (!(v > 0.0)) throw Error(ErrorCode::InvalidParameter, "viscosity must be positive");
  const auto n = static_cast<Eigen::Index>(model.n());
  PhaseMatrix pm;
  pm.n = model.n();
  pm.A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    pm.A(i, n + i) = model.omega(static_cast<std::size_t>(i));
    pm.A(n + i, i) = -model.omega(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j < n; ++j) {
      pm.A(n + i, n + j) = -v * damper[static_cast<std::size_t>(i)] * damper[static_cast<std::size_t>(j)];
    }
  }
  return pm;
}

/// Largest order accepted by the dense vectorised solver.
inline constexpr Eigen::Index max_oracle_order = 64;

/// Solves AᵀX + XA = −rhs by vectorisation: (I⊗Aᵀ + Aᵀ⊗I)·vec(X) = −vec(rhs),
/// dense LU on the order-m² system. Oracle scale only (m ≤ 64).
inline LyapunovSolution solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& rhs) {
  const Eigen::Index m = A.rows();
  if (A.cols() != m || rhs.rows() != m || rhs.cols() != m) {
    throw Error(ErrorCode::ShapeMismatch, "Lyapunov operands must be square and of equal order");
  }
  if (m > max_oracle_order) throw Error(ErrorCode::InvalidDimension, "oracle solver limited to order 64");

  const Eigen::Index mm = m * m;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(mm, mm);
  // Row (i, j) of vec(AᵀX + XA): Σ_k A(k,i)·X(k,j) + Σ_l X(i,l)·A(l,j).
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index row = i + m * j;
      for (Eigen::Index k = 0; k < m; ++k) L(row, k + m * j) += A(k, i);
      for (Eigen::Index l = 0; l < m; ++l) L(row, i + m * l) += A(l, j);
    }
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(L);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-12)) {
    throw Error(ErrorCode::Degenerate, "vectorised Lyapunov operator is (near) singular, rcond=" + std::to_string(rcond));
  }
  const Eigen::VectorXd b = -Eigen::Map<const Eigen::VectorXd>(Eigen::MatrixXd(rhs).data(), mm);
  Eigen::VectorXd x = lu.solve(b);
  LyapunovSolution sol;
  sol.X = Eigen::Map<Eigen::MatrixXd>(x.data(), m, m);
  sol.X = 0.5 * (sol.X + sol.X.transpose()).eval();
  sol.residual_norm = (A.transpose() * sol.X + sol.X * A + rhs).cwiseAbs().maxCoeff();
  // The rcond estimate can miss an exactly singular operator.
  const double scale = std::max(rhs.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  if (!sol.X.allFinite() || !(sol.residual_norm <= 1e-6 * scale)) {
    throw Error(ErrorCode::Degenerate, "Lyapunov solve did not produce a finite solution");
  }
  return sol;
}

inline LyapunovSolution solve_lyapunov(const PhaseMatrix& pm, const Eigen::MatrixXd& rhs) {
  return solve_lyapunov(pm.A, rhs);
}

/// The full 2n×2n diagonal weighting matrix for the given weights.
inline Eigen::MatrixXd weight_matrix(const SpectralWeights& w) {
  const auto n = static_cast<Eigen::Index>(w.n());
  Eigen::VectorXd d = Eigen::VectorXd::Zero(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i) = w.z[static_cast<std::size_t>(i)];
    if (w.blocks == PhaseBlocks::Both) d(n + i) = w.z[static_cast<std::size_t>(i)];
  }
  return d.asDiagonal();
}

struct DualTraces {
  double primal = 0.0;  // trace(Z·X), AᵀX + XA = −I
  double dual = 0.0;    // trace(Y),   AY + YAᵀ = −Z
};

inline DualTraces dual_trace_check(const PhaseMatrix& pm, const Eigen::MatrixXd& Z) {
  const auto m = pm.A.rows();
  const auto x = solve_lyapunov(pm.A, Eigen::MatrixXd::Identity(m, m));
  const Eigen::MatrixXd At = pm.A.transpose();
  const auto y = solve_lyapunov(At, Z);
  return {(Z * x.X).trace(), y.X.trace()};
}

/// trace(Z·X) from a dense solve, the reference the closed form is checked
/// against. A mode with c_k = 0 is an exactly decoupled undamped oscillator:
/// unweighted, it is dropped from the system; weighted, the trace diverges.
inline double oracle_weighted_trace(const ModalModel& model, const DamperVector& damper,
                                    const SpectralWeights& weights, double v) {
  const auto pm = assemble_A(model, damper, v);
  const Eigen::MatrixXd Z = weight_matrix(weights);
  const auto n = static_cast<Eigen::Index>(pm.n);

  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!damper.is_zero_mode(static_cast<std::size_t>(i))) {
      keep.push_back(i);
    } else if (Z(i, i) != 0.0 || Z(n + i, n + i) != 0.0) {
      throw Error(ErrorCode::Degenerate, "weighted mode " + std::to_string(i + 1) + " is undamped");
    }
  }
  const auto r = static_cast<Eigen::Index>(keep.size());
  if (r == n) {
    const auto sol = solve_lyapunov(pm.A, Eigen::MatrixXd::Identity(2 * n, 2 * n));
    return (Z * sol.X).trace();
  }
  if (r == 0) return 0.0;
  std::vector<Eigen::Index> idx(keep);
  for (Eigen::Index i : keep) idx.push_back(n + i);
  const Eigen::MatrixXd A = pm.A(idx, idx);
  const auto sol = solve_lyapunov(A, Eigen::MatrixXd::Identity(2 * r, 2 * r));
  return (Z(idx, idx) * sol.X).trace();
}

/// True iff the solution of AᵀX̂ + X̂A = −Z admits a Cholesky factorisation.
inline bool hatX_definiteness(const PhaseMatrix& pm, const Eigen::MatrixXd& Z) {
  const auto sol = solve_lyapunov(pm.A, Z);
  Eigen::LLT<Eigen::MatrixXd> llt(sol.X);
  return llt.info() == Eigen::Success;
}

struct IntegrationOptions {
  double dt = 0.0;              // 0 selects min(0.01, 0.1/ω_max)
  double initial_horizon = 0.0; // 0 selects 40 time units
  double tail_tolerance = 1e-8;
  std::size_t max_steps = 50'000'000;
};

struct DisplacementIntegral {
  double value = 0.0;
  double horizon = 0.0;
  std::size_t steps = 0;
  double max_norm_increase = 0.0;  // largest per-step growth of ‖y‖
};

/// Integrates y' = A·y with the classical RK4 step and accumulates
/// ∫‖Ω⁻¹y₁(t)‖² dt by composite Simpson quadrature. The horizon is doubled
/// until the latest chunk adds less than tail_tolerance of the total.
inline DisplacementIntegral simulate_displacement_integral(const PhaseMatrix& pm, const Eigen::VectorXd& y0,
                                                           IntegrationOptions opts = {}) {
  const auto m = pm.A.rows();
  const auto n = static_cast<Eigen::Index>(pm.n);
  if (y0.size() != m) throw Error(ErrorCode::ShapeMismatch, "initial state must have length 2n");
  DisplacementIntegral out;
  if (y0.squaredNorm() == 0.0) return out;

  Eigen::VectorXd inv_omega(n);
  double omega_max = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = pm.omega(static_cast<std::size_t>(i));
    inv_omega(i) = 1.0 / w;
    omega_max = std::max(omega_max, w);
  }
  const double h = opts.dt > 0.0 ? opts.dt : std::min(0.01, 0.1 / omega_max);

  // RK4 applied to a linear system is multiplication by the degree-4 Taylor
  // polynomial of e^{hA}.
  const Eigen::MatrixXd hA = h * pm.A;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m, m);
  const Eigen::MatrixXd step = I + hA * (I + hA * (I / 2.0 + hA * (I / 6.0 + hA / 24.0)));

  auto integrand = [&](const Eigen::VectorXd& y) {
    return y.head(n).cwiseProduct(inv_omega).squaredNorm();
  };

  Eigen::VectorXd y = y0;
  double f_prev = integrand(y);
  double norm_prev = y.norm();
  double total = 0.0;
  double t = 0.0;
  double chunk_end = opts.initial_horizon > 0.0 ? opts.initial_horizon : 40.0;

  while (true) {
    auto pairs = static_cast<std::size_t>(std::ceil((chunk_end - t) / (2.0 * h)));
    if (pairs == 0) pairs = 1;
    double chunk = 0.0;
    for (std::size_t p = 0; p < pairs; ++p) {
      const Eigen::VectorXd y_mid = step * y;
      const Eigen::VectorXd y_next = step * y_mid;
      const double f_mid = integrand(y_mid);
      const double f_next = integrand(y_next);
      chunk += (h / 3.0) * (f_prev + 4.0 * f_mid + f_next);
      const double n_mid = y_mid.norm();
      const double n_next = y_next.norm();
      if (!std::isfinite(n_next)) throw Error(ErrorCode::Instability, "state became non-finite");
      out.max_norm_increase = std::max({out.max_norm_increase, n_mid - norm_prev, n_next - n_mid});
      norm_prev = n_next;
      f_prev = f_next;
      y = y_next;
      out.steps += 2;
    }
    t += 2.0 * h * static_cast<double>(pairs);
    total += chunk;
    if (chunk <= opts.tail_tolerance * total) break;
    if (out.steps > opts.max_steps) {
      throw Error(ErrorCode::Degenerate, "displacement integral did not settle within the step budget");
    }
    chunk_end = 2.0 * t;
  }
  out.value = total;
  out.horizon = t;
  return out;
}

struct EnergyIdentity {
  double phase_norm_sq = 0.0;  // ‖y(0)‖²
  double twice_energy = 0.0;   // xᵀKx + ẋᵀMẋ
};

/// Compares ‖y‖² under y₁ = ΩΦ⁻¹x, y₂ = Φ⁻¹ẋ with the physical 2E.
/// Chain: Φ is the (symmetric, orthogonal) sine eigenvector matrix and K is
/// tridiag(−1, 2, −1). Spectral models: Φ = I, K = diag(ω²).
inline EnergyIdentity energy_norm_identity_check(const ModalModel& model, std::span<const double> x0,
                                                 std::span<const double> v0) {
  const std::size_t n = model.n();
  if (x0.size() != n || v0.size() != n) throw Error(ErrorCode::ShapeMismatch, "x0 and v0 must have length n");
  EnergyIdentity out;
  if (model.kind() == ModelKind::Chain) {
    const auto chain = assemble_chain_matrices(n);
    const auto kx = chain.stiffness.apply(x0);
    for (std::size_t i = 0; i < n; ++i) out.twice_energy += x0[i] * kx[i] + v0[i] * v0[i];
    for (std::size_t l = 1; l <= n; ++l) {
      const auto q = chain_damper(l, n);  // column l of Φ = Φ⁻ᵀ
      double px = 0.0;
      double pv = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        px += q[r] * x0[r];
        pv += q[r] * v0[r];
      }
      const double y1 = model.omega(l - 1) * px;
      out.phase_norm_sq += y1 * y1 + pv * pv;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      out.twice_energy += model.omega_sq(i) * x0[i] * x0[i] + v0[i] * v0[i];
      const double y1 = model.omega(i) * x0[i];
      out.phase_norm_sq += y1 * y1 + v0[i] * v0[i];
    }
  }
  return out;
}

}  // namespace damperopt
