#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "damperopt/lyapunov.hpp"
#include "damperopt/verification.hpp"

using namespace damperopt;

namespace {

// The unit 1-DOF oscillator m = k = 1 in modal form: ω = 1, damping c·1·1.
ModalModel unit_oscillator() { return string_model(1); }

PhaseMatrix one_dof_phase(double c) {
  PhaseMatrix pm;
  pm.n = 1;
  pm.A.resize(2, 2);
  pm.A << 0.0, 1.0, -1.0, -c;
  return pm;
}

}  // namespace

TEST(AssembleA, SingleMass) {
  const auto pm = assemble_A(chain_model(1), chain_damper(1, 1), 2.0);
  EXPECT_NEAR(pm.A(0, 0), 0.0, 0.0);
  EXPECT_NEAR(pm.A(0, 1), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(pm.A(1, 0), -std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(pm.A(1, 1), -2.0, 1e-15);
}

TEST(AssembleA, SymmetricPartIsDamping) {
  const std::size_t n = 6;
  const auto damper = chain_damper(2, n);
  const double v = 0.7;
  const auto pm = assemble_A(chain_model(n), damper, v);
  const Eigen::MatrixXd S = pm.A + pm.A.transpose();
  for (Eigen::Index i = 0; i < 12; ++i) {
    for (Eigen::Index j = 0; j < 12; ++j) {
      double want = 0.0;
      if (i >= 6 && j >= 6) want = -2.0 * v * damper[i - 6] * damper[j - 6];
      EXPECT_NEAR(S(i, j), want, 1e-15);
    }
  }
}

TEST(AssembleA, TraceIsMinusDampingNorm) {
  const auto pm = assemble_A(chain_model(3), chain_damper(2, 3), 1.0);
  EXPECT_NEAR(pm.A.trace(), -1.0, 1e-14);
}

TEST(AssembleA, RejectsBadInput) {
  EXPECT_THROW(assemble_A(chain_model(3), chain_damper(1, 4), 1.0), Error);
  EXPECT_THROW(assemble_A(chain_model(3), chain_damper(1, 3), 0.0), Error);
}

TEST(SolveLyapunov, OneDofEnergy) {
  for (double c : {0.3, 1.0, 2.0, 5.0}) {
    const auto sol = solve_lyapunov(one_dof_phase(c), Eigen::MatrixXd::Identity(2, 2));
    EXPECT_NEAR(sol.X.trace(), 2.0 / c + c / 2.0, 1e-12);
  }
}

TEST(SolveLyapunov, OneDofDisplacement) {
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(2, 2);
  rhs(0, 0) = 1.0;
  for (double c : {0.3, 1.0, 2.0, 5.0}) {
    const auto sol = solve_lyapunov(one_dof_phase(c), rhs);
    EXPECT_NEAR(sol.X.trace(), 1.0 / c + c / 2.0, 1e-12);
  }
}

TEST(SolveLyapunov, MinusIdentity) {
  const Eigen::MatrixXd A = -Eigen::MatrixXd::Identity(2, 2);
  const auto sol = solve_lyapunov(A, Eigen::MatrixXd::Identity(2, 2));
  EXPECT_TRUE(sol.X.isApprox(0.5 * Eigen::MatrixXd::Identity(2, 2), 1e-15));
}

TEST(SolveLyapunov, ResidualAndSymmetry) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 15; ++t) {
    const auto inst = random_chain_instance(rng, 1, 12);
    const auto pm = assemble_A(chain_model(inst.n), chain_damper(inst.k, inst.n), 0.3 + t * 0.2);
    const auto m = pm.A.rows();
    const auto sol = solve_lyapunov(pm, Eigen::MatrixXd::Identity(m, m));
    EXPECT_LE(sol.residual_norm, 1e-9);
    EXPECT_LE((sol.X - sol.X.transpose()).cwiseAbs().maxCoeff(), 1e-11 * sol.X.cwiseAbs().maxCoeff());
  }
}

TEST(SolveLyapunov, RejectsShapesAndSize) {
  EXPECT_THROW(solve_lyapunov(Eigen::MatrixXd::Identity(2, 3), Eigen::MatrixXd::Identity(2, 2)), Error);
  EXPECT_THROW(solve_lyapunov(-Eigen::MatrixXd::Identity(66, 66), Eigen::MatrixXd::Identity(66, 66)), Error);
}

TEST(SolveLyapunov, UndampedModeIsDegenerate) {
  const auto model = string_model(3);
  const auto pm = assemble_A(model, string_damper(1.0 / 3.0, 3), 1.0);
  try {
    (void)solve_lyapunov(pm, Eigen::MatrixXd::Identity(6, 6));
    FAIL() << "expected degeneracy";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Degenerate);
  }
}

TEST(Duality, IdentityWeight) {
  const auto pm = assemble_A(chain_model(4), chain_damper(1, 4), 1.0);
  const auto d = dual_trace_check(pm, Eigen::MatrixXd::Identity(8, 8));
  const auto x = solve_lyapunov(pm, Eigen::MatrixXd::Identity(8, 8));
  EXPECT_NEAR(d.primal, x.X.trace(), 1e-10);
  EXPECT_NEAR(d.dual, x.X.trace(), 1e-10 * x.X.trace());
}

TEST(Duality, ChainBand) {
  const auto model = chain_model(4);
  const auto pm = assemble_A(model, chain_damper(2, 4), 1.0);
  const auto d = dual_trace_check(pm, weight_matrix(energy_weights(0, 2, model)));
  EXPECT_NEAR(d.dual, d.primal, 1e-8 * std::abs(d.primal));
}

TEST(Duality, ZeroWeight) {
  const auto pm = assemble_A(chain_model(3), chain_damper(1, 3), 1.0);
  const auto d = dual_trace_check(pm, Eigen::MatrixXd::Zero(6, 6));
  EXPECT_EQ(d.primal, 0.0);
  EXPECT_EQ(d.dual, 0.0);
}

TEST(Duality, RandomInstances) {
  const auto r = verify_duality(20, 99);
  EXPECT_EQ(r.checks, 20u);
  EXPECT_LE(r.worst, 1e-8);
}

TEST(Definiteness, ChainDisplacement) {
  const auto model = chain_model(3);
  const auto pm = assemble_A(model, chain_damper(2, 3), 1.0);
  // k = 2 is a node of mode 2 for n = 3; use a position that damps every mode.
  const auto pm1 = assemble_A(model, chain_damper(1, 3), 1.0);
  EXPECT_TRUE(hatX_definiteness(pm1, weight_matrix(displacement_weights(0, 3, model))));
  EXPECT_THROW(hatX_definiteness(pm, weight_matrix(displacement_weights(0, 3, model))), Error);
}

TEST(Definiteness, SingleMass) {
  const auto model = chain_model(1);
  const auto pm = assemble_A(model, chain_damper(1, 1), 1.0);
  EXPECT_TRUE(hatX_definiteness(pm, weight_matrix(displacement_weights(0, 1, model))));
}

TEST(Oracle, UnweightedNodeIsDropped) {
  const auto model = chain_model(5);
  const auto damper = chain_damper(2, 5);
  ASSERT_TRUE(damper.is_zero_mode(2));
  const double t = oracle_weighted_trace(model, damper, energy_weights(0, 2, model), 1.0);
  EXPECT_TRUE(std::isfinite(t));
  EXPECT_THROW(oracle_weighted_trace(model, damper, energy_weights(0, 3, model), 1.0), Error);
}

TEST(Definiteness, NodeIsDegenerate) {
  const auto model = string_model(3);
  const auto pm = assemble_A(model, string_damper(1.0 / 3.0, 3), 1.0);
  EXPECT_THROW(hatX_definiteness(pm, weight_matrix(displacement_weights(0, 3, model))), Error);
}

TEST(Definiteness, RandomInstances) { EXPECT_TRUE(verify_definiteness(12, 8).passed); }

TEST(TimeIntegral, ZeroState) {
  const auto pm = assemble_A(chain_model(2), chain_damper(1, 2), 1.0);
  EXPECT_EQ(simulate_displacement_integral(pm, Eigen::VectorXd::Zero(4)).value, 0.0);
}

TEST(TimeIntegral, CriticallyDampedOscillator) {
  // x(t) = (1+t)e^{-t}: ∫x² = 5/4, which is also y₀ᵀX̂y₀.
  const auto pm = one_dof_phase(2.0);
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(2, 2);
  Z(0, 0) = 1.0;
  const auto xhat = solve_lyapunov(pm, Z);
  EXPECT_NEAR(xhat.X(0, 0), 1.25, 1e-12);
  const auto out = simulate_displacement_integral(pm, Eigen::Vector2d(1.0, 0.0));
  EXPECT_NEAR(out.value, 1.25, 1e-4 * 1.25);
  EXPECT_LE(out.max_norm_increase, 1e-6);
}

TEST(TimeIntegral, ChainQuadraticForm) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  const std::size_t n = 4;
  const auto model = chain_model(n);
  for (std::size_t k : {1u, 2u, 3u}) {
    const auto pm = assemble_A(model, chain_damper(k, n), 1.0);
    Eigen::VectorXd y0(2 * n);
    for (auto& x : y0) x = g(rng);
    const auto xhat = solve_lyapunov(pm, weight_matrix(displacement_weights(0, n, model)));
    const double want = y0.dot(xhat.X * y0);
    const auto got = simulate_displacement_integral(pm, y0);
    EXPECT_NEAR(got.value, want, 1e-4 * want);
    EXPECT_LE(got.max_norm_increase, 1e-6);
  }
}

TEST(TimeIntegral, UnitOscillatorModel) {
  const auto model = unit_oscillator();
  EXPECT_NEAR(model.omega(0), std::numbers::pi, 1e-15);
  EXPECT_TRUE(verify_time_integral().passed);
}

TEST(EnergyIdentity, Zero) {
  const std::vector<double> z(3, 0.0);
  const auto e = energy_norm_identity_check(chain_model(3), z, z);
  EXPECT_EQ(e.phase_norm_sq, 0.0);
  EXPECT_EQ(e.twice_energy, 0.0);
}

TEST(EnergyIdentity, UnitDisplacement) {
  const std::vector<double> x = {1.0, 0.0, 0.0};
  const std::vector<double> v(3, 0.0);
  const auto e = energy_norm_identity_check(chain_model(3), x, v);
  EXPECT_NEAR(e.twice_energy, 2.0, 1e-15);
  EXPECT_NEAR(e.phase_norm_sq, 2.0, 1e-14);
}

TEST(EnergyIdentity, Random) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  std::vector<double> x(6), v(6);
  for (int t = 0; t < 10; ++t) {
    for (auto& a : x) a = g(rng);
    for (auto& a : v) a = g(rng);
    const auto e = energy_norm_identity_check(chain_model(6), x, v);
    EXPECT_NEAR(e.phase_norm_sq, e.twice_energy, 1e-10 * e.twice_energy);
    const auto s = energy_norm_identity_check(rod_model(6), x, v);
    EXPECT_NEAR(s.phase_norm_sq, s.twice_energy, 1e-10 * s.twice_energy);
  }
}
