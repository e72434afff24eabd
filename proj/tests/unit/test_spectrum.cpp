#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "critgyro/error.hpp"
#include "critgyro/model.hpp"
#include "critgyro/spectrum.hpp"
#include "oracle.hpp"

using namespace critgyro;

TEST(LowestK, DiagonalExample) {
  const SparseHamiltonian h(3, {{0, 0, 3.0}, {1, 1, 1.0}, {2, 2, 2.0}});
  for (std::size_t threshold : {std::size_t{2000}, std::size_t{0}}) {
    SolverOptions opt;
    opt.dense_threshold = threshold;
    const auto r = lowest_k(h, 1, opt);
    EXPECT_NEAR(r.energies[0], 1.0, 1e-12);
    EXPECT_NEAR(std::abs(r.vectors[0](1)), 1.0, 1e-10);
  }
}

TEST(LowestK, RejectsBadK) {
  const SparseHamiltonian h(2, {{0, 0, 1.0}, {1, 1, 2.0}});
  EXPECT_THROW(lowest_k(h, 0), ParameterError);
  EXPECT_THROW(lowest_k(h, 3), ParameterError);
}

TEST(LowestK, MatchesDenseOracleForTwoParticles) {
  const Model model(2);
  const auto h = model.assemble(0.5, 0.04, 0.8);
  const auto sys = oracle::dense_hamiltonian(2, 0.5, 0.04, 0.8);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sys.h);
  const auto r = lowest_k(h, 3);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(r.energies[static_cast<std::size_t>(k)], es.eigenvalues()(k), 1e-10);
}

TEST(LowestK, InvariantsOnSixParticles) {
  const Model model(6);
  const auto h = model.assemble(0.5, 0.04, 0.8);
  SolverOptions opt;
  for (std::size_t threshold : {std::size_t{2000}, std::size_t{0}}) {
    opt.dense_threshold = threshold;
    const auto r = lowest_k(h, 4, opt);
    for (std::size_t i = 0; i < 4; ++i) {
      if (i > 0) EXPECT_LE(r.energies[i - 1], r.energies[i]);
      EXPECT_LE(r.residuals[i], opt.tol);
      EXPECT_NEAR(r.vectors[i].norm(), 1.0, 1e-12);
      for (std::size_t j = 0; j < i; ++j) EXPECT_LT(std::abs(r.vectors[i].dot(r.vectors[j])), 1e-10);
    }
  }
}

TEST(LowestK, LanczosAgreesWithDense) {
  const Model model(6);
  for (double omega : {0.0, 0.76, 0.9}) {
    const auto h = model.assemble(0.5, 0.04, omega);
    SolverOptions lanczos;
    lanczos.dense_threshold = 0;
    const auto a = lowest_k(h, 3);
    const auto b = lowest_k(h, 3, lanczos);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(a.energies[i], b.energies[i], 1e-9);
  }
}

TEST(LowestK, LanczosIsDeterministic) {
  const Model model(4);
  const auto h = model.assemble(0.5, 0.04, 0.7);
  SolverOptions opt;
  opt.dense_threshold = 0;
  const auto a = lowest_k(h, 2, opt);
  const auto b = lowest_k(h, 2, opt);
  EXPECT_EQ(a.energies, b.energies);
  EXPECT_EQ(a.vectors[0], b.vectors[0]);
}

TEST(LowestK, IterationCapRaisesConvergenceError) {
  const Model model(6);
  const auto h = model.assemble(0.5, 0.04, 0.88);
  SolverOptions opt;
  opt.dense_threshold = 0;
  opt.max_iterations = 4;
  try {
    lowest_k(h, 2, opt);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.best_residual(), opt.tol);
  }
}

TEST(GroundState, ShiftAndVariationalBound) {
  const Model model(5);
  const auto h = model.assemble(0.5, 0.03, 0.6);
  const auto [e0, v0] = ground_state(h);
  const auto n = static_cast<Eigen::Index>(h.dimension());
  const auto [e1, v1] = ground_state(h.with_diagonal_shift(Eigen::VectorXd::Constant(n, 2.5)));
  EXPECT_NEAR(e1, e0 + 2.5, 1e-10);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = nd(rng);
    v.normalize();
    EXPECT_GE(v.dot(matvec(h, v)), e0 - 1e-12);
  }
}

TEST(GroundState, ContinuousInOmega) {
  const Model model(6);
  const double d = 1e-3;
  for (double omega : {0.1, 0.5, 0.76, 0.88}) {
    const double a = ground_state(model.assemble(0.5, 0.04, omega)).first;
    const double b = ground_state(model.assemble(0.5, 0.04, omega + d)).first;
    EXPECT_LE(std::abs(b - a), d * 8 + 1e-12);
  }
}

TEST(GroundState, RestingIsotropicIsPureCondensate) {
  const Model model(6);
  const auto [e0, v0] = ground_state(model.assemble(0.5, 0.0, 0.0));
  EXPECT_NEAR(e0, 6.0 + 15.0 * 0.5 / std::numbers::pi, 1e-9);
  EXPECT_NEAR(std::abs(v0(static_cast<Eigen::Index>(*model.basis().condensate_index()))), 1.0, 1e-9);
}

// Without anisotropy the condensate only mixes with L = 0 pair excitations, so the
// ground state at rest sits below the condensate diagonal and lives entirely in L = 0.
TEST(GroundState, RestingIsotropicSystem) {
  const Model model(6);
  const auto h = model.assemble(0.5, 0.0, 0.0);
  const auto [e0, v0] = ground_state(h);
  const auto c = *model.basis().condensate_index();
  EXPECT_LE(e0, 6.0 + 15.0 * 0.5 / std::numbers::pi);
  Eigen::Index largest = 0;
  v0.cwiseAbs().maxCoeff(&largest);
  EXPECT_EQ(static_cast<std::size_t>(largest), c);
  for (std::size_t i = 0; i < model.basis().size(); ++i) {
    if (model.basis().total_L(i) != 0) EXPECT_EQ(v0(static_cast<Eigen::Index>(i)), 0.0);
  }
  std::vector<std::size_t> l0;
  for (std::size_t i = 0; i < model.basis().size(); ++i)
    if (model.basis().total_L(i) == 0) l0.push_back(i);
  const auto block = restrict_to(h, l0).to_dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block);
  EXPECT_NEAR(es.eigenvalues()(0), e0, 1e-10);
}

TEST(Blocks, ParitySectorsWithAnisotropy) {
  const Model model(6);
  const auto h = model.assemble_static(0.5, 0.04);
  const auto blocks = connected_blocks(h);
  ASSERT_EQ(blocks.size(), 2u);
  for (const auto& b : blocks) {
    const int parity = ((model.basis().total_L(b.front()) % 2) + 2) % 2;
    for (auto i : b) EXPECT_EQ(((model.basis().total_L(i) % 2) + 2) % 2, parity);
  }
}

TEST(Blocks, BlockedSolveMatchesFullDense) {
  const Model model(6);
  const auto h = model.assemble(0.5, 0.04, 0.85);
  const auto blocks = connected_blocks(h);
  const auto d = h.to_dense();
  const auto a = lowest_k_blocked(d, blocks, 4);
  const auto b = lowest_k_dense(d, 4);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(a.energies[i], b.energies[i], 1e-10);
}

TEST(SelectGround, TieBreaks) {
  EigenResult r;
  r.energies = {1.0, 1.0};
  r.vectors = {Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.0, 1.0)};
  const Eigen::VectorXd prev = Eigen::Vector2d(0.1, 0.99);
  EXPECT_EQ(select_ground(r, &prev, std::nullopt), r.vectors[1]);
  EXPECT_EQ(select_ground(r, nullptr, std::size_t{1}), r.vectors[1]);
  EXPECT_EQ(select_ground(r, nullptr, std::size_t{0}), r.vectors[0]);
  r.energies = {1.0, 1.5};
  EXPECT_EQ(select_ground(r, &prev, std::nullopt), r.vectors[0]);
}

TEST(RestrictTo, RenumbersAndValidates) {
  const SparseHamiltonian h(3, {{0, 0, 1.0}, {0, 2, 0.5}, {1, 1, 2.0}, {2, 2, 3.0}});
  const std::vector<std::size_t> idx{0, 2};
  const auto r = restrict_to(h, idx);
  EXPECT_EQ(r.dimension(), 2u);
  EXPECT_EQ(r.at(0, 1), 0.5);
  EXPECT_EQ(r.at(1, 1), 3.0);
  const std::vector<std::size_t> bad{2, 0};
  EXPECT_THROW(restrict_to(h, bad), StructuralError);
}
