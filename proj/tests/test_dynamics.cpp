#include <gtest/gtest.h>

#include <random>

#include "dqpt/dynamics.hpp"
#include "dqpt/observables.hpp"
#include "oracles.hpp"

using namespace dqpt;

namespace {

double trace_norm(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (m + m.adjoint()));
  return es.eigenvalues().cwiseAbs().sum();
}

// Plain Lanczos ground state (full reorthogonalization), independent of the
// propagator's implementation.
Eigen::VectorXd lanczos_ground_state(const Eigen::MatrixXd& H, int m) {
  const auto d = H.rows();
  Eigen::MatrixXd Q(d, m);
  Eigen::VectorXd q = Eigen::VectorXd::Ones(d).normalized();
  Eigen::VectorXd alpha(m), beta(m);
  int used = m;
  for (int j = 0; j < m; ++j) {
    Q.col(j) = q;
    Eigen::VectorXd w = H * q;
    alpha[j] = q.dot(w);
    for (int k = 0; k <= j; ++k) w -= Q.col(k).dot(w) * Q.col(k);
    beta[j] = w.norm();
    if (beta[j] < 1e-13) {
      used = j + 1;
      break;
    }
    q = w / beta[j];
  }
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(used, used);
  for (int j = 0; j < used; ++j) {
    T(j, j) = alpha[j];
    if (j + 1 < used) T(j, j + 1) = T(j + 1, j) = beta[j];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  return (Q.leftCols(used) * es.eigenvectors().col(0)).normalized();
}

}  // namespace

TEST(InitialState, Examples) {
  const auto b1 = build_basis(1, Sector::full());
  const auto psi1 = initial_state(b1);
  EXPECT_NEAR(std::abs(psi1[0] - 1.0 / std::sqrt(2.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(psi1[1] + 1.0 / std::sqrt(2.0)), 0.0, 1e-15);

  for (int n : {3, 6}) {
    const auto b = build_basis(n, Sector::full());
    const auto psi = initial_state(b);
    EXPECT_LT((psi.amplitudes() - oracle::initial_state(n)).norm(), 1e-14);
    for (int l = 0; l < n; ++l) EXPECT_NEAR(expectation(pauli_site(b, l, Axis::X), psi).real(), -1.0, 1e-14);
    EXPECT_NEAR(std::abs(expectation(collective_spin(b, BlochDirection::z()), psi)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(expectation(collective_spin(b, BlochDirection::y()), psi)), 0.0, 1e-14);
    EXPECT_NEAR(expectation(collective_spin_squared(b, BlochDirection::z()), psi).real(), n / 4.0, 1e-14);
    // Sector version embeds to the same vector.
    const auto sec = build_basis(n, initial_state_sector(n));
    EXPECT_LT((embed_full(initial_state(sec)).amplitudes() - psi.amplitudes()).norm(), 1e-14);
  }
  const int n = 5;
  EXPECT_THROW(initial_state(build_basis(n, Sector::with_parity(1))), ConfigError);
}

TEST(TimeGrid, Validation) {
  EXPECT_THROW(validate_time_grid({}), ConfigError);
  EXPECT_THROW(validate_time_grid({0.1, 0.2}), ConfigError);
  EXPECT_THROW(validate_time_grid({0.0, 0.2, 0.2}), ConfigError);
  const auto g = uniform_grid(1.0, 0.01);
  EXPECT_EQ(g.size(), 101u);
  EXPECT_DOUBLE_EQ(g.back(), 1.0);
}

TEST(Propagation, ZeroTimeIsIdentity) {
  const auto b = build_basis(6, initial_state_sector(6));
  const auto H = build_hamiltonian({6, 1.0, 0.0, 1.0}, b);
  const auto psi0 = initial_state(b);
  const auto out = evolve_krylov(H, psi0, {0.0});
  EXPECT_EQ((out[0].amplitudes() - psi0.amplitudes()).norm(), 0.0);
}

TEST(Propagation, KrylovSpectralAndDenseExpmAgree) {
  for (int n : {4, 6, 8, 10}) {
    for (auto sec : {initial_state_sector(n), Sector::full()}) {
      if (n == 10 && sec.is_full()) continue;  // dense expm of 1024x1024 is slow; sector covers it
      const auto b = build_basis(n, sec);
      const auto H = build_hamiltonian({n, 1.0, 0.5, 1.0}, b);
      const auto psi0 = initial_state(b);
      const std::vector<double> grid{0.0, 0.37, 1.0, 2.5};
      PropagatorConfig cfg;
      const auto kry = evolve(H, psi0, grid, cfg);
      cfg.method = PropagationMethod::Spectral;
      const auto spe = evolve(H, psi0, grid, cfg);
      cfg.method = PropagationMethod::DenseExpm;
      const auto exm = evolve(H, psi0, grid, cfg);
      for (std::size_t k = 0; k < grid.size(); ++k) {
        EXPECT_LT((kry[k].amplitudes() - spe[k].amplitudes()).norm(), 1e-8) << n;
        EXPECT_LT((kry[k].amplitudes() - exm[k].amplitudes()).norm(), 1e-8) << n;
        EXPECT_LT((spe[k].amplitudes() - exm[k].amplitudes()).norm(), 1e-8) << n;
      }
    }
  }
}

TEST(Propagation, KrylovMatchesSpectralAtLongTime) {
  const int n = 8;
  const auto b = build_basis(n, initial_state_sector(n));
  const auto H = build_hamiltonian({n, 1.0, 0.0, 1.0}, b);
  const auto psi0 = initial_state(b);
  const auto kry = evolve_krylov(H, psi0, uniform_grid(8.0, 0.01));
  const auto ref = evolve_spectral(dense_eigensystem(H), psi0, 8.0);
  EXPECT_LT((kry.back().amplitudes() - ref.amplitudes()).norm(), 1e-8);
}

TEST(Propagation, FullBasisMatchesKroneckerExpm) {
  const int n = 5;
  const auto b = build_basis(n, Sector::full());
  const auto H = build_hamiltonian({n, 1.0, 0.3, 0.8}, b);
  const auto out = evolve_krylov(H, initial_state(b), {0.0, 1.7});
  const auto ref = oracle::evolve(oracle::hamiltonian(n, 1.0, 0.3, 0.8), oracle::initial_state(n), 1.7);
  EXPECT_LT((out[1].amplitudes() - ref).norm(), 1e-9);
}

TEST(Propagation, SpectralMatchesExpmForRandomHermitian) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  const int n = 6;
  const auto d = 1 << n;
  Eigen::MatrixXcd A(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) A(i, j) = cplx(g(rng), g(rng));
  }
  const Eigen::MatrixXcd M = 0.5 * (A + A.adjoint());
  const auto b = build_basis(n, Sector::full());
  const auto H = build_operator<cplx>(b, OperatorParity::Indefinite, true, [&](Label s, auto&& emit) {
    for (int r = 0; r < d; ++r) emit(static_cast<Label>(r), M(r, static_cast<Eigen::Index>(s)));
  });
  const StateVector psi(b, oracle::random_state(rng, d));
  const auto out = evolve_spectral(dense_eigensystem(H), psi, 0.9);
  EXPECT_LT((out.amplitudes() - oracle::evolve(M, psi.amplitudes(), 0.9)).norm(), 1e-10);
}

TEST(Spectral, CompletenessAndEigenstates) {
  const int n = 6;
  const auto b = build_basis(n, initial_state_sector(n));
  const auto H = build_hamiltonian({n, 1.0, 0.0, 1.3}, b);
  const auto eig = dense_eigensystem(H);
  const auto psi0 = initial_state(b);
  EXPECT_LT((evolve_spectral(eig, psi0, 0.0).amplitudes() - psi0.amplitudes()).norm(), 1e-12);

  const StateVector phi0(b, eig.vectors.col(0).cast<cplx>());
  const CVector c = overlap_coefficients(eig, phi0);
  EXPECT_NEAR(std::abs(c[0]), 1.0, 1e-12);
  EXPECT_NEAR(c.tail(c.size() - 1).norm(), 0.0, 1e-12);
  const auto later = evolve_spectral(eig, phi0, 3.3);
  EXPECT_NEAR(std::abs(inner(phi0, later)), 1.0, 1e-12);

  for (double h : {0.0, 0.5, 2.475}) {
    const auto Hh = build_hamiltonian({n, 1.0, 1.0, h}, b);
    EXPECT_NEAR(overlap_coefficients(dense_eigensystem(Hh), psi0).squaredNorm(), 1.0, 1e-12);
  }
}

TEST(Spectral, GroundStateWeightMatchesLanczos) {
  const int n = 8;
  const auto b = build_basis(n, Sector::full());
  const auto H = build_hamiltonian({n, 1.0, 0.0, 1.0}, b);
  const auto psi0 = initial_state(b);
  const CVector c = overlap_coefficients(dense_eigensystem(H), psi0);
  const Eigen::VectorXd g = lanczos_ground_state(H.to_dense(), 120);
  const double fidelity = std::norm(g.cast<cplx>().dot(psi0.amplitudes()));
  EXPECT_NEAR(std::norm(c[0]), fidelity, 1e-8);
}

TEST(Conservation, NormEnergyAndParitySelection) {
  for (int n : {6, 9, 12}) {
    for (double jp : {0.0, 1.0}) {
      for (double h : {0.5, 1.0, 2.475}) {
        const auto b = build_basis(n, initial_state_sector(n));
        const auto H = build_hamiltonian({n, 1.0, jp, h}, b);
        const auto psi0 = initial_state(b);
        const double e0 = expectation(H, psi0).real();
        PropagatorConfig cfg;
        propagate(H, psi0, uniform_grid(10.0, 0.5), cfg, [&](std::size_t, double, const StateVector& psi) {
          EXPECT_NEAR(psi.norm(), 1.0, 1e-10);
          EXPECT_NEAR(expectation(H, psi).real(), e0, 1e-8 * std::abs(e0));
          const StateVector f = embed_full(psi);
          CVector sz, sy;
          apply_collective_full(n, Axis::Z, f.amplitudes(), sz);
          apply_collective_full(n, Axis::Y, f.amplitudes(), sy);
          EXPECT_LT(std::abs(f.amplitudes().dot(sz)), 1e-8);
          EXPECT_LT(std::abs(f.amplitudes().dot(sy)), 1e-8);
        });
      }
    }
  }
}

TEST(Lindblad, ClosedLimitMatchesUnitary) {
  for (int n : {4, 6, 8}) {
    const auto b = build_basis(n, Sector::full());
    const auto H = build_hamiltonian({n, 1.0, 0.0, 1.0}, b);
    const auto psi0 = initial_state(b);
    const std::vector<double> grid{0.0, 0.5, 1.0, 2.0};
    const auto rhos = lindblad_evolve(H, {}, DensityMatrix::pure(psi0), grid, 1e-11);
    const auto psis = evolve_krylov(H, psi0, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const Eigen::MatrixXcd pure = psis[k].amplitudes() * psis[k].amplitudes().adjoint();
      EXPECT_LT(trace_norm(rhos[k].matrix() - pure), 1e-8) << n << " t=" << grid[k];
    }
  }
}

TEST(Lindblad, SingleQubitDephasing) {
  const auto b = build_basis(1, Sector::full());
  const RealOperator H0 = build_operator<double>(b, OperatorParity::Even, true, [](Label, auto&&) {});
  const double g = 0.3;
  const auto jumps = jump_operators(b, g, 0.0);
  CVector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const auto grid = uniform_grid(3.0, 0.25);
  const auto rhos = lindblad_evolve(H0, jumps, DensityMatrix::pure(StateVector(b, plus)), grid, 1e-12);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double sx = (rhos[k].matrix() * oracle::sx()).trace().real();
    EXPECT_NEAR(sx, std::exp(-2.0 * g * grid[k]), 1e-8);
  }
}

TEST(Lindblad, SingleQubitDamping) {
  const auto b = build_basis(1, Sector::full());
  const RealOperator H0 = build_operator<double>(b, OperatorParity::Even, true, [](Label, auto&&) {});
  const double g = 0.4;
  const auto jumps = jump_operators(b, 0.0, g);
  const auto grid = uniform_grid(3.0, 0.25);
  const auto rhos =
      lindblad_evolve(H0, jumps, DensityMatrix::pure(StateVector::computational(b, 0)), grid, 1e-12);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    EXPECT_NEAR(rhos[k].matrix()(0, 0).real(), std::exp(-g * grid[k]), 1e-8);
  }
}

TEST(Lindblad, MatchesDenseLiouvillian) {
  const int n = 3;
  const auto b = build_basis(n, Sector::full());
  const auto H = build_hamiltonian({n, 1.0, 0.0, 1.0}, b);
  const auto jumps = jump_operators(b, 0.07, 0.11);
  std::vector<std::pair<double, oracle::Mat>> ref_jumps;
  for (int l = 0; l < n; ++l) ref_jumps.emplace_back(0.07, oracle::site_op(oracle::sz(), l, n));
  for (int l = 0; l < n; ++l) ref_jumps.emplace_back(0.11, oracle::site_op(oracle::sminus(), l, n));
  const auto liou = oracle::liouvillian(oracle::hamiltonian(n, 1.0, 0.0, 1.0), ref_jumps);
  const auto psi0 = initial_state(b);
  const std::vector<double> grid{0.0, 0.4, 1.5, 3.0};
  const auto rhos = lindblad_evolve(H, jumps, DensityMatrix::pure(psi0), grid, 1e-11);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto ref = oracle::evolve_rho(liou, rhos[0].matrix(), grid[k]);
    EXPECT_LT((rhos[k].matrix() - ref).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Lindblad, TraceHermiticityPositivity) {
  const int n = 6;
  const auto b = build_basis(n, Sector::full());
  const auto H = build_hamiltonian({n, 1.0, 1.0, 2.475}, b);
  const auto jumps = jump_operators(b, 0.05, 0.05);
  LindbladConfig cfg;
  lindblad_propagate(H, jumps, DensityMatrix::pure(initial_state(b)), uniform_grid(4.0, 0.5), cfg,
                     [&](std::size_t, double t, const DensityMatrix& rho) {
                       EXPECT_NEAR(rho.trace(), 1.0, 1e-8);
                       EXPECT_LT(rho.hermitian_deviation(), 1e-10 * std::max(1.0, t));
                       EXPECT_GT(rho.min_eigenvalue(), -1e-8);
                     });
}

TEST(Lindblad, RejectsOversizedAndSectorInputs) {
  LindbladConfig cfg;
  cfg.max_sites = 4;
  const auto b = build_basis(5, Sector::full());
  const auto H = build_hamiltonian({5, 1.0, 0.0, 1.0}, b);
  EXPECT_THROW(lindblad_propagate(H, {}, DensityMatrix::pure(initial_state(b)), {0.0, 1.0}, cfg,
                                  [](std::size_t, double, const DensityMatrix&) {}),
               ResourceCapError);
  const auto sec = build_basis(4, Sector::with_parity(1));
  const auto Hs = build_hamiltonian({4, 1.0, 0.0, 1.0}, sec);
  EXPECT_THROW(LindbladGenerator(Hs, {}), ConfigError);
}

TEST(DensityMatrix, Validation) {
  const auto b = build_basis(2, Sector::full());
  const auto mixed = DensityMatrix::maximally_mixed(b);
  EXPECT_NEAR(mixed.trace(), 1.0, 1e-15);
  EXPECT_NO_THROW(mixed.validate());
  Eigen::MatrixXcd bad = Eigen::MatrixXcd::Identity(4, 4);
  EXPECT_THROW(DensityMatrix(b, bad).validate(), NumericalError);
  EXPECT_THROW(DensityMatrix(b, Eigen::MatrixXcd::Identity(3, 3)), ConfigError);
}
