#ifndef DQPT_DYNAMICS_HPP
#define DQPT_DYNAMICS_HPP

// Quench dynamics: the x-polarized initial state, unitary propagation
// (adaptive Lanczos, spectral sums, dense matrix exponential) and open-system
// propagation under the Lindblad equation with an embedded Dormand-Prince
// 5(4) pair.
//
// Norms, traces and positivity are never repaired silently; drift beyond
// tolerance raises NumericalError.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dqpt/errors.hpp"
#include "dqpt/model.hpp"
#include "dqpt/spin_core.hpp"

namespace dqpt {

// prod_l (|up> - |down>)/sqrt2, in the full basis or in the parity sector
// (-1)^N that contains it.
inline StateVector initial_state(const SpinBasis& basis) {
  const int n = basis.n_sites();
  if (!basis.is_full() && !(basis.sector() == initial_state_sector(n))) {
    throw ConfigError("the polarized initial state lies in parity sector " +
                      to_string(initial_state_sector(n)) + ", not " + to_string(basis.sector()));
  }
  const double amp = std::pow(2.0, -0.5 * n) * (basis.is_full() ? 1.0 : std::sqrt(2.0));
  CVector a(static_cast<Eigen::Index>(basis.dimension()));
  for (std::size_t j = 0; j < basis.dimension(); ++j) {
    a[static_cast<Eigen::Index>(j)] = (popcount(basis.label(j)) % 2 == 0) ? amp : -amp;
  }
  return {basis, std::move(a)};
}

inline void validate_time_grid(const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw ConfigError("time grid is empty");
  if (t_grid.front() != 0.0) throw ConfigError("time grid must start at t = 0");
  for (std::size_t k = 1; k < t_grid.size(); ++k) {
    if (!(t_grid[k] > t_grid[k - 1]) || !std::isfinite(t_grid[k])) {
      throw ConfigError("time grid must be finite and strictly increasing");
    }
  }
}

// Uniform grid 0, dt, 2dt, ... up to t_max (inclusive within dt/2).
inline std::vector<double> uniform_grid(double t_max, double dt) {
  if (!(dt > 0.0) || !(t_max >= 0.0)) throw ConfigError("uniform_grid needs dt > 0, t_max >= 0");
  const auto steps = static_cast<std::size_t>(std::floor(t_max / dt + 0.5));
  std::vector<double> g(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) g[k] = static_cast<double>(k) * dt;
  return g;
}

// ---------------------------------------------------------------------------
// Unitary propagation
// ---------------------------------------------------------------------------

enum class PropagationMethod { Krylov, Spectral, DenseExpm };

struct PropagatorConfig {
  PropagationMethod method = PropagationMethod::Krylov;
  double dt = 0.01;  // largest internal step, units 1/J
  int krylov_dim = 30;
  double tol = 1e-10;  // local error per Krylov sub-step

  void validate() const {
    if (!(dt > 0.0)) throw ConfigError("propagator dt must be positive");
    if (krylov_dim < 2) throw ConfigError("krylov_dim must be at least 2");
    if (!(tol > 0.0)) throw ConfigError("propagator tolerance must be positive");
  }
};

struct KrylovStats {
  std::size_t matvecs = 0;
  std::size_t substeps = 0;
};

// exp(-i tau H) psi by Lanczos with full reorthogonalization. The Krylov
// basis is reused while the step is halved until the a-posteriori estimate
//   beta0 * beta_m * |[exp(-i tau T_m) e_1]_m|
// meets the tolerance; then the state advances and a new basis is built.
template <class Scalar>
class KrylovPropagator {
 public:
  KrylovPropagator(const SparseOperator<Scalar>& H, int krylov_dim, double tol)
      : H_(H), max_dim_(krylov_dim), tol_(tol) {
    if (!H.hermitian()) throw ConfigError("Krylov propagation needs a Hermitian operator");
    if (krylov_dim < 2) throw ConfigError("krylov_dim must be at least 2");
    if (!(tol > 0.0)) throw ConfigError("Krylov tolerance must be positive");
  }

  const KrylovStats& stats() const { return stats_; }

  void advance(CVector& psi, double tau) {
    if (static_cast<std::size_t>(psi.size()) != H_.dimension()) {
      throw ConfigError("Krylov propagation: dimension mismatch");
    }
    const double min_step = std::max(std::abs(tau), 1.0) * 1e-14;
    double remaining = tau;
    while (std::abs(remaining) > 0.0) {
      const double norm_before = psi.norm();
      const double done = substep(psi, remaining);
      if (std::abs(done) < min_step) {
        throw NumericalError("Krylov tolerance unreachable at the configured subspace dimension");
      }
      const double drift = std::abs(psi.norm() - norm_before);
      if (!psi.allFinite()) throw NumericalError("Krylov propagation produced non-finite values");
      if (drift > 1e-10) {
        throw NumericalError("Krylov step changed the norm by " + std::to_string(drift));
      }
      remaining -= done;
      if (std::abs(remaining) <= 1e-15 * std::abs(tau)) remaining = 0.0;
      ++stats_.substeps;
    }
  }

 private:
  // Advances psi by at most `tau`, returns the time actually covered.
  double substep(CVector& psi, double tau) {
    const double beta0 = psi.norm();
    if (beta0 == 0.0) return tau;
    const Eigen::Index dim = psi.size();
    if (basis_.size() < static_cast<std::size_t>(max_dim_) + 1) {
      basis_.assign(static_cast<std::size_t>(max_dim_) + 1, CVector());
    }
    alpha_.clear();
    beta_.clear();
    decomposed_dim_ = -1;
    basis_[0] = psi / beta0;
    CVector w(dim);

    int m = 0;
    bool breakdown = false;
    double beta_next = 0.0;
    for (int j = 0; j < max_dim_; ++j) {
      H_.multiply(basis_[j], w);
      ++stats_.matvecs;
      const double a = basis_[j].dot(w).real();
      alpha_.push_back(a);
      w -= a * basis_[j];
      if (j > 0) w -= beta_[j - 1] * basis_[j - 1];
      for (int i = 0; i <= j; ++i) w -= basis_[i].dot(w) * basis_[i];
      beta_next = w.norm();
      m = j + 1;
      if (beta_next <= 1e-13 * (std::abs(a) + 1.0)) {
        breakdown = true;
        break;
      }
      if (m >= 2 || m == max_dim_) {
        if (error_estimate(m, beta0, beta_next, tau) <= tol_) break;
      }
      if (j + 1 < max_dim_) {
        beta_.push_back(beta_next);
        basis_[j + 1] = w / beta_next;
      }
    }

    double step = tau;
    if (!breakdown) {
      while (error_estimate(m, beta0, beta_next, step) > tol_) {
        step *= 0.5;
        if (std::abs(step) < 1e-14 * std::max(std::abs(tau), 1.0)) return 0.0;
      }
    }
    const Eigen::VectorXcd y = small_exp(m, step);
    CVector out = CVector::Zero(dim);
    for (int k = 0; k < m; ++k) out += (beta0 * y[k]) * basis_[k];
    psi = std::move(out);
    return step;
  }

  void decompose(int m) {
    if (decomposed_dim_ == m) return;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < m; ++k) T(k, k) = alpha_[k];
    for (int k = 0; k + 1 < m; ++k) T(k, k + 1) = T(k + 1, k) = beta_[k];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    if (es.info() != Eigen::Success) throw NumericalError("Lanczos tridiagonal solve failed");
    evals_ = es.eigenvalues();
    evecs_ = es.eigenvectors();
    decomposed_dim_ = m;
  }

  Eigen::VectorXcd small_exp(int m, double tau) {
    decompose(m);
    Eigen::VectorXcd c(m);
    for (int k = 0; k < m; ++k) c[k] = std::exp(-kI * tau * evals_[k]) * evecs_(0, k);
    return evecs_.cast<cplx>() * c;
  }

  double error_estimate(int m, double beta0, double beta_m, double tau) {
    const Eigen::VectorXcd y = small_exp(m, tau);
    return beta0 * beta_m * std::abs(y[m - 1]);
  }

  const SparseOperator<Scalar>& H_;
  int max_dim_;
  double tol_;
  std::vector<CVector> basis_;
  std::vector<double> alpha_;
  std::vector<double> beta_;
  Eigen::VectorXd evals_;
  Eigen::MatrixXd evecs_;
  int decomposed_dim_ = -1;  // T_m is fixed within one sub-step
  KrylovStats stats_;
};

// Complex copy of an eigenvector matrix.
template <class Scalar>
Eigen::MatrixXcd complex_vectors(const EigenSystem<Scalar>& eig) {
  return eig.vectors.template cast<cplx>();
}

// C_n = <phi_n|psi0>.
template <class Scalar>
CVector overlap_coefficients(const EigenSystem<Scalar>& eig, const StateVector& psi0) {
  require_same_basis(eig.basis, psi0.basis(), "overlap_coefficients");
  CVector c = eig.vectors.adjoint().template cast<cplx>() * psi0.amplitudes();
  const double parseval = c.squaredNorm() - psi0.amplitudes().squaredNorm();
  if (std::abs(parseval) > 1e-10) {
    throw NumericalError("overlap coefficients violate Parseval by " + std::to_string(parseval));
  }
  return c;
}

// sum_n C_n exp(-i E_n t) |phi_n>
template <class Scalar>
StateVector spectral_state(const EigenSystem<Scalar>& eig, const CVector& coeffs, double t) {
  CVector phased(coeffs.size());
  for (Eigen::Index n = 0; n < coeffs.size(); ++n) {
    phased[n] = coeffs[n] * std::exp(-kI * eig.energies[n] * t);
  }
  return {eig.basis, eig.vectors.template cast<cplx>() * phased};
}

template <class Scalar>
StateVector evolve_spectral(const EigenSystem<Scalar>& eig, const StateVector& psi0, double t) {
  return spectral_state(eig, overlap_coefficients(eig, psi0), t);
}

// exp(-i t H) as a dense matrix (Pade scaling and squaring).
template <class Scalar>
Eigen::MatrixXcd dense_propagator(const SparseOperator<Scalar>& H, double t,
                                  std::size_t dense_cap = kDefaultDenseCap) {
  if (H.dimension() > dense_cap) throw ResourceCapError("dense propagator exceeds cap");
  const Eigen::MatrixXcd A = (-kI * t) * H.to_dense().template cast<cplx>();
  return A.exp();
}

// Propagates psi0 across t_grid, calling observer(k, t_k, psi(t_k)).
template <class Scalar, class Observer>
void propagate(const SparseOperator<Scalar>& H, const StateVector& psi0,
               const std::vector<double>& t_grid, const PropagatorConfig& cfg,
               Observer&& observer) {
  cfg.validate();
  validate_time_grid(t_grid);
  require_same_basis(H.basis(), psi0.basis(), "propagate");
  if (!H.hermitian()) throw ConfigError("unitary propagation needs a Hermitian operator");

  switch (cfg.method) {
    case PropagationMethod::Krylov: {
      KrylovPropagator<Scalar> krylov(H, cfg.krylov_dim, cfg.tol);
      StateVector psi = psi0;
      observer(std::size_t{0}, t_grid[0], static_cast<const StateVector&>(psi));
      for (std::size_t k = 1; k < t_grid.size(); ++k) {
        double left = t_grid[k] - t_grid[k - 1];
        while (left > 0.0) {
          const double tau = std::min(left, cfg.dt);
          krylov.advance(psi.amplitudes(), tau);
          left -= tau;
          if (left <= 1e-12 * cfg.dt) left = 0.0;
        }
        observer(k, t_grid[k], static_cast<const StateVector&>(psi));
      }
      break;
    }
    case PropagationMethod::Spectral: {
      const auto eig = dense_eigensystem(H);
      const CVector c = overlap_coefficients(eig, psi0);
      for (std::size_t k = 0; k < t_grid.size(); ++k) {
        const StateVector psi = spectral_state(eig, c, t_grid[k]);
        observer(k, t_grid[k], psi);
      }
      break;
    }
    case PropagationMethod::DenseExpm: {
      StateVector psi = psi0;
      observer(std::size_t{0}, t_grid[0], static_cast<const StateVector&>(psi));
      Eigen::MatrixXcd U;
      double cached = -1.0;
      for (std::size_t k = 1; k < t_grid.size(); ++k) {
        const double step = t_grid[k] - t_grid[k - 1];
        if (std::abs(step - cached) > 1e-15 * std::max(1.0, step)) {
          U = dense_propagator(H, step);
          cached = step;
        }
        psi.amplitudes() = U * psi.amplitudes();
        observer(k, t_grid[k], static_cast<const StateVector&>(psi));
      }
      break;
    }
  }
}

template <class Scalar>
std::vector<StateVector> evolve(const SparseOperator<Scalar>& H, const StateVector& psi0,
                                const std::vector<double>& t_grid, const PropagatorConfig& cfg) {
  std::vector<StateVector> out;
  out.reserve(t_grid.size());
  propagate(H, psi0, t_grid, cfg,
            [&](std::size_t, double, const StateVector& psi) { out.push_back(psi); });
  return out;
}

template <class Scalar>
std::vector<StateVector> evolve_krylov(const SparseOperator<Scalar>& H, const StateVector& psi0,
                                       const std::vector<double>& t_grid,
                                       PropagatorConfig cfg = {}) {
  cfg.method = PropagationMethod::Krylov;
  return evolve(H, psi0, t_grid, cfg);
}

// ---------------------------------------------------------------------------
// Open-system dynamics
// ---------------------------------------------------------------------------

class DensityMatrix {
 public:
  DensityMatrix(SpinBasis basis, Eigen::MatrixXcd matrix)
      : basis_(std::move(basis)), matrix_(std::move(matrix)) {
    const auto dim = static_cast<Eigen::Index>(basis_.dimension());
    if (matrix_.rows() != dim || matrix_.cols() != dim) {
      throw ConfigError("density matrix size does not match basis");
    }
  }

  static DensityMatrix pure(const StateVector& psi) {
    return {psi.basis(), psi.amplitudes() * psi.amplitudes().adjoint()};
  }

  static DensityMatrix maximally_mixed(const SpinBasis& basis) {
    const auto dim = static_cast<Eigen::Index>(basis.dimension());
    return {basis, Eigen::MatrixXcd::Identity(dim, dim) / static_cast<double>(dim)};
  }

  const SpinBasis& basis() const { return basis_; }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  Eigen::MatrixXcd& matrix() { return matrix_; }
  std::size_t dimension() const { return basis_.dimension(); }

  double trace() const { return matrix_.trace().real(); }
  double hermitian_deviation() const { return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff(); }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(matrix_, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("density matrix eigensolve failed");
    return es.eigenvalues()[0];
  }

  // Hermitian within herm_tol, unit trace within trace_tol, eigenvalues
  // above -psd_tol.
  void validate(double herm_tol = 1e-10, double trace_tol = 1e-8, double psd_tol = 1e-8) const {
    if (!matrix_.allFinite()) throw NumericalError("density matrix has non-finite entries");
    if (hermitian_deviation() > herm_tol) throw NumericalError("density matrix is not Hermitian");
    if (std::abs(trace() - 1.0) > trace_tol) throw NumericalError("density matrix trace != 1");
    if (min_eigenvalue() < -psd_tol) throw NumericalError("density matrix is not positive");
  }

 private:
  SpinBasis basis_;
  Eigen::MatrixXcd matrix_;
};

// Right-hand side of
//   drho/dt = -i[H, rho] + sum_j g_j (L_j rho L_j^+ - {L_j^+ L_j, rho}/2)
// written as A + A^+ + sum_j g_j L_j rho L_j^+ with A = -i H_eff rho and
// H_eff = H - (i/2) sum_j g_j L_j^+ L_j. Only sparse operators are stored.
class LindbladGenerator {
 public:
  LindbladGenerator(const RealOperator& H, const std::vector<JumpOperator>& jumps)
      : basis_(H.basis()), heff_(effective_hamiltonian(H, jumps)) {
    if (!basis_.is_full()) throw ConfigError("open-system dynamics needs the full basis");
    for (const auto& j : jumps) {
      require_same_basis(j.op.basis(), basis_, "LindbladGenerator");
      if (j.rate > 0.0) jumps_.push_back(&j);
    }
    // Pauli-type jumps have at most one entry per row; their sandwiches are
    // then fused into a single pass over rho.
    const auto dim = basis_.dimension();
    for (const JumpOperator* j : jumps_) {
      Monomial m{j->rate, std::vector<std::uint32_t>(dim, kNoColumn), std::vector<double>(dim, 0.0)};
      bool ok = true;
      for (std::size_t r = 0; r < dim && ok; ++r) {
        const auto lo = j->op.row_ptr()[r], hi = j->op.row_ptr()[r + 1];
        if (hi - lo > 1) ok = false;
        if (hi - lo == 1) {
          m.col[r] = j->op.cols()[lo];
          m.val[r] = j->op.values()[lo];
        }
      }
      if (!ok) {
        monomials_.clear();
        break;
      }
      monomials_.push_back(std::move(m));
    }
  }

  const SpinBasis& basis() const { return basis_; }

  void operator()(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out, Eigen::MatrixXcd& scratch) const {
    const auto dim = static_cast<std::ptrdiff_t>(basis_.dimension());
    scratch.resize(dim, dim);
    const auto& rp = heff_.row_ptr();
    const auto& cols = heff_.cols();
    const auto& vals = heff_.values();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < dim; ++b) {
      for (std::ptrdiff_t a = 0; a < dim; ++a) {
        cplx acc{0.0, 0.0};
        for (std::size_t k = rp[a]; k < rp[a + 1]; ++k) acc += fast_mul(vals[k], rho(cols[k], b));
        scratch(a, b) = {acc.imag(), -acc.real()};  // -i acc
      }
    }
    out.resize(dim, dim);
    // out = A + A^+, tiled so the transposed reads stay in cache.
    constexpr std::ptrdiff_t kTile = 32;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b0 = 0; b0 < dim; b0 += kTile) {
      for (std::ptrdiff_t a0 = 0; a0 < dim; a0 += kTile) {
        const auto b1 = std::min(dim, b0 + kTile), a1 = std::min(dim, a0 + kTile);
        for (std::ptrdiff_t b = b0; b < b1; ++b) {
          for (std::ptrdiff_t a = a0; a < a1; ++a) out(a, b) = scratch(a, b) + std::conj(scratch(b, a));
        }
      }
    }
    const bool fused = monomials_.size() == jumps_.size();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < dim; ++b) {
      if (fused) {
        for (const Monomial& m : monomials_) {
          const std::uint32_t cb = m.col[b];
          if (cb == kNoColumn) continue;
          const double wb = m.rate * m.val[b];
          const cplx* column = rho.data() + static_cast<std::ptrdiff_t>(cb) * dim;
          for (std::ptrdiff_t a = 0; a < dim; ++a) {
            const std::uint32_t ca = m.col[a];
            if (ca != kNoColumn) out(a, b) += (m.val[a] * wb) * column[ca];
          }
        }
        continue;
      }
      for (const JumpOperator* j : jumps_) {
        const auto& lrp = j->op.row_ptr();
        const auto& lc = j->op.cols();
        const auto& lv = j->op.values();
        for (std::size_t q = lrp[b]; q < lrp[b + 1]; ++q) {
          const std::uint32_t d = lc[q];
          const double wb = j->rate * lv[q];
          for (std::ptrdiff_t a = 0; a < dim; ++a) {
            for (std::size_t k = lrp[a]; k < lrp[a + 1]; ++k) {
              out(a, b) += (lv[k] * wb) * rho(lc[k], d);
            }
          }
        }
      }
    }
  }

 private:
  // Plain complex product; std::complex operator* goes through the
  // inf/nan-aware library routine.
  static cplx fast_mul(cplx x, cplx y) {
    return {x.real() * y.real() - x.imag() * y.imag(), x.real() * y.imag() + x.imag() * y.real()};
  }

  static ComplexOperator effective_hamiltonian(const RealOperator& H,
                                               const std::vector<JumpOperator>& jumps) {
    std::vector<detail::Triplet<cplx>> triplets;
    auto add = [&](const RealOperator& op, cplx scale) {
      for (std::size_t r = 0; r < op.dimension(); ++r) {
        for (std::size_t k = op.row_ptr()[r]; k < op.row_ptr()[r + 1]; ++k) {
          triplets.push_back({static_cast<std::uint32_t>(r), op.cols()[k], scale * op.values()[k]});
        }
      }
    };
    add(H, 1.0);
    for (const auto& j : jumps) {
      if (j.rate > 0.0) add(compose(adjoint(j.op), j.op), cplx{0.0, -0.5 * j.rate});
    }
    return detail::assemble(H.basis(), std::move(triplets), false);
  }

  static constexpr std::uint32_t kNoColumn = std::numeric_limits<std::uint32_t>::max();

  struct Monomial {
    double rate;
    std::vector<std::uint32_t> col;  // kNoColumn: empty row
    std::vector<double> val;
  };

  SpinBasis basis_;
  ComplexOperator heff_;
  std::vector<const JumpOperator*> jumps_;
  std::vector<Monomial> monomials_;
};

struct LindbladConfig {
  double tol = 1e-8;        // local error bound, max-abs over matrix entries
  double max_step = 0.1;    // units 1/J
  double min_step = 1e-10;  // below this the integrator gives up
  double trace_tol = 1e-8;
  bool check_positivity = true;
  double positivity_floor = -1e-6;
  std::size_t max_sites = 12;

  void validate() const {
    if (!(tol > 0.0) || !(max_step > 0.0) || !(min_step > 0.0) || min_step >= max_step) {
      throw ConfigError("invalid Lindblad integrator settings");
    }
  }
};

struct LindbladStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
};

// Integrates rho over t_grid, calling observer(k, t_k, rho(t_k)).
template <class Observer>
LindbladStats lindblad_propagate(const RealOperator& H, const std::vector<JumpOperator>& jumps,
                                 const DensityMatrix& rho0, const std::vector<double>& t_grid,
                                 const LindbladConfig& cfg, Observer&& observer) {
  cfg.validate();
  validate_time_grid(t_grid);
  require_same_basis(H.basis(), rho0.basis(), "lindblad_propagate");
  if (static_cast<std::size_t>(rho0.basis().n_sites()) > cfg.max_sites) {
    throw ResourceCapError("open-system run with N=" + std::to_string(rho0.basis().n_sites()) +
                           " exceeds the density-matrix cap N <= " +
                           std::to_string(cfg.max_sites));
  }
  const LindbladGenerator rhs(H, jumps);
  LindbladStats stats;

  // Dormand-Prince 5(4) tableau.
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  (void)c2;
  (void)c3;
  (void)c4;
  (void)c5;

  Eigen::MatrixXcd y = rho0.matrix();
  const auto dim = y.rows();
  Eigen::MatrixXcd k1(dim, dim), k2(dim, dim), k3(dim, dim), k4(dim, dim), k5(dim, dim),
      k6(dim, dim), k7(dim, dim), tmp(dim, dim), ynew(dim, dim), scratch(dim, dim);

  auto eval = [&](const Eigen::MatrixXcd& in, Eigen::MatrixXcd& out) {
    rhs(in, out, scratch);
    ++stats.rhs_evaluations;
  };

  auto check_and_observe = [&](std::size_t k, double t) {
    DensityMatrix rho(rho0.basis(), y);
    if (!rho.matrix().allFinite()) throw NumericalError("Lindblad state became non-finite");
    const double tr = rho.trace();
    if (std::abs(tr - 1.0) > cfg.trace_tol) {
      throw NumericalError("Lindblad trace drifted to " + std::to_string(tr) + " at t=" +
                           std::to_string(t));
    }
    if (cfg.check_positivity) {
      const double lo = rho.min_eigenvalue();
      if (lo < cfg.positivity_floor) {
        throw NumericalError("Lindblad positivity violated: smallest eigenvalue " +
                             std::to_string(lo) + " at t=" + std::to_string(t));
      }
    }
    observer(k, t, static_cast<const DensityMatrix&>(rho));
  };

  check_and_observe(0, t_grid[0]);
  eval(y, k1);
  double t = t_grid[0];
  double h = std::min(cfg.max_step, 1e-3);

  for (std::size_t target = 1; target < t_grid.size(); ++target) {
    const double t_end = t_grid[target];
    while (t < t_end) {
      const bool clipped = t + h >= t_end;
      const double step = clipped ? t_end - t : h;

      tmp = y + step * (a21 * k1);
      eval(tmp, k2);
      tmp = y + step * (a31 * k1 + a32 * k2);
      eval(tmp, k3);
      tmp = y + step * (a41 * k1 + a42 * k2 + a43 * k3);
      eval(tmp, k4);
      tmp = y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      eval(tmp, k5);
      tmp = y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      eval(tmp, k6);
      ynew = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      eval(ynew, k7);

      tmp = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const double err = tmp.cwiseAbs().maxCoeff() / cfg.tol;
      if (!std::isfinite(err)) throw NumericalError("Lindblad integrator produced non-finite error");

      const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      if (err <= 1.0) {
        t = clipped ? t_end : t + step;
        y.swap(ynew);
        k1.swap(k7);
        ++stats.accepted;
        if (!clipped) h = std::min(cfg.max_step, step * factor);
      } else {
        ++stats.rejected;
        h = step * std::max(factor, 0.1);
        if (h < cfg.min_step) {
          throw NumericalError("Lindblad step size underflow at t=" + std::to_string(t));
        }
      }
    }
    check_and_observe(target, t_end);
  }
  return stats;
}

inline std::vector<DensityMatrix> lindblad_evolve(const RealOperator& H,
                                                  const std::vector<JumpOperator>& jumps,
                                                  const DensityMatrix& rho0,
                                                  const std::vector<double>& t_grid,
                                                  double tol = 1e-8) {
  LindbladConfig cfg;
  cfg.tol = tol;
  std::vector<DensityMatrix> out;
  out.reserve(t_grid.size());
  lindblad_propagate(H, jumps, rho0, t_grid, cfg,
                     [&](std::size_t, double, const DensityMatrix& rho) { out.push_back(rho); });
  return out;
}

}  // namespace dqpt

#endif  // DQPT_DYNAMICS_HPP
