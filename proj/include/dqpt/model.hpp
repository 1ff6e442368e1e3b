#ifndef DQPT_MODEL_HPP
#define DQPT_MODEL_HPP

// Periodic (next-nearest-neighbor) transverse-field Ising chain
//
//   H = -J sum_l sz_l sz_{l+1} - J' sum_l sz_l sz_{l+2} + h sum_l sx_l,
//
// site sums over l = 0..N-1 with indices mod N. For N = 2 the single
// nearest-neighbor bond is therefore counted twice; small-N oracles rely on
// this. Units: hbar = 1, energies in units of J.

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <type_traits>
#include <vector>

#include "dqpt/errors.hpp"
#include "dqpt/spin_core.hpp"

namespace dqpt {

struct ModelParams {
  int n_sites = 2;
  double J = 1.0;
  double Jp = 0.0;
  double h = 0.0;

  void validate() const {
    if (!std::isfinite(J) || !std::isfinite(Jp) || !std::isfinite(h)) {
      throw ConfigError("model couplings must be finite");
    }
    if (Jp != 0.0 && n_sites < 3) {
      throw ConfigError("next-nearest-neighbor coupling requires N >= 3");
    }
    if (n_sites < 2) throw ConfigError("the chain needs N >= 2 sites");
  }
};

// Diagonal Ising energy of a computational label.
inline double ising_energy(const ModelParams& p, Label s) {
  const int n = p.n_sites;
  auto z = [s](int l) { return ((s >> l) & 1U) ? -1.0 : 1.0; };
  double e = 0.0;
  for (int l = 0; l < n; ++l) {
    e -= p.J * z(l) * z((l + 1) % n);
    if (p.Jp != 0.0) e -= p.Jp * z(l) * z((l + 2) % n);
  }
  return e;
}

inline RealOperator build_hamiltonian(const ModelParams& p, const SpinBasis& basis) {
  p.validate();
  if (basis.n_sites() != p.n_sites) {
    throw ConfigError("basis has " + std::to_string(basis.n_sites()) + " sites, model has " +
                      std::to_string(p.n_sites));
  }
  const int n = p.n_sites;
  return build_operator<double>(basis, OperatorParity::Even, true, [&](Label s, auto&& emit) {
    const double diag = ising_energy(p, s);
    if (diag != 0.0) emit(s, diag);
    if (p.h != 0.0) {
      for (int l = 0; l < n; ++l) emit(s ^ (Label{1} << l), p.h);
    }
  });
}

struct JumpOperator {
  double rate;
  RealOperator op;
};

// Dephasing sz_l at rate gamma_z and decay s-_l (|up> -> |down>) at rate
// gamma_m, for every site. Zero-rate channels are omitted.
inline std::vector<JumpOperator> jump_operators(const SpinBasis& basis, double gamma_z,
                                                double gamma_m) {
  if (!basis.is_full()) throw ConfigError("jump operators break parity; use the full basis");
  if (!(gamma_z >= 0.0) || !(gamma_m >= 0.0) || !std::isfinite(gamma_z) ||
      !std::isfinite(gamma_m)) {
    throw ConfigError("jump rates must be finite and non-negative");
  }
  std::vector<JumpOperator> out;
  const int n = basis.n_sites();
  if (gamma_z > 0.0) {
    for (int l = 0; l < n; ++l) {
      out.push_back({gamma_z, build_operator<double>(basis, OperatorParity::Odd, true,
                                                     [&](Label s, auto&& emit) {
                                                       emit(s, action::is_down(s, l) ? -1.0 : 1.0);
                                                     })});
    }
  }
  if (gamma_m > 0.0) {
    for (int l = 0; l < n; ++l) {
      out.push_back({gamma_m, build_operator<double>(basis, OperatorParity::Indefinite, false,
                                                     [&](Label s, auto&& emit) {
                                                       if (!action::is_down(s, l)) {
                                                         emit(s | (Label{1} << l), 1.0);
                                                       }
                                                     })});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dense spectra
// ---------------------------------------------------------------------------

inline constexpr std::size_t kDefaultDenseCap = std::size_t{1} << 14;

template <class Scalar>
struct EigenSystem {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  SpinBasis basis;
  RVector energies;  // ascending
  Matrix vectors;    // column n is |phi_n>

  std::size_t dimension() const { return static_cast<std::size_t>(energies.size()); }
};

template <class Scalar>
EigenSystem<Scalar> dense_eigensystem(const SparseOperator<Scalar>& H,
                                      std::size_t dense_cap = kDefaultDenseCap) {
  if (H.dimension() > dense_cap) {
    throw ResourceCapError("dense eigensolve of dimension " + std::to_string(H.dimension()) +
                           " exceeds cap " + std::to_string(dense_cap));
  }
  if (!H.hermitian()) throw ConfigError("dense_eigensystem needs a Hermitian operator");
  using Matrix = typename EigenSystem<Scalar>::Matrix;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(H.to_dense());
  if (solver.info() != Eigen::Success) {
    throw NumericalError("Hermitian eigensolver failed to converge");
  }
  return {H.basis(), solver.eigenvalues(), solver.eigenvectors()};
}

}  // namespace dqpt

#endif  // DQPT_MODEL_HPP
