#ifndef DQPT_OBSERVABLES_HPP
#define DQPT_OBSERVABLES_HPP

// Quantum Fisher information (pure, mixed, optimal direction), entanglement
// depth certificates, Loschmidt echo / rate function, the diagonal and
// off-diagonal split of F_Q[S_z] in the post-quench eigenbasis, and Husimi
// distributions over spin coherent states.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "dqpt/dynamics.hpp"
#include "dqpt/errors.hpp"
#include "dqpt/model.hpp"
#include "dqpt/spin_core.hpp"

namespace dqpt {

struct QfiSample {
  double t = 0.0;
  BlochDirection direction = BlochDirection::z();
  double F_Q = 0.0;
  double f_Q = 0.0;  // F_Q / N

  // Quantum Cramer-Rao bound on the phase uncertainty, 1/sqrt(F_Q).
  double delta_phi() const {
    return F_Q > 0.0 ? 1.0 / std::sqrt(F_Q) : std::numeric_limits<double>::infinity();
  }
};

inline QfiSample make_qfi_sample(double F, int n_sites, const BlochDirection& dir, double t) {
  QfiSample s;
  s.t = t;
  s.direction = dir;
  s.F_Q = std::max(F, 0.0);
  s.f_Q = s.F_Q / n_sites;
  return s;
}

inline void require_normalized(const StateVector& psi, const char* where) {
  const double dev = std::abs(psi.norm() - 1.0);
  if (dev > 1e-8) {
    throw ConfigError(std::string(where) + ": state is not normalized (|norm - 1| = " +
                      std::to_string(dev) + ")");
  }
}

// <S_z^2> from the diagonal form valid in full and sector bases.
inline double sz_squared_expectation(const StateVector& psi) {
  const RVector d = sz_squared_diagonal(psi.basis());
  return (psi.amplitudes().cwiseAbs2().array() * d.array()).sum();
}

// F_Q[S_n] = 4 (<S_n^2> - <S_n>^2) for a pure state.
inline QfiSample qfi_pure(const StateVector& psi, const BlochDirection& dir, double t = 0.0) {
  require_normalized(psi, "qfi_pure");
  const int n = psi.basis().n_sites();
  if (!psi.basis().is_full() && dir.is_axis(Axis::Z)) {
    // <S_z> vanishes inside a parity sector.
    return make_qfi_sample(4.0 * sz_squared_expectation(psi), n, dir, t);
  }
  const StateVector full = embed_full(psi);
  const CVector& x = full.amplitudes();
  CVector sn = CVector::Zero(x.size());
  CVector tmp;
  const std::array<Axis, 3> axes{Axis::X, Axis::Y, Axis::Z};
  for (std::size_t a = 0; a < 3; ++a) {
    const double w = dir.components()[a];
    if (w == 0.0) continue;
    apply_collective_full(n, axes[a], x, tmp);
    sn += w * tmp;
  }
  const double mean = x.dot(sn).real();
  return make_qfi_sample(4.0 * (sn.squaredNorm() - mean * mean), n, dir, t);
}

// Gamma_ab = 1/2 <{S_a, S_b}> - <S_a><S_b>, a, b in {x, y, z}.
inline Eigen::Matrix3d covariance_matrix(const StateVector& psi) {
  require_normalized(psi, "covariance_matrix");
  const int n = psi.basis().n_sites();
  const StateVector full = embed_full(psi);
  const CVector& x = full.amplitudes();
  std::array<CVector, 3> v;
  apply_collective_full(n, Axis::X, x, v[0]);
  apply_collective_full(n, Axis::Y, x, v[1]);
  apply_collective_full(n, Axis::Z, x, v[2]);
  Eigen::Vector3d mean;
  for (int a = 0; a < 3; ++a) mean[a] = x.dot(v[a]).real();
  Eigen::Matrix3d g;
  for (int a = 0; a < 3; ++a) {
    for (int b = a; b < 3; ++b) {
      g(a, b) = v[a].dot(v[b]).real() - mean[a] * mean[b];
      g(b, a) = g(a, b);
    }
  }
  return g;
}

struct OptimalQfi {
  BlochDirection direction = BlochDirection::z();
  QfiSample sample;
  bool degenerate = false;  // top eigenvalue of the quadratic form is degenerate
};

// Maximizer of n^T M n over unit n, sign fixed by n_z >= 0 (then n_y, n_x).
inline OptimalQfi maximize_quadratic_form(const Eigen::Matrix3d& m, int n_sites, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
  Eigen::Vector3d v = es.eigenvectors().col(2);
  const double top = es.eigenvalues()[2];
  const double second = es.eigenvalues()[1];
  constexpr double kTie = 1e-12;
  for (int a = 2; a >= 0; --a) {
    if (std::abs(v[a]) > kTie) {
      if (v[a] < 0) v = -v;
      break;
    }
  }
  OptimalQfi out;
  out.direction = BlochDirection::normalized(v[0], v[1], v[2]);
  out.sample = make_qfi_sample(top, n_sites, out.direction, t);
  out.degenerate = (top - second) <= 1e-9 * std::max(1.0, std::abs(top));
  return out;
}

// For pure states F_Q[S_n] = 4 n^T Gamma n, so the optimum is 4 lambda_max.
inline OptimalQfi qfi_optimal(const StateVector& psi, double t = 0.0) {
  return maximize_quadratic_form(4.0 * covariance_matrix(psi), psi.basis().n_sites(), t);
}

// ---------------------------------------------------------------------------
// Mixed states
// ---------------------------------------------------------------------------

// Eigendecomposition of rho shared by every mixed-state QFI query:
//   F_Q[S_n] = 2 sum_{k,l: p_k + p_l > eps} (p_k - p_l)^2 / (p_k + p_l) |<k|S_n|l>|^2.
// Eigenvalues below zero (integration noise above the positivity floor) enter
// the weights as zero.
class MixedQfi {
 public:
  static constexpr double kEpsilon = 1e-12;

  explicit MixedQfi(const DensityMatrix& rho, double positivity_floor = -1e-6)
      : basis_(rho.basis()) {
    if (!basis_.is_full()) throw ConfigError("mixed-state QFI expects a full-basis density matrix");
    if (!rho.matrix().allFinite()) throw NumericalError("density matrix has non-finite entries");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.matrix());
    if (es.info() != Eigen::Success) throw NumericalError("density matrix eigensolve failed");
    p_ = es.eigenvalues();
    v_ = es.eigenvectors();
    if (p_[0] < positivity_floor) {
      throw NumericalError("density matrix is not positive: smallest eigenvalue " +
                           std::to_string(p_[0]));
    }
    const auto dim = p_.size();
    weights_.resize(dim, dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
      for (Eigen::Index l = 0; l < dim; ++l) {
        const double pk = std::max(p_[k], 0.0);
        const double pl = std::max(p_[l], 0.0);
        const double s = pk + pl;
        weights_(k, l) = s > kEpsilon ? 2.0 * (pk - pl) * (pk - pl) / s : 0.0;
      }
    }
  }

  double min_eigenvalue() const { return p_[0]; }
  const RVector& eigenvalues() const { return p_; }

  QfiSample qfi(const BlochDirection& dir, double t = 0.0) const {
    const Eigen::MatrixXcd m = generator_in_eigenbasis(dir);
    const double F = (weights_.array() * m.cwiseAbs2().array()).sum();
    return make_qfi_sample(F, basis_.n_sites(), dir, t);
  }

  // M_ab = 2 sum w_kl Re[<k|S_a|l><l|S_b|k>], so F_Q[S_n] = n^T M n.
  Eigen::Matrix3d qfi_matrix() const {
    std::array<Eigen::MatrixXcd, 3> m{generator_in_eigenbasis(BlochDirection::x()),
                                      generator_in_eigenbasis(BlochDirection::y()),
                                      generator_in_eigenbasis(BlochDirection::z())};
    Eigen::Matrix3d out;
    for (int a = 0; a < 3; ++a) {
      for (int b = a; b < 3; ++b) {
        // <l|S_b|k> = conj(<k|S_b|l>) for Hermitian S_b.
        out(a, b) = (weights_.array() * (m[a].array() * m[b].array().conjugate()).real()).sum();
        out(b, a) = out(a, b);
      }
    }
    return out;
  }

  OptimalQfi optimal(double t = 0.0) const {
    return maximize_quadratic_form(qfi_matrix(), basis_.n_sites(), t);
  }

 private:
  Eigen::MatrixXcd generator_in_eigenbasis(const BlochDirection& dir) const {
    const int n = basis_.n_sites();
    const auto dim = v_.rows();
    Eigen::MatrixXcd sv = Eigen::MatrixXcd::Zero(dim, dim);
    CVector col, tmp;
    const std::array<Axis, 3> axes{Axis::X, Axis::Y, Axis::Z};
    for (Eigen::Index c = 0; c < dim; ++c) {
      col = v_.col(c);
      for (std::size_t a = 0; a < 3; ++a) {
        const double w = dir.components()[a];
        if (w == 0.0) continue;
        apply_collective_full(n, axes[a], col, tmp);
        sv.col(c) += w * tmp;
      }
    }
    return v_.adjoint() * sv;
  }

  SpinBasis basis_;
  RVector p_;
  Eigen::MatrixXcd v_;
  Eigen::MatrixXd weights_;
};

inline QfiSample qfi_mixed(const DensityMatrix& rho, const BlochDirection& dir, double t = 0.0) {
  return MixedQfi(rho).qfi(dir, t);
}

// ---------------------------------------------------------------------------
// Loschmidt echo and rate function
// ---------------------------------------------------------------------------

struct LoschmidtSample {
  double echo = 1.0;  // Z(t) = |<psi0|psi(t)>|^2
  double rate = 0.0;  // -(1/N) ln Z(t)
  bool underflow = false;
};

inline constexpr double kEchoFloor = 1e-300;

inline LoschmidtSample rate_function(const StateVector& psi0, const StateVector& psi_t, int n_sites) {
  require_same_basis(psi0.basis(), psi_t.basis(), "rate_function");
  require_normalized(psi0, "rate_function");
  require_normalized(psi_t, "rate_function");
  if (n_sites < 1) throw ConfigError("rate_function needs N >= 1");
  LoschmidtSample s;
  s.echo = std::norm(inner(psi0, psi_t));
  if (s.echo < kEchoFloor) {
    s.underflow = true;
    s.rate = std::numeric_limits<double>::infinity();
    return s;
  }
  s.rate = std::max(0.0, -std::log(s.echo) / n_sites);
  return s;
}

// ---------------------------------------------------------------------------
// Diagonal / off-diagonal decomposition of f_Q[S_z]
// ---------------------------------------------------------------------------

struct QfiDecomposition {
  double f_diag = 0.0;
  std::vector<double> times;
  std::vector<double> f_offdiag;

  double total(std::size_t k) const { return f_diag + f_offdiag.at(k); }
};

// With <S_z> = 0 in a parity-definite state,
//   f_Q = (4/N) sum_{m,n} C_m^* C_n e^{-i w_mn t} [S_z^2]_mn,  w_mn = E_n - E_m,
// whose m = n terms form the time-independent part.
template <class Scalar>
class SzSquaredSpectral {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  SzSquaredSpectral(const EigenSystem<Scalar>& eig, const CVector& coeffs)
      : eig_(eig), c_(coeffs) {
    if (static_cast<std::size_t>(coeffs.size()) != eig.dimension()) {
      throw ConfigError("qfi_decomposition: coefficient vector has the wrong length");
    }
    if (eig.basis.is_full() && std::abs(initial_sz_mean()) > 1e-8) {
      throw ConfigError("qfi_decomposition needs a parity-definite state (<S_z> != 0)");
    }
    const RVector d = sz_squared_diagonal(eig.basis);
    a_ = eig.vectors.adjoint() * (d.template cast<Scalar>().asDiagonal() * eig.vectors);
    scale_ = 4.0 / eig.basis.n_sites();
    f_diag_ = 0.0;
    for (Eigen::Index n = 0; n < c_.size(); ++n) f_diag_ += std::norm(c_[n]) * std::real(a_(n, n));
    f_diag_ *= scale_;
    off_ = a_;
    off_.diagonal().setZero();
  }

  double f_diag() const { return f_diag_; }

  double f_offdiag(double t) const {
    CVector a(c_.size());
    for (Eigen::Index n = 0; n < c_.size(); ++n) a[n] = c_[n] * std::exp(-kI * eig_.energies[n] * t);
    const CVector oa = off_.template cast<cplx>() * a;
    return scale_ * a.dot(oa).real();
  }

 private:
  double initial_sz_mean() const {
    // Full-basis inputs must still be parity-definite.
    const StateVector psi(eig_.basis, eig_.vectors.template cast<cplx>() * c_);
    CVector sz;
    apply_collective_full(eig_.basis.n_sites(), Axis::Z, psi.amplitudes(), sz);
    return psi.amplitudes().dot(sz).real();
  }

  const EigenSystem<Scalar>& eig_;
  CVector c_;
  Matrix a_;
  Matrix off_;
  double scale_ = 0.0;
  double f_diag_ = 0.0;
};

template <class Scalar>
QfiDecomposition qfi_decomposition(const EigenSystem<Scalar>& eig, const CVector& coeffs,
                                   const std::vector<double>& t_grid,
                                   std::size_t dense_cap = kDefaultDenseCap) {
  if (eig.dimension() > dense_cap) throw ResourceCapError("qfi_decomposition exceeds dense cap");
  const SzSquaredSpectral<Scalar> split(eig, coeffs);
  QfiDecomposition out;
  out.f_diag = split.f_diag();
  out.times = t_grid;
  out.f_offdiag.reserve(t_grid.size());
  for (double t : t_grid) out.f_offdiag.push_back(split.f_offdiag(t));
  return out;
}

// ---------------------------------------------------------------------------
// Husimi distribution
// ---------------------------------------------------------------------------

struct HusimiGrid {
  int n_sites = 0;
  std::vector<double> theta;  // [0, pi], endpoints included
  std::vector<double> phi;    // [0, 2 pi), uniform
  Eigen::MatrixXd values;     // values(i, j) = Q_H(theta_i, phi_j)

  // Clenshaw-Curtis in cos(theta) (the uniform theta nodes are its nodes)
  // times the periodic rule in phi. Exact for the sphere integral once
  // n_theta > N and n_phi > N, since the phi-averaged Q_H is a degree-N
  // polynomial in cos(theta).
  Eigen::MatrixXd quadrature_weights() const {
    const auto nt = static_cast<Eigen::Index>(theta.size());
    const auto np = static_cast<Eigen::Index>(phi.size());
    const auto n = nt - 1;
    const double dphi = 2.0 * std::numbers::pi / static_cast<double>(np);
    Eigen::MatrixXd w(nt, np);
    for (Eigen::Index i = 0; i < nt; ++i) {
      double acc = 1.0;
      for (Eigen::Index j = 1; 2 * j <= n; ++j) {
        const double b = (2 * j == n) ? 1.0 : 2.0;
        acc -= b / static_cast<double>(4 * j * j - 1) *
               std::cos(2.0 * std::numbers::pi * static_cast<double>(j * i) / static_cast<double>(n));
      }
      const double c = (i == 0 || i == n) ? 1.0 : 2.0;
      w.row(i).setConstant(c / static_cast<double>(n) * acc * dphi);
    }
    return w;
  }

  double integral() const { return (quadrature_weights().array() * values.array()).sum(); }

  // Share of the integrated weight within `cap` of either pole.
  double polar_cap_mass(double cap = std::numbers::pi / 6.0) const {
    const Eigen::MatrixXd w = quadrature_weights();
    double inside = 0.0;
    double total = 0.0;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      const double row = (w.row(i).array() * values.row(i).array()).sum();
      total += row;
      if (theta[i] < cap || theta[i] > std::numbers::pi - cap) inside += row;
    }
    return total > 0.0 ? inside / total : 0.0;
  }
};

// A_k = sum over labels with k down spins of psi_s. Coherent-state overlaps
// only see these sums.
inline CVector dicke_sums(const StateVector& psi) {
  const SpinBasis& b = psi.basis();
  const int n = b.n_sites();
  CVector a = CVector::Zero(n + 1);
  if (b.is_full()) {
    for (std::size_t j = 0; j < b.dimension(); ++j) a[popcount(b.label(j))] += psi[j];
  } else {
    const double r = 1.0 / std::sqrt(2.0);
    const double p = b.parity();
    for (std::size_t j = 0; j < b.dimension(); ++j) {
      const int k = popcount(b.label(j));
      a[k] += r * psi[j];
      a[n - k] += p * r * psi[j];
    }
  }
  return a;
}

// Weight of psi in the permutation-symmetric subspace; equals the exact
// sphere integral of Q_H.
inline double symmetric_weight(const StateVector& psi) {
  const CVector a = dicke_sums(psi);
  const int n = psi.basis().n_sites();
  double w = 0.0;
  double binom = 1.0;
  for (int k = 0; k <= n; ++k) {
    w += std::norm(a[k]) / binom;
    binom = binom * (n - k) / (k + 1);
  }
  return w;
}

// <psi|theta,phi> with |theta,phi> = prod_l (cos(theta/2)|up> + e^{i phi} sin(theta/2)|down>).
inline cplx coherent_overlap(const CVector& dicke, int n_sites, double theta, double phi) {
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  cplx acc{0.0, 0.0};
  for (int k = 0; k <= n_sites; ++k) {
    const double mag = std::pow(c, n_sites - k) * std::pow(s, k);
    acc += std::conj(dicke[k]) * mag * std::exp(kI * (k * phi));
  }
  return acc;
}

struct HusimiLimits {
  std::size_t max_grid_points = std::size_t{1} << 22;
};

inline HusimiGrid husimi(const StateVector& psi, int n_theta, int n_phi,
                         const HusimiLimits& limits = {}) {
  require_normalized(psi, "husimi");
  if (n_theta < 2 || n_phi < 2) throw ConfigError("Husimi grid needs at least 2 x 2 nodes");
  const auto points = static_cast<std::size_t>(n_theta) * static_cast<std::size_t>(n_phi);
  if (points > limits.max_grid_points) {
    throw ResourceCapError("Husimi grid of " + std::to_string(points) + " points exceeds cap " +
                           std::to_string(limits.max_grid_points));
  }
  const int n = psi.basis().n_sites();
  const CVector dicke = dicke_sums(psi);
  HusimiGrid g;
  g.n_sites = n;
  g.theta.resize(static_cast<std::size_t>(n_theta));
  g.phi.resize(static_cast<std::size_t>(n_phi));
  for (int i = 0; i < n_theta; ++i) g.theta[i] = std::numbers::pi * i / (n_theta - 1);
  for (int j = 0; j < n_phi; ++j) g.phi[j] = 2.0 * std::numbers::pi * j / n_phi;
  g.values.resize(n_theta, n_phi);
  const double norm = (n + 1) / (4.0 * std::numbers::pi);
#pragma omp parallel for collapse(2) schedule(static)
  for (int i = 0; i < n_theta; ++i) {
    for (int j = 0; j < n_phi; ++j) {
      g.values(i, j) = norm * std::norm(coherent_overlap(dicke, n, g.theta[i], g.phi[j]));
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Entanglement depth
// ---------------------------------------------------------------------------

enum class DepthConvention { ProducibilityBound, SimpleLinear };

inline const char* to_string(DepthConvention c) {
  return c == DepthConvention::ProducibilityBound ? "producibility_bound" : "simple_linear";
}

struct EntanglementCertificate {
  double f_Q = 0.0;
  int n_sites = 0;
  int depth = 1;
  DepthConvention convention = DepthConvention::ProducibilityBound;
};

// Relative margin a bound must be exceeded by; keeps round-off at exactly
// saturated bounds (product states, GHZ) from certifying extra depth.
inline constexpr double kDepthSlack = 1e-9;

// ProducibilityBound: a k-producible state obeys F_Q <= s k^2 + r^2 with
// N = s k + r, so exceeding the bound for k certifies depth k + 1.
// SimpleLinear: depth 1 + floor(f_Q) once f_Q > 1.
inline EntanglementCertificate entanglement_depth(double f_Q, int n_sites, DepthConvention convention) {
  if (!(f_Q >= 0.0) || !std::isfinite(f_Q)) throw ConfigError("f_Q must be finite and >= 0");
  if (n_sites < 1) throw ConfigError("entanglement_depth needs N >= 1");
  int depth = 1;
  if (convention == DepthConvention::ProducibilityBound) {
    const double F = n_sites * f_Q;
    int best = 0;
    for (int k = 1; k <= n_sites; ++k) {
      const int s = n_sites / k;
      const int r = n_sites - s * k;
      const double bound = static_cast<double>(s) * k * k + static_cast<double>(r) * r;
      if (F > bound * (1.0 + kDepthSlack)) best = k;
    }
    depth = 1 + best;
  } else {
    depth = f_Q > 1.0 + kDepthSlack ? 1 + static_cast<int>(std::floor(f_Q)) : 1;
  }
  depth = std::clamp(depth, 1, n_sites);
  return {f_Q, n_sites, depth, convention};
}

}  // namespace dqpt

#endif  // DQPT_OBSERVABLES_HPP
