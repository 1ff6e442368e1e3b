#ifndef DQPT_TESTS_ORACLES_HPP
#define DQPT_TESTS_ORACLES_HPP

// Independent dense references built from Kronecker products. Site 0 is the
// least significant bit, |up> = bit 0, matching the library's labels; nothing
// here calls the sparse builders.

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <complex>
#include <random>

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline Mat sx() { Mat m(2, 2); m << 0, 1, 1, 0; return m; }
inline Mat sy() { Mat m(2, 2); m << 0, cplx(0, -1), cplx(0, 1), 0; return m; }
inline Mat sz() { Mat m(2, 2); m << 1, 0, 0, -1; return m; }
// sigma^-: |up> -> |down>, i.e. index 0 -> index 1.
inline Mat sminus() { Mat m(2, 2); m << 0, 0, 1, 0; return m; }

// Operator o on `site` of an n-site chain. Kronecker order puts the last
// factor on the least significant bit, so site n-1 goes first.
inline Mat site_op(const Mat& o, int site, int n) {
  Mat out = Mat::Identity(1, 1);
  for (int l = n - 1; l >= 0; --l) {
    const Mat f = (l == site) ? o : Mat::Identity(2, 2);
    Mat next = Eigen::kroneckerProduct(out, f).eval();
    out = next;
  }
  return out;
}

inline Mat hamiltonian(int n, double J, double Jp, double h) {
  const auto d = 1 << n;
  Mat H = Mat::Zero(d, d);
  for (int l = 0; l < n; ++l) {
    H -= J * site_op(sz(), l, n) * site_op(sz(), (l + 1) % n, n);
    if (Jp != 0.0) H -= Jp * site_op(sz(), l, n) * site_op(sz(), (l + 2) % n, n);
    H += h * site_op(sx(), l, n);
  }
  return H;
}

inline Mat collective(const Mat& o, int n) {
  const auto d = 1 << n;
  Mat S = Mat::Zero(d, d);
  for (int l = 0; l < n; ++l) S += 0.5 * site_op(o, l, n);
  return S;
}

inline Mat collective_along(double nx, double ny, double nz, int n) {
  return nx * collective(sx(), n) + ny * collective(sy(), n) + nz * collective(sz(), n);
}

// prod_l (|up> - |down>)/sqrt2
inline Vec initial_state(int n) {
  Vec one(2);
  one << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  Vec out = Vec::Ones(1);
  for (int l = 0; l < n; ++l) {
    Vec next = Eigen::kroneckerProduct(out, one).eval();
    out = next;
  }
  return out;
}

inline double variance(const Mat& S, const Vec& psi) {
  const cplx m1 = psi.dot(S * psi);
  const cplx m2 = psi.dot(S * (S * psi));
  return (m2 - m1 * m1).real();
}

inline Vec evolve(const Mat& H, const Vec& psi, double t) {
  const Mat U = (cplx(0, -t) * H).exp();
  return U * psi;
}

// Braunstein-Caves sum, written independently of the library.
inline double mixed_qfi(const Mat& rho, const Mat& S) {
  Eigen::SelfAdjointEigenSolver<Mat> es(rho);
  const Eigen::VectorXd p = es.eigenvalues();
  const Mat A = es.eigenvectors().adjoint() * S * es.eigenvectors();
  double F = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    for (Eigen::Index l = 0; l < p.size(); ++l) {
      const double s = p[k] + p[l];
      if (s > 1e-12) F += 2.0 * (p[k] - p[l]) * (p[k] - p[l]) / s * std::norm(A(k, l));
    }
  }
  return F;
}

// Lindblad generator as a dense superoperator on row-major vec(rho):
// vec(A X B) = (A kron B^T) vec(X).
inline Mat liouvillian(const Mat& H, const std::vector<std::pair<double, Mat>>& jumps) {
  const auto d = H.rows();
  const Mat I = Mat::Identity(d, d);
  Mat L = cplx(0, -1) * (Eigen::kroneckerProduct(H, I).eval() -
                         Eigen::kroneckerProduct(I, H.transpose()).eval());
  for (const auto& [g, op] : jumps) {
    const Mat LdL = op.adjoint() * op;
    L += g * (Eigen::kroneckerProduct(op, op.conjugate()).eval() -
              0.5 * Eigen::kroneckerProduct(LdL, I).eval() -
              0.5 * Eigen::kroneckerProduct(I, LdL.transpose()).eval());
  }
  return L;
}

inline Mat evolve_rho(const Mat& liou, const Mat& rho0, double t) {
  const auto d = rho0.rows();
  Vec v(d * d);
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = 0; b < d; ++b) v[a * d + b] = rho0(a, b);
  }
  const Vec w = (t * liou).exp() * v;
  Mat out(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = 0; b < d; ++b) out(a, b) = w[a * d + b];
  }
  return out;
}

inline Vec random_state(std::mt19937_64& rng, Eigen::Index dim) {
  std::normal_distribution<double> g;
  Vec v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = cplx(g(rng), g(rng));
  return v / v.norm();
}

inline Mat random_density(std::mt19937_64& rng, Eigen::Index dim) {
  std::normal_distribution<double> g;
  Mat a(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) a(i, j) = cplx(g(rng), g(rng));
  }
  Mat rho = a * a.adjoint();
  return rho / rho.trace().real();
}

// Spin coherent state |theta, phi> = prod_l (cos(theta/2)|up> + e^{i phi} sin(theta/2)|down>).
inline Vec coherent_state(int n, double theta, double phi) {
  Vec one(2);
  one << std::cos(theta / 2), std::exp(cplx(0, phi)) * std::sin(theta / 2);
  Vec out = Vec::Ones(1);
  for (int l = 0; l < n; ++l) {
    Vec next = Eigen::kroneckerProduct(out, one).eval();
    out = next;
  }
  return out;
}

}  // namespace oracle

#endif  // DQPT_TESTS_ORACLES_HPP
