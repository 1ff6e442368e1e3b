#ifndef DQPT_SPIN_CORE_HPP
#define DQPT_SPIN_CORE_HPP

// Computational basis, Pauli and collective spin operators, parity sectors,
// and the sparse/state algebra kernels shared by every other module.
//
// Bit convention: bit l of a basis label is site l; bit value 0 is |up>
// (sigma^z = +1) and bit value 1 is |down>.
//
// Parity sectors use the spin-flip P = prod_l sigma^x_l. Each orbit {s, ~s}
// is represented by the member with the top bit (site N-1) cleared, which is
// also the numerically smaller label. The +1 sector holds (|s> + |~s>)/sqrt2,
// the -1 sector (|s> - |~s>)/sqrt2, so both sectors have dimension 2^(N-1)
// and the representative label doubles as the sector index.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "dqpt/errors.hpp"

namespace dqpt {

using cplx = std::complex<double>;
using Label = std::uint64_t;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

enum class Axis { X, Y, Z };

inline int popcount(Label s) { return std::popcount(s); }

// ---------------------------------------------------------------------------
// Sector
// ---------------------------------------------------------------------------

struct Sector {
  enum class Kind { Full, Parity };

  Kind kind = Kind::Full;
  int parity = 0;  // +1 / -1 for Kind::Parity, 0 for Kind::Full

  static Sector full() { return {Kind::Full, 0}; }
  static Sector with_parity(int p) {
    if (p != 1 && p != -1) {
      throw ConfigError("parity sector must be +1 or -1, got " + std::to_string(p));
    }
    return {Kind::Parity, p};
  }

  bool is_full() const { return kind == Kind::Full; }

  friend bool operator==(const Sector&, const Sector&) = default;
};

inline std::string to_string(const Sector& s) {
  if (s.is_full()) return "full";
  return s.parity > 0 ? "parity+1" : "parity-1";
}

struct BasisLimits {
  int max_sites_full = 24;
  int max_sites_sector = 24;
};

// ---------------------------------------------------------------------------
// SpinBasis
// ---------------------------------------------------------------------------

class SpinBasis {
 public:
  // Where a computational label |s> lands in this basis. For sector bases
  // `sign` is the coefficient relating |s> to the representative term:
  // +1 when s is the representative, the sector parity when s is its flip.
  struct Image {
    std::size_t index;
    double sign;
  };

  SpinBasis(int n_sites, Sector sector, const BasisLimits& limits = {})
      : n_sites_(n_sites), sector_(sector) {
    const int cap = sector.is_full() ? limits.max_sites_full : limits.max_sites_sector;
    if (n_sites < 1 || n_sites > cap) {
      throw ConfigError("number of sites must be in [1, " + std::to_string(cap) +
                        "], got " + std::to_string(n_sites));
    }
    if (!sector.is_full() && sector.parity != 1 && sector.parity != -1) {
      throw ConfigError("invalid parity sector");
    }
    mask_ = (Label{1} << n_sites) - 1;
    top_bit_ = Label{1} << (n_sites - 1);
  }

  int n_sites() const { return n_sites_; }
  const Sector& sector() const { return sector_; }
  bool is_full() const { return sector_.is_full(); }
  int parity() const { return sector_.parity; }

  std::size_t dimension() const {
    return is_full() ? std::size_t{1} << n_sites_ : std::size_t{1} << (n_sites_ - 1);
  }

  Label flip_mask() const { return mask_; }

  // Label of the basis element at `index` (the representative for sectors).
  Label label(std::size_t index) const { return static_cast<Label>(index); }

  bool is_representative(Label s) const { return is_full() || (s & top_bit_) == 0; }

  // Bijection label -> index, restricted to representatives for sectors.
  std::optional<std::size_t> index_of(Label s) const {
    if (s > mask_ || !is_representative(s)) return std::nullopt;
    return static_cast<std::size_t>(s);
  }

  Image locate(Label s) const {
    if (is_full() || (s & top_bit_) == 0) return {static_cast<std::size_t>(s), 1.0};
    return {static_cast<std::size_t>(s ^ mask_), static_cast<double>(sector_.parity)};
  }

  std::vector<Label> labels() const {
    std::vector<Label> out(dimension());
    std::iota(out.begin(), out.end(), Label{0});
    return out;
  }

  friend bool operator==(const SpinBasis& a, const SpinBasis& b) {
    return a.n_sites_ == b.n_sites_ && a.sector_ == b.sector_;
  }

 private:
  int n_sites_;
  Sector sector_;
  Label mask_ = 0;
  Label top_bit_ = 0;
};

inline SpinBasis build_basis(int n_sites, Sector sector, const BasisLimits& limits = {}) {
  return SpinBasis(n_sites, sector, limits);
}

// Sector containing the fully x-polarized product state: P eigenvalue (-1)^N.
inline Sector initial_state_sector(int n_sites) {
  return Sector::with_parity(n_sites % 2 == 0 ? 1 : -1);
}

// ---------------------------------------------------------------------------
// BlochDirection
// ---------------------------------------------------------------------------

class BlochDirection {
 public:
  BlochDirection(double nx, double ny, double nz) : n_{nx, ny, nz} {
    const double norm = std::sqrt(nx * nx + ny * ny + nz * nz);
    if (!std::isfinite(norm) || std::abs(norm - 1.0) > 1e-12) {
      throw ConfigError("Bloch direction must have unit norm");
    }
  }

  static BlochDirection normalized(double nx, double ny, double nz) {
    const double norm = std::sqrt(nx * nx + ny * ny + nz * nz);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw ConfigError("cannot normalize a zero or non-finite direction");
    }
    return {nx / norm, ny / norm, nz / norm};
  }

  static BlochDirection from_angles(double theta, double phi) {
    return normalized(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                      std::cos(theta));
  }

  static BlochDirection along(Axis a) {
    switch (a) {
      case Axis::X: return {1.0, 0.0, 0.0};
      case Axis::Y: return {0.0, 1.0, 0.0};
      case Axis::Z: break;
    }
    return {0.0, 0.0, 1.0};
  }
  static BlochDirection x() { return along(Axis::X); }
  static BlochDirection y() { return along(Axis::Y); }
  static BlochDirection z() { return along(Axis::Z); }

  double nx() const { return n_[0]; }
  double ny() const { return n_[1]; }
  double nz() const { return n_[2]; }
  const std::array<double, 3>& components() const { return n_; }
  Eigen::Vector3d vector() const { return {n_[0], n_[1], n_[2]}; }

  bool is_axis(Axis a) const {
    const auto ref = along(a).components();
    return n_ == ref;
  }

 private:
  std::array<double, 3> n_;
};

// ---------------------------------------------------------------------------
// SparseOperator
// ---------------------------------------------------------------------------

enum class OperatorParity { Even, Odd, Indefinite };

template <class Scalar>
class SparseOperator {
 public:
  using scalar_type = Scalar;

  SparseOperator(SpinBasis basis, std::vector<std::size_t> row_ptr,
                 std::vector<std::uint32_t> cols, std::vector<Scalar> values, bool hermitian)
      : basis_(std::move(basis)),
        row_ptr_(std::move(row_ptr)),
        cols_(std::move(cols)),
        values_(std::move(values)),
        hermitian_(hermitian) {
    const std::size_t dim = basis_.dimension();
    if (row_ptr_.size() != dim + 1 || row_ptr_.back() != cols_.size() ||
        cols_.size() != values_.size()) {
      throw ConfigError("inconsistent sparse operator layout");
    }
    for (auto c : cols_) {
      if (c >= dim) throw ConfigError("sparse operator column index out of range");
    }
#ifndef NDEBUG
    if (hermitian_ && dim <= 4096 && hermitian_deviation() > 1e-12) {
      throw NumericalError("operator flagged Hermitian is not Hermitian");
    }
#endif
  }

  const SpinBasis& basis() const { return basis_; }
  std::size_t dimension() const { return basis_.dimension(); }
  std::size_t nonzeros() const { return values_.size(); }
  bool hermitian() const { return hermitian_; }

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::uint32_t>& cols() const { return cols_; }
  const std::vector<Scalar>& values() const { return values_; }

  // y = A x. Rows are independent, so the loop is data-parallel.
  template <class XVec, class YVec>
  void multiply(const XVec& x, YVec& y) const {
    const auto dim = static_cast<std::ptrdiff_t>(dimension());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < dim; ++r) {
      cplx acc{0.0, 0.0};
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        acc += values_[k] * x[cols_[k]];
      }
      y[r] = acc;
    }
  }

  Scalar coeff(std::size_t row, std::size_t col) const {
    for (std::size_t k = row_ptr_[row]; k < row_ptr_[row + 1]; ++k) {
      if (cols_[k] == col) return values_[k];
    }
    return Scalar{0};
  }

  // max |A - A^dagger| over stored entries.
  double hermitian_deviation() const {
    double dev = 0.0;
    for (std::size_t r = 0; r < dimension(); ++r) {
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        const Scalar mirror = coeff(cols_[k], r);
        dev = std::max(dev, std::abs(values_[k] - conj_scalar(mirror)));
      }
    }
    return dev;
  }

  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> to_dense() const {
    const auto dim = static_cast<Eigen::Index>(dimension());
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m =
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r) {
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) m(r, cols_[k]) += values_[k];
    }
    return m;
  }

  // Diagonal entries as a real vector (imaginary parts dropped).
  RVector diagonal_real() const {
    RVector d = RVector::Zero(static_cast<Eigen::Index>(dimension()));
    for (std::size_t r = 0; r < dimension(); ++r) d[r] = std::real(coeff(r, r));
    return d;
  }

  // Gershgorin bound on the spectral radius.
  double norm_bound() const {
    double best = 0.0;
    for (std::size_t r = 0; r < dimension(); ++r) {
      double row = 0.0;
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) row += std::abs(values_[k]);
      best = std::max(best, row);
    }
    return best;
  }

 private:
  static Scalar conj_scalar(const Scalar& v) {
    if constexpr (std::is_same_v<Scalar, cplx>) {
      return std::conj(v);
    } else {
      return v;
    }
  }

  SpinBasis basis_;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> cols_;
  std::vector<Scalar> values_;
  bool hermitian_;
};

using RealOperator = SparseOperator<double>;
using ComplexOperator = SparseOperator<cplx>;

namespace detail {

template <class Scalar>
struct Triplet {
  std::uint32_t row;
  std::uint32_t col;
  Scalar value;
};

// Sum duplicates, drop exact zeros, and lay out row-compressed.
template <class Scalar>
SparseOperator<Scalar> assemble(const SpinBasis& basis, std::vector<Triplet<Scalar>> triplets,
                                bool hermitian) {
  const std::size_t dim = basis.dimension();
  std::vector<std::size_t> counts(dim + 1, 0);
  for (const auto& t : triplets) ++counts[t.row + 1];
  std::partial_sum(counts.begin(), counts.end(), counts.begin());
  std::vector<std::uint32_t> cols(triplets.size());
  std::vector<Scalar> vals(triplets.size());
  {
    std::vector<std::size_t> fill(counts.begin(), counts.end() - 1);
    for (const auto& t : triplets) {
      const std::size_t pos = fill[t.row]++;
      cols[pos] = t.col;
      vals[pos] = t.value;
    }
  }
  triplets.clear();
  triplets.shrink_to_fit();

  std::vector<std::size_t> row_ptr(dim + 1, 0);
  std::size_t out = 0;
  std::vector<std::pair<std::uint32_t, Scalar>> row;
  for (std::size_t r = 0; r < dim; ++r) {
    row.clear();
    for (std::size_t k = counts[r]; k < counts[r + 1]; ++k) row.emplace_back(cols[k], vals[k]);
    std::sort(row.begin(), row.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 0; k < row.size();) {
      std::uint32_t c = row[k].first;
      Scalar acc{0};
      while (k < row.size() && row[k].first == c) acc += row[k++].second;
      if (acc != Scalar{0}) {
        cols[out] = c;
        vals[out] = acc;
        ++out;
      }
    }
    row_ptr[r + 1] = out;
  }
  cols.resize(out);
  vals.resize(out);
  cols.shrink_to_fit();
  vals.shrink_to_fit();
  return SparseOperator<Scalar>(basis, std::move(row_ptr), std::move(cols), std::move(vals),
                                hermitian);
}

}  // namespace detail

// Builds the matrix of a full-space action `act(s, emit)`, where
// emit(t, c) records the term c|t> of A|s>. In a parity sector the action must
// commute with P; then <r,p|A|s,p> = <r|A|s> + p <r|A|~s>, so each emitted
// |t> is folded onto its representative with sign 1 or p.
template <class Scalar, class Action>
SparseOperator<Scalar> build_operator(const SpinBasis& basis, OperatorParity parity,
                                      bool hermitian, Action&& act) {
  if (!basis.is_full() && parity != OperatorParity::Even) {
    throw ConfigError("parity-odd or parity-indefinite operator requested in a parity sector");
  }
  const std::size_t dim = basis.dimension();
  std::vector<detail::Triplet<Scalar>> triplets;
  triplets.reserve(dim * 2);
  for (std::size_t j = 0; j < dim; ++j) {
    const Label s = basis.label(j);
    act(s, [&](Label t, Scalar c) {
      const auto img = basis.locate(t);
      triplets.push_back({static_cast<std::uint32_t>(img.index), static_cast<std::uint32_t>(j),
                          c * static_cast<Scalar>(img.sign)});
    });
  }
  return detail::assemble(basis, std::move(triplets), hermitian);
}

// ---------------------------------------------------------------------------
// Pauli and collective spin actions on computational labels
// ---------------------------------------------------------------------------

namespace action {

inline bool is_down(Label s, int site) { return ((s >> site) & 1U) != 0; }

// sigma^axis_site |s>
template <class Emit>
void pauli(Label s, int site, Axis axis, cplx weight, Emit&& emit) {
  const Label bit = Label{1} << site;
  switch (axis) {
    case Axis::X: emit(s ^ bit, weight); break;
    case Axis::Y: emit(s ^ bit, weight * (is_down(s, site) ? -kI : kI)); break;
    case Axis::Z: emit(s, weight * (is_down(s, site) ? -1.0 : 1.0)); break;
  }
}

// S_n |s> = 1/2 sum_l (nx sx_l + ny sy_l + nz sz_l) |s>
template <class Emit>
void collective(Label s, int n_sites, const BlochDirection& d, Emit&& emit) {
  double sz = 0.0;
  for (int l = 0; l < n_sites; ++l) {
    const Label bit = Label{1} << l;
    const cplx amp = 0.5 * (d.nx() + d.ny() * (is_down(s, l) ? -kI : kI));
    if (amp != cplx{0.0}) emit(s ^ bit, amp);
    sz += is_down(s, l) ? -0.5 : 0.5;
  }
  if (d.nz() != 0.0) emit(s, cplx{d.nz() * sz});
}

}  // namespace action

inline ComplexOperator pauli_site(const SpinBasis& basis, int site, Axis axis) {
  if (site < 0 || site >= basis.n_sites()) {
    throw ConfigError("site " + std::to_string(site) + " out of range for N=" +
                      std::to_string(basis.n_sites()));
  }
  const auto parity = axis == Axis::X ? OperatorParity::Even : OperatorParity::Odd;
  return build_operator<cplx>(basis, parity, true, [&](Label s, auto&& emit) {
    action::pauli(s, site, axis, cplx{1.0}, emit);
  });
}

// P = prod_l sigma^x_l. In a sector this is p times the identity.
inline RealOperator parity_operator(const SpinBasis& basis) {
  const Label mask = basis.flip_mask();
  return build_operator<double>(basis, OperatorParity::Even, true,
                                [&](Label s, auto&& emit) { emit(s ^ mask, 1.0); });
}

inline OperatorParity collective_parity(const BlochDirection& d) {
  if (d.ny() == 0.0 && d.nz() == 0.0) return OperatorParity::Even;
  if (d.nx() == 0.0) return OperatorParity::Odd;
  return OperatorParity::Indefinite;
}

inline ComplexOperator collective_spin(const SpinBasis& basis, const BlochDirection& dir) {
  const int n = basis.n_sites();
  return build_operator<cplx>(basis, collective_parity(dir), true, [&](Label s, auto&& emit) {
    action::collective(s, n, dir, emit);
  });
}

// (S_n)^2. Parity-even whenever S_n is parity-definite.
inline ComplexOperator collective_spin_squared(const SpinBasis& basis, const BlochDirection& dir) {
  const int n = basis.n_sites();
  const auto p = collective_parity(dir);
  const auto parity = p == OperatorParity::Indefinite ? OperatorParity::Indefinite
                                                      : OperatorParity::Even;
  std::vector<std::pair<Label, cplx>> first;
  return build_operator<cplx>(basis, parity, true, [&](Label s, auto&& emit) {
    first.clear();
    action::collective(s, n, dir, [&](Label t, cplx c) { first.emplace_back(t, c); });
    for (const auto& [t, c] : first) {
      action::collective(t, n, dir, [&](Label u, cplx c2) { emit(u, c * c2); });
    }
  });
}

// A * B for operators on the same basis.
template <class Scalar>
SparseOperator<Scalar> compose(const SparseOperator<Scalar>& a, const SparseOperator<Scalar>& b) {
  if (!(a.basis() == b.basis())) throw ConfigError("compose: basis mismatch");
  std::vector<detail::Triplet<Scalar>> triplets;
  for (std::size_t r = 0; r < a.dimension(); ++r) {
    for (std::size_t k = a.row_ptr()[r]; k < a.row_ptr()[r + 1]; ++k) {
      const std::size_t mid = a.cols()[k];
      for (std::size_t q = b.row_ptr()[mid]; q < b.row_ptr()[mid + 1]; ++q) {
        triplets.push_back({static_cast<std::uint32_t>(r), b.cols()[q],
                            a.values()[k] * b.values()[q]});
      }
    }
  }
  return detail::assemble(a.basis(), std::move(triplets), false);
}

// A^dagger.
template <class Scalar>
SparseOperator<Scalar> adjoint(const SparseOperator<Scalar>& a) {
  std::vector<detail::Triplet<Scalar>> triplets;
  triplets.reserve(a.nonzeros());
  for (std::size_t r = 0; r < a.dimension(); ++r) {
    for (std::size_t k = a.row_ptr()[r]; k < a.row_ptr()[r + 1]; ++k) {
      Scalar v = a.values()[k];
      if constexpr (std::is_same_v<Scalar, cplx>) v = std::conj(v);
      triplets.push_back({a.cols()[k], static_cast<std::uint32_t>(r), v});
    }
  }
  return detail::assemble(a.basis(), std::move(triplets), a.hermitian());
}

// ---------------------------------------------------------------------------
// StateVector
// ---------------------------------------------------------------------------

class StateVector {
 public:
  StateVector(SpinBasis basis, CVector amplitudes)
      : basis_(std::move(basis)), amplitudes_(std::move(amplitudes)) {
    if (static_cast<std::size_t>(amplitudes_.size()) != basis_.dimension()) {
      throw ConfigError("state vector length does not match basis dimension");
    }
    if (!amplitudes_.allFinite()) throw NumericalError("state vector has non-finite amplitudes");
  }

  static StateVector zero(const SpinBasis& basis) {
    return {basis, CVector::Zero(static_cast<Eigen::Index>(basis.dimension()))};
  }

  // |s> in the full basis.
  static StateVector computational(const SpinBasis& basis, Label s) {
    if (!basis.is_full()) throw ConfigError("computational states require the full basis");
    if (s > basis.flip_mask()) throw ConfigError("label out of range");
    StateVector v = zero(basis);
    v.amplitudes_[static_cast<Eigen::Index>(s)] = 1.0;
    return v;
  }

  const SpinBasis& basis() const { return basis_; }
  std::size_t dimension() const { return basis_.dimension(); }
  const CVector& amplitudes() const { return amplitudes_; }
  CVector& amplitudes() { return amplitudes_; }
  cplx operator[](std::size_t i) const { return amplitudes_[static_cast<Eigen::Index>(i)]; }

  double norm() const { return amplitudes_.norm(); }

 private:
  SpinBasis basis_;
  CVector amplitudes_;
};

inline void require_same_basis(const SpinBasis& a, const SpinBasis& b, const char* where) {
  if (!(a == b)) throw ConfigError(std::string(where) + ": basis mismatch");
}

template <class Scalar>
StateVector apply(const SparseOperator<Scalar>& op, const StateVector& v) {
  require_same_basis(op.basis(), v.basis(), "apply");
  CVector out(static_cast<Eigen::Index>(v.dimension()));
  op.multiply(v.amplitudes(), out);
  return {v.basis(), std::move(out)};
}

inline cplx inner(const StateVector& a, const StateVector& b) {
  require_same_basis(a.basis(), b.basis(), "inner");
  return a.amplitudes().dot(b.amplitudes());  // conjugates the first argument
}

template <class Scalar>
cplx expectation(const SparseOperator<Scalar>& op, const StateVector& v) {
  return inner(v, apply(op, v));
}

// GHZ state (|up...up> + |down...down>)/sqrt2. It lies in the +1 sector.
inline StateVector ghz_state(const SpinBasis& basis) {
  StateVector v = StateVector::zero(basis);
  const double r = 1.0 / std::sqrt(2.0);
  if (basis.is_full()) {
    v.amplitudes()[0] = r;
    v.amplitudes()[static_cast<Eigen::Index>(basis.flip_mask())] = r;
  } else {
    if (basis.parity() != 1) throw ConfigError("GHZ state lies in the +1 parity sector");
    v.amplitudes()[0] = 1.0;
  }
  return v;
}

// Sector state -> full basis: c|s,p> = c/sqrt2 (|s> + p|~s>).
inline StateVector embed_full(const StateVector& v) {
  if (v.basis().is_full()) return v;
  const SpinBasis full(v.basis().n_sites(), Sector::full());
  const Label mask = full.flip_mask();
  const double r = 1.0 / std::sqrt(2.0);
  const double p = v.basis().parity();
  CVector out(static_cast<Eigen::Index>(full.dimension()));
  const auto dim = static_cast<std::ptrdiff_t>(v.dimension());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < dim; ++j) {
    const Label s = static_cast<Label>(j);
    out[static_cast<Eigen::Index>(s)] = r * v.amplitudes()[j];
    out[static_cast<Eigen::Index>(s ^ mask)] = p * r * v.amplitudes()[j];
  }
  return {full, std::move(out)};
}

// Orthogonal projection of a full-basis state onto a parity sector.
inline StateVector project_to_sector(const StateVector& v, const SpinBasis& sector) {
  if (!v.basis().is_full()) throw ConfigError("project_to_sector expects a full-basis state");
  if (sector.is_full() || sector.n_sites() != v.basis().n_sites()) {
    throw ConfigError("project_to_sector expects a sector basis of the same size");
  }
  const Label mask = sector.flip_mask();
  const double r = 1.0 / std::sqrt(2.0);
  const double p = sector.parity();
  CVector out(static_cast<Eigen::Index>(sector.dimension()));
  for (std::size_t j = 0; j < sector.dimension(); ++j) {
    const Label s = sector.label(j);
    out[static_cast<Eigen::Index>(j)] =
        r * (v[static_cast<std::size_t>(s)] + p * v[static_cast<std::size_t>(s ^ mask)]);
  }
  return {sector, std::move(out)};
}

// ---------------------------------------------------------------------------
// Matrix-free collective spin kernels on the full basis
// ---------------------------------------------------------------------------

// out = S_axis x, for a full-basis amplitude vector of N sites.
inline void apply_collective_full(int n_sites, Axis axis, const CVector& x, CVector& out) {
  const auto dim = static_cast<std::ptrdiff_t>(x.size());
  if (dim != (std::ptrdiff_t{1} << n_sites)) throw ConfigError("full-basis vector expected");
  out.resize(x.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < dim; ++i) {
    const Label s = static_cast<Label>(i);
    cplx acc{0.0, 0.0};
    switch (axis) {
      case Axis::Z:
        acc = 0.5 * (n_sites - 2 * popcount(s)) * x[i];
        break;
      case Axis::X:
        for (int l = 0; l < n_sites; ++l) acc += x[static_cast<Eigen::Index>(s ^ (Label{1} << l))];
        acc *= 0.5;
        break;
      case Axis::Y:
        // <s|sigma^y|s^bit> is +i when site l is down in s, -i when up.
        for (int l = 0; l < n_sites; ++l) {
          const cplx v = x[static_cast<Eigen::Index>(s ^ (Label{1} << l))];
          acc += action::is_down(s, l) ? kI * v : -kI * v;
        }
        acc *= 0.5;
        break;
    }
    out[i] = acc;
  }
}

// Diagonal of S_z^2 in either a full or a sector basis (both members of a
// flip pair share the same |S_z|).
inline RVector sz_squared_diagonal(const SpinBasis& basis) {
  RVector d(static_cast<Eigen::Index>(basis.dimension()));
  const int n = basis.n_sites();
  for (std::size_t j = 0; j < basis.dimension(); ++j) {
    const double m = 0.5 * (n - 2 * popcount(basis.label(j)));
    d[static_cast<Eigen::Index>(j)] = m * m;
  }
  return d;
}

}  // namespace dqpt

#endif  // DQPT_SPIN_CORE_HPP
