#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "sepcone/cones.hpp"
#include "sepcone/oracle.hpp"
#include "sepcone/parallel.hpp"
#include "sepcone/radii.hpp"
#include "sepcone/rng.hpp"
#include "sepcone/types.hpp"

namespace sepcone {

// The H(2) <-> R^4 Lorentz isometry and the multi-qubit separable-ball
// verification harness. Hermitian matrices are handled through their real
// coefficient vectors in the orthonormal Pauli-word basis
// (sigma_{a_1} (x) ... (x) sigma_{a_k}) / 2^{k/2}, so every inner product is
// real and the real-vector oracle applies unchanged. The coefficient index
// is base-4 with the FIRST tensor factor as the most significant digit.

/// 2x2 Hermitian matrix a0 I + a1 sx + a2 sy + a3 sz; eigenvalues are
/// a0 +- |(a1,a2,a3)| and the squared Frobenius norm is 2(a0^2 + |a|^2).
template <typename Scalar>
struct Hermitian2 {
  Scalar a0 = 0, a1 = 0, a2 = 0, a3 = 0;

  Scalar bloch_norm() const { return std::sqrt(a1 * a1 + a2 * a2 + a3 * a3); }
  Scalar min_eigenvalue() const { return a0 - bloch_norm(); }
  Scalar max_eigenvalue() const { return a0 + bloch_norm(); }
  bool psd(Scalar tol = 1e-12) const { return min_eigenvalue() >= -tol; }
  Scalar frobenius_norm() const {
    return std::sqrt(Scalar(2) * (a0 * a0 + a1 * a1 + a2 * a2 + a3 * a3));
  }
};

/// Norm-preserving map onto L_4 coordinates: H -> sqrt(2) (a0, a1, a2, a3);
/// H is PSD iff the image lies in L_4.
template <typename Scalar>
Vec<Scalar> herm2_to_lorentz(const Hermitian2<Scalar>& h) {
  Vec<Scalar> x(4);
  x << h.a0, h.a1, h.a2, h.a3;
  return std::sqrt(Scalar(2)) * x;
}

template <typename Scalar>
Hermitian2<Scalar> lorentz_to_herm2(const Vec<Scalar>& x) {
  if (x.size() != 4) throw std::invalid_argument("lorentz_to_herm2: need a 4-vector");
  const Scalar inv = Scalar(1) / std::sqrt(Scalar(2));
  return {x[0] * inv, x[1] * inv, x[2] * inv, x[3] * inv};
}

/// Complex matrix split into real and imaginary parts (keeps the harness
/// free of complex arithmetic).
template <typename Scalar>
struct ComplexPair {
  Mat<Scalar> re, im;
};

template <typename Scalar>
ComplexPair<Scalar> pauli_matrix(int j) {
  Mat<Scalar> re = Mat<Scalar>::Zero(2, 2), im = Mat<Scalar>::Zero(2, 2);
  switch (j) {
    case 0: re(0, 0) = 1; re(1, 1) = 1; break;
    case 1: re(0, 1) = 1; re(1, 0) = 1; break;
    case 2: im(0, 1) = -1; im(1, 0) = 1; break;
    case 3: re(0, 0) = 1; re(1, 1) = -1; break;
    default: throw std::invalid_argument("pauli_matrix: index must be 0..3");
  }
  return {std::move(re), std::move(im)};
}

template <typename Scalar>
Mat<Scalar> kron(const Mat<Scalar>& a, const Mat<Scalar>& b) {
  Mat<Scalar> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

template <typename Scalar>
ComplexPair<Scalar> kron(const ComplexPair<Scalar>& a, const ComplexPair<Scalar>& b) {
  return {kron(a.re, b.re) - kron(a.im, b.im), kron(a.re, b.im) + kron(a.im, b.re)};
}

/// Kronecker product of coefficient vectors; matches the bipartite index
/// convention index = a * |second| + l.
template <typename Scalar>
Vec<Scalar> kron_coeffs(const Vec<Scalar>& a, const Vec<Scalar>& b) {
  Vec<Scalar> out(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a[i] * b;
  return out;
}

/// k-qubit Hermitian state in Pauli-word coordinates.
template <typename Scalar>
struct MultiQubitState {
  int k = 1;
  Vec<Scalar> coeffs;  // length 4^k

  static Index coeff_count(int k) { return Index(1) << (2 * k); }

  static MultiQubitState identity(int k) {
    MultiQubitState s;
    s.k = k;
    s.coeffs = Vec<Scalar>::Zero(coeff_count(k));
    s.coeffs[0] = std::sqrt(static_cast<Scalar>(Index(1) << k));  // |I| = sqrt(2^k)
    return s;
  }

  Scalar frobenius_norm() const { return coeffs.norm(); }

  Scalar distance_to_identity() const {
    return (coeffs - identity(k).coeffs).norm();
  }

  /// Reconstructs the 2^k x 2^k matrix as (re, im) parts.
  ComplexPair<Scalar> matrix() const {
    const Index dim = Index(1) << k;
    ComplexPair<Scalar> acc{Mat<Scalar>::Zero(dim, dim), Mat<Scalar>::Zero(dim, dim)};
    const Scalar norm = std::pow(Scalar(2), Scalar(k) / Scalar(2));
    for (Index idx = 0; idx < coeffs.size(); ++idx) {
      if (coeffs[idx] == Scalar(0)) continue;
      ComplexPair<Scalar> word = pauli_matrix<Scalar>(static_cast<int>((idx >> (2 * (k - 1))) & 3));
      for (int q = k - 2; q >= 0; --q)
        word = kron(word, pauli_matrix<Scalar>(static_cast<int>((idx >> (2 * q)) & 3)));
      acc.re += coeffs[idx] / norm * word.re;
      acc.im += coeffs[idx] / norm * word.im;
    }
    return acc;
  }

  static MultiQubitState from_matrix(const ComplexPair<Scalar>& m, int k) {
    MultiQubitState s;
    s.k = k;
    s.coeffs = Vec<Scalar>::Zero(coeff_count(k));
    const Scalar norm = std::pow(Scalar(2), Scalar(k) / Scalar(2));
    for (Index idx = 0; idx < s.coeffs.size(); ++idx) {
      ComplexPair<Scalar> word = pauli_matrix<Scalar>(static_cast<int>((idx >> (2 * (k - 1))) & 3));
      for (int q = k - 2; q >= 0; --q)
        word = kron(word, pauli_matrix<Scalar>(static_cast<int>((idx >> (2 * q)) & 3)));
      s.coeffs[idx] = (word.re.cwiseProduct(m.re).sum() + word.im.cwiseProduct(m.im).sum()) / norm;
    }
    return s;
  }
};

/// Reshapes a coefficient vector of H(2) (x) H(2^{k-1}) into the oracle's
/// n x m matrix representation (m = 4 columns for the first factor).
template <typename Scalar>
Mat<Scalar> bipartite_matrix(const Vec<Scalar>& coeffs, Index m_dim) {
  if (coeffs.size() % m_dim != 0)
    throw std::invalid_argument("bipartite_matrix: size not divisible by m_dim");
  const Index n_dim = coeffs.size() / m_dim;
  Mat<Scalar> b(n_dim, m_dim);
  for (Index a = 0; a < m_dim; ++a) b.col(a) = coeffs.segment(a * n_dim, n_dim);
  return b;
}

template <typename Scalar>
Vec<Scalar> bipartite_coeffs(const Mat<Scalar>& b) {
  Vec<Scalar> coeffs(b.rows() * b.cols());
  for (Index a = 0; a < b.cols(); ++a) coeffs.segment(a * b.rows(), b.rows()) = b.col(a);
  return coeffs;
}

template <typename Scalar>
struct QubitBallSampleRow {
  Index index = 0;
  Scalar distance = 0;
  Scalar residual = 0;
  bool success = false;
  bool atoms_valid = false;
  Index atom_count = 0;
};

template <typename Scalar>
struct QubitBallReport {
  int k = 0;
  Scalar epsilon = 0;
  Scalar rho = 0;  // multiqubit bound used for the sampling radius
  std::vector<QubitBallSampleRow<Scalar>> rows;
  Index successes = 0;
  Scalar max_residual = 0;
};

namespace detail {

/// Product decomposition of a 2-qubit coefficient vector over
/// H_+(2) (x) H_+(2) (both factors are Lorentz cones in coordinates).
template <typename Scalar>
SeparableDecomposition<Scalar> decompose_two_qubit(const Vec<Scalar>& coeffs, Index budget,
                                                   Scalar tol, std::uint64_t seed) {
  const auto lorentz4 = EllipsoidSpec<Scalar>::lorentz(4);
  return decompose_separable(bipartite_matrix(coeffs, 4), lorentz4, lorentz4, budget, tol,
                             seed);
}

}  // namespace detail

/// Samples states at Frobenius distance (1 - epsilon) rho_k from I_{2^k} and
/// decomposes each into products of PSD 2x2 factors with members of the
/// inner separable ball cone, recursively for k = 3. The reported residual
/// is the distance between the sample and its assembled product
/// reconstruction in the full 4^k-dimensional coefficient space.
template <typename Scalar>
QubitBallReport<Scalar> verify_multiqubit_ball(int k, Scalar epsilon, Index samples,
                                               std::uint64_t seed, Scalar tol = 1e-5,
                                               Index budget = 900) {
  if (k != 2 && k != 3)
    throw std::invalid_argument("verify_multiqubit_ball: supported qubit counts are 2 and 3");
  if (!(epsilon > Scalar(0) && epsilon < Scalar(1)))
    throw std::invalid_argument("verify_multiqubit_ball: need 0 < epsilon < 1");

  QubitBallReport<Scalar> report;
  report.k = k;
  report.epsilon = epsilon;
  report.rho = multiqubit_bound<Scalar>(k);
  report.rows.resize(static_cast<std::size_t>(samples));

  const auto lorentz4 = EllipsoidSpec<Scalar>::lorentz(4);
  const Vec<Scalar> identity = MultiQubitState<Scalar>::identity(k).coeffs;

  // Inner ball cone for the recursive step: radius rho_{k-1} around
  // I_{2^{k-1}}; atoms are drawn from a slightly shrunk slice so recursive
  // targets sit strictly inside the exact inner separable ball.
  const Scalar inner_shrink = Scalar(0.985);
  const Scalar rho_prev = multiqubit_bound<Scalar>(k - 1);
  const Scalar id_prev_norm = std::sqrt(static_cast<Scalar>(Index(1) << (k - 1)));

  parallel_for_indexed(samples, [&](Index i) {
    QubitBallSampleRow<Scalar>& row = report.rows[static_cast<std::size_t>(i)];
    row.index = i;
    Rng rng(derive_seed(seed, 0x51424c4cULL + static_cast<std::uint64_t>(i)));
    Vec<Scalar> dir = rng.gaussian_vector<Scalar>(identity.size());
    dir /= dir.norm();
    const Scalar distance = (Scalar(1) - epsilon) * report.rho;
    const Vec<Scalar> target = identity + distance * dir;
    row.distance = distance;
    const Scalar target_norm = target.norm();

    if (k == 2) {
      const auto dec =
          detail::decompose_two_qubit(target, budget, tol, derive_seed(seed, 7000 + i));
      row.residual = dec.residual;
      row.success = dec.success;
      row.atom_count = static_cast<Index>(dec.generators.size());
      row.atoms_valid = true;
      for (const auto& [x, y] : dec.generators) {
        if (lorentz_membership(x, Scalar(1e-9)) == Region::Outside ||
            lorentz_membership(y, Scalar(1e-9)) == Region::Outside)
          row.atoms_valid = false;
      }
      return;
    }

    // k = 3: outer decomposition over H_+(2) (x) (inner ball cone in R^16).
    const Scalar r_inner = inner_shrink * rho_prev;             // ball radius around I_4
    const Scalar rho_eff = r_inner / id_prev_norm;              // unit-normalized
    const auto inner_cone = EllipsoidSpec<Scalar>::ball(16, rho_eff);
    const auto inner_cone_full = EllipsoidSpec<Scalar>::ball(16, rho_prev / id_prev_norm);

    const auto outer = decompose_separable(bipartite_matrix(target, 4), lorentz4, inner_cone,
                                           budget, Scalar(0.4) * tol,
                                           derive_seed(seed, 9000 + i));
    if (!outer.success) {
      row.residual = outer.residual;
      row.success = false;
      row.atom_count = static_cast<Index>(outer.generators.size());
      return;
    }

    Vec<Scalar> reconstruction = Vec<Scalar>::Zero(identity.size());
    bool atoms_valid = true;
    Index atom_count = 0;
    for (std::size_t a = 0; a < outer.generators.size(); ++a) {
      const Vec<Scalar>& x = outer.generators[a].first;    // in L_4
      const Vec<Scalar>& y = outer.generators[a].second;   // in the inner cone
      if (lorentz_membership(x, Scalar(1e-9)) == Region::Outside ||
          ellipsoid_membership(y, inner_cone_full, Scalar(1e-9)) == Region::Outside)
        atoms_valid = false;
      // Rescale the inner atom to the tangency point of its ray with the
      // ball slice around I_4, then recurse on a genuine ball member.
      const Scalar eta_sq = y.tail(15).squaredNorm();
      const Scalar t_star = Scalar(1) / (Scalar(1) + eta_sq);
      const Scalar ball_scale = Scalar(2) * t_star;  // |I_4| = 2
      const Vec<Scalar> inner_target = ball_scale * y;
      const auto inner = detail::decompose_two_qubit(inner_target, budget, Scalar(1e-7),
                                                     derive_seed(seed, 11000 + 31 * i + a));
      if (!inner.success) {
        atoms_valid = false;
        continue;
      }
      for (std::size_t j = 0; j < inner.generators.size(); ++j) {
        const Vec<Scalar>& xj = inner.generators[j].first;
        const Vec<Scalar>& yj = inner.generators[j].second;
        if (lorentz_membership(xj, Scalar(1e-9)) == Region::Outside ||
            lorentz_membership(yj, Scalar(1e-9)) == Region::Outside)
          atoms_valid = false;
        const Scalar weight = outer.weights[a] * inner.weights[j] / ball_scale;
        reconstruction += weight * kron_coeffs(x, kron_coeffs(xj, yj));
        ++atom_count;
      }
    }
    row.residual = (target - reconstruction).norm();
    row.success = row.residual <= tol * target_norm;
    row.atoms_valid = atoms_valid;
    row.atom_count = atom_count;
  });

  for (const auto& row : report.rows) {
    if (row.success) ++report.successes;
    report.max_residual = std::max(report.max_residual, row.residual);
  }
  return report;
}

}  // namespace sepcone
