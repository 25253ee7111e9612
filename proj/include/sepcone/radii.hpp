#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "sepcone/cones.hpp"
#include "sepcone/positive_maps.hpp"
#include "sepcone/types.hpp"

namespace sepcone {

// Closed-form radii of largest separable balls around the central product
// element e_0 (x) e_0, for cone pairs K_st(P1) in R^m and K_st(P2) in R^n.
// The dual objective below is maximized either by a rank-1 extreme map or by
// a doubly stochastic one; the attained maximum determines the radius.

enum class RadiusBranch { Rank1, DoublyStochastic };

inline const char* to_string(RadiusBranch b) {
  return b == RadiusBranch::Rank1 ? "rank1" : "doubly-stochastic";
}

/// F(M) = h P1 h^T + v^T P2 v + tr(A^T P2 A P1) for an s = 1 map.
template <typename Scalar>
Scalar dual_objective(const Mat<Scalar>& m, const EllipsoidSpec<Scalar>& p1,
                      const EllipsoidSpec<Scalar>& p2) {
  if (p1.dim() != m.cols() || p2.dim() != m.rows())
    throw std::invalid_argument("dual_objective: block dimensions do not match P1/P2");
  if (std::abs(block_s(m) - Scalar(1)) > Scalar(1e-12))
    throw std::invalid_argument("dual_objective: map must be normalized to s = 1");
  const RowVec<Scalar> h = block_h(m);
  const Vec<Scalar> v = block_v(m);
  const Mat<Scalar> a = block_A(m);
  return h.dot(h * p1.P()) + v.dot(p2.P() * v) +
         (a.transpose() * p2.P() * a * p1.P()).trace();
}

template <typename Scalar>
struct FMax {
  Scalar value;
  RadiusBranch branch;  // argmax; ties report Rank1
  Scalar rank1_value;
  Scalar ds_value;
};

/// max F over positive maps: the larger of
///   -1 + (1 + lambda_1(P1))(1 + lambda_1(P2))   (rank-1 maps)
///   sum_k lambda_k(P1) lambda_k(P2)             (doubly stochastic maps)
/// with eigenvalues sorted decreasing, k up to min(m,n) - 1.
template <typename Scalar>
FMax<Scalar> f_max(const EllipsoidSpec<Scalar>& p1, const EllipsoidSpec<Scalar>& p2) {
  const Vec<Scalar> l1 = p1.eigenvalues_desc();
  const Vec<Scalar> l2 = p2.eigenvalues_desc();
  const Scalar rank1 = -Scalar(1) + (Scalar(1) + l1[0]) * (Scalar(1) + l2[0]);
  Scalar ds = Scalar(0);
  const Index terms = std::min(l1.size(), l2.size());
  for (Index k = 0; k < terms; ++k) ds += l1[k] * l2[k];
  if (rank1 >= ds) return {rank1, RadiusBranch::Rank1, rank1, ds};
  return {ds, RadiusBranch::DoublyStochastic, rank1, ds};
}

template <typename Scalar>
struct RadiusReport {
  Scalar rho;    // ball radius around the unit central element, in (0,1)
  Scalar r;      // cone aperture, r = rho / sqrt(1 - rho^2)
  RadiusBranch branch;
  Scalar f_max;
};

template <typename Scalar>
Scalar aperture_from_rho(Scalar rho) {
  return rho / std::sqrt(Scalar(1) - rho * rho);
}

template <typename Scalar>
Scalar rho_from_aperture(Scalar r) {
  return r / std::sqrt(Scalar(1) + r * r);
}

/// Radius of the largest K_st(P1) (x) K_st(P2)-separable ball around
/// e_0 (x) e_0:  rho = max{ (1+l1(P1))(1+l1(P2)), 1 + sum_k l_k(P1) l_k(P2) }^{-1/2}.
template <typename Scalar>
RadiusReport<Scalar> separable_ball_radius(const EllipsoidSpec<Scalar>& p1,
                                           const EllipsoidSpec<Scalar>& p2) {
  const FMax<Scalar> fm = f_max(p1, p2);
  const Scalar rho = Scalar(1) / std::sqrt(Scalar(1) + fm.value);
  const Scalar direct = Scalar(1) / std::sqrt(std::max(
      (Scalar(1) + fm.rank1_value), Scalar(1) + fm.ds_value));
  if (std::abs(rho - direct) > Scalar(1e-14) * rho)
    throw std::logic_error("separable_ball_radius: rho/f_max consistency violated");
  return {rho, aperture_from_rho(rho), fm.branch, fm.value};
}

/// Ball-ball specialization: factor cones generated by balls of radii
/// rho1, rho2 < 1 around unit vectors in R^m, R^n.
template <typename Scalar>
Scalar ball_ball_radius(Scalar rho1, Scalar rho2, Index m, Index n) {
  if (!(rho1 > Scalar(0) && rho1 < Scalar(1) && rho2 > Scalar(0) && rho2 < Scalar(1)))
    throw std::invalid_argument("ball_ball_radius: radii must lie in (0,1)");
  if (m < 2 || n < 2) throw std::invalid_argument("ball_ball_radius: need m, n >= 2");
  const Scalar i1 = Scalar(1) / (rho1 * rho1);
  const Scalar i2 = Scalar(1) / (rho2 * rho2);
  const Scalar ds = Scalar(1) + Scalar(std::min(m, n) - 1) * (i1 - Scalar(1)) * (i2 - Scalar(1));
  return Scalar(1) / std::sqrt(std::max(i1 * i2, ds));
}

/// Largest K1 (x) K2-separable ball around I_{nm} in H(m) (x) H(n), where
/// K1, K2 are generated by balls of radii r1 < sqrt(m), r2 < sqrt(n) around
/// the identities:
///   min( r1 r2, sqrt(mn) r1 r2 / sqrt((min(m,n)^2 - 1)(m - r1^2)(n - r2^2) + r1^2 r2^2) ).
template <typename Scalar>
Scalar matrix_ball_radius(Index m, Index n, Scalar r1, Scalar r2) {
  const Scalar dm = static_cast<Scalar>(m), dn = static_cast<Scalar>(n);
  if (!(r1 > Scalar(0) && r1 * r1 < dm) || !(r2 > Scalar(0) && r2 * r2 < dn))
    throw std::invalid_argument("matrix_ball_radius: need 0 < r1 < sqrt(m), 0 < r2 < sqrt(n)");
  const Scalar k = static_cast<Scalar>(std::min(m, n));
  const Scalar denom = (k * k - Scalar(1)) * (dm - r1 * r1) * (dn - r2 * r2) + r1 * r1 * r2 * r2;
  return std::min(r1 * r2, std::sqrt(dm * dn) * r1 * r2 / std::sqrt(denom));
}

/// Closed-form multi-qubit separable-ball bound rho_k = 2^{k/2}/sqrt(3^{k-1}+1);
/// evaluated in log space for large k.
template <typename Scalar = double>
Scalar multiqubit_bound(int k) {
  if (k < 1) throw std::invalid_argument("multiqubit_bound: k must be >= 1");
  if (k <= 40)
    return std::pow(Scalar(2), Scalar(k) / Scalar(2)) /
           std::sqrt(std::pow(Scalar(3), Scalar(k - 1)) + Scalar(1));
  const Scalar log_num = Scalar(k) / Scalar(2) * std::log(Scalar(2));
  const Scalar log_den =
      Scalar(0.5) * (Scalar(k - 1) * std::log(Scalar(3)) +
                     std::log1p(std::exp(-Scalar(k - 1) * std::log(Scalar(3)))));
  return std::exp(log_num - log_den);
}

/// Same bound through the tensoring recursion: rho_1 = 1 and
/// rho_k = matrix_ball_radius(2, 2^{k-1}, 1, rho_{k-1}); switches to the
/// equivalent rho^{-2} recurrence once 2^{k-1} would lose integer exactness.
template <typename Scalar = double>
Scalar multiqubit_bound_recursive(int k) {
  if (k < 1) throw std::invalid_argument("multiqubit_bound_recursive: k must be >= 1");
  Scalar rho = Scalar(1);
  int i = 2;
  for (; i <= k && i <= 40; ++i)
    rho = matrix_ball_radius<Scalar>(2, Index(1) << (i - 1), Scalar(1), rho);
  if (i <= k) {
    Scalar inv_sq = Scalar(1) / (rho * rho);
    for (; i <= k; ++i)
      inv_sq = Scalar(1.5) * inv_sq - std::pow(Scalar(2), Scalar(-i + 1));
    rho = Scalar(1) / std::sqrt(inv_sq);
  }
  return rho;
}

/// Rank-1 map attaining the rank-1 branch of f_max: unit top eigenvectors of
/// P1, P2 as (h, v), A = v h.
template <typename Scalar>
Mat<Scalar> rank1_optimizer(const EllipsoidSpec<Scalar>& p1, const EllipsoidSpec<Scalar>& p2) {
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> e1(p1.P()), e2(p2.P());
  const RowVec<Scalar> h = e1.eigenvectors().col(p1.P().rows() - 1).transpose();
  const Vec<Scalar> v = e2.eigenvectors().col(p2.P().rows() - 1);
  return assemble_map<Scalar>(Scalar(1), h, v, v * h);
}

/// Doubly stochastic map attaining the eigenvalue-pairing branch: A aligns
/// the decreasing eigenbases of P1 and P2 through the rectangular identity.
template <typename Scalar>
Mat<Scalar> ds_optimizer(const EllipsoidSpec<Scalar>& p1, const EllipsoidSpec<Scalar>& p2) {
  const Index dm = p1.P().rows(), dn = p2.P().rows();
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> e1(p1.P()), e2(p2.P());
  Mat<Scalar> u2 = e2.eigenvectors().rowwise().reverse();  // decreasing order
  Mat<Scalar> u1 = e1.eigenvectors().rowwise().reverse();
  Mat<Scalar> d = Mat<Scalar>::Zero(dn, dm);
  for (Index i = 0; i < std::min(dm, dn); ++i) d(i, i) = Scalar(1);
  const Mat<Scalar> a = u2 * d * u1.transpose();
  return assemble_map<Scalar>(Scalar(1), RowVec<Scalar>::Zero(dm), Vec<Scalar>::Zero(dn), a);
}

/// F evaluated along the left boost family b -> U_n(b) M / (U_n(b) M)_{00}.
template <typename Scalar>
Scalar left_boost_objective(const Mat<Scalar>& m, const EllipsoidSpec<Scalar>& p1,
                            const EllipsoidSpec<Scalar>& p2, const RowVec<Scalar>& b) {
  Mat<Scalar> ml = boost(b).matrix * m;
  const Scalar scale = ml(0, 0);
  if (scale <= Scalar(0))
    throw std::invalid_argument("left_boost_objective: boosted map has nonpositive s");
  ml /= scale;
  return dual_objective(ml, p1, p2);
}

/// F along the right boost family b -> M U_m(b) / (M U_m(b))_{00}.
template <typename Scalar>
Scalar right_boost_objective(const Mat<Scalar>& m, const EllipsoidSpec<Scalar>& p1,
                             const EllipsoidSpec<Scalar>& p2, const RowVec<Scalar>& b) {
  Mat<Scalar> mr = m * boost(b).matrix;
  const Scalar scale = mr(0, 0);
  if (scale <= Scalar(0))
    throw std::invalid_argument("right_boost_objective: boosted map has nonpositive s");
  mr /= scale;
  return dual_objective(mr, p1, p2);
}

/// Analytic gradient of the left boost objective at b = 0:
///   2 [ (I + P2) A P1 h^T + (P2 - F(M) I) v ].
template <typename Scalar>
Vec<Scalar> left_boost_gradient(const Mat<Scalar>& m, const EllipsoidSpec<Scalar>& p1,
                                const EllipsoidSpec<Scalar>& p2) {
  const Scalar f = dual_objective(m, p1, p2);
  const RowVec<Scalar> h = block_h(m);
  const Vec<Scalar> v = block_v(m);
  const Mat<Scalar> a = block_A(m);
  const Index dn = m.rows() - 1;
  return Scalar(2) * ((Mat<Scalar>::Identity(dn, dn) + p2.P()) * a * p1.P() * h.transpose() +
                      (p2.P() - f * Mat<Scalar>::Identity(dn, dn)) * v);
}

/// Analytic gradient of the right boost objective at b = 0:
///   2 [ (I + P1) A^T P2 v + (P1 - F(M) I) h^T ].
template <typename Scalar>
Vec<Scalar> right_boost_gradient(const Mat<Scalar>& m, const EllipsoidSpec<Scalar>& p1,
                                 const EllipsoidSpec<Scalar>& p2) {
  const Scalar f = dual_objective(m, p1, p2);
  const RowVec<Scalar> h = block_h(m);
  const Vec<Scalar> v = block_v(m);
  const Mat<Scalar> a = block_A(m);
  const Index dm = m.cols() - 1;
  return Scalar(2) * ((Mat<Scalar>::Identity(dm, dm) + p1.P()) * a.transpose() * p2.P() * v +
                      (p1.P() - f * Mat<Scalar>::Identity(dm, dm)) * h.transpose());
}

}  // namespace sepcone
