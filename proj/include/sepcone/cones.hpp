#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "sepcone/rng.hpp"
#include "sepcone/types.hpp"

namespace sepcone {

// Second-order (Lorentz) cone primitives. Throughout, L_d denotes the cone
//   { x in R^d : x_0 >= |(x_1,...,x_{d-1})| }
// and J_d = diag(1, -I_{d-1}) the Minkowski form that vanishes on its
// boundary. Standardized ellipsoidal cones K_st(P) generalize L_d by
// replacing the Euclidean norm with the P-norm of the tail.

template <typename Scalar>
Mat<Scalar> minkowski_matrix(Index dim) {
  if (dim < 2) throw std::invalid_argument("minkowski_matrix: dim must be >= 2");
  Vec<Scalar> d = Vec<Scalar>::Constant(dim, Scalar(-1));
  d[0] = Scalar(1);
  return d.asDiagonal();
}

/// x^T J x without forming J.
template <typename Derived>
typename Derived::Scalar minkowski_quad(const Eigen::MatrixBase<Derived>& x) {
  return x[0] * x[0] - x.tail(x.size() - 1).squaredNorm();
}

/// Classifies x_0 - |x_rest| against an absolute tolerance. The apex x = 0
/// classifies as Boundary.
template <typename Derived>
Region lorentz_membership(const Eigen::MatrixBase<Derived>& x,
                          typename Derived::Scalar tol = 1e-9) {
  if (x.size() < 2) throw std::invalid_argument("lorentz_membership: dim must be >= 2");
  const auto gap = x[0] - x.tail(x.size() - 1).norm();
  if (gap > tol) return Region::Interior;
  if (gap < -tol) return Region::Outside;
  return Region::Boundary;
}

/// Standardized ellipsoidal cone K_st(P) = { (x_0, x) : x_0 >= sqrt(x^T P x) }
/// with P symmetric positive definite of size (d-1) x (d-1).
template <typename Scalar>
class EllipsoidSpec {
 public:
  explicit EllipsoidSpec(Mat<Scalar> P) : P_(std::move(P)) {
    if (P_.rows() != P_.cols()) throw std::invalid_argument("EllipsoidSpec: P must be square");
    if (!P_.isApprox(P_.transpose(), Scalar(1e-12)))
      throw std::invalid_argument("EllipsoidSpec: P must be symmetric");
    Eigen::LLT<Mat<Scalar>> llt(P_);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("EllipsoidSpec: P must be positive definite");
  }

  /// Lorentz cone L_d as the special case P = I.
  static EllipsoidSpec lorentz(Index d) {
    if (d < 2) throw std::invalid_argument("EllipsoidSpec::lorentz: d must be >= 2");
    return EllipsoidSpec(Mat<Scalar>::Identity(d - 1, d - 1));
  }

  /// Cone generated by a ball of radius rho < 1 around the unit vector e_0:
  /// K_st(r^{-2} I) with aperture r = rho / sqrt(1 - rho^2).
  static EllipsoidSpec ball(Index d, Scalar rho) {
    if (!(rho > Scalar(0) && rho < Scalar(1)))
      throw std::invalid_argument("EllipsoidSpec::ball: need 0 < rho < 1");
    const Scalar p = (Scalar(1) - rho * rho) / (rho * rho);  // r^{-2} = rho^{-2} - 1
    return EllipsoidSpec(Mat<Scalar>::Identity(d - 1, d - 1) * p);
  }

  const Mat<Scalar>& P() const { return P_; }
  Index dim() const { return P_.rows() + 1; }

  Scalar quad(const Vec<Scalar>& rest) const { return rest.dot(P_ * rest); }

  Mat<Scalar> inverse() const { return P_.inverse(); }

  Mat<Scalar> sqrt_matrix() const { return matrix_power(Scalar(0.5)); }
  Mat<Scalar> inv_sqrt_matrix() const { return matrix_power(Scalar(-0.5)); }

  /// diag(1, P^{-1/2}): maps L_d onto K_st(P).
  Mat<Scalar> standardizing_map() const {
    Mat<Scalar> u = Mat<Scalar>::Zero(dim(), dim());
    u(0, 0) = Scalar(1);
    u.bottomRightCorner(dim() - 1, dim() - 1) = inv_sqrt_matrix();
    return u;
  }

  /// Eigenvalues of P in decreasing order.
  Vec<Scalar> eigenvalues_desc() const {
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(Scalar(0.5) * (P_ + P_.transpose()));
    return es.eigenvalues().reverse();
  }

 private:
  Mat<Scalar> matrix_power(Scalar p) const {
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(Scalar(0.5) * (P_ + P_.transpose()));
    Vec<Scalar> d = es.eigenvalues();
    for (Index i = 0; i < d.size(); ++i) d[i] = std::pow(d[i], p);
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
  }

  Mat<Scalar> P_;
};

template <typename Scalar>
Region ellipsoid_membership(const Vec<Scalar>& x, const EllipsoidSpec<Scalar>& cone,
                            Scalar tol = 1e-9) {
  if (x.size() != cone.dim())
    throw std::invalid_argument("ellipsoid_membership: dimension mismatch");
  const Scalar gap = x[0] - std::sqrt(std::max(Scalar(0), cone.quad(x.tail(x.size() - 1))));
  if (gap > tol) return Region::Interior;
  if (gap < -tol) return Region::Outside;
  return Region::Boundary;
}

/// A linear map with matrix^T J matrix = scale * J, scale > 0; such maps
/// carry L_dim onto itself.
template <typename Scalar>
struct LorentzAutomorphism {
  Mat<Scalar> matrix;
  Scalar scale = Scalar(1);

  Index dim() const { return matrix.rows(); }

  /// Max-abs entry of matrix^T J matrix - scale * J.
  Scalar form_defect() const {
    const Mat<Scalar> j = minkowski_matrix<Scalar>(dim());
    return (matrix.transpose() * j * matrix - scale * j).cwiseAbs().maxCoeff();
  }
};

/// Hyperbolic boost along the row vector b, dim = b.size() + 1:
///
///   U(b) = ( sqrt(1+|b|^2)   b                              )
///          ( b^T             (I - b^T b / (1+|b|^2))^{-1/2} )
///
/// satisfies U^T J U = J exactly. The rank-1 inverse square root has the
/// closed form I + (sqrt(1+|b|^2) - 1) b^T b / |b|^2 (identity when b = 0).
template <typename Scalar>
LorentzAutomorphism<Scalar> boost(const RowVec<Scalar>& b) {
  const Index dim = b.size() + 1;
  if (dim < 2) throw std::invalid_argument("boost: dim must be >= 2");
  const Scalar t = b.squaredNorm();
  const Scalar gamma = std::sqrt(Scalar(1) + t);
  Mat<Scalar> u = Mat<Scalar>::Identity(dim, dim);
  u(0, 0) = gamma;
  if (t > Scalar(0)) {
    u.row(0).tail(dim - 1) = b;
    u.col(0).tail(dim - 1) = b.transpose();
    u.bottomRightCorner(dim - 1, dim - 1) += (gamma - Scalar(1)) / t * b.transpose() * b;
  }
  return {std::move(u), Scalar(1)};
}

/// Seeded element of Aut(L_dim): boost with |b| ~ U[0,2], a block rotation
/// diag(1, Q), and a positive scaling in [0.5, 2].
template <typename Scalar>
LorentzAutomorphism<Scalar> random_automorphism(std::uint64_t seed, Index dim) {
  if (dim < 2) throw std::invalid_argument("random_automorphism: dim must be >= 2");
  Rng rng(derive_seed(seed, 0x4175746fULL));
  RowVec<Scalar> b = rng.unit_vector<Scalar>(dim - 1).transpose() *
                     static_cast<Scalar>(rng.uniform(0.0, 2.0));
  Mat<Scalar> rot = Mat<Scalar>::Identity(dim, dim);
  rot.bottomRightCorner(dim - 1, dim - 1) = random_orthogonal<Scalar>(rng, dim - 1);
  const Scalar s = static_cast<Scalar>(rng.uniform(0.5, 2.0));
  return {s * (boost(b).matrix * rot), s * s};
}

/// Checked matrix-vector product (column count of M must equal x.dim).
template <typename Scalar>
Vec<Scalar> apply_map(const Mat<Scalar>& m, const Vec<Scalar>& x) {
  if (m.cols() != x.size()) throw std::invalid_argument("apply_map: dimension mismatch");
  return m * x;
}

}  // namespace sepcone
