#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "sepcone/cones.hpp"
#include "sepcone/positive_maps.hpp"
#include "sepcone/types.hpp"

namespace sepcone {

// Largest faces of the separable cone. Separable elements of
// R^m (x) R^n are stored as n x m matrices with the trace pairing
// <B, M> = tr(M^T B); a product element x (x) y is the rank-1 matrix y x^T.
//
// Type-I faces are parameterized by unit vectors (h, v); they consist of the
// separable elements orthogonal to the rank-1 extreme map (1, -h; -v, vh).
// Type-II faces are slices of a PSD cone: members have a symmetric block A
// with A >= 0 and A_{00} = tr(A)/2, padded by zeros.

template <typename Scalar>
Scalar pairing(const Mat<Scalar>& b, const Mat<Scalar>& m) {
  if (b.rows() != m.rows() || b.cols() != m.cols())
    throw std::invalid_argument("pairing: shape mismatch");
  return (m.transpose() * b).trace();
}

/// Unit pair (h, v) naming a Type-I face F_I(h,v).
template <typename Scalar>
struct TypeIFaceSpec {
  RowVec<Scalar> h;  // length m-1, |h| = 1
  Vec<Scalar> v;     // length n-1, |v| = 1

  TypeIFaceSpec(RowVec<Scalar> h_, Vec<Scalar> v_) : h(std::move(h_)), v(std::move(v_)) {
    if (std::abs(h.norm() - Scalar(1)) > Scalar(1e-12) ||
        std::abs(v.norm() - Scalar(1)) > Scalar(1e-12))
      throw std::invalid_argument("TypeIFaceSpec: h and v must be unit vectors");
  }

  Index m() const { return h.size() + 1; }
  Index n() const { return v.size() + 1; }
};

/// The rank-1 extreme map whose orthogonal slice of the separable cone is
/// F_I(h,v): (1, -h; -v, vh).
template <typename Scalar>
Mat<Scalar> type1_face_map(const TypeIFaceSpec<Scalar>& spec) {
  return assemble_map<Scalar>(Scalar(1), -spec.h, -spec.v, spec.v * spec.h);
}

/// Generator (1;v) x^T + y (1,h) of F_I(h,v); x, y must not be outside
/// their Lorentz cones (boundary generators span the face).
template <typename Scalar>
Mat<Scalar> type1_face_element(const TypeIFaceSpec<Scalar>& spec, const Vec<Scalar>& x,
                               const Vec<Scalar>& y) {
  if (x.size() != spec.m() || y.size() != spec.n())
    throw std::invalid_argument("type1_face_element: generator dimensions mismatch");
  if (lorentz_membership(x, Scalar(1e-9)) == Region::Outside ||
      lorentz_membership(y, Scalar(1e-9)) == Region::Outside)
    throw std::invalid_argument("type1_face_element: generator outside its cone");
  Vec<Scalar> left(spec.n());
  left[0] = Scalar(1);
  left.tail(spec.n() - 1) = spec.v;
  RowVec<Scalar> right(spec.m());
  right[0] = Scalar(1);
  right.tail(spec.m() - 1) = spec.h;
  return left * x.transpose() + y * right;
}

/// Explicit affine parameterization of the standard face F_1 by vectors
/// z in R^{n+m-1} (two spheres in orthogonal subspaces):
///   row 0:  ( z_0, z_1 - 1, z_2, ..., z_{m-1} )
///   row 1:  ( z_m - 1, 2 - z_0 - z_1 - z_m, -z_2, ..., -z_{m-1} )
///   row k:  ( z_{m+k-1}, -z_{m+k-1}, 0, ... ),  k = 2..n-1.
template <typename Scalar>
Mat<Scalar> z1_embed(const Vec<Scalar>& z, Index m) {
  const Index n = z.size() + 1 - m;
  if (m < 2 || n < 2) throw std::invalid_argument("z1_embed: need dimensions >= 2");
  Mat<Scalar> b = Mat<Scalar>::Zero(n, m);
  b(0, 0) = z[0];
  b(0, 1) = z[1] - Scalar(1);
  b(1, 0) = z[m] - Scalar(1);
  b(1, 1) = Scalar(2) - z[0] - z[1] - z[m];
  for (Index j = 2; j < m; ++j) {
    b(0, j) = z[j];
    b(1, j) = -z[j];
  }
  for (Index k = 2; k < n; ++k) {
    b(k, 0) = z[m + k - 1];
    b(k, 1) = -z[m + k - 1];
  }
  return b;
}

/// Membership in the canonical Type-II face: nonzero only in the top
/// min(m,n) x min(m,n) block, which must be symmetric PSD with
/// A_{00} = tr(A)/2. Inputs with more columns than rows are transposed.
template <typename Scalar>
bool type2_membership(const Mat<Scalar>& b_in, Scalar tol = 1e-9) {
  const Mat<Scalar> b = b_in.cols() > b_in.rows() ? Mat<Scalar>(b_in.transpose()) : b_in;
  const Index k = b.cols();
  const Mat<Scalar> a = b.topRows(k);
  if (b.rows() > k && b.bottomRows(b.rows() - k).cwiseAbs().maxCoeff() > tol) return false;
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > tol) return false;
  const Scalar trace = a.trace();
  if (std::abs(a(0, 0) - trace / Scalar(2)) > tol * std::max(Scalar(1), std::abs(trace)))
    return false;
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(Scalar(0.5) * (a + a.transpose()),
                                                Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol * std::max(Scalar(1), trace);
}

/// The extreme map defining the canonical Type-II face used by
/// type2_membership: M_2 diag(1, -I) padded to n x m (n >= m).
template <typename Scalar>
Mat<Scalar> canonical_type2_face_map(Index m, Index n) {
  if (n < m) throw std::invalid_argument("canonical_type2_face_map: need n >= m");
  Mat<Scalar> mat = Mat<Scalar>::Zero(n, m);
  mat(0, 0) = Scalar(1);
  for (Index i = 1; i < m; ++i) mat(i, i) = Scalar(-1);
  return mat;
}

/// Element (1, h; v', v'h) lying in both F_I(h,v) and F_I(h',v').
template <typename Scalar>
Mat<Scalar> face_intersection_witness(const TypeIFaceSpec<Scalar>& a,
                                      const TypeIFaceSpec<Scalar>& b) {
  if (a.m() != b.m() || a.n() != b.n())
    throw std::invalid_argument("face_intersection_witness: face dimensions mismatch");
  return assemble_map<Scalar>(Scalar(1), a.h, b.v, b.v * a.h);
}

/// Element (1; h^T; 0)(1, h) shared by F_I(h, v) (any v) and the canonical
/// Type-II face of canonical_type2_face_map(m, n).
template <typename Scalar>
Mat<Scalar> type1_type2_intersection_witness(const RowVec<Scalar>& h, Index n) {
  const Index m = h.size() + 1;
  if (n < m) throw std::invalid_argument("type1_type2_intersection_witness: need n >= m");
  if (std::abs(h.norm() - Scalar(1)) > Scalar(1e-12))
    throw std::invalid_argument("type1_type2_intersection_witness: |h| must be 1");
  Vec<Scalar> col = Vec<Scalar>::Zero(n);
  col[0] = Scalar(1);
  col.segment(1, m - 1) = h.transpose();
  RowVec<Scalar> row(m);
  row[0] = Scalar(1);
  row.tail(m - 1) = h;
  return col * row;
}

}  // namespace sepcone
