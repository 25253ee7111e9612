#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

#include "sepcone/cones.hpp"
#include "sepcone/rng.hpp"
#include "sepcone/types.hpp"

namespace sepcone {

// L_m-to-L_n positive maps, represented by n x m matrices partitioned as
//
//   M = ( s  h )     s scalar, h row (m-1), v column (n-1), A (n-1) x (m-1).
//       ( v  A )
//
// Positivity is certified through the S-lemma condition: after normalizing
// to s = 1, M is positive iff |h| <= 1 and there is lambda >= 0 with
// M^T J_n M - lambda J_m >= 0.

template <typename Derived>
typename Derived::Scalar block_s(const Eigen::MatrixBase<Derived>& m) {
  return m(0, 0);
}
template <typename Derived>
auto block_h(const Eigen::MatrixBase<Derived>& m) {
  return m.row(0).tail(m.cols() - 1);
}
template <typename Derived>
auto block_v(const Eigen::MatrixBase<Derived>& m) {
  return m.col(0).tail(m.rows() - 1);
}
template <typename Derived>
auto block_A(const Eigen::MatrixBase<Derived>& m) {
  return m.bottomRightCorner(m.rows() - 1, m.cols() - 1);
}

template <typename Scalar>
Mat<Scalar> assemble_map(Scalar s, const RowVec<Scalar>& h, const Vec<Scalar>& v,
                         const Mat<Scalar>& A) {
  if (A.rows() != v.size() || A.cols() != h.size())
    throw std::invalid_argument("assemble_map: block shapes do not tile");
  Mat<Scalar> m(v.size() + 1, h.size() + 1);
  m(0, 0) = s;
  m.row(0).tail(h.size()) = h;
  m.col(0).tail(v.size()) = v;
  m.bottomRightCorner(A.rows(), A.cols()) = A;
  return m;
}

/// Gram matrix (M/s)^T J_n (M/s) of the s-normalized map, symmetrized.
template <typename Scalar>
Mat<Scalar> normalized_gram(const Mat<Scalar>& m) {
  const Scalar s = m(0, 0);
  if (s == Scalar(0)) throw std::invalid_argument("normalized_gram: s = 0");
  const Mat<Scalar> mn = m / s;
  const Mat<Scalar> jn = minkowski_matrix<Scalar>(m.rows());
  Mat<Scalar> g = mn.transpose() * jn * mn;
  return Scalar(0.5) * (g + g.transpose());
}

/// lambda_min(gram - lambda J); concave in lambda.
template <typename Scalar>
Scalar slemma_objective(const Mat<Scalar>& gram, Scalar lambda) {
  Mat<Scalar> pencil = gram - lambda * minkowski_matrix<Scalar>(gram.rows());
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(pencil, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

template <typename Scalar>
struct PositivityCertificate {
  Scalar lambda = Scalar(0);   // multiplier for the s-normalized map
  Scalar min_eig = Scalar(0);  // lambda_min(M^T J_n M - lambda J_m) at that lambda
  bool h_norm_ok = false;      // |h| <= s (1 + tol)
};

template <typename Scalar>
struct PositivityResult {
  bool positive = false;
  PositivityCertificate<Scalar> certificate;
  const char* failing_check = nullptr;  // set when not positive
  Scalar failing_value = Scalar(0);
};

/// S-lemma positivity certificate. The concave g(lambda) =
/// lambda_min(M^T J_n M - lambda J_m) is maximized by ternary search over
/// [0, (M^T J_n M)_{00}]; the map is positive iff g(lambda*) >= -tol and
/// |h| <= 1 + tol (all for the s-normalized map).
template <typename Scalar>
PositivityResult<Scalar> certify_positivity(const Mat<Scalar>& m, Scalar tol = 1e-9) {
  if (m.rows() < 2 || m.cols() < 2)
    throw std::invalid_argument("certify_positivity: need min(m,n) >= 2");
  if (m.norm() == Scalar(0))
    throw std::invalid_argument("certify_positivity: zero map (s-normalization undefined)");

  PositivityResult<Scalar> res;
  const Scalar s = block_s(m);
  if (s <= Scalar(0)) {
    res.failing_check = "s";
    res.failing_value = s;
    return res;
  }

  const Mat<Scalar> gram = normalized_gram(m);
  const Scalar h_norm = (block_h(m) / s).norm();
  res.certificate.h_norm_ok = h_norm <= Scalar(1) + tol;

  // (gram - lambda J)_{00} = gram_{00} - lambda must stay >= -tol, which
  // bounds the multiplier search; gram_{00} = 1 - |v/s|^2.
  if (gram(0, 0) < -tol) {
    res.failing_check = "gram00";  // equivalently |v| > s
    res.failing_value = gram(0, 0);
    return res;
  }
  const Scalar ub = std::max(gram(0, 0), Scalar(0));

  Scalar lo = Scalar(0), hi = ub;
  for (int it = 0; it < 200 && hi - lo > Scalar(0); ++it) {
    const Scalar m1 = lo + (hi - lo) / Scalar(3);
    const Scalar m2 = hi - (hi - lo) / Scalar(3);
    if (slemma_objective(gram, m1) < slemma_objective(gram, m2))
      lo = m1;
    else
      hi = m2;
  }
  Scalar best_lambda = (lo + hi) / Scalar(2);
  Scalar best_g = slemma_objective(gram, best_lambda);
  for (Scalar cand : {Scalar(0), ub}) {
    const Scalar g = slemma_objective(gram, cand);
    if (g > best_g) {
      best_g = g;
      best_lambda = cand;
    }
  }
  res.certificate.lambda = best_lambda;
  res.certificate.min_eig = best_g;

  if (!res.certificate.h_norm_ok) {
    res.failing_check = "h_norm";
    res.failing_value = h_norm;
    return res;
  }
  if (best_g < -tol) {
    res.failing_check = "min_eig";
    res.failing_value = best_g;
    return res;
  }
  res.positive = true;
  return res;
}

/// Searches for x in L_m with Mx outside L_n (violation beyond 1e-9).
/// Deterministic candidates (top singular pair of A, the -h direction, e_0)
/// plus seeded projected-gradient ascent of the boundary violation.
template <typename Scalar>
std::optional<Vec<Scalar>> positivity_witness(const Mat<Scalar>& m, std::uint64_t seed = 0,
                                              int restarts = 8) {
  const Index rows = m.rows(), cols = m.cols();
  if (rows < 2 || cols < 2 || m.norm() == Scalar(0)) return std::nullopt;
  const Scalar tol = Scalar(1e-9);

  const auto violation = [&](const Vec<Scalar>& x) {
    const Vec<Scalar> y = m * x;
    return y.tail(rows - 1).norm() - y[0];
  };
  Vec<Scalar> best;
  Scalar best_viol = tol;

  const auto consider = [&](const Vec<Scalar>& x) {
    const Scalar viol = violation(x);
    if (viol > best_viol) {
      best_viol = viol;
      best = x;
    }
  };

  const Scalar s = block_s(m);
  const RowVec<Scalar> h = block_h(m);
  const Vec<Scalar> v = block_v(m);
  const Mat<Scalar> a = block_A(m);

  Vec<Scalar> e0 = Vec<Scalar>::Zero(cols);
  e0[0] = Scalar(1);
  consider(e0);  // catches s < |v| and s <= 0

  if (h.norm() > Scalar(0)) {
    Vec<Scalar> x(cols);
    x[0] = Scalar(1);
    x.tail(cols - 1) = -h.transpose() / h.norm();
    consider(x);  // (Mx)_0 = s - |h|
  }

  // Top singular pair of A with the sign convention h w - u^T v <= 0.
  Eigen::JacobiSVD<Mat<Scalar>> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.singularValues().size() > 0 && svd.singularValues()[0] > Scalar(0)) {
    Vec<Scalar> w = svd.matrixV().col(0);
    Vec<Scalar> u = svd.matrixU().col(0);
    if (h.dot(w.transpose()) - u.dot(v) > Scalar(0)) {
      w = -w;
      u = -u;
    }
    Vec<Scalar> x(cols);
    x[0] = Scalar(1);
    x.tail(cols - 1) = w;
    consider(x);
  }

  // Local ascent of |v + A w| - (s + h w) over the unit sphere |w| = 1.
  for (int r = 0; r < restarts; ++r) {
    Rng rng(derive_seed(seed, 0x57495453ULL + static_cast<std::uint64_t>(r)));
    Vec<Scalar> w = rng.unit_vector<Scalar>(cols - 1);
    Scalar step = Scalar(0.5);
    Vec<Scalar> x(cols);
    x[0] = Scalar(1);
    x.tail(cols - 1) = w;
    Scalar cur = violation(x);
    for (int it = 0; it < 120; ++it) {
      const Vec<Scalar> img = v + a * w;
      const Scalar img_norm = img.norm();
      Vec<Scalar> grad = -h.transpose();
      if (img_norm > Scalar(1e-15)) grad += a.transpose() * img / img_norm;
      Vec<Scalar> cand = w + step * (grad - w * w.dot(grad));
      const Scalar cn = cand.norm();
      if (cn == Scalar(0)) break;
      cand /= cn;
      Vec<Scalar> xc(cols);
      xc[0] = Scalar(1);
      xc.tail(cols - 1) = cand;
      const Scalar val = violation(xc);
      if (val > cur) {
        w = cand;
        cur = val;
        step *= Scalar(1.2);
      } else {
        step *= Scalar(0.5);
        if (step < Scalar(1e-12)) break;
      }
    }
    x.tail(cols - 1) = w;
    consider(x);
  }

  if (best.size() == 0) return std::nullopt;
  if (lorentz_membership(best, tol) == Region::Outside) return std::nullopt;
  if (lorentz_membership(Vec<Scalar>(m * best), tol) != Region::Outside) return std::nullopt;
  return best;
}

enum class ExtremeType { TypeI, TypeII };

template <typename Scalar>
struct CanonicalMap {
  Mat<Scalar> matrix;
  bool extreme;  // Type II maps only generate extreme rays when min(m,n) >= 3
};

/// The two canonical forms: M_1 (all-ones 2x2 block padded with zeros) and
/// M_2 (rectangular identity).
template <typename Scalar>
CanonicalMap<Scalar> canonical_extreme(ExtremeType kind, Index m, Index n) {
  if (m < 2 || n < 2) throw std::invalid_argument("canonical_extreme: need m, n >= 2");
  Mat<Scalar> mat = Mat<Scalar>::Zero(n, m);
  if (kind == ExtremeType::TypeI) {
    mat.topLeftCorner(2, 2).setOnes();
    return {std::move(mat), true};
  }
  for (Index i = 0; i < std::min(m, n); ++i) mat(i, i) = Scalar(1);
  return {std::move(mat), std::min(m, n) >= 3};
}

template <typename Scalar>
Index numerical_rank(const Mat<Scalar>& m, Scalar rel_tol = 1e-10) {
  Eigen::JacobiSVD<Mat<Scalar>> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] == Scalar(0)) return 0;
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv[i] > rel_tol * sv[0]) ++rank;
  return rank;
}

/// A positive rank-1 map generates an extreme ray iff |h| = |v| = s.
template <typename Scalar>
bool is_rank_one_extreme(const Mat<Scalar>& m, Scalar tol = 1e-8) {
  const Scalar s = block_s(m);
  if (s <= Scalar(0)) return false;
  if (numerical_rank(m) != 1) return false;
  return std::abs(block_h(m).norm() - s) <= tol * s &&
         std::abs(block_v(m).norm() - s) <= tol * s;
}

enum class ExtremeTag { TypeI, TypeII, NotExtreme, NotPositive };

inline const char* to_string(ExtremeTag tag) {
  switch (tag) {
    case ExtremeTag::TypeI: return "type-I";
    case ExtremeTag::TypeII: return "type-II";
    case ExtremeTag::NotExtreme: return "not-extreme";
    case ExtremeTag::NotPositive: return "not-positive";
  }
  return "?";
}

template <typename Scalar>
struct ExtremeClass {
  ExtremeTag tag = ExtremeTag::NotExtreme;
  // Diagnostics backing the verdict.
  Vec<Scalar> singular_values_A;
  Index rank = 0;
  Scalar c = Scalar(0);          // gram ~ c * J proportionality constant
  Scalar deviation = Scalar(0);  // max-abs of gram - c * J
  // Rank-1 split M = (split.first + split.second) / 2 exhibited for the
  // doubly stochastic min(m,n) = 2 case, which is not extreme.
  std::optional<std::pair<Mat<Scalar>, Mat<Scalar>>> split;
};

/// Extreme-ray classification: rank-1 maps are Type I iff |h| = |v| = s;
/// higher-rank maps are Type II iff the Gram form M^T J_n M (transposed
/// roles when m > n) is a positive multiple of J and min(m,n) >= 3.
template <typename Scalar>
ExtremeClass<Scalar> classify_extreme(const Mat<Scalar>& m, Scalar tol = 1e-8) {
  using Tag = ExtremeTag;
  ExtremeClass<Scalar> out;
  if (m.norm() == Scalar(0)) return out;  // zero map generates no ray
  {
    Eigen::JacobiSVD<Mat<Scalar>> svd(block_A(m));
    out.singular_values_A = svd.singularValues();
  }
  out.rank = numerical_rank(m);

  const auto cert = certify_positivity(m, Scalar(1e-9));
  if (!cert.positive) {
    out.tag = Tag::NotPositive;
    return out;
  }
  if (out.rank == 1) {
    out.tag = is_rank_one_extreme(m, tol) ? Tag::TypeI : Tag::NotExtreme;
    return out;
  }

  const bool wide = m.cols() > m.rows();
  const Mat<Scalar> mm = wide ? Mat<Scalar>(m.transpose()) : m;
  const Mat<Scalar> jn = minkowski_matrix<Scalar>(mm.rows());
  const Mat<Scalar> gram = mm.transpose() * jn * mm;
  out.c = gram(0, 0);
  out.deviation =
      (gram - out.c * minkowski_matrix<Scalar>(gram.rows())).cwiseAbs().maxCoeff();

  const bool proportional = out.c > Scalar(0) && out.deviation <= tol * out.c;
  if (!proportional) {
    out.tag = Tag::NotExtreme;
    return out;
  }
  if (std::min(m.rows(), m.cols()) >= 3) {
    out.tag = Tag::TypeII;
    return out;
  }

  out.tag = Tag::NotExtreme;
  // Doubly stochastic shape with a unit column A splits into two rank-1
  // positive maps: M = [(1;a)(1,1) + (1;-a)(1,-1)] s / 2.
  const Scalar s = block_s(m);
  const Mat<Scalar> mn = wide ? Mat<Scalar>(m.transpose() / s) : Mat<Scalar>(m / s);
  if (block_h(mn).norm() <= tol && block_v(mn).norm() <= tol && mn.cols() == 2) {
    const Vec<Scalar> a = block_A(mn).col(0);
    Vec<Scalar> col(mn.rows());
    RowVec<Scalar> row(2);
    col[0] = Scalar(1);
    col.tail(a.size()) = a;
    row << Scalar(1), Scalar(1);
    Mat<Scalar> first = s * (col * row);
    col.tail(a.size()) = -a;
    row << Scalar(1), Scalar(-1);
    Mat<Scalar> second = s * (col * row);
    if (wide) {
      first.transposeInPlace();
      second.transposeInPlace();
    }
    out.split = std::make_pair(std::move(first), std::move(second));
  }
  return out;
}

/// s = 1 and h = v = 0 (central rays mapped to central rays both ways).
template <typename Scalar>
bool doubly_stochastic_check(const Mat<Scalar>& m, Scalar tol = 1e-9) {
  return std::abs(block_s(m) - Scalar(1)) <= tol && block_h(m).norm() <= tol &&
         block_v(m).norm() <= tol;
}

}  // namespace sepcone
