#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sepcone/cones.hpp"
#include "sepcone/faces.hpp"
#include "sepcone/positive_maps.hpp"
#include "sepcone/radii.hpp"
#include "sepcone/rng.hpp"
#include "sepcone/types.hpp"

namespace sepcone {

// Independent verification machinery: constructive separable decompositions
// (conditional gradient over product atoms), dual non-separability witnesses,
// and randomized validation of the dual maximum. Everything is deterministic
// given the seed.

template <typename Scalar>
struct ProductSample {
  Vec<Scalar> x;         // on the boundary of K1, x_0 = 1
  Vec<Scalar> y;         // on the boundary of K2, y_0 = 1
  Mat<Scalar> element;   // y x^T
};

/// Boundary product generator with both factors normalized to leading
/// coordinate 1; deterministic per seed.
template <typename Scalar>
ProductSample<Scalar> sample_product(std::uint64_t seed, const EllipsoidSpec<Scalar>& k1,
                                     const EllipsoidSpec<Scalar>& k2) {
  Rng rng(derive_seed(seed, 0x50524f44ULL));
  const auto boundary_point = [&rng](const EllipsoidSpec<Scalar>& k) {
    Vec<Scalar> g = rng.gaussian_vector<Scalar>(k.dim() - 1);
    Scalar q = std::sqrt(k.quad(g));
    while (q == Scalar(0)) {
      g = rng.gaussian_vector<Scalar>(k.dim() - 1);
      q = std::sqrt(k.quad(g));
    }
    Vec<Scalar> x(k.dim());
    x[0] = Scalar(1);
    x.tail(k.dim() - 1) = g / q;
    return x;
  };
  ProductSample<Scalar> out;
  out.x = boundary_point(k1);
  out.y = boundary_point(k2);
  out.element = out.y * out.x.transpose();
  return out;
}

template <typename Scalar>
struct SeparableDecomposition {
  bool success = false;
  std::vector<Scalar> weights;
  std::vector<std::pair<Vec<Scalar>, Vec<Scalar>>> generators;  // (x, y) pairs
  Scalar residual = Scalar(0);  // Frobenius distance of the reconstruction
  Index iterations = 0;

  Mat<Scalar> reconstruction(Index rows, Index cols) const {
    Mat<Scalar> acc = Mat<Scalar>::Zero(rows, cols);
    for (std::size_t i = 0; i < weights.size(); ++i)
      acc += weights[i] * (generators[i].second * generators[i].first.transpose());
    return acc;
  }
};

namespace detail {

/// argmax of u^T x over boundary points x = (1, xi), xi^T P xi = 1:
/// xi = P^{-1} u_rest / sqrt(u_rest^T P^{-1} u_rest) (any xi at u_rest = 0).
template <typename Scalar>
Vec<Scalar> support_step(const Vec<Scalar>& u, const Mat<Scalar>& p_inv,
                         const Vec<Scalar>& fallback) {
  const Vec<Scalar> tail = u.tail(u.size() - 1);
  const Vec<Scalar> cand = p_inv * tail;
  const Scalar val = tail.dot(cand);
  if (!(val > Scalar(0))) return fallback;
  Vec<Scalar> x(u.size());
  x[0] = Scalar(1);
  x.tail(u.size() - 1) = cand / std::sqrt(val);
  return x;
}

/// Nonnegative least-squares refit of the active-set weights by cyclic
/// coordinate descent on the Gram system. b_norm scales the stopping rule
/// so the refit is covariant under positive rescaling of the target.
template <typename Scalar>
void nnls_refit(const Mat<Scalar>& gram, const Vec<Scalar>& rhs, Vec<Scalar>& w,
                Scalar b_norm) {
  const Index k = w.size();
  for (int sweep = 0; sweep < 300; ++sweep) {
    Scalar change = Scalar(0);  // effect on the reconstruction, |dw| * |atom|
    for (Index i = 0; i < k; ++i) {
      const Scalar kii = gram(i, i);
      if (kii <= Scalar(0)) continue;
      const Scalar grad = rhs[i] - gram.row(i).dot(w);
      const Scalar next = std::max(Scalar(0), w[i] + grad / kii);
      change = std::max(change, std::abs(next - w[i]) * std::sqrt(kii));
      w[i] = next;
    }
    if (change <= Scalar(1e-16) * b_norm) break;
  }
}

}  // namespace detail

/// Conditional-gradient decomposition of B into product atoms y x^T with
/// x on the boundary of K1 and y on the boundary of K2. The linear
/// minimization oracle alternates closed-form support steps over the two
/// factors from seeded restarts; active-set weights are refit by NNLS every
/// 10 iterations. Success means residual <= tol * |B|_F; a failure carries
/// the best residual and is not evidence of non-separability.
template <typename Scalar>
SeparableDecomposition<Scalar> decompose_separable(const Mat<Scalar>& b,
                                                   const EllipsoidSpec<Scalar>& k1,
                                                   const EllipsoidSpec<Scalar>& k2,
                                                   Index budget = 400, Scalar tol = 1e-8,
                                                   std::uint64_t seed = 0) {
  if (b.cols() != k1.dim() || b.rows() != k2.dim())
    throw std::invalid_argument("decompose_separable: B shape must be dim(K2) x dim(K1)");
  const Index m = b.cols(), n = b.rows();
  const Scalar b_norm = b.norm();
  const Scalar target = tol * b_norm;

  SeparableDecomposition<Scalar> out;
  if (b_norm == Scalar(0)) {
    out.success = true;
    return out;
  }

  const Mat<Scalar> p1_inv = k1.inverse();
  const Mat<Scalar> p2_inv = k2.inverse();

  Vec<Scalar> e1x = Vec<Scalar>::Zero(m);
  e1x[0] = Scalar(1);
  if (m > 1) e1x[1] = Scalar(1) / std::sqrt(k1.P()(0, 0));
  Vec<Scalar> e1y = Vec<Scalar>::Zero(n);
  e1y[0] = Scalar(1);
  if (n > 1) e1y[1] = Scalar(1) / std::sqrt(k2.P()(0, 0));

  std::vector<Vec<Scalar>> xs, ys;
  std::vector<Mat<Scalar>> atoms;
  Vec<Scalar> w(0), rhs(0);
  Mat<Scalar> gram(0, 0);
  Mat<Scalar> residual = b;
  Scalar best_residual = b_norm;
  const int restarts = 8;

  const auto rebuild_residual = [&] {
    residual = b;
    for (std::size_t i = 0; i < atoms.size(); ++i) residual -= w[i] * atoms[i];
  };

  // Alternating support steps for the atom maximizing <target, y x^T>.
  const auto alternate_from = [&](const Mat<Scalar>& target, Vec<Scalar> x, Vec<Scalar> y) {
    Scalar score = -b_norm;
    for (int it = 0; it < 256; ++it) {
      x = detail::support_step(Vec<Scalar>(target.transpose() * y), p1_inv, x);
      y = detail::support_step(Vec<Scalar>(target * x), p2_inv, y);
      const Scalar next = y.dot(target * x);
      if (next - score <= Scalar(1e-16) * b_norm) {
        score = next;
        break;
      }
      score = next;
    }
    return std::make_tuple(x, y, score);
  };

  const auto lmo = [&](std::uint64_t stream) {
    Vec<Scalar> best_x = e1x, best_y = e1y;
    Scalar best_score = best_y.dot(residual * best_x);
    for (int r = -1; r < restarts; ++r) {
      Vec<Scalar> y(n);
      if (r < 0) {  // deterministic start: dominant structure of the residual
        Eigen::JacobiSVD<Mat<Scalar>> svd(residual, Eigen::ComputeThinU);
        y = detail::support_step(Vec<Scalar>(svd.matrixU().col(0)), p2_inv, e1y);
      } else {
        Rng rng(derive_seed(seed, stream * 131 + static_cast<std::uint64_t>(r)));
        Vec<Scalar> g = rng.gaussian_vector<Scalar>(n);
        g[0] = Scalar(1);
        y = detail::support_step(g, p2_inv, e1y);
      }
      auto [x, yy, score] = alternate_from(residual, e1x, y);
      // Antipodal sign variants of the converged pair.
      for (int sx = 0; sx < 2; ++sx) {
        for (int sy = 0; sy < 2; ++sy) {
          Vec<Scalar> xv = x, yv = yy;
          if (sx) xv.tail(m - 1) = -xv.tail(m - 1);
          if (sy) yv.tail(n - 1) = -yv.tail(n - 1);
          const Scalar sc = yv.dot(residual * xv);
          if (sc > best_score) {
            best_score = sc;
            best_x = xv;
            best_y = yv;
          }
        }
      }
    }
    return std::make_tuple(best_x, best_y, best_score);
  };

  const auto refresh_gram = [&] {
    const Index k = static_cast<Index>(atoms.size());
    gram.resize(k, k);
    rhs.resize(k);
    for (Index i = 0; i < k; ++i) {
      rhs[i] = (b.cwiseProduct(atoms[i])).sum();
      for (Index j = 0; j <= i; ++j)
        gram(i, j) = gram(j, i) = (atoms[i].cwiseProduct(atoms[j])).sum();
    }
  };

  // Drops atoms whose weight is negligible and compacts the active set.
  const auto prune = [&] {
    Scalar wmax = Scalar(0);
    for (Index i = 0; i < w.size(); ++i) wmax = std::max(wmax, w[i]);
    std::size_t keep = 0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if (w[i] > Scalar(1e-13) * wmax) {
        xs[keep] = xs[i];
        ys[keep] = ys[i];
        atoms[keep] = atoms[i];
        w[keep] = w[i];
        ++keep;
      }
    }
    if (keep == atoms.size()) return;
    xs.resize(keep);
    ys.resize(keep);
    atoms.resize(keep);
    w.conservativeResize(static_cast<Index>(keep));
    refresh_gram();
  };

  // Cyclic atom replacement: re-fit each active atom against its partial
  // residual. A rank-1 partial makes the alternation exact, so a correct
  // active set collapses to the exact decomposition.
  const auto refine_atoms = [&](int max_passes) {
    bool any_change = false;
    for (int pass = 0; pass < max_passes; ++pass) {
      if (residual.norm() <= target) break;
      bool changed = false;
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (w[i] <= Scalar(0)) continue;
        const Mat<Scalar> partial = residual + w[i] * atoms[i];
        auto [x, y, score] = alternate_from(partial, xs[i], ys[i]);
        if (score <= Scalar(0)) continue;
        const Mat<Scalar> atom = y * x.transpose();
        const Scalar w_new = std::max(Scalar(0), score / atom.squaredNorm());
        const Scalar old_err = (partial - w[i] * atoms[i]).squaredNorm();
        const Scalar new_err = (partial - w_new * atom).squaredNorm();
        if (new_err < old_err - Scalar(1e-18) * b_norm * b_norm) {
          xs[i] = x;
          ys[i] = y;
          atoms[i] = atom;
          w[i] = w_new;
          for (std::size_t j = 0; j < atoms.size(); ++j)
            gram(i, j) = gram(j, i) = (atoms[i].cwiseProduct(atoms[j])).sum();
          rhs[i] = (b.cwiseProduct(atom)).sum();
          residual = partial - w_new * atom;
          changed = true;
        }
      }
      if (!changed) break;
      any_change = true;
      if ((pass + 1) % 8 == 0) {
        detail::nnls_refit(gram, rhs, w, b_norm);
        rebuild_residual();
      }
    }
    if (any_change) {
      detail::nnls_refit(gram, rhs, w, b_norm);
      rebuild_residual();
    }
    return any_change;
  };

  // Backward elimination: drop an atom, let refinement redistribute its
  // mass, keep the removal when the fit does not degrade. Clears the
  // near-duplicate clusters that pin cyclic refinement in flat minima.
  const auto try_eliminate = [&] {
    if (atoms.size() > 48) return;
    for (int round = 0; round < 5; ++round) {
      bool removed = false;
      for (std::size_t i = atoms.size(); i-- > 0 && atoms.size() > 1;) {
        const Scalar before = residual.norm();
        if (before <= target) return;
        auto sxs = xs;
        auto sys = ys;
        auto satoms = atoms;
        Vec<Scalar> sw = w;
        xs.erase(xs.begin() + static_cast<std::ptrdiff_t>(i));
        ys.erase(ys.begin() + static_cast<std::ptrdiff_t>(i));
        atoms.erase(atoms.begin() + static_cast<std::ptrdiff_t>(i));
        Vec<Scalar> wr(w.size() - 1);
        for (Index j = 0, t = 0; j < w.size(); ++j)
          if (j != static_cast<Index>(i)) wr[t++] = w[j];
        w = wr;
        refresh_gram();
        rebuild_residual();
        detail::nnls_refit(gram, rhs, w, b_norm);
        rebuild_residual();
        refine_atoms(60);
        if (residual.norm() <= before + Scalar(1e-14) * b_norm) {
          removed = true;
        } else {
          xs = std::move(sxs);
          ys = std::move(sys);
          atoms = std::move(satoms);
          w = std::move(sw);
          refresh_gram();
          rebuild_residual();
        }
      }
      if (!removed) break;
    }
  };

  const auto full_polish = [&] {
    if (atoms.empty()) return;
    detail::nnls_refit(gram, rhs, w, b_norm);
    rebuild_residual();
    refine_atoms(300);
    try_eliminate();
    refine_atoms(300);
    prune();
    rebuild_residual();
  };

  Index it = 0;
  Index last_progress = 0;
  for (; it < budget; ++it) {
    best_residual = residual.norm();
    if (best_residual <= target) break;
    if (it - last_progress > 30) break;  // stalled

    auto [x, y, score] = lmo(static_cast<std::uint64_t>(it));
    if (score <= Scalar(1e-13) * b_norm && !atoms.empty()) {
      // Overweighted atoms can block every ascent direction; polish the
      // active set before giving up.
      full_polish();
      if (residual.norm() <= target) break;
      if (residual.norm() < best_residual - Scalar(1e-15) * b_norm) last_progress = it;
      std::tie(x, y, score) = lmo(static_cast<std::uint64_t>(it) + 0x5000);
    }
    if (score <= Scalar(1e-13) * b_norm) break;  // no improving cone direction

    const Mat<Scalar> atom = y * x.transpose();
    // Merge near-duplicates instead of growing the active set.
    Index idx = -1;
    const Scalar atom_norm2 = atom.squaredNorm();
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const Scalar cos = (atoms[i].cwiseProduct(atom)).sum() /
                         std::sqrt(atoms[i].squaredNorm() * atom_norm2);
      if (cos > Scalar(1) - Scalar(1e-12)) {
        idx = static_cast<Index>(i);
        break;
      }
    }
    if (idx < 0) {
      xs.push_back(x);
      ys.push_back(y);
      atoms.push_back(atom);
      const Index k = static_cast<Index>(atoms.size());
      gram.conservativeResize(k, k);
      rhs.conservativeResize(k);
      w.conservativeResize(k);
      for (Index i = 0; i < k; ++i) {
        gram(k - 1, i) = gram(i, k - 1) = (atoms[i].cwiseProduct(atom)).sum();
      }
      rhs[k - 1] = (b.cwiseProduct(atom)).sum();
      w[k - 1] = Scalar(0);
      idx = k - 1;
    }
    // Exact line search on the selected atom, then a light polish; full
    // NNLS refit and prune every 10 steps.
    const Scalar step = (residual.cwiseProduct(atoms[idx])).sum() / atoms[idx].squaredNorm();
    w[idx] = std::max(Scalar(0), w[idx] + step);
    rebuild_residual();
    refine_atoms(4);
    if ((it + 1) % 10 == 0) {
      detail::nnls_refit(gram, rhs, w, b_norm);
      prune();
      rebuild_residual();
    }
    if (residual.norm() < best_residual - Scalar(1e-15) * b_norm) last_progress = it;
  }

  full_polish();
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (w[i] > Scalar(0)) {
      out.weights.push_back(w[i]);
      out.generators.emplace_back(xs[i], ys[i]);
    }
  }
  out.iterations = it;
  out.residual = (b - out.reconstruction(n, m)).norm();
  out.success = out.residual <= target;
  return out;
}

enum class Witness { CertifiedNonSeparable, Inconclusive };

inline const char* to_string(Witness w) {
  return w == Witness::CertifiedNonSeparable ? "certified-non-separable" : "inconclusive";
}

template <typename Scalar>
struct WitnessVerdict {
  Scalar pairing = Scalar(0);
  bool map_positive = false;
  Witness verdict = Witness::Inconclusive;
};

/// Entanglement-witness check: a certified positive map M with
/// <B, M> < -tol proves B lies outside the separable cone.
template <typename Scalar>
WitnessVerdict<Scalar> dual_witness(const Mat<Scalar>& b, const Mat<Scalar>& m,
                                    Scalar tol = 1e-9) {
  WitnessVerdict<Scalar> out;
  out.pairing = pairing(b, m);
  if (m.norm() != Scalar(0))
    out.map_positive = certify_positivity(m, Scalar(1e-9)).positive;
  if (out.map_positive && out.pairing < -tol) out.verdict = Witness::CertifiedNonSeparable;
  return out;
}

/// Rejection sampler for L_m-to-L_n positive maps: blocks drawn inside the
/// necessary region |h| <= 1, |v| <= 1, sigma_max(A) <= 1, kept when the
/// certificate accepts. Returns nullopt when max_tries is exhausted.
template <typename Scalar>
std::optional<Mat<Scalar>> sample_positive_map(Rng& rng, Index m, Index n,
                                               int max_tries = 200) {
  for (int t = 0; t < max_tries; ++t) {
    RowVec<Scalar> h = rng.unit_vector<Scalar>(m - 1).transpose() *
                       static_cast<Scalar>(rng.uniform());
    Vec<Scalar> v = rng.unit_vector<Scalar>(n - 1) * static_cast<Scalar>(rng.uniform());
    Mat<Scalar> a = rng.gaussian_matrix<Scalar>(n - 1, m - 1);
    Eigen::JacobiSVD<Mat<Scalar>> svd(a);
    const Scalar smax = svd.singularValues().size() ? svd.singularValues()[0] : Scalar(0);
    if (smax > Scalar(0)) a *= static_cast<Scalar>(rng.uniform()) / smax;
    Mat<Scalar> cand = assemble_map<Scalar>(Scalar(1), h, v, a);
    if (certify_positivity(cand, Scalar(1e-10)).positive) return cand;
  }
  return std::nullopt;
}

/// Best dual objective found over seeded certified-positive samples, the two
/// constructed optimizers, and certificate-respecting coordinate ascent.
template <typename Scalar>
Scalar random_search_fmax(const EllipsoidSpec<Scalar>& p1, const EllipsoidSpec<Scalar>& p2,
                          Index budget = 500, std::uint64_t seed = 0) {
  const Index m = p1.dim(), n = p2.dim();
  Rng rng(derive_seed(seed, 0x464d4158ULL));

  Mat<Scalar> best_map = rank1_optimizer(p1, p2);
  Scalar best = dual_objective(best_map, p1, p2);
  {
    const Mat<Scalar> ds = ds_optimizer(p1, p2);
    const Scalar f = dual_objective(ds, p1, p2);
    if (f > best) {
      best = f;
      best_map = ds;
    }
  }

  const Index samples = std::max<Index>(budget / 2, 1);
  for (Index i = 0; i < samples; ++i) {
    const auto cand = sample_positive_map<Scalar>(rng, m, n, 50);
    if (!cand) continue;
    const Scalar f = dual_objective(*cand, p1, p2);
    if (f > best) {
      best = f;
      best_map = *cand;
    }
  }

  // Coordinate ascent over (h, v, A) entries, accepting only certified steps.
  Mat<Scalar> cur = best_map;
  Scalar cur_f = best;
  Scalar step = Scalar(0.1);
  Index evals = 0;
  const Index eval_cap = budget;
  while (step > Scalar(1e-7) && evals < eval_cap) {
    bool improved = false;
    for (Index r = 0; r < n && evals < eval_cap; ++r) {
      for (Index c = 0; c < m && evals < eval_cap; ++c) {
        if (r == 0 && c == 0) continue;
        for (const Scalar dir : {step, -step}) {
          Mat<Scalar> cand = cur;
          cand(r, c) += dir;
          ++evals;
          if (!certify_positivity(cand, Scalar(1e-12)).positive) continue;
          const Scalar f = dual_objective(cand, p1, p2);
          if (f > cur_f) {
            cur = cand;
            cur_f = f;
            improved = true;
            break;
          }
        }
      }
    }
    if (!improved) step *= Scalar(0.5);
  }
  return std::max(best, cur_f);
}

/// Residual norms of the two first-order stationarity identities
///   A P1 h^T = [(I + P2)^{-1} F - I] v
///   A^T P2 v = [(I + P1)^{-1} F - I] h^T
/// with F = 1 + dual_objective(M).
template <typename Scalar>
std::pair<Scalar, Scalar> stationarity_residual(const Mat<Scalar>& m,
                                                const EllipsoidSpec<Scalar>& p1,
                                                const EllipsoidSpec<Scalar>& p2) {
  const Scalar fmax = Scalar(1) + dual_objective(m, p1, p2);
  const RowVec<Scalar> h = block_h(m);
  const Vec<Scalar> v = block_v(m);
  const Mat<Scalar> a = block_A(m);
  const Index dm = m.cols() - 1, dn = m.rows() - 1;
  const Mat<Scalar> in = Mat<Scalar>::Identity(dn, dn);
  const Mat<Scalar> im = Mat<Scalar>::Identity(dm, dm);
  const Vec<Scalar> lhs1 = a * p1.P() * h.transpose();
  const Vec<Scalar> rhs1 = ((in + p2.P()).inverse() * fmax - in) * v;
  const Vec<Scalar> lhs2 = a.transpose() * p2.P() * v;
  const Vec<Scalar> rhs2 = ((im + p1.P()).inverse() * fmax - im) * h.transpose();
  return {(lhs1 - rhs1).norm(), (lhs2 - rhs2).norm()};
}

}  // namespace sepcone
