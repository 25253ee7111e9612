#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "sepcone/types.hpp"

namespace sepcone {

/// Mixes a base seed with a stream index so that batch jobs get independent,
/// reproducible substreams (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seeded generator with explicit uniform/gaussian transforms. The raw engine
/// is std::mt19937_64 and the transforms are spelled out here, so the sampled
/// sequences are identical across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (polar-free form; deterministic).
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * M_PI * uniform();
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  template <typename Scalar = double>
  Vec<Scalar> gaussian_vector(Index d) {
    Vec<Scalar> g(d);
    for (Index i = 0; i < d; ++i) g[i] = static_cast<Scalar>(gaussian());
    return g;
  }

  template <typename Scalar = double>
  Mat<Scalar> gaussian_matrix(Index rows, Index cols) {
    Mat<Scalar> g(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) g(i, j) = static_cast<Scalar>(gaussian());
    return g;
  }

  /// Uniform direction on the unit sphere S^{d-1}.
  template <typename Scalar = double>
  Vec<Scalar> unit_vector(Index d) {
    Vec<Scalar> g = gaussian_vector<Scalar>(d);
    Scalar n = g.norm();
    while (n == Scalar(0)) {
      g = gaussian_vector<Scalar>(d);
      n = g.norm();
    }
    return g / n;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Haar-ish random orthogonal matrix: QR of a gaussian matrix with the sign
/// ambiguity fixed by the diagonal of R, so the result is a deterministic
/// function of the seed.
template <typename Scalar = double>
Mat<Scalar> random_orthogonal(Rng& rng, Index d) {
  if (d == 0) return Mat<Scalar>(0, 0);
  Mat<Scalar> g = rng.gaussian_matrix<Scalar>(d, d);
  Eigen::HouseholderQR<Mat<Scalar>> qr(g);
  Mat<Scalar> q = qr.householderQ();
  Mat<Scalar> r = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (Index i = 0; i < d; ++i)
    if (r(i, i) < Scalar(0)) q.col(i) = -q.col(i);
  return q;
}

}  // namespace sepcone
