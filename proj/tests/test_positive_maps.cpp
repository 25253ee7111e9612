#include <doctest.h>

#include <Eigen/Dense>

#include "sepcone/cones.hpp"
#include "sepcone/positive_maps.hpp"
#include "sepcone/rng.hpp"
#include "test_support.hpp"

using namespace sepcone;
using dvec = Vec<double>;
using dmat = Mat<double>;
using drow = RowVec<double>;

namespace {

dmat rank_one_map(double s, const drow& h, const dvec& v) {
  return assemble_map<double>(s, h, v, dmat(v * h));
}

}  // namespace

TEST_SUITE("positive_maps") {

TEST_CASE("partition blocks tile the matrix") {
  Rng rng(1);
  const dmat m = rng.gaussian_matrix(4, 3);
  const dmat again = assemble_map<double>(block_s(m), drow(block_h(m)), dvec(block_v(m)),
                                          dmat(block_A(m)));
  CHECK((m - again).norm() == 0.0);
}

TEST_CASE("identity map certifies with lambda = 1, min_eig = 0") {
  const auto res = certify_positivity(dmat(dmat::Identity(4, 4)));
  REQUIRE(res.positive);
  CHECK(res.certificate.lambda == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(res.certificate.min_eig) <= 1e-9);
  CHECK(res.certificate.h_norm_ok);
}

TEST_CASE("rank-1 map with |h| = |v| = s is positive") {
  drow h(2);
  h << 1, 0;
  dvec v(2);
  v << 0, 1;
  CHECK(certify_positivity(rank_one_map(1.0, h, v)).positive);
}

TEST_CASE("doubly stochastic map with sigma_max > 1 is rejected with a witness") {
  const dmat m = 1.1 * dmat::Identity(4, 4) + dmat::Identity(4, 4) * 0.0;
  dmat ds = dmat::Identity(4, 4);
  ds.bottomRightCorner(3, 3) *= 1.1;
  const auto res = certify_positivity(ds);
  CHECK(!res.positive);
  const auto witness = positivity_witness(ds);
  REQUIRE(witness.has_value());
  CHECK(lorentz_membership(*witness) != Region::Outside);
  CHECK(lorentz_membership(dvec(ds * *witness)) == Region::Outside);
}

TEST_CASE("zero map and bad shapes raise") {
  CHECK_THROWS_AS(certify_positivity(dmat(dmat::Zero(3, 3))), std::invalid_argument);
  CHECK_THROWS_AS(certify_positivity(dmat(dmat::Ones(1, 3))), std::invalid_argument);
  dmat neg = dmat::Identity(3, 3);
  neg(0, 0) = -1.0;
  const auto res = certify_positivity(neg);
  CHECK(!res.positive);
  CHECK(res.failing_check == doctest::String("s"));
}

TEST_CASE("witness for the sig-max construction pairs negatively") {
  dvec d(4);
  d << 1, 1.2, 1, 1;
  const dmat m = d.asDiagonal();
  const auto witness = positivity_witness(m);
  REQUIRE(witness.has_value());
  // top singular pair of A is (e_1, e_1); the dual vector (1, -u) certifies
  Eigen::JacobiSVD<dmat> svd(dmat(block_A(m)), Eigen::ComputeThinU | Eigen::ComputeThinV);
  dvec u = svd.matrixU().col(0);
  dvec y(4);
  y[0] = 1.0;
  y.tail(3) = -u;
  CHECK(y.dot(m * *witness) < 0.0);
}

TEST_CASE("identity has no witness") {
  CHECK(!positivity_witness(dmat(dmat::Identity(4, 4))).has_value());
}

TEST_CASE("witness for |h| > s") {
  drow h(2);
  h << 1.05, 0;
  const dmat m = assemble_map<double>(1.0, h, dvec::Zero(2), dmat::Zero(2, 2));
  const auto witness = positivity_witness(m);
  REQUIRE(witness.has_value());
  CHECK((m * *witness)[0] < 0.0);
}

TEST_CASE("canonical extreme maps") {
  const auto m1 = canonical_extreme<double>(ExtremeType::TypeI, 3, 3);
  dmat want(3, 3);
  want << 1, 1, 0, 1, 1, 0, 0, 0, 0;
  CHECK((m1.matrix - want).norm() == 0.0);
  CHECK(m1.extreme);

  const auto m2 = canonical_extreme<double>(ExtremeType::TypeII, 3, 4);
  CHECK(m2.matrix.rows() == 4);
  CHECK(m2.matrix.cols() == 3);
  CHECK((m2.matrix.topRows(3) - dmat::Identity(3, 3)).norm() == 0.0);
  CHECK(m2.matrix.row(3).norm() == 0.0);
  CHECK(m2.extreme);

  const auto m2_flat = canonical_extreme<double>(ExtremeType::TypeII, 2, 2);
  CHECK((m2_flat.matrix - dmat::Identity(2, 2)).norm() == 0.0);
  CHECK(!m2_flat.extreme);
}

TEST_CASE("rank-1 extremality needs |h| = |v| = s") {
  drow h(2);
  h << 1, 0;
  dvec v(2);
  v << 0, 1;
  CHECK(is_rank_one_extreme(rank_one_map(1.0, h, v)));
  drow h2(2);
  h2 << 0.5, 0;
  CHECK(!is_rank_one_extreme(rank_one_map(1.0, h2, v)));
  CHECK(!is_rank_one_extreme(canonical_extreme<double>(ExtremeType::TypeII, 3, 3).matrix));
}

TEST_CASE("classification of the canonical forms") {
  CHECK(classify_extreme(canonical_extreme<double>(ExtremeType::TypeI, 4, 4).matrix).tag ==
        ExtremeTag::TypeI);
  CHECK(classify_extreme(canonical_extreme<double>(ExtremeType::TypeII, 4, 4).matrix).tag ==
        ExtremeTag::TypeII);
  CHECK(classify_extreme(dmat(dmat::Identity(2, 2))).tag == ExtremeTag::NotExtreme);
  CHECK(classify_extreme(dmat(-dmat::Identity(3, 3))).tag == ExtremeTag::NotPositive);
}

TEST_CASE("classification is invariant under cone automorphisms") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto un = random_automorphism<double>(derive_seed(s, 1), 4);
    const auto um = random_automorphism<double>(derive_seed(s, 2), 4);
    const dmat m2 = canonical_extreme<double>(ExtremeType::TypeII, 4, 4).matrix;
    const dmat conj2 = un.matrix * m2 * um.matrix;
    CHECK(classify_extreme(conj2, 1e-7).tag == ExtremeTag::TypeII);
    const dmat m1 = canonical_extreme<double>(ExtremeType::TypeI, 4, 4).matrix;
    const dmat conj1 = un.matrix * m1 * um.matrix;
    CHECK(classify_extreme(conj1, 1e-7).tag == ExtremeTag::TypeI);
  }
}

TEST_CASE("identity at m = n = 2 splits into two rank-1 positive maps") {
  const auto cls = classify_extreme(dmat(dmat::Identity(2, 2)));
  CHECK(cls.tag == ExtremeTag::NotExtreme);
  REQUIRE(cls.split.has_value());
  const auto& [first, second] = *cls.split;
  CHECK((0.5 * (first + second) - dmat::Identity(2, 2)).norm() <= 1e-14);
  CHECK(numerical_rank(first) == 1);
  CHECK(numerical_rank(second) == 1);
  CHECK(certify_positivity(first).positive);
  CHECK(certify_positivity(second).positive);
}

TEST_CASE("doubly stochastic check") {
  CHECK(doubly_stochastic_check(canonical_extreme<double>(ExtremeType::TypeII, 4, 4).matrix));
  CHECK(!doubly_stochastic_check(canonical_extreme<double>(ExtremeType::TypeI, 4, 4).matrix));
  dvec d(3);
  d << 1, 0.5, 0.5;
  const dmat m = d.asDiagonal();
  CHECK(doubly_stochastic_check(m));
  CHECK(certify_positivity(m).positive);
}

TEST_CASE("positivity is self-dual under transposition") {
  Rng rng(99);
  int positives = 0;
  for (int t = 0; t < 200; ++t) {
    const Index m = 2 + static_cast<Index>(rng.bits() % 3);
    const Index n = 2 + static_cast<Index>(rng.bits() % 3);
    const dmat map = testing::random_mixed_map(rng, m, n);
    const bool forward = certify_positivity(map).positive;
    const bool adjoint = certify_positivity(dmat(map.transpose())).positive;
    CHECK(forward == adjoint);
    positives += forward;
  }
  CHECK(positives > 10);        // the generator must exercise both verdicts
  CHECK(positives < 190);
}

TEST_CASE("certified maps obey the singular-value bound") {
  Rng rng(123);
  int checked = 0;
  for (int t = 0; t < 200; ++t) {
    const dmat map = testing::random_mixed_map(rng, 4, 4);
    if (!certify_positivity(map).positive) continue;
    Eigen::JacobiSVD<dmat> svd(dmat(block_A(map)));
    CHECK(svd.singularValues()[0] <= block_s(map) * (1.0 + 1e-8));
    ++checked;
  }
  CHECK(checked > 10);
}

TEST_CASE("higher-rank certified maps send the interior to the interior") {
  Rng rng(77);
  int checked = 0;
  while (checked < 12) {
    const dmat map = testing::random_mixed_map(rng, 4, 4);
    if (!certify_positivity(map).positive) continue;
    if (numerical_rank(map) < 2) continue;
    ++checked;
    for (int t = 0; t < 50; ++t) {
      dvec x(4);
      x[0] = 1.0;
      x.tail(3) = rng.unit_vector(3) * rng.uniform(0.0, 0.9);
      CHECK(lorentz_membership(dvec(map * x), 1e-12) == Region::Interior);
    }
  }
}

TEST_CASE("slemma objective is concave in lambda") {
  Rng rng(2024);
  for (int t = 0; t < 100; ++t) {
    const dmat map = testing::random_mixed_map(rng, 4, 4);
    const dmat gram = normalized_gram(map);
    const double ub = std::max(gram(0, 0), 0.0);
    if (ub <= 0.0) continue;
    dvec vals(50);
    for (int i = 0; i < 50; ++i)
      vals[i] = slemma_objective(gram, ub * static_cast<double>(i) / 49.0);
    for (int i = 1; i + 1 < 50; ++i)
      CHECK(vals[i] >= 0.5 * (vals[i - 1] + vals[i + 1]) - 1e-9);
  }
}

TEST_CASE("extremality oracle: extreme maps admit no two-sided direction") {
  const dmat m1 = canonical_extreme<double>(ExtremeType::TypeI, 3, 3).matrix;
  CHECK(testing::extremality_epsilon(m1, 5) < 1e-4);
  const dmat m2 = canonical_extreme<double>(ExtremeType::TypeII, 3, 3).matrix;
  CHECK(testing::extremality_epsilon(m2, 6) < 1e-4);
}

TEST_CASE("extremality oracle: the lemma counterexamples move freely") {
  // rank 1 with |h| < s: wiggle the h block
  drow h(2);
  h << 0.5, 0;
  dvec v(2);
  v << 0, 1;
  const dmat short_h = rank_one_map(1.0, h, v);
  dvec col(3);
  col << 1, 0, 1;
  drow hdir(3);
  hdir << 0, 1, 0;
  const dmat delta_h = col * hdir;  // (s; v) (0, h')
  CHECK(testing::extremality_epsilon(short_h, 7, 0, {delta_h}) >= 0.01);

  // doubly stochastic with sigma_min < 1: vary the smallest singular value
  dvec diag(4);
  diag << 1, 1, 1, 0.4;
  const dmat ds = diag.asDiagonal();
  dmat delta_sv = dmat::Zero(4, 4);
  delta_sv(3, 3) = 1.0;
  CHECK(testing::extremality_epsilon(ds, 8, 0, {delta_sv}) >= 0.01);

  // min(m,n) = 2 rectangular identity: split direction
  const dmat id2 = dmat::Identity(2, 2);
  dmat delta_split(2, 2);
  delta_split << 0, 1, 1, 0;
  CHECK(testing::extremality_epsilon(id2, 9, 0, {delta_split}) >= 0.01);
}

}  // TEST_SUITE
