#include <doctest.h>

#include <Eigen/Dense>

#include "sepcone/oracle.hpp"
#include "sepcone/radii.hpp"
#include "sepcone/rng.hpp"
#include "test_support.hpp"

using namespace sepcone;
using dvec = Vec<double>;
using dmat = Mat<double>;
using drow = RowVec<double>;

namespace {

EllipsoidSpec<double> spec_of(const dmat& p) { return EllipsoidSpec<double>(p); }

EllipsoidSpec<double> diag_spec(std::initializer_list<double> d) {
  dvec v(static_cast<Index>(d.size()));
  Index i = 0;
  for (double x : d) v[i++] = x;
  return EllipsoidSpec<double>(dmat(v.asDiagonal()));
}

}  // namespace

TEST_SUITE("radii") {

TEST_CASE("dual objective evaluates the closed form") {
  const auto id3 = spec_of(dmat::Identity(3, 3));
  const dmat ds = assemble_map<double>(1.0, drow::Zero(3), dvec::Zero(3),
                                       dmat(dmat::Identity(3, 3)));
  CHECK(dual_objective(ds, id3, id3) == doctest::Approx(3.0));

  drow h(3);
  h << 1, 0, 0;
  dvec v(3);
  v << 0, 0, 1;
  const dmat rk1 = assemble_map<double>(1.0, h, v, dmat(v * h));
  CHECK(dual_objective(rk1, id3, id3) == doctest::Approx(3.0));

  const dmat trivial = assemble_map<double>(1.0, drow::Zero(3), dvec::Zero(3),
                                            dmat(dmat::Zero(3, 3)));
  CHECK(dual_objective(trivial, id3, id3) == 0.0);

  dmat not_normalized = ds;
  not_normalized(0, 0) = 2.0;
  CHECK_THROWS_AS(dual_objective(not_normalized, id3, id3), std::invalid_argument);
  CHECK_THROWS_AS(dual_objective(ds, id3, spec_of(dmat::Identity(2, 2))),
                  std::invalid_argument);
}

TEST_CASE("f_max picks the dominating branch") {
  const auto id3 = spec_of(dmat::Identity(3, 3));
  const auto tie = f_max(id3, id3);
  CHECK(tie.value == doctest::Approx(3.0));
  CHECK(tie.branch == RadiusBranch::Rank1);  // tie reports the rank-1 branch

  const auto scalar4 = diag_spec({4.0});
  const auto big = f_max(scalar4, scalar4);
  CHECK(big.value == doctest::Approx(24.0));
  CHECK(big.branch == RadiusBranch::Rank1);

  const auto p1 = diag_spec({1.0, 1.0});
  const auto p2 = diag_spec({9.0, 0.01});
  const auto mixed = f_max(p1, p2);
  CHECK(mixed.value == doctest::Approx(19.0));
  CHECK(mixed.branch == RadiusBranch::Rank1);
}

TEST_CASE("separable ball radius") {
  const auto id3 = spec_of(dmat::Identity(3, 3));
  const auto rep = separable_ball_radius(id3, id3);
  CHECK(rep.rho == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(rep.rho == doctest::Approx(1.0 / std::sqrt(1.0 + rep.f_max)).epsilon(1e-14));

  const auto tiny = separable_ball_radius(diag_spec({1e-12}), diag_spec({1e-12}));
  CHECK(tiny.rho == doctest::Approx(1.0).epsilon(1e-9));

  const auto scalar = separable_ball_radius(diag_spec({1.0}), diag_spec({1.0}));
  CHECK(scalar.rho == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("aperture relation round-trips") {
  for (double rho = 0.1; rho < 0.95; rho += 0.1) {
    CHECK(rho_from_aperture(aperture_from_rho(rho)) == doctest::Approx(rho).epsilon(1e-14));
  }
}

TEST_CASE("ball-ball radius") {
  const double r = ball_ball_radius(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), Index(3),
                                    Index(3));
  CHECK(r == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(ball_ball_radius(0.999999, 0.999999, Index(4), Index(4)) ==
        doctest::Approx(1.0).epsilon(1e-4));
  CHECK_THROWS_AS(ball_ball_radius(1.2, 0.5, Index(3), Index(3)), std::invalid_argument);

  // agreement with the ellipsoidal closed form through the aperture relation
  for (int i = 1; i <= 5; ++i) {
    for (int j = 1; j <= 5; ++j) {
      const double rho1 = 0.15 * i, rho2 = 0.15 * j;
      const Index m = 4, n = 5;
      const double direct = ball_ball_radius(rho1, rho2, m, n);
      const auto p1 = spec_of(dmat::Identity(m - 1, m - 1) * (1.0 / (rho1 * rho1) - 1.0));
      const auto p2 = spec_of(dmat::Identity(n - 1, n - 1) * (1.0 / (rho2 * rho2) - 1.0));
      CHECK(separable_ball_radius(p1, p2).rho == doctest::Approx(direct).epsilon(1e-13));
    }
  }
}

TEST_CASE("matrix ball radius") {
  CHECK(matrix_ball_radius(Index(2), Index(2), 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(matrix_ball_radius(Index(2), Index(4), 1.0, 1.0) ==
        doctest::Approx(std::sqrt(0.8)).epsilon(1e-15));
  const double small = matrix_ball_radius(Index(50), Index(50), 1e-3, 1e-3);
  CHECK(std::abs(small - 1e-6 / 50.0) <= 1e-3 * small);
  CHECK_THROWS_AS(matrix_ball_radius(Index(2), Index(2), 1.5, 1.0), std::invalid_argument);
}

TEST_CASE("multi-qubit bound") {
  CHECK(multiqubit_bound(1) == 1.0);
  CHECK(multiqubit_bound(2) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(multiqubit_bound(3) == doctest::Approx(std::sqrt(0.8)).epsilon(1e-15));
  CHECK_THROWS_AS(multiqubit_bound(0), std::invalid_argument);
  CHECK_THROWS_AS(multiqubit_bound_recursive(0), std::invalid_argument);

  for (int k = 1; k <= 30; ++k) {
    const double closed = multiqubit_bound(k);
    const double rec = multiqubit_bound_recursive(k);
    CHECK(std::abs(closed - rec) <= 1e-12 * closed);
  }
  // the large-k paths (log-space closed form, inverse-square recurrence) agree
  for (int k : {41, 60, 200}) {
    const double closed = multiqubit_bound(k);
    const double rec = multiqubit_bound_recursive(k);
    CHECK(std::abs(closed - rec) <= 1e-11 * closed);
  }
}

TEST_CASE("constructed optimizers attain their branch values") {
  const auto id3 = spec_of(dmat::Identity(3, 3));
  CHECK(dual_objective(rank1_optimizer(id3, id3), id3, id3) == doctest::Approx(3.0));

  const auto p1 = diag_spec({2.0, 1.0});
  const auto p2 = diag_spec({3.0, 1.0});
  const dmat ds = ds_optimizer(p1, p2);
  const dmat rk1 = rank1_optimizer(p1, p2);
  CHECK(dual_objective(ds, p1, p2) == doctest::Approx(7.0).epsilon(1e-10));
  CHECK(dual_objective(rk1, p1, p2) == doctest::Approx(11.0).epsilon(1e-10));
  CHECK(f_max(p1, p2).branch == RadiusBranch::Rank1);
  CHECK(certify_positivity(ds).positive);
  CHECK(certify_positivity(rk1).positive);
}

TEST_CASE("optimizers attain f_max on random ellipsoid pairs") {
  Rng rng(6);
  for (int t = 0; t < 25; ++t) {
    const Index m = 3 + static_cast<Index>(rng.bits() % 3);
    const Index n = 3 + static_cast<Index>(rng.bits() % 3);
    const auto p1 = spec_of(testing::random_spd(rng, m - 1));
    const auto p2 = spec_of(testing::random_spd(rng, n - 1));
    const auto fm = f_max(p1, p2);
    const double attained = std::max(dual_objective(rank1_optimizer(p1, p2), p1, p2),
                                     dual_objective(ds_optimizer(p1, p2), p1, p2));
    CHECK(attained == doctest::Approx(fm.value).epsilon(1e-10));
    CHECK(certify_positivity(rank1_optimizer(p1, p2)).positive);
    CHECK(certify_positivity(ds_optimizer(p1, p2)).positive);
  }
}

TEST_CASE("dual objective of certified maps never exceeds f_max") {
  Rng rng(8);
  int checked = 0;
  while (checked < 500) {
    const Index m = 3 + static_cast<Index>(rng.bits() % 2);
    const Index n = 3 + static_cast<Index>(rng.bits() % 2);
    const auto cand = sample_positive_map<double>(rng, m, n, 50);
    if (!cand) continue;
    ++checked;
    const auto p1 = spec_of(testing::random_spd(rng, m - 1, 0.3, 3.0));
    const auto p2 = spec_of(testing::random_spd(rng, n - 1, 0.3, 3.0));
    CHECK(dual_objective(*cand, p1, p2) <= f_max(p1, p2).value + 1e-8);
  }
}

TEST_CASE("rho is nonincreasing in every eigenvalue") {
  Rng rng(15);
  for (int t = 0; t < 40; ++t) {
    dvec e1 = dvec::Zero(3), e2 = dvec::Zero(4);
    for (Index i = 0; i < 3; ++i) e1[i] = rng.uniform(0.1, 4.0);
    for (Index i = 0; i < 4; ++i) e2[i] = rng.uniform(0.1, 4.0);
    const double base =
        separable_ball_radius(spec_of(dmat(e1.asDiagonal())), spec_of(dmat(e2.asDiagonal()))).rho;
    const Index bump = static_cast<Index>(rng.bits() % 3);
    e1[bump] += rng.uniform(0.0, 1.0);
    const double bumped =
        separable_ball_radius(spec_of(dmat(e1.asDiagonal())), spec_of(dmat(e2.asDiagonal()))).rho;
    CHECK(bumped <= base + 1e-15);
  }
}

TEST_CASE("stationarity residuals vanish at the constructed optimizers") {
  Rng rng(33);
  for (int t = 0; t < 10; ++t) {
    const Index m = 3 + static_cast<Index>(rng.bits() % 3);
    const Index n = 3 + static_cast<Index>(rng.bits() % 3);
    const auto p1 = spec_of(testing::random_spd(rng, m - 1));
    const auto p2 = spec_of(testing::random_spd(rng, n - 1));

    const auto [ds1, ds2] = stationarity_residual(ds_optimizer(p1, p2), p1, p2);
    CHECK(ds1 == 0.0);  // h = v = 0 makes both sides vanish identically
    CHECK(ds2 == 0.0);

    const auto [r1, r2] = stationarity_residual(rank1_optimizer(p1, p2), p1, p2);
    CHECK(r1 <= 1e-8);
    CHECK(r2 <= 1e-8);
  }
}

}  // TEST_SUITE
