#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "ishigami_oracle.hpp"
#include "uqscale/error.hpp"
#include "uqscale/rng.hpp"
#include "uqscale/sobol.hpp"
#include "uqscale/surrogate.hpp"

using namespace uqscale;

namespace {

// Ground-truth quadratic used in several fits.
double quad3(const Eigen::RowVectorXd& x) {
  return 2.0 + 0.5 * x[0] - 1.5 * x[1] + 0.25 * x[2] + 0.8 * x[0] * x[1] -
         0.3 * x[1] * x[2] + 1.2 * x[0] * x[0] - 0.7 * x[2] * x[2];
}

ParameterSpace box_space() {
  ParameterSpace s;
  s.add({"x1", -2.0, 3.0, 0.0});
  s.add({"x2", 0.5, 1.5, 1.0});
  s.add({"x3", -1.0, 1.0, 0.0});
  return s;
}

Eigen::VectorXd apply(const SampleMatrix& m, double (*f)(const Eigen::RowVectorXd&)) {
  Eigen::VectorXd y(m.rows());
  for (Eigen::Index r = 0; r < m.rows(); ++r) y[r] = f(m.values.row(r));
  return y;
}

}  // namespace

TEST_CASE("term layout and count") {
  CHECK(PolynomialRse::term_count(3, true) == 1 + 3 + 3 + 3);
  CHECK(PolynomialRse::term_count(3, false) == 1 + 3 + 3);
  CHECK(PolynomialRse::term_count(9, true) == 1 + 9 + 36 + 9);
  const auto terms = PolynomialRse::term_layout(2, true);
  REQUIRE(terms.size() == 6);
  CHECK((terms[0].i == -1 && terms[0].j == -1));
  CHECK((terms[1].i == 0 && terms[1].j == -1));
  CHECK((terms[3].i == 0 && terms[3].j == 1));
  CHECK((terms[4].i == 0 && terms[4].j == 0));
}

TEST_CASE("exact quadratic is recovered to machine precision") {
  const SampleMatrix x = lhs_sample(box_space(), 200, 31);
  const Eigen::VectorXd y = apply(x, quad3);
  const PolynomialRse rse = fit_rse(x, y, true);
  CHECK(rse.stats().r_squared >= 1.0 - 1e-9);
  CHECK_FALSE(rse.stats().rank_deficient);
  const SampleMatrix probe = lhs_sample(box_space(), 64, 77);
  for (Eigen::Index r = 0; r < probe.rows(); ++r) {
    const double truth = quad3(probe.values.row(r));
    CHECK(rse.predict(probe.values.row(r)) ==
          doctest::Approx(truth).epsilon(1e-8));
  }
}

TEST_CASE("non-polynomial target records an honest fit quality") {
  const SampleMatrix x = lhs_sample(ishigami::space(), 600, 5);
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    y[r] = ishigami::f(x.values(r, 0), x.values(r, 1), x.values(r, 2));
  const PolynomialRse rse = fit_rse(x, y, true);
  CHECK(rse.stats().r_squared < 1.0);
  CHECK(rse.stats().rmse > 0.0);
}

TEST_CASE("duplicated rows with consistent outputs give the same fit") {
  const SampleMatrix x = lhs_sample(box_space(), 50, 13);
  const Eigen::VectorXd y = apply(x, quad3);
  SampleMatrix x2 = x;
  x2.values.conservativeResize(100, 3);
  x2.values.bottomRows(50) = x.values;
  Eigen::VectorXd y2(100);
  y2 << y, y;
  const PolynomialRse a = fit_rse(x, y, true);
  const PolynomialRse b = fit_rse(x2, y2, true);
  for (Eigen::Index i = 0; i < a.coefficients().size(); ++i)
    CHECK(a.coefficients()[i] == doctest::Approx(b.coefficients()[i]).epsilon(1e-9));

  // independent normal-equation oracle on the duplicated system
  const auto terms = PolynomialRse::term_layout(3, true);
  Eigen::MatrixXd phi(x.rows(), static_cast<Eigen::Index>(terms.size()));
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (std::size_t t = 0; t < terms.size(); ++t) {
      double v = 1.0;
      if (terms[t].i >= 0)
        v *= a.normalization()[static_cast<std::size_t>(terms[t].i)].apply(
            x.values(r, terms[t].i));
      if (terms[t].j >= 0)
        v *= a.normalization()[static_cast<std::size_t>(terms[t].j)].apply(
            x.values(r, terms[t].j));
      phi(r, static_cast<Eigen::Index>(t)) = v;
    }
  const Eigen::VectorXd coeffs_oracle =
      (phi.transpose() * phi).ldlt().solve(phi.transpose() * y);
  for (Eigen::Index i = 0; i < coeffs_oracle.size(); ++i)
    CHECK(a.coefficients()[i] == doctest::Approx(coeffs_oracle[i]).epsilon(1e-7));
}

TEST_CASE("prediction basics") {
  SUBCASE("constant-only surrogate returns the constant everywhere") {
    Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(6);
    coeffs[0] = 4.25;
    const PolynomialRse rse(2, true, {{0.0, 1.0}, {0.0, 1.0}}, coeffs, {});
    Eigen::RowVectorXd p(2);
    p << 0.3, -7.0;
    CHECK(rse.predict(p) == 4.25);
  }
  SUBCASE("affine in each coordinate when squares and interactions are zero") {
    Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(6);
    coeffs[0] = 1.0;
    coeffs[1] = 2.0;
    coeffs[2] = -3.0;
    const PolynomialRse rse(2, true, {{0.0, 1.0}, {0.0, 1.0}}, coeffs, {});
    Eigen::RowVectorXd a(2), b(2), mid(2);
    a << 0.2, 0.4;
    b << -0.6, 0.9;
    mid = 0.5 * (a + b);
    CHECK(rse.predict(mid) ==
          doctest::Approx(0.5 * (rse.predict(a) + rse.predict(b))).epsilon(1e-12));
  }
  SUBCASE("extrapolation is flagged outside the training box") {
    const SampleMatrix x = lhs_sample(box_space(), 100, 3);
    const PolynomialRse rse = fit_rse(x, apply(x, quad3), true);
    Eigen::RowVectorXd inside(3), outside(3);
    inside << 0.0, 1.0, 0.0;
    outside << 5.0, 1.0, 0.0;
    CHECK_FALSE(rse.extrapolates(inside));
    CHECK(rse.extrapolates(outside));
  }
}

TEST_CASE("fit optimality: coordinate perturbations cannot beat the solution") {
  const SampleMatrix x = lhs_sample(box_space(), 120, 41);
  Eigen::VectorXd y = apply(x, quad3);
  // contaminate so the residual is nonzero
  Rng rng(17);
  for (Eigen::Index r = 0; r < y.size(); ++r) y[r] += 0.1 * (rng.uniform01() - 0.5);
  const PolynomialRse rse = fit_rse(x, y, true);

  const auto rmse_of = [&](const Eigen::VectorXd& coeffs) {
    const PolynomialRse probe(3, true, rse.normalization(), coeffs, {});
    double ss = 0.0;
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const double e = probe.predict(x.values.row(r)) - y[r];
      ss += e * e;
    }
    return std::sqrt(ss / static_cast<double>(x.rows()));
  };
  const double best = rmse_of(rse.coefficients());
  CHECK(best == doctest::Approx(rse.stats().rmse).epsilon(1e-9));
  for (int trial = 0; trial < 30; ++trial) {
    Eigen::VectorXd perturbed = rse.coefficients();
    const auto idx = static_cast<Eigen::Index>(rng.index(
        static_cast<std::uint64_t>(perturbed.size())));
    perturbed[idx] += (rng.uniform01() - 0.5) * 0.2;
    CHECK(rmse_of(perturbed) >= best - 1e-12);
  }
}

TEST_CASE("underdetermined fits are rejected") {
  const SampleMatrix x = lhs_sample(box_space(), 5, 3);
  const Eigen::VectorXd y = apply(x, quad3);
  CHECK_THROWS_WITH_AS(fit_rse(x, y, true), "insufficient samples for term count", Error);
}

TEST_CASE("subsample") {
  const SampleMatrix x = lhs_sample(box_space(), 4096, 21);
  const Eigen::VectorXd y = apply(x, quad3);
  SUBCASE("fraction one is the identity") {
    const auto [xs, ys] = subsample(x, y, 1.0, 5);
    CHECK(xs.values == x.values);
    CHECK(ys == y);
  }
  SUBCASE("ten percent of 4096 rows is floor = 409") {
    const auto [xs, ys] = subsample(x, y, 0.1, 5);
    CHECK(xs.rows() == 409);
    CHECK(ys.size() == 409);
  }
  SUBCASE("same seed, same subset; different seed differs") {
    const auto [a, ya] = subsample(x, y, 0.25, 5);
    const auto [b, yb] = subsample(x, y, 0.25, 5);
    CHECK(a.values == b.values);
    const auto [c, yc] = subsample(x, y, 0.25, 6);
    CHECK(a.values != c.values);
  }
  SUBCASE("rows below the requested minimum are rejected") {
    CHECK_THROWS_AS(subsample(x, y, 0.001, 5, 10), Error);
  }
  SUBCASE("subsampled rows come from the original set in order") {
    const auto [xs, ys] = subsample(x, y, 0.02, 9);
    Eigen::Index cursor = 0;
    for (Eigen::Index r = 0; r < xs.rows(); ++r) {
      bool found = false;
      for (; cursor < x.rows(); ++cursor)
        if (x.values.row(cursor) == xs.values.row(r)) {
          found = true;
          ++cursor;
          break;
        }
      CHECK(found);
    }
  }
}

TEST_CASE("surrogate sobol matches direct sobol for an in-class function") {
  const ParameterSpace space = box_space();
  const SaltelliDesign design = saltelli_design(space, 2048, 55, false);
  const SampleMatrix flat = flatten_for_evaluation(design);
  const Eigen::VectorXd y = apply(flat, quad3);

  // direct estimate on the true function
  const SensitivityResult direct =
      estimate_indices(split_evaluations(design, y), space.names());

  // surrogate estimate from a fit on the same data
  const PolynomialRse rse = fit_rse(flat, y, true);
  const SensitivityResult via =
      sobol_via_surrogate(rse, space, 2048, 56, SobolMethod::surrogate_full);
  CHECK(via.method == SobolMethod::surrogate_full);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(via.st[i] - direct.st[i]) < 0.02);
}

TEST_CASE("additive surrogate has equal first-order and total indices") {
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(PolynomialRse::term_count(3, true));
  coeffs[0] = 1.0;
  coeffs[1] = 2.0;
  coeffs[2] = -1.0;
  coeffs[3] = 0.5;
  const PolynomialRse rse(3, true,
                          {{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}}, coeffs, {});
  ParameterSpace s;
  s.add({"a", -1.0, 1.0, 0.0});
  s.add({"b", -1.0, 1.0, 0.0});
  s.add({"c", -1.0, 1.0, 0.0});
  const SensitivityResult res = sobol_via_surrogate(rse, s, 4096, 8);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(res.st_raw[i] - res.s1_raw[i]) < 0.02);
}

TEST_CASE("surrogate sobol is deterministic and fraction one matches the full fit") {
  const SampleMatrix x = lhs_sample(box_space(), 1024, 99);
  const Eigen::VectorXd y = apply(x, quad3);
  const auto [xs, ys] = subsample(x, y, 1.0, 4);
  const PolynomialRse full = fit_rse(x, y, true);
  const PolynomialRse same = fit_rse(xs, ys, true);
  const SensitivityResult a = sobol_via_surrogate(full, box_space(), 1024, 3);
  const SensitivityResult b = sobol_via_surrogate(same, box_space(), 1024, 3);
  CHECK(a.s1 == b.s1);
  CHECK(a.st == b.st);
}

TEST_CASE("ishigami surrogate at ten percent keeps the top-2 ranking") {
  const ParameterSpace space = ishigami::space();
  const SaltelliDesign design = saltelli_design(space, 1 << 12, 12, false);
  const SampleMatrix flat = flatten_for_evaluation(design);
  Eigen::VectorXd y(flat.rows());
  for (Eigen::Index r = 0; r < flat.rows(); ++r)
    y[r] = ishigami::f(flat.values(r, 0), flat.values(r, 1), flat.values(r, 2));

  const auto [xs, ys] = subsample(flat, y, 0.1, 77);
  const PolynomialRse rse = fit_rse(xs, ys, true);
  const SensitivityResult res =
      sobol_via_surrogate(rse, space, 1 << 12, 13, SobolMethod::surrogate_fraction);
  CHECK(res.method == SobolMethod::surrogate_fraction);
  const Ranking rank = rank_parameters(res, 0.0);
  // x1 and x2 stay ahead of x3 even though the index magnitudes shift
  CHECK(((rank.order[0] == 0 && rank.order[1] == 1) ||
         (rank.order[0] == 1 && rank.order[1] == 0)));
  CHECK(rank.order[2] == 2);
}

TEST_CASE("holdout validation reports out-of-sample quality") {
  const SampleMatrix x = lhs_sample(box_space(), 300, 8);
  SUBCASE("in-class target validates cleanly") {
    const HoldoutStats h = fit_rse_with_holdout(x, apply(x, quad3), true, 0.2, 44);
    CHECK(h.n_holdout == 60);
    CHECK(h.rse.stats().n_train == 240);
    CHECK(h.r_squared_holdout >= 1.0 - 1e-9);
    CHECK(h.rmse_holdout < 1e-8);
  }
  SUBCASE("misspecified target scores worse out of sample") {
    Eigen::VectorXd y(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r)
      y[r] = std::sin(3.0 * x.values(r, 0)) * std::cos(2.0 * x.values(r, 1));
    const HoldoutStats h = fit_rse_with_holdout(x, y, true, 0.2, 44);
    CHECK(h.r_squared_holdout < 1.0);
  }
  CHECK_THROWS_AS(fit_rse_with_holdout(x, apply(x, quad3), true, 1.5, 1), Error);
}

TEST_CASE("surrogate sobol propagates estimator errors") {
  // constant surrogate -> zero output variance
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(PolynomialRse::term_count(2, true));
  coeffs[0] = 3.0;
  const PolynomialRse rse(2, true, {{0.0, 1.0}, {0.0, 1.0}}, coeffs, {});
  ParameterSpace s;
  s.add({"a", -1.0, 1.0, 0.0});
  s.add({"b", -1.0, 1.0, 0.0});
  CHECK_THROWS_WITH_AS(sobol_via_surrogate(rse, s, 128, 1), "constant output", Error);
}

TEST_CASE("rse json round trip") {
  const SampleMatrix x = lhs_sample(box_space(), 100, 3);
  const PolynomialRse rse = fit_rse(x, apply(x, quad3), true);
  const PolynomialRse back = PolynomialRse::from_json(rse.to_json());
  CHECK(back.dimension() == 3);
  CHECK(back.include_interactions());
  CHECK(back.coefficients() == rse.coefficients());
  CHECK(back.stats().r_squared == rse.stats().r_squared);
  Eigen::RowVectorXd p(3);
  p << 0.5, 1.1, -0.2;
  CHECK(back.predict(p) == rse.predict(p));
}
