#include <doctest.h>

#include "ipalm/prox.hpp"
#include "support/test_utils.hpp"

using namespace ipalm;
using namespace testutil;

namespace {

// every catalog variant at a fixed dimension, for property sweeps
std::vector<SimpleFunction> catalog(Rng& rng, Index dim) {
  return {
      SimpleFunction::zero(),
      SimpleFunction::abs_sum(0.2 + rng.uniform()),
      SimpleFunction::weighted_l1((rand_vec(rng, dim).array().abs() + 0.1).matrix()),
      SimpleFunction::half_squared_l2(0.5 + rng.uniform(), rand_vec(rng, dim)),
      SimpleFunction::hinge_sum(0.3 + rng.uniform(), rand_vec(rng, dim, 0.5)),
  };
}

}  // namespace

TEST_CASE("soft threshold basics") {
  SimpleFunction l1 = SimpleFunction::weighted_l1(Vector::Ones(1));
  Vector v(1);
  v << 2.5;
  CHECK(prox(l1, v, 1.0)[0] == doctest::Approx(1.5));
  v << 1.0;  // tie |v| = t*w resolves to 0
  CHECK(prox(l1, v, 1.0)[0] == 0.0);
}

TEST_CASE("prox of zero function is the identity") {
  Rng rng(2);
  Vector v = rand_vec(rng, 6);
  CHECK((prox(SimpleFunction::zero(), v, 0.7) - v).norm() == 0.0);
}

TEST_CASE("nonpositive t throws") {
  Vector v = Vector::Zero(2);
  CHECK_THROWS_AS(prox(SimpleFunction::abs_sum(1.0), v, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(prox_shifted_quadratic(SimpleFunction::zero(), v, -1.0, v, 1.0),
                  std::invalid_argument);
}

TEST_CASE("hinge prox matches grid search") {
  SimpleFunction hinge = SimpleFunction::hinge_sum(1.0, 1.0, 1);
  Vector v(1);
  v << 0.5;
  Real t = 0.25;
  Real got = prox(hinge, v, t)[0];
  Real expect = grid_argmin_1d(
      [&](Real x) { return std::max(0.0, 1.0 - x) + (x - 0.5) * (x - 0.5) / (2 * t); },
      -3.0, 3.0);
  CHECK(got == doctest::Approx(expect).epsilon(1e-5));
}

TEST_CASE("projections: point, box, ball") {
  Vector v1(1);
  v1 << 3;
  CHECK(project(SimpleSet::point(Vector::Ones(1)), v1)[0] == doctest::Approx(1));

  Vector v2(2);
  v2 << -1, 2;
  Vector lo = Vector::Zero(2), hi = Vector::Ones(2);
  Vector pb = project(SimpleSet::box(lo, hi), v2);
  CHECK(pb[0] == doctest::Approx(0));
  CHECK(pb[1] == doctest::Approx(1));

  Vector v3(2);
  v3 << 3, 4;
  Vector ball = project(SimpleSet::ball(Vector::Zero(2), 1.0), v3);
  CHECK(ball[0] == doctest::Approx(0.6));
  CHECK(ball[1] == doctest::Approx(0.8));
}

TEST_CASE("project leaves members fixed") {
  Rng rng(9);
  std::vector<SimpleSet> sets = {
      SimpleSet::point(rand_vec(rng, 3)),
      SimpleSet::box(Vector::Constant(3, -1.0), Vector::Constant(3, 2.0)),
      SimpleSet::nonnegative_orthant(),
      SimpleSet::ball(rand_vec(rng, 3), 2.0),
  };
  for (const auto& s : sets) {
    Vector inside = s.project(rand_vec(rng, 3, 2.0));
    CHECK((s.project(inside) - inside).norm() <= 1e-12);
    CHECK(s.contains(inside, 1e-12));
  }
}

TEST_CASE("shifted quadratic prox") {
  // fn = 0, v=3, t=1, anchor=0, beta=2: stationarity (x-3) + 2x = 0
  Vector v(1), a(1);
  v << 3;
  a << 0;
  CHECK(prox_shifted_quadratic(SimpleFunction::zero(), v, 1.0, a, 2.0)[0] ==
        doctest::Approx(1.0));

  // beta = 0 coincides with plain prox
  Rng rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    SimpleFunction fn = SimpleFunction::abs_sum(0.5 + rng.uniform());
    Vector vv = rand_vec(rng, 4);
    Real t = 0.1 + rng.uniform();
    CHECK((prox_shifted_quadratic(fn, vv, t, Vector::Zero(4), 0.0) - prox(fn, vv, t))
              .norm() == 0.0);
  }

  // l1 with a nonzero anchor vs grid search
  SimpleFunction l1 = SimpleFunction::weighted_l1(Vector::Ones(1));
  Vector v2(1), a2(1);
  v2 << 2;
  a2 << 1;
  Real got = prox_shifted_quadratic(l1, v2, 0.5, a2, 1.0)[0];
  Real expect = grid_argmin_1d(
      [&](Real x) {
        return std::abs(x) + 0.5 * (x - 1) * (x - 1) + (x - 2) * (x - 2) / (2 * 0.5);
      },
      -3.0, 3.0, 5);
  CHECK(got == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("lipschitz constants") {
  CHECK(lipschitz_constant(SimpleFunction::abs_sum(2.0), 4) == doctest::Approx(4.0));
  CHECK(lipschitz_constant(SimpleFunction::abs_sum(0.0), 7) == 0.0);
  CHECK(lipschitz_constant(SimpleFunction::hinge_sum(1.0 / 25.0, 1.0, 25), 25) ==
        doctest::Approx(0.2));
  CHECK_THROWS(lipschitz_constant(
      SimpleFunction::half_squared_l2(1.0, Vector::Zero(2)), 2));
}

TEST_CASE("lipschitz constant is a valid bound on random pairs") {
  Rng rng(12);
  Index dim = 5;
  for (auto& fn : catalog(rng, dim)) {
    if (!fn.is_lipschitz()) continue;
    Real L = fn.lipschitz_constant(dim);
    for (int rep = 0; rep < 1000; ++rep) {
      Vector x = rand_vec(rng, dim, 2.0), y = rand_vec(rng, dim, 2.0);
      CHECK(std::abs(fn.value(x) - fn.value(y)) <= L * (x - y).norm() + 1e-10);
    }
  }
}

TEST_CASE("prox optimality inclusion, all variants, 100 random cases") {
  Rng rng(21);
  Index dim = 4;
  for (auto& fn : catalog(rng, dim)) {
    for (int rep = 0; rep < 100; ++rep) {
      Vector v = rand_vec(rng, dim, 2.0);
      Real t = 0.05 + rng.uniform() * 2.0;
      Vector p = prox(fn, v, t);
      for (Index i = 0; i < dim; ++i) {
        Real s = (v[i] - p[i]) / t;  // must lie in the subdifferential at p
        CHECK(fn.subgradient_distance1(p[i], s, i) <= 1e-8);
      }
    }
  }
}

TEST_CASE("firm nonexpansiveness of prox") {
  Rng rng(33);
  Index dim = 4;
  for (auto& fn : catalog(rng, dim)) {
    for (int rep = 0; rep < 100; ++rep) {
      Vector v = rand_vec(rng, dim, 2.0), w = rand_vec(rng, dim, 2.0);
      Real t = 0.05 + rng.uniform() * 2.0;
      CHECK((prox(fn, v, t) - prox(fn, w, t)).norm() <= (v - w).norm() * (1 + 1e-12));
    }
  }
}

TEST_CASE("prox matches grid search on random scalar cases") {
  Rng rng(55);
  for (auto& fn : catalog(rng, 1)) {
    for (int rep = 0; rep < 10; ++rep) {
      Vector v = rand_vec(rng, 1, 2.0);
      Real t = 0.1 + rng.uniform();
      Real got = prox(fn, v, t)[0];
      Real expect = grid_argmin_1d(
          [&](Real x) {
            Vector xv(1);
            xv << x;
            return fn.value(xv) + (x - v[0]) * (x - v[0]) / (2 * t);
          },
          -6.0, 6.0, 5);
      CHECK(got == doctest::Approx(expect).epsilon(1e-5));
    }
  }
}

TEST_CASE("catalog construction validates parameters") {
  Vector negw(2);
  negw << 1.0, -0.5;
  CHECK_THROWS(SimpleFunction::weighted_l1(negw));
  CHECK_THROWS(SimpleFunction::abs_sum(-1.0));
  Vector lo(1), hi(1);
  lo << 2;
  hi << 1;
  CHECK_THROWS(SimpleSet::box(lo, hi));
  CHECK_THROWS(SimpleSet::ball(Vector::Zero(2), -1.0));
}
