#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "switchtrack/basis.hpp"
#include "switchtrack/common.hpp"

using namespace switchtrack;

TEST_CASE("basis enumeration is graded lexicographic") {
  auto b3 = PolynomialBasis::enumerate(3, 3);
  CHECK(b3.size() == 20);
  CHECK(b3.monomials.front() == std::vector<int>{0, 0, 0});

  auto b1 = PolynomialBasis::enumerate(3, 1);
  REQUIRE(b1.size() == 4);
  Vec tsw(1), x(2);
  tsw << 2.0;
  x << 3.0, 5.0;
  Vec phi = b1.eval(tsw, x);
  CHECK(phi(0) == doctest::Approx(1.0));
  CHECK(phi(1) == doctest::Approx(2.0));
  CHECK(phi(2) == doctest::Approx(3.0));
  CHECK(phi(3) == doctest::Approx(5.0));

  // One representative of each total degree, in order.
  int last_degree = 0;
  for (const auto& expo : b3.monomials) {
    int d = 0;
    for (int e : expo) d += e;
    CHECK(d >= last_degree);
    CHECK(d <= 3);
    last_degree = d;
  }
}

TEST_CASE("basis entries are the plain monomials") {
  auto basis = PolynomialBasis::enumerate(3, 3);
  auto rng = seeded_engine(3, {9});
  for (int trial = 0; trial < 10; ++trial) {
    Vec vars(3);
    for (int i = 0; i < 3; ++i) vars(i) = uniform(rng, -2.0, 2.0);
    Vec phi = basis.eval(vars);
    for (int j = 0; j < basis.size(); ++j) {
      double direct = 1.0;
      for (int i = 0; i < 3; ++i) direct *= std::pow(vars(i), basis.monomials[j][i]);
      CHECK(phi(j) == doctest::Approx(direct).epsilon(1e-12));
    }
  }
}

TEST_CASE("exponent lookup inverts enumeration") {
  auto basis = PolynomialBasis::enumerate(3, 3);
  for (int j = 0; j < basis.size(); ++j) CHECK(basis.index_of(basis.monomials[j]) == j);
  CHECK(basis.index_of({4, 0, 0}) == -1);
}

TEST_CASE("polynomial expressions canonicalize and differentiate") {
  PolynomialExpression p(2);
  p.add_term(1.0, {2, 0});
  p.add_term(2.0, {2, 0});  // merges with the first
  p.add_term(-1.5, {0, 1});
  p.add_term(0.0, {1, 1});  // dropped
  p.canonicalize();
  CHECK(p.terms.size() == 2);
  CHECK(p.coefficient({2, 0}) == doctest::Approx(3.0));

  Vec v(2);
  v << 2.0, 4.0;
  CHECK(p.eval(v) == doctest::Approx(3.0 * 4.0 - 1.5 * 4.0));

  auto dp = p.differentiate(0);
  CHECK(dp.coefficient({1, 0}) == doctest::Approx(6.0));
  CHECK(dp.coefficient({0, 1}) == doctest::Approx(0.0));
}

TEST_CASE("substituting the state leaves a univariate polynomial") {
  PolynomialExpression p(3);  // (t, x1, x2)
  p.add_term(2.0, {2, 1, 0});
  p.add_term(-1.0, {0, 0, 2});
  p.canonicalize();
  Vec x(2);
  x << 3.0, 2.0;
  auto q = p.substitute_state(1, x);
  CHECK(q.nvars == 1);
  CHECK(q.coefficient({2}) == doctest::Approx(6.0));
  CHECK(q.coefficient({0}) == doctest::Approx(-4.0));
  Vec t(1);
  t << 0.5;
  Vec full(3);
  full << 0.5, 3.0, 2.0;
  CHECK(q.eval(t) == doctest::Approx(p.eval(full)).epsilon(1e-14));
}

TEST_CASE("integrating a simple gradient field recovers the potential") {
  auto basis = PolynomialBasis::enumerate(3, 3);
  Mat W = Mat::Zero(basis.size(), 2);
  W(basis.index_of({0, 1, 0}), 0) = 2.0;  // lambda_1 = 2 x1
  W(basis.index_of({0, 0, 1}), 1) = 2.0;  // lambda_2 = 2 x2

  auto V = integrate_costate_field(basis, W, 1);
  PolynomialExpression expected(3);
  expected.add_term(1.0, {0, 2, 0});
  expected.add_term(1.0, {0, 0, 2});
  expected.canonicalize();
  CHECK(V.coeff_distance(expected) <= 1e-12);
}

namespace {

// Random scalar polynomial over (t, x1, x2) whose every term touches the
// state, so its state gradient determines it completely.
PolynomialExpression random_potential(std::mt19937_64& rng, int degree) {
  PolynomialExpression p(3);
  for (int dt = 0; dt <= degree; ++dt)
    for (int d1 = 0; d1 + dt <= degree; ++d1)
      for (int d2 = 0; d1 + d2 + dt <= degree; ++d2) {
        if (d1 + d2 == 0) continue;
        p.add_term(uniform(rng, -1.0, 1.0), {dt, d1, d2});
      }
  p.canonicalize();
  return p;
}

Mat gradient_weights(const PolynomialBasis& basis, const PolynomialExpression& p) {
  Mat W = Mat::Zero(basis.size(), 2);
  for (int i = 0; i < 2; ++i) {
    auto dp = p.differentiate(1 + i);
    for (const auto& term : dp.terms) {
      int j = basis.index_of(term.expo);
      REQUIRE(j >= 0);
      W(j, i) = term.coeff;
    }
  }
  return W;
}

}  // namespace

TEST_CASE("gradient fields integrate back to their potential") {
  auto basis = PolynomialBasis::enumerate(3, 3);
  auto rng = seeded_engine(101, {2});
  for (int trial = 0; trial < 20; ++trial) {
    auto p = random_potential(rng, 4);
    Mat W = gradient_weights(basis, p);
    auto V = integrate_costate_field(basis, W, 1);
    CHECK(V.coeff_distance(p) <= 1e-10);
  }
}

TEST_CASE("conservative fields are path-order independent") {
  auto basis = PolynomialBasis::enumerate(3, 3);
  auto rng = seeded_engine(102, {2});
  auto p = random_potential(rng, 4);
  Mat W = gradient_weights(basis, p);

  std::vector<int> forward{0, 1};
  std::vector<int> reversed{1, 0};
  auto Va = integrate_costate_field(basis, W, 1, &forward);
  auto Vb = integrate_costate_field(basis, W, 1, &reversed);
  CHECK(Va.coeff_distance(Vb) <= 1e-10);
}

TEST_CASE("univariate minimization handles interior, endpoint, and tied minima") {
  PolynomialExpression square(1);  // (x - 2)^2
  square.add_term(4.0, {0});
  square.add_term(-4.0, {1});
  square.add_term(1.0, {2});
  square.canonicalize();
  CHECK(minimize_univariate_poly(square, 0.0, 3.0) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(minimize_univariate_poly(square, 3.0, 5.0) == doctest::Approx(3.0).epsilon(1e-12));

  PolynomialExpression rising(1);  // x^3 + x, increasing everywhere
  rising.add_term(1.0, {3});
  rising.add_term(1.0, {1});
  CHECK(minimize_univariate_poly(rising, 1.0, 2.0) == doctest::Approx(1.0).epsilon(1e-12));

  PolynomialExpression doublewell(1);  // (x^2 - 1)^2, equal minima at -1 and 1
  doublewell.add_term(1.0, {0});
  doublewell.add_term(-2.0, {2});
  doublewell.add_term(1.0, {4});
  CHECK(minimize_univariate_poly(doublewell, -2.0, 2.0) == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("real root extraction covers the closed forms and the companion path") {
  auto sorted = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v;
  };

  auto r1 = real_roots({-4.0, 2.0});
  REQUIRE(r1.size() == 1);
  CHECK(r1[0] == doctest::Approx(2.0).epsilon(1e-12));

  auto r2 = sorted(real_roots({-1.0, 0.0, 1.0}));
  REQUIRE(r2.size() == 2);
  CHECK(r2.front() == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(r2.back() == doctest::Approx(1.0).epsilon(1e-12));

  auto r3 = sorted(real_roots({-6.0, 11.0, -6.0, 1.0}));
  REQUIRE(r3.size() == 3);
  CHECK(r3[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r3[1] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(r3[2] == doctest::Approx(3.0).epsilon(1e-9));

  auto r4 = sorted(real_roots({6.0, 0.0, -5.0, 0.0, 1.0}));
  REQUIRE(r4.size() == 4);
  CHECK(r4[0] == doctest::Approx(-std::sqrt(3.0)).epsilon(1e-9));
  CHECK(r4[3] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-9));

  CHECK(real_roots({5.0}).empty());
  auto none = real_roots({1.0, 0.0, 1.0});  // x^2 + 1
  CHECK(none.empty());
}
