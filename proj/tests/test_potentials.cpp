#include <doctest.h>

#include <cmath>

#include "hardyheat/errors.hpp"
#include "hardyheat/potentials.hpp"

using namespace hardyheat;

TEST_CASE("multipolar exponents from the indicial formula") {
  auto p = example_I(3, {{{0.0}, 0.25}});
  CHECK(p.pole_betas[0] == doctest::Approx(-0.5));
  CHECK(p.critical);
  CHECK(*p.boundary_alpha == doctest::Approx(1.0));

  CHECK(example_I(3, {{{0.0}, 0.0}}).pole_betas[0] == doctest::Approx(0.0));
  CHECK(example_I(4, {{{0.0}, 1.0}}).pole_betas[0] == doctest::Approx(-1.0));
  CHECK(example_I(3, {{{0.0}, 3.0 / 16.0}}).pole_betas[0] == doctest::Approx(-0.25));

  CHECK_THROWS_AS(example_I(3, {{{0.0}, 0.3}}), Error);  // HardyConstantExceeded
  CHECK_THROWS_AS(example_I(2, {{{0.0}, 0.1}}), Error);  // needs n >= 3

  // beta is monotone decreasing in c on [0, (n-2)^2/4]
  double prev = 1.0;
  for (double c : {0.0, 0.05, 0.1, 0.2, 0.25}) {
    const double b = example_I(3, {{{0.0}, c}}).pole_betas[0];
    CHECK(b < prev);
    prev = b;
  }
}

TEST_CASE("boundary catalog entries") {
  auto iv = StratifiedDomain::interval(0.0, 1.0);
  auto p3 = example_III(iv);
  CHECK(*p3.boundary_alpha == doctest::Approx(0.5));
  CHECK(p3.value(iv, {0.25}) == doctest::Approx(0.25 / (0.25 * 0.25)));
  // scaling the domain leaves the predicted exponent unchanged
  auto p3b = example_III(StratifiedDomain::interval(0.0, 7.0));
  CHECK(*p3b.boundary_alpha == doctest::Approx(0.5));
  auto rect = StratifiedDomain::rectangle({1.0, 1.0});
  CHECK(*example_III(rect).boundary_alpha == doctest::Approx(0.5));

  auto punctured = StratifiedDomain::radial_ball(1.0, 3, true);
  CHECK_THROWS_AS(example_III(punctured), Error);  // needs a purely codim-1 boundary
  auto p4 = example_IV(punctured);
  CHECK(*p4.boundary_alpha == doctest::Approx(0.5));
  CHECK(p4.pole_betas[0] == doctest::Approx(-0.5));
}

TEST_CASE("off-diagonal example: parameters and ellipticity") {
  CHECK_THROWS_AS(example_V(0.1, 3), Error);
  CHECK_THROWS_AS(example_V(-1.0, 3), Error);  // below -(n-2)/2
  auto p = example_V(-0.5, 3);
  CHECK(p.pole_betas[0] == doctest::Approx(-0.5));
  CHECK(p.terms[0].coefficient == doctest::Approx(0.25));  // -a(n+a-2) = 0.5*0.5

  std::vector<std::vector<double>> samples;
  for (double r : {0.2, 0.5, 0.9})
    samples.push_back({r / std::sqrt(3.0), r / std::sqrt(3.0), r / std::sqrt(3.0)});
  auto rep = check_ellipticity(p, samples);
  CHECK(rep.min_eig >= 0.5 - 1e-12);
  CHECK(rep.max_eig <= 1.0 + 1.5 + 1e-12);
  CHECK(rep.c0_verified);

  PotentialSpec identity_spec;
  identity_spec.ellipticity_C0 = 1.0;
  auto rep2 = check_ellipticity(identity_spec, {{0.1, 0.2}});
  CHECK(rep2.min_eig == doctest::Approx(1.0));
  CHECK(rep2.max_eig == doctest::Approx(1.0));

  PotentialSpec scaled;
  scaled.coeff = {CoeffKind::scaled_identity, 2.0, 0.0, 2};
  scaled.ellipticity_C0 = 0.5;
  CHECK(check_ellipticity(scaled, {{0.3, 0.3}}).c0_verified);
}

TEST_CASE("sums need disjoint singular supports") {
  auto ball = StratifiedDomain::radial_ball(1.0, 3, true);
  auto boundary = example_III(StratifiedDomain::interval(0.0, 1.0));
  auto pole = example_I(3, {{{0.0}, 0.25}});
  auto sum = sum_spec(boundary, pole, ball);
  CHECK(sum.terms.size() == 2);
  CHECK(*sum.boundary_alpha == doctest::Approx(0.5));
  CHECK(sum.pole_betas[0] == doctest::Approx(-0.5));
  // matches the assembled critical catalog entry
  auto p4 = example_IV(ball);
  CHECK(sum.value(ball, {0.3}) == doctest::Approx(p4.value(ball, {0.3})));

  CHECK_THROWS_AS(sum_spec(boundary, boundary, ball), Error);  // OverlappingSingularities
  CHECK_THROWS_AS(sum_spec(pole, pole, ball), Error);

  // p + zero = p pointwise
  PotentialSpec zero;
  zero.id = "zero";
  zero.ambient_n = 3;
  auto s2 = sum_spec(pole, zero, ball);
  CHECK(s2.value(ball, {0.4}) == doctest::Approx(pole.value(ball, {0.4})));
}

TEST_CASE("harnack admissibility covers the catalog") {
  auto ball = StratifiedDomain::radial_ball(1.0, 3, true);
  CHECK(harnack_admissible(example_I(3, {{{0.0}, 0.25}})));
  CHECK(harnack_admissible(example_III(StratifiedDomain::interval(0.0, 1.0))));
  CHECK(harnack_admissible(example_IV(ball)));
  CHECK(harnack_admissible(example_V(-0.5, 3)));
  CHECK(harnack_admissible(example_II_catalog(4)));
  // a (2-n)/2-violating exponent is rejected
  PotentialSpec bad = example_I(3, {{{0.0}, 0.25}});
  bad.pole_betas[0] = -0.75;
  CHECK(!harnack_admissible(bad));
}

TEST_CASE("lift exponents solve the indicial equation") {
  CHECK(PotentialSpec::lift_exponent(1, 3, 0.25) == doctest::Approx(0.5));
  CHECK(PotentialSpec::lift_exponent(1, 3, 0.0) == doctest::Approx(1.0));
  CHECK(PotentialSpec::lift_exponent(3, 3, 0.25) == doctest::Approx(-0.5));
  CHECK(PotentialSpec::lift_exponent(3, 3, 3.0 / 16.0) == doctest::Approx(-0.25));
  CHECK(PotentialSpec::hardy_constant(1, 3) == doctest::Approx(0.25));
  CHECK(PotentialSpec::hardy_constant(3, 3) == doctest::Approx(0.25));
  CHECK(PotentialSpec::hardy_constant(4, 4) == doctest::Approx(1.0));
}
