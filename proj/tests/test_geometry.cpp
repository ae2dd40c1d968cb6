#include <doctest.h>

#include <cmath>
#include <random>

#include "hardyheat/errors.hpp"
#include "hardyheat/geometry.hpp"

using namespace hardyheat;

TEST_CASE("distances on the supported shapes") {
  auto iv = StratifiedDomain::interval(0.0, 1.0);
  CHECK(iv.distance(1, {0.3}) == doctest::Approx(0.3));
  CHECK(iv.distance({0.7}) == doctest::Approx(0.3));
  CHECK_THROWS_AS(iv.distance(2, {0.3}), Error);       // NoSuchStratum
  CHECK_THROWS_AS(iv.distance(1, {1.5}), Error);       // OutsideDomain

  auto disc = StratifiedDomain::disc(1.0, true);
  CHECK(disc.distance(2, {0.5, 0.0}) == doctest::Approx(0.5));
  CHECK(disc.distance(1, {0.5, 0.0}) == doctest::Approx(0.5));
  CHECK(disc.distance(1, {0.3, 0.4}) == doctest::Approx(0.5));

  auto rect = StratifiedDomain::rectangle({1.0, 1.0});
  CHECK(rect.distance(1, {0.2, 0.7}) == doctest::Approx(0.2));

  auto ball = StratifiedDomain::radial_ball(1.0, 3, true);
  CHECK(ball.distance(3, {0.25}) == doctest::Approx(0.25));
  CHECK(ball.distance(1, {0.25}) == doctest::Approx(0.75));
}

TEST_CASE("distance functions are 1-Lipschitz on sampled pairs") {
  auto rect = StratifiedDomain::rectangle({1.0, 2.0});
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(0.01, 0.99), uy(0.01, 1.99);
  for (int i = 0; i < 200; ++i) {
    Point a = {ux(rng), uy(rng)}, b = {ux(rng), uy(rng)};
    const double dd = std::abs(rect.distance(a) - rect.distance(b));
    const double ab = std::hypot(a[0] - b[0], a[1] - b[1]);
    CHECK(dd <= ab + 1e-12);
  }
}

TEST_CASE("ball kinds follow the gamma rule") {
  auto iv = StratifiedDomain::interval(0.0, 1.0);
  // codim = n in 1D: always euclidean
  CHECK(iv.make_ball({0.5}, 0.1).kind == BallKind::euclidean);
  CHECK(iv.make_ball({0.05}, 0.1).kind == BallKind::euclidean);
  CHECK_THROWS_AS(iv.make_ball({0.5}, 0.5), Error);  // RadiusTooLarge

  auto rect = StratifiedDomain::rectangle({1.0, 1.0});
  CHECK(rect.make_ball({0.5, 0.5}, 0.1).kind == BallKind::euclidean);
  auto near = rect.make_ball({0.5, 0.05}, 0.1);  // d = 0.05 < 1.5 * 0.1
  CHECK(near.kind == BallKind::deformed_cube);
  CHECK(rect.pieces()[near.governing_piece].label == "y_lo");

  auto ball = StratifiedDomain::radial_ball(1.0, 3, true);
  // the point stratum has codim n: stays euclidean arbitrarily close
  CHECK(ball.make_ball({0.01}, 0.05).kind == BallKind::euclidean);
  CHECK(ball.make_ball({0.93}, 0.05).kind == BallKind::deformed_cube);
}

TEST_CASE("weighted volumes: exact 1D antiderivatives") {
  auto iv = StratifiedDomain::interval(0.0, 1.0);
  // Lebesgue case
  CHECK(iv.weighted_volume({0.5}, 0.1, {0.0}) == doctest::Approx(0.2).epsilon(1e-12));
  // ball sticking out on the left at the boundary limit: V = int_0^r t dt
  CHECK(iv.weighted_volume({0.012}, 0.1, {0.5}) ==
        doctest::Approx(0.5 * 0.112 * 0.112).epsilon(1e-10));
  // interior, negative exponent: int (min(t,1-t))^{-1/2}
  const double v = iv.weighted_volume({0.3}, 0.05, {-0.25});
  const double exact = 2.0 * (std::sqrt(0.35) - std::sqrt(0.25));
  CHECK(v == doctest::Approx(exact).epsilon(1e-10));
  CHECK_THROWS_AS(iv.weighted_volume({0.3}, 0.05, {-0.6}), Error);  // NonIntegrableWeight
}

TEST_CASE("weighted volumes: lebesgue sanity across shapes") {
  auto rect = StratifiedDomain::rectangle({1.0, 1.0});
  CHECK(rect.weighted_volume({0.5, 0.5}, 0.1, {0.0}) ==
        doctest::Approx(M_PI * 0.01).epsilon(1e-8));
  auto disc = StratifiedDomain::disc(1.0, false);
  CHECK(disc.weighted_volume({0.3, 0.0}, 0.1, {0.0}) ==
        doctest::Approx(M_PI * 0.01).epsilon(1e-6));
  auto ball = StratifiedDomain::radial_ball(1.0, 3, false);
  CHECK(ball.weighted_volume({0.5}, 0.1, {0.0}) ==
        doctest::Approx(4.0 / 3.0 * M_PI * 1e-3).epsilon(1e-6));
}

TEST_CASE("volume monotone in r and the sandwich stays bounded") {
  auto ball = StratifiedDomain::radial_ball(1.0, 3, true);
  std::vector<double> alphas = {0.5, -0.4};
  double prev = 0.0;
  for (double r : {0.02, 0.04, 0.08, 0.12}) {
    const double v = ball.weighted_volume({0.4}, r, alphas);
    CHECK(v > prev);
    prev = v;
  }
  double lo = 1e300, hi = 0.0;
  for (double x : {0.02, 0.1, 0.3, 0.5, 0.7, 0.9, 0.97})
    for (double r : {0.02, 0.05, 0.1}) {
      const double v = ball.weighted_volume({x}, r, alphas);
      double model = r * r * r;
      model *= std::pow(1.0 - x + r, 2 * alphas[0]) * std::pow(x + r, 2 * alphas[1]);
      lo = std::min(lo, v / model);
      hi = std::max(hi, v / model);
    }
  CHECK(hi / lo < 40.0);
}

TEST_CASE("doubling constants") {
  auto iv = StratifiedDomain::interval(0.0, 1.0);
  // Lebesgue: interior doubling is exactly 2
  std::vector<std::pair<Point, double>> interior = {{{0.5}, 0.05}, {{0.4}, 0.1}};
  CHECK(iv.doubling_constant({0.0}, interior) == doctest::Approx(2.0).epsilon(1e-10));
  // boundary-touching with alpha = 1/2: bounded by 2^{n + 2 alpha} = 8
  std::vector<std::pair<Point, double>> touching = {{{0.03}, 0.1}, {{0.05}, 0.12}, {{0.5}, 0.1}};
  const double cd = iv.doubling_constant({0.5}, touching);
  CHECK(cd <= 8.0 + 0.5);
  CHECK(cd >= 2.0);
}
