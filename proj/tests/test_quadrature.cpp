#include <doctest.h>

#include <cmath>

#include "hardyheat/quadrature.hpp"

using namespace hardyheat;

TEST_CASE("gauss rules integrate polynomials exactly") {
  // order-n rule is exact through degree 2n-1
  auto cubic = [](double x) { return 3 * x * x * x - x * x + 2 * x - 5; };
  const double exact = -2.0 / 3.0 - 10.0;  // odd parts vanish on [-1,1]
  CHECK(quad::integrate(cubic, -1.0, 1.0, 2) == doctest::Approx(exact).epsilon(1e-14));
  auto deg9 = [](double x) { return std::pow(x, 9) + std::pow(x, 8); };
  CHECK(quad::integrate(deg9, 0.0, 1.0, 5) == doctest::Approx(0.1 + 1.0 / 9.0).epsilon(1e-14));
}

TEST_CASE("endpoint-singular panels handle integrable powers") {
  for (double s : {-0.5, -0.9, 0.5, 2.0}) {
    auto f = [&](double t) { return std::pow(t, s); };
    const double exact = 1.0 / (s + 1.0);
    CHECK(quad::integrate_endpoint_singular(f, 0.0, 1.0, true) ==
          doctest::Approx(exact).epsilon(1e-10));
  }
  auto g = [](double t) { return std::pow(1.0 - t, -0.5); };
  CHECK(quad::integrate_endpoint_singular(g, 0.0, 1.0, false) ==
        doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("log-type weights integrate to quadrature accuracy") {
  auto f = [](double t) { return std::pow(1.0 - std::log(t), -2.0); };
  const double ref = quad::integrate_endpoint_singular(f, 0.0, 1.0, true, 16, 400);
  const double got = quad::integrate_endpoint_singular(f, 0.0, 1.0, true);
  CHECK(got == doctest::Approx(ref).epsilon(1e-8));
}

TEST_CASE("exact power-product moments") {
  const double exact = 2.0 / 3.0 - 4.0 / 5.0 + 2.0 / 7.0;  // (1-t)^2 t^{1/2} on (0,1)
  CHECK(quad::power_product_moment(1, -1, 1, -1, 0.5, 0.0, 1.0) ==
        doctest::Approx(exact).epsilon(1e-14));
  CHECK(quad::power_moment(-1.0, 0.5, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
}
