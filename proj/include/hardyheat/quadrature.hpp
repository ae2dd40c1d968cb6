#pragma once

#include <functional>
#include <vector>

namespace hardyheat::quad {

/// Gauss-Legendre rule on [-1, 1]. Rules are computed once per order and cached.
struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};

const Rule& gauss(int order);

using Fn = std::function<double(double)>;

/// Plain Gauss quadrature of f over [a, b].
double integrate(const Fn& f, double a, double b, int order = 8);

/// Composite Gauss over [a, b] split into `panels` equal pieces.
double integrate_panels(const Fn& f, double a, double b, int panels, int order = 8);

/// Quadrature for integrands with an integrable singularity at one endpoint
/// (power/log type, net exponent > -1). Panels shrink geometrically toward the
/// singular end; the untouched tail is smaller than the relative target.
double integrate_endpoint_singular(const Fn& f, double a, double b, bool singular_at_a,
                                   int order = 8, int panels = 52);

/// Exact ∫_a^b (p0 + p1 t)(q0 + q1 t) t^s dt for s > -3 and 0 <= a < b.
/// Used for piecewise-linear mass/potential entries against pure power weights.
double power_product_moment(double p0, double p1, double q0, double q1, double s, double a,
                            double b);

/// Exact ∫_a^b t^s dt, s != -1 handled alongside the log case.
double power_moment(double s, double a, double b);

}  // namespace hardyheat::quad
