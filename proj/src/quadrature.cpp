#include "hardyheat/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "hardyheat/errors.hpp"

namespace hardyheat::quad {

namespace {

Rule compute_rule(int n) {
  // Newton iteration on Legendre polynomials, symmetric roots.
  Rule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double p1 = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      p1 = x;
      for (int k = 2; k <= n; ++k) {
        double pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      double dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) {
        p1 = dp;  // reuse slot for derivative
        break;
      }
      p1 = dp;
    }
    double dp = p1;
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.w[i] = w;
    r.w[n - 1 - i] = w;
  }
  return r;
}

}  // namespace

const Rule& gauss(int order) {
  static std::map<int, Rule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, compute_rule(order)).first;
  return it->second;
}

double integrate(const Fn& f, double a, double b, int order) {
  const Rule& r = gauss(order);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * f(mid + half * r.x[i]);
  return s * half;
}

double integrate_panels(const Fn& f, double a, double b, int panels, int order) {
  double s = 0.0;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) s += integrate(f, a + p * h, a + (p + 1) * h, order);
  return s;
}

double integrate_endpoint_singular(const Fn& f, double a, double b, bool singular_at_a,
                                   int order, int panels) {
  if (!(b > a)) return 0.0;
  const double len = b - a;
  double s = 0.0;
  // geometric panels: [len*2^-(k+1), len*2^-k] measured from the singular end
  double hi = len;
  for (int k = 0; k < panels; ++k) {
    double lo = hi * 0.5;
    double pa = singular_at_a ? a + lo : b - hi;
    double pb = singular_at_a ? a + hi : b - lo;
    s += integrate(f, pa, pb, order);
    hi = lo;
  }
  // power-fit tail: for f ~ c t^p near the end the remainder is f(t0) t0/(p+1);
  // the local exponent comes from two sample distances
  const double t0 = hi;
  const double d0 = singular_at_a ? a + t0 : b - t0;
  const double d1 = singular_at_a ? a + 0.5 * t0 : b - 0.5 * t0;
  const double f0 = f(d0), f1 = f(d1);
  if (std::isfinite(f0) && std::isfinite(f1) && f0 != 0.0 && f1 * f0 > 0.0) {
    const double p = std::log(f1 / f0) / std::log(0.5);
    if (p > -1.0 + 1e-12 && std::isfinite(p)) s += f0 * t0 / (p + 1.0);
  }
  if (!std::isfinite(s)) fail(Errc::quadrature_breakdown, "nonfinite cell integral");
  return s;
}

double power_moment(double s, double a, double b) {
  if (s == -1.0) return std::log(b) - std::log(a);
  double e = s + 1.0;
  return (std::pow(b, e) - std::pow(a, e)) / e;
}

double power_product_moment(double p0, double p1, double q0, double q1, double s, double a,
                            double b) {
  // (p0 + p1 t)(q0 + q1 t) = c0 + c1 t + c2 t^2
  const double c0 = p0 * q0, c1 = p0 * q1 + p1 * q0, c2 = p1 * q1;
  double v = 0.0;
  if (c0 != 0.0) v += c0 * power_moment(s, a, b);
  if (c1 != 0.0) v += c1 * power_moment(s + 1.0, a, b);
  if (c2 != 0.0) v += c2 * power_moment(s + 2.0, a, b);
  return v;
}

}  // namespace hardyheat::quad

namespace hardyheat {

const char* errc_name(Errc c) noexcept {
  switch (c) {
    case Errc::ok: return "Ok";
    case Errc::no_such_stratum: return "NoSuchStratum";
    case Errc::outside_domain: return "OutsideDomain";
    case Errc::radius_too_large: return "RadiusTooLarge";
    case Errc::non_integrable_weight: return "NonIntegrableWeight";
    case Errc::hardy_constant_exceeded: return "HardyConstantExceeded";
    case Errc::parameter_out_of_range: return "ParameterOutOfRange";
    case Errc::overlapping_singularities: return "OverlappingSingularities";
    case Errc::asymmetric_coefficient: return "AsymmetricCoefficient";
    case Errc::budget_exceeded: return "BudgetExceeded";
    case Errc::quadrature_breakdown: return "QuadratureBreakdown";
    case Errc::not_bounded_below: return "NotBoundedBelow";
    case Errc::window_too_narrow: return "WindowTooNarrow";
    case Errc::division_underflow: return "DivisionUnderflow";
    case Errc::factorization_failed: return "FactorizationFailed";
    case Errc::nonfinite_state: return "NonFiniteState";
    case Errc::tail_not_converged: return "TailNotConverged";
    case Errc::empty_grid: return "EmptyGrid";
    case Errc::unbounded_ratio: return "UnboundedRatio";
    case Errc::nonconverged_minimizer: return "NonConvergedMinimizer";
    case Errc::nonfinite_entropy: return "NonFiniteEntropy";
    case Errc::zero_denominator: return "ZeroDenominator";
    case Errc::excluded_exponent: return "ExcludedExponent";
    case Errc::nonpositive_solution: return "NonPositiveSolution";
    case Errc::config_invalid: return "ConfigInvalid";
    case Errc::schema_mismatch: return "SchemaMismatch";
    case Errc::io_error: return "IoError";
    case Errc::internal: return "InternalError";
  }
  return "UnknownError";
}

}  // namespace hardyheat
