#include "hardyheat/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "hardyheat/errors.hpp"
#include "hardyheat/quadrature.hpp"

namespace hardyheat {

namespace {

double norm2(const Point& a, const Point& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

StratifiedDomain StratifiedDomain::interval(double a, double b) {
  require(b > a, Errc::parameter_out_of_range, "interval needs b > a");
  StratifiedDomain d;
  d.shape_ = ShapeKind::interval;
  d.dim_ = 1;
  d.ambient_n_ = 1;
  d.lo_ = {a};
  d.hi_ = {b};
  d.beta_ = 0.25 * (b - a);
  d.strata_.push_back({1, StratumGeometry::full_boundary, {}, "boundary"});
  d.pieces_.push_back({PieceKind::endpoint, 0, 0, false, {a}, "left"});
  d.pieces_.push_back({PieceKind::endpoint, 0, 0, true, {b}, "right"});
  return d;
}

StratifiedDomain StratifiedDomain::rectangle(std::vector<double> widths) {
  require(widths.size() == 2, Errc::parameter_out_of_range, "rectangle is 2D");
  require(widths[0] > 0 && widths[1] > 0, Errc::parameter_out_of_range, "widths must be positive");
  StratifiedDomain d;
  d.shape_ = ShapeKind::rectangle;
  d.dim_ = 2;
  d.ambient_n_ = 2;
  d.lo_ = {0.0, 0.0};
  d.hi_ = widths;
  d.beta_ = 0.25 * std::min(widths[0], widths[1]);
  d.strata_.push_back({1, StratumGeometry::full_boundary, {}, "boundary"});
  const char* names[4] = {"x_lo", "x_hi", "y_lo", "y_hi"};
  int p = 0;
  for (int axis = 0; axis < 2; ++axis)
    for (int up = 0; up < 2; ++up)
      d.pieces_.push_back({PieceKind::face, 0, axis, up == 1, {}, names[p++]});
  return d;
}

StratifiedDomain StratifiedDomain::disc(double radius, bool punctured) {
  require(radius > 0, Errc::parameter_out_of_range, "disc radius must be positive");
  StratifiedDomain d;
  d.shape_ = ShapeKind::disc;
  d.dim_ = 2;
  d.ambient_n_ = 2;
  d.radius_ = radius;
  d.lo_ = {-radius, -radius};
  d.hi_ = {radius, radius};
  d.beta_ = 0.25 * radius;
  d.strata_.push_back({1, StratumGeometry::full_boundary, {}, "boundary"});
  d.pieces_.push_back({PieceKind::circle, 0, 0, false, {}, "circle"});
  if (punctured) {
    d.strata_.push_back({2, StratumGeometry::point, {0.0, 0.0}, "origin"});
    d.pieces_.push_back({PieceKind::point, 1, 0, false, {0.0, 0.0}, "origin"});
  }
  return d;
}

StratifiedDomain StratifiedDomain::radial_ball(double radius, int ambient_n, bool punctured) {
  require(radius > 0, Errc::parameter_out_of_range, "ball radius must be positive");
  require(ambient_n >= 2, Errc::parameter_out_of_range, "radial ball needs ambient n >= 2");
  StratifiedDomain d;
  d.shape_ = ShapeKind::radial_ball;
  d.dim_ = 1;
  d.ambient_n_ = ambient_n;
  d.radius_ = radius;
  d.lo_ = {0.0};
  d.hi_ = {radius};
  d.beta_ = 0.25 * radius;
  d.strata_.push_back({1, StratumGeometry::full_boundary, {}, "boundary"});
  d.pieces_.push_back({PieceKind::sphere, 0, 0, true, {radius}, "sphere"});
  if (punctured) {
    d.strata_.push_back({ambient_n, StratumGeometry::point, {0.0}, "origin"});
    d.pieces_.push_back({PieceKind::point, 1, 0, false, {0.0}, "origin"});
  }
  return d;
}

void StratifiedDomain::set_localization_beta(double b) {
  require(b > 0.0, Errc::parameter_out_of_range, "localization beta must be positive");
  beta_ = b;
}

void StratifiedDomain::set_gamma(double g) {
  require(g > 1.0 && g < 2.0, Errc::parameter_out_of_range, "gamma must lie in (1,2)");
  gamma_ = g;
}

std::vector<int> StratifiedDomain::pieces_of_stratum(int stratum) const {
  std::vector<int> out;
  for (size_t i = 0; i < pieces_.size(); ++i)
    if (pieces_[i].stratum == stratum) out.push_back(static_cast<int>(i));
  return out;
}

int StratifiedDomain::stratum_of_codim(int codim) const {
  for (size_t i = 0; i < strata_.size(); ++i)
    if (strata_[i].codim == codim) return static_cast<int>(i);
  return -1;
}

bool StratifiedDomain::interior(const Point& x) const {
  if (static_cast<int>(x.size()) != dim_) return false;
  switch (shape_) {
    case ShapeKind::interval:
      if (!(x[0] > lo_[0] && x[0] < hi_[0])) return false;
      break;
    case ShapeKind::rectangle:
      if (!(x[0] > 0 && x[0] < hi_[0] && x[1] > 0 && x[1] < hi_[1])) return false;
      break;
    case ShapeKind::disc:
      if (!(std::hypot(x[0], x[1]) < radius_)) return false;
      break;
    case ShapeKind::radial_ball:
      if (!(x[0] >= 0 && x[0] < radius_)) return false;
      break;
  }
  for (const auto& s : strata_)
    if (s.geometry == StratumGeometry::point && norm2(x, s.location) == 0.0) return false;
  return true;
}

double StratifiedDomain::piece_distance(int piece_index, const Point& x) const {
  const Piece& p = pieces_.at(piece_index);
  switch (p.kind) {
    case PieceKind::endpoint:
      return p.at_upper ? hi_[0] - x[0] : x[0] - lo_[0];
    case PieceKind::face:
      return p.at_upper ? hi_[p.axis] - x[p.axis] : x[p.axis] - lo_[p.axis];
    case PieceKind::circle:
      return radius_ - std::hypot(x[0], x[1]);
    case PieceKind::sphere:
      return radius_ - x[0];
    case PieceKind::point:
      return norm2(x, p.location);
  }
  return 0.0;
}

double StratifiedDomain::stratum_distance(int stratum_index, const Point& x) const {
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < pieces_.size(); ++i)
    if (pieces_[i].stratum == stratum_index)
      best = std::min(best, piece_distance(static_cast<int>(i), x));
  return best;
}

double StratifiedDomain::distance(int codim, const Point& x) const {
  require(interior(x), Errc::outside_domain, "point not in the domain interior");
  int s = stratum_of_codim(codim);
  require(s >= 0, Errc::no_such_stratum, "no stratum of codimension " + std::to_string(codim));
  return stratum_distance(s, x);
}

double StratifiedDomain::distance(const Point& x) const {
  require(interior(x), Errc::outside_domain, "point not in the domain interior");
  double best = std::numeric_limits<double>::infinity();
  for (size_t s = 0; s < strata_.size(); ++s) best = std::min(best, stratum_distance(s, x));
  return best;
}

BallSpec StratifiedDomain::make_ball(const Point& x, double r) const {
  require(r > 0 && r < beta_, Errc::radius_too_large,
          "ball radius must satisfy 0 < r < localization beta");
  require(interior(x), Errc::outside_domain, "ball center not interior");
  BallSpec b;
  b.center = x;
  b.radius = r;
  b.gamma = gamma_;
  int near_stratum = -1;
  for (size_t s = 0; s < strata_.size(); ++s) {
    if (stratum_distance(static_cast<int>(s), x) < gamma_ * r) {
      // localization guarantees at most one stratum is this close
      require(near_stratum < 0, Errc::internal, "two strata within gamma*r of the same center");
      near_stratum = static_cast<int>(s);
    }
  }
  if (near_stratum < 0 || strata_[near_stratum].codim == ambient_n_) {
    b.kind = BallKind::euclidean;
    return b;
  }
  b.kind = BallKind::deformed_cube;
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < pieces_.size(); ++i) {
    if (pieces_[i].stratum != near_stratum) continue;
    double d = piece_distance(static_cast<int>(i), x);
    if (d < best) {
      best = d;
      b.governing_piece = static_cast<int>(i);
    }
  }
  return b;
}

void StratifiedDomain::check_alphas(const std::vector<double>& alphas) const {
  require(alphas.size() == strata_.size(), Errc::parameter_out_of_range,
          "need one exponent per stratum");
  for (size_t s = 0; s < strata_.size(); ++s)
    require(alphas[s] > -0.5 * strata_[s].codim, Errc::non_integrable_weight,
            "alpha_" + std::to_string(strata_[s].codim) + " <= -k/2 is not integrable");
}

namespace {

// exact ∫ (c + e s)^{2a} ds over [s0, s1], c + e s >= 0 there
double affine_power_integral(double c, double e, double two_a, double s0, double s1) {
  if (std::abs(e) < 1e-14) return std::pow(c, two_a) * (s1 - s0);
  double u0 = c + e * s0, u1 = c + e * s1;
  if (two_a == -1.0) return (std::log(u1) - std::log(u0)) / e;
  return (std::pow(u1, two_a + 1) - std::pow(u0, two_a + 1)) / (e * (two_a + 1));
}

// exact ∫ (c + e s)^{2a} * s ds over [s0, s1]
double affine_power_integral_s(double c, double e, double two_a, double s0, double s1) {
  if (std::abs(e) < 1e-14) return std::pow(c, two_a) * 0.5 * (s1 * s1 - s0 * s0);
  // s = (u - c)/e
  double u0 = c + e * s0, u1 = c + e * s1;
  auto up = [&](double u, double p) { return std::pow(u, p); };
  double t1 = (up(u1, two_a + 2) - up(u0, two_a + 2)) / (two_a + 2);
  double t2 = c * (up(u1, two_a + 1) - up(u0, two_a + 1)) / (two_a + 1);
  return (t1 - t2) / (e * e);
}

}  // namespace

double StratifiedDomain::weighted_volume(const Point& x, double r,
                                         const std::vector<double>& alphas) const {
  check_alphas(alphas);
  BallSpec ball = make_ball(x, r);

  switch (shape_) {
    case ShapeKind::interval: {
      const double a = lo_[0], b = hi_[0], m = 0.5 * (a + b);
      const double two_al = 2.0 * alphas[0];
      double lo = std::max(a, x[0] - r), hi = std::min(b, x[0] + r);
      double v = 0.0;
      if (lo < std::min(hi, m)) v += quad::power_moment(two_al, lo - a, std::min(hi, m) - a);
      if (std::max(lo, m) < hi) v += quad::power_moment(two_al, b - hi, b - std::max(lo, m));
      return v;
    }

    case ShapeKind::rectangle: {
      const double W = hi_[0], H = hi_[1];
      const double two_al = 2.0 * alphas[0];
      auto dist_face = [&](double px, double py) {
        return std::min(std::min(px, W - px), std::min(py, H - py));
      };
      if (ball.kind == BallKind::euclidean) {
        // polar around the center; along each ray the four face distances are
        // affine in s, so the min-power integrates in closed form per segment
        auto ray = [&](double th) {
          double cx = std::cos(th), cy = std::sin(th);
          // face distances: x + s cx, W-x - s cx, y + s cy, H-y - s cy
          double c[4] = {x[0], W - x[0], x[1], H - x[1]};
          double e[4] = {cx, -cx, cy, -cy};
          // breakpoints where the argmin changes
          std::vector<double> bp = {0.0, r};
          for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) {
              double de = e[i] - e[j];
              if (std::abs(de) > 1e-14) {
                double s = (c[j] - c[i]) / de;
                if (s > 0 && s < r) bp.push_back(s);
              }
            }
          std::sort(bp.begin(), bp.end());
          double acc = 0.0;
          for (size_t k = 0; k + 1 < bp.size(); ++k) {
            double s0 = bp[k], s1 = bp[k + 1];
            if (s1 - s0 < 1e-300) continue;
            double sm = 0.5 * (s0 + s1);
            int arg = 0;
            double best = c[0] + e[0] * sm;
            for (int i = 1; i < 4; ++i) {
              double v = c[i] + e[i] * sm;
              if (v < best) { best = v; arg = i; }
            }
            acc += affine_power_integral_s(c[arg], e[arg], two_al, s0, s1);
          }
          return acc;
        };
        const int panels = 128, order = 6;
        double v = 0.0;
        for (int p = 0; p < panels; ++p) {
          double t0 = 2 * M_PI * p / panels, t1 = 2 * M_PI * (p + 1) / panels;
          v += quad::integrate(ray, t0, t1, order);
        }
        return v;
      }
      // deformed box: tangential [xt - r, xt + r] x normal (d - r, d + r), clipped
      const Piece& gp = pieces_[ball.governing_piece];
      int na = gp.axis, ta = 1 - gp.axis;
      double Wn = hi_[na], Wt = hi_[ta];
      double dn = piece_distance(ball.governing_piece, x);
      double s_lo = std::max(0.0, dn - r), s_hi = std::min(Wn, dn + r);
      double t_lo = std::max(0.0, x[ta] - r), t_hi = std::min(Wt, x[ta] + r);
      // s below is the distance from the governing face, valid for either side
      auto inner = [&](double s) {
        // integral over tangential t of min(min(s, Wn - s), min(t, Wt - t))^{2a}
        double sn = std::min(s, Wn - s);
        double acc = 0.0;
        double mT = 0.5 * Wt;
        // region t <= sn (near t_lo side), weight t^2a; plateau sn^2a; mirrored
        auto seg = [&](double u0, double u1, bool from_low) {
          if (u1 <= u0) return 0.0;
          // distance coordinate along tangential axis measured from nearest side
          if (from_low) {
            double p0 = u0, p1 = std::min(u1, sn), acc2 = 0.0;
            if (p1 > p0) acc2 += quad::power_moment(two_al, p0, p1);
            if (u1 > std::max(u0, sn)) acc2 += std::pow(sn, two_al) * (u1 - std::max(u0, sn));
            return acc2;
          }
          double q0 = Wt - u1, q1 = std::min(Wt - u0, sn), acc2 = 0.0;
          if (q1 > q0) acc2 += quad::power_moment(two_al, q0, q1);
          if (Wt - u0 > std::max(q0, sn))
            acc2 += std::pow(sn, two_al) * (Wt - u0 - std::max(q0, sn));
          return acc2;
        };
        acc += seg(t_lo, std::min(t_hi, mT), true);
        acc += seg(std::max(t_lo, mT), t_hi, false);
        return acc;
      };
      return quad::integrate_endpoint_singular(inner, s_lo, s_hi, true, 10, 52);
    }

    case ShapeKind::disc: {
      const double R = radius_;
      const double a1 = 2.0 * alphas[0];
      const double an = strata_.size() > 1 ? 2.0 * alphas[1] : 0.0;
      auto w = [&](double s) { return std::pow(R - s, a1) * (an != 0.0 ? std::pow(s, an) : 1.0); };
      const double rho = std::hypot(x[0], x[1]);
      if (ball.kind == BallKind::euclidean) {
        double s_lo = std::max(0.0, rho - r), s_hi = std::min(R, rho + r);
        auto f = [&](double s) {
          double arc;
          if (s + rho <= r) arc = 2 * M_PI;
          else {
            double c = (s * s + rho * rho - r * r) / (2 * s * rho);
            arc = 2.0 * std::acos(std::clamp(c, -1.0, 1.0));
          }
          return w(s) * arc * s;
        };
        double mid = 0.5 * (s_lo + s_hi);
        return quad::integrate_endpoint_singular(f, s_lo, mid, true, 10, 48) +
               quad::integrate_endpoint_singular(f, mid, s_hi, false, 10, 48);
      }
      // deformed box at the circle: arc width 2r, radial band
      double dn = R - rho;
      double s_lo = std::max(0.0, R - (dn + r)), s_hi = std::min(R, R - (dn - r));
      auto f = [&](double s) { return w(s) * s; };
      double mid = 0.5 * (s_lo + s_hi);
      double radial = quad::integrate_endpoint_singular(f, s_lo, mid, true, 10, 48) +
                      quad::integrate_endpoint_singular(f, mid, s_hi, false, 10, 48);
      return (2.0 * r / R) * radial;
    }

    case ShapeKind::radial_ball: {
      require(ambient_n_ == 2 || ambient_n_ == 3, Errc::parameter_out_of_range,
              "ball volumes implemented for ambient n in {2,3}");
      const double R = radius_;
      const double a1 = 2.0 * alphas[0];
      const double an = strata_.size() > 1 ? 2.0 * alphas[1] : 0.0;
      auto w = [&](double s) { return std::pow(R - s, a1) * (an != 0.0 ? std::pow(s, an) : 1.0); };
      const double rho = x[0];
      const int n = ambient_n_;
      if (ball.kind == BallKind::euclidean) {
        double s_lo = std::max(0.0, rho - r), s_hi = std::min(R, rho + r);
        auto f = [&](double s) {
          double cap;
          if (s + rho <= r) cap = (n == 3) ? 4 * M_PI * s * s : 2 * M_PI * s;
          else if (n == 3) cap = (M_PI * s / rho) * (r * r - (rho - s) * (rho - s));
          else {
            double c = (s * s + rho * rho - r * r) / (2 * s * rho);
            cap = 2.0 * std::acos(std::clamp(c, -1.0, 1.0)) * s;
          }
          return w(s) * cap;
        };
        double mid = 0.5 * (s_lo + s_hi);
        return quad::integrate_endpoint_singular(f, s_lo, mid, true, 10, 48) +
               quad::integrate_endpoint_singular(f, mid, s_hi, false, 10, 48);
      }
      // deformed box at the sphere: (2r)^{n-1} tangential cube x radial band
      double dn = R - rho;
      double s_lo = std::max(0.0, R - (dn + r)), s_hi = std::min(R, R - (dn - r));
      auto f = [&](double s) { return w(s) * std::pow(s / R, n - 1.0); };
      double mid = 0.5 * (s_lo + s_hi);
      double radial = quad::integrate_endpoint_singular(f, s_lo, mid, true, 10, 48) +
                      quad::integrate_endpoint_singular(f, mid, s_hi, false, 10, 48);
      return std::pow(2.0 * r, n - 1.0) * radial;
    }
  }
  fail(Errc::internal, "unreachable shape");
}

double StratifiedDomain::doubling_constant(
    const std::vector<double>& alphas,
    const std::vector<std::pair<Point, double>>& samples) const {
  check_alphas(alphas);
  double worst = 0.0;
  for (const auto& [x, r] : samples) {
    require(2.0 * r < beta_, Errc::radius_too_large, "doubling samples need 2r < beta");
    double v1 = weighted_volume(x, r, alphas);
    double v2 = weighted_volume(x, 2.0 * r, alphas);
    require(v1 > 0.0, Errc::zero_denominator, "vanishing weighted volume");
    worst = std::max(worst, v2 / v1);
  }
  return worst;
}

}  // namespace hardyheat
