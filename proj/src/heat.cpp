#include "hardyheat/heat.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>

#include "hardyheat/errors.hpp"

namespace hardyheat {

SpectralKernel::SpectralKernel(const DiscreteForm& form) : form_(&form) {
  DenseSpectrum sp = solve_dense_spectrum(form);
  lambda_ = sp.values;
  // physical (u-space) modes: lift prefactor times the transformed modes
  psi_ = sp.vectors;
  for (int i = 0; i < psi_.rows(); ++i) psi_.row(i) *= form.lift_m[i];
  mass_ = form.unit_mass();  // m^2-weighted: the L2(dx) product of u-modes
}

Eigen::VectorXd SpectralKernel::phi1() const {
  Eigen::VectorXd p = psi_.col(0);
  if (p.sum() < 0) p = -p;
  return p / p.cwiseAbs().maxCoeff();
}

Eigen::MatrixXd SpectralKernel::kernel(double t) const {
  Eigen::VectorXd e = (-t * lambda_.array()).exp();
  return psi_ * e.asDiagonal() * psi_.transpose();
}

Eigen::VectorXd SpectralKernel::column(double t, int y_node) const {
  Eigen::VectorXd e = (-t * lambda_.array()).exp();
  return psi_ * (e.array() * psi_.row(y_node).transpose().array()).matrix();
}

Eigen::VectorXd SpectralKernel::apply(double t, const Eigen::VectorXd& u0) const {
  // coefficients against the transformed modes: c_k = <w_k, u0/m>_{m^2 mass}
  Eigen::VectorXd q(u0.size());
  for (int i = 0; i < u0.size(); ++i)
    q[i] = (form_->lift_m[i] > 0.0 && u0[i] != 0.0) ? u0[i] / form_->lift_m[i] : 0.0;
  Eigen::VectorXd w_modes_coeff(lambda_.size());
  Eigen::VectorXd mq = mass_ * q;
  for (int k = 0; k < lambda_.size(); ++k) {
    // w-mode = psi / m nodewise; avoid the division by using psi directly:
    // psi^T (M q) with M the m^2 mass equals w^T M q after the lift cancels
    double c = 0.0;
    for (int i = 0; i < psi_.rows(); ++i)
      if (form_->lift_m[i] > 0.0) c += psi_(i, k) / form_->lift_m[i] * mq[i];
    w_modes_coeff[k] = c;
  }
  Eigen::VectorXd e = (-t * lambda_.array()).exp();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(psi_.rows());
  for (int k = 0; k < lambda_.size(); ++k) out += e[k] * w_modes_coeff[k] * psi_.col(k);
  return out;
}

Eigen::VectorXd propagate(const DiscreteForm& form, const Eigen::VectorXd& u0, double t,
                          int steps) {
  require(t > 0 && steps > 0, Errc::parameter_out_of_range, "need t > 0 and steps > 0");
  require(u0.allFinite(), Errc::nonfinite_state, "initial data is not finite");
  const SpMat K = form.reduced(form.stiffness - form.potential);
  const SpMat M = form.reduced(form.unit_mass());
  const double dt = t / steps;

  Eigen::SimplicialLDLT<SpMat> cn, euler;
  cn.compute(SpMat(M + 0.5 * dt * K));
  euler.compute(SpMat(M + 0.25 * dt * K));  // two implicit half steps
  require(cn.info() == Eigen::Success && euler.info() == Eigen::Success,
          Errc::factorization_failed, "time-step factorization failed");

  Eigen::VectorXd u = form.reduce(u0);
  // Rannacher startup: two implicit-Euler half steps make the first full step
  for (int half = 0; half < 2; ++half) {
    u = euler.solve(M * u);
    require(u.allFinite(), Errc::nonfinite_state, "state became nonfinite at startup");
  }
  for (int s = 1; s < steps; ++s) {
    Eigen::VectorXd rhs = M * u - 0.5 * dt * (K * u);
    u = cn.solve(rhs);
    if (!u.allFinite())
      fail(Errc::nonfinite_state, "state became nonfinite at step " + std::to_string(s));
  }
  return form.expand(u);
}

Eigen::VectorXd kernel_column_stepped(const DiscreteForm& form, int y_node, double t,
                                      int steps) {
  require(form.lift.trivial(), Errc::parameter_out_of_range,
          "stepped kernel columns use the plain assembly");
  const auto keep = form.interior();
  const SpMat M = form.reduced(form.unit_mass());
  Eigen::VectorXd e = Eigen::VectorXd::Zero(keep.size());
  int red_idx = -1;
  for (size_t i = 0; i < keep.size(); ++i)
    if (keep[i] == y_node) red_idx = static_cast<int>(i);
  require(red_idx >= 0, Errc::parameter_out_of_range, "column node is not interior");
  e[red_idx] = 1.0;
  Eigen::SimplicialLDLT<SpMat> mf(M);
  require(mf.info() == Eigen::Success, Errc::factorization_failed, "mass factorization failed");
  Eigen::VectorXd u0 = form.expand(mf.solve(e));
  return propagate(form, u0, t, steps);
}

namespace {

struct GridAlphas {
  std::vector<double> per_stratum;  // exponent alpha_k per stratum
  double a_max = 0.0;               // A = max(alpha, 0)
};

GridAlphas spec_alphas(const StratifiedDomain& dom, const PotentialSpec& spec) {
  GridAlphas g;
  g.per_stratum.assign(dom.strata().size(), 0.0);
  size_t pole_idx = 0;
  for (size_t s = 0; s < dom.strata().size(); ++s) {
    const Stratum& st = dom.strata()[s];
    if (st.geometry == StratumGeometry::point) {
      if (pole_idx < spec.pole_betas.size()) g.per_stratum[s] = spec.pole_betas[pole_idx++];
    } else if (spec.boundary_alpha) {
      g.per_stratum[s] = *spec.boundary_alpha;
    }
    g.a_max = std::max(g.a_max, g.per_stratum[s]);
  }
  return g;
}

double model_factor(const StratifiedDomain& dom, const GridAlphas& g, const Point& x,
                    double sqrt_t) {
  double v = 1.0;
  for (size_t s = 0; s < g.per_stratum.size(); ++s) {
    if (g.per_stratum[s] == 0.0) continue;
    double d = dom.stratum_distance(static_cast<int>(s), x);
    v *= std::pow(1.0 + sqrt_t / d, -g.per_stratum[s]);
  }
  return v;
}

double dist_power_product(const StratifiedDomain& dom, const GridAlphas& g, const Point& x) {
  double v = 1.0;
  for (size_t s = 0; s < g.per_stratum.size(); ++s) {
    if (g.per_stratum[s] == 0.0) continue;
    v *= std::pow(dom.stratum_distance(static_cast<int>(s), x), g.per_stratum[s]);
  }
  return v;
}

double coord_dist(const Point& a, const Point& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

KernelCertificate fit_sandwich(const SpectralKernel& kernel, const PotentialSpec& spec,
                               const SandwichGrid& grid, bool keep_samples) {
  const DiscreteForm& form = kernel.form();
  const StratifiedDomain& dom = *form.dom;
  const GridAlphas alphas = spec_alphas(dom, spec);
  const double n_comp = dom.dimension();
  const double lambda1 = kernel.lambda1();
  const Eigen::VectorXd phi = kernel.phi1();

  std::vector<int> sample_nodes;
  for (int i = 0; i < form.n_nodes(); i += grid.node_stride)
    if (dom.interior(form.node_coords[i])) sample_nodes.push_back(i);
  require(sample_nodes.size() >= 4, Errc::empty_grid, "sandwich grid has too few nodes");

  // fixed admissible pair set: Gaussian factor above the noise guard at the
  // largest candidate rate, kernel above floor
  const double c2_max = 2.0;
  KernelCertificate cert;
  double best_spread = std::numeric_limits<double>::infinity();
  std::vector<std::tuple<double, int, int, double>> admissible;  // (t, i, j, h)
  for (double t : grid.times) {
    Eigen::MatrixXd H = kernel.kernel(t);
    const double hmax = H.maxCoeff();
    const double floor = std::max(grid.kernel_floor, grid.noise_floor_rel * hmax);
    for (int a : sample_nodes)
      for (int b : sample_nodes) {
        if (b < a) continue;
        const double dxy = coord_dist(form.node_coords[a], form.node_coords[b]);
        if (dxy > grid.max_pair_distance) continue;
        if (std::exp(-c2_max * dxy * dxy / t) < grid.noise_floor_rel) continue;
        if (!(H(a, b) > floor)) continue;
        admissible.emplace_back(t, a, b, H(a, b));
      }
  }
  require(!admissible.empty(), Errc::empty_grid, "no admissible short-time samples");

  for (int k = 1; k <= 32; ++k) {
    const double c2 = k * 0.0625;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& [t, a, b, h] : admissible) {
      const double st = std::sqrt(t);
      const double model = model_factor(dom, alphas, form.node_coords[a], st) *
                           model_factor(dom, alphas, form.node_coords[b], st) *
                           std::pow(t, -0.5 * n_comp) *
                           std::exp(-c2 * std::pow(coord_dist(form.node_coords[a],
                                                              form.node_coords[b]),
                                                   2) /
                                    t);
      const double ratio = h / model;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    if (hi / lo < best_spread) {
      best_spread = hi / lo;
      cert.gauss_rate = c2;
      cert.c_lower = lo;
      cert.c_upper = hi;
    }
  }
  require(best_spread < 1e6, Errc::unbounded_ratio, "sandwich ratio spread exceeds 1e6");

  if (keep_samples) {
    for (const auto& [t, a, b, h] : admissible) {
      const double st = std::sqrt(t);
      const double model = model_factor(dom, alphas, form.node_coords[a], st) *
                           model_factor(dom, alphas, form.node_coords[b], st) *
                           std::pow(t, -0.5 * n_comp) *
                           std::exp(-cert.gauss_rate *
                                    std::pow(coord_dist(form.node_coords[a],
                                                        form.node_coords[b]),
                                             2) /
                                    t);
      cert.samples.push_back({t, form.node_coords[a][0], form.node_coords[b][0], h, model,
                              h / model});
    }
  }

  // long-time behaviour: h e^{lambda1 t} / (phi1 x phi1)
  auto long_spread = [&](double t) {
    Eigen::MatrixXd H = kernel.kernel(t);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0, level = 0.0;
    int cnt = 0;
    for (int a : sample_nodes)
      for (int b : sample_nodes) {
        if (b < a) continue;
        const double r = H(a, b) * std::exp(lambda1 * t) / (phi[a] * phi[b]);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
        level += r;
        ++cnt;
      }
    return std::tuple<double, double>(hi / lo - 1.0, level / cnt);
  };
  auto short_err = [&](double t) {
    Eigen::MatrixXd H = kernel.kernel(t);
    const double hmax = H.maxCoeff();
    const double floor = std::max(grid.kernel_floor, grid.noise_floor_rel * hmax);
    const double st = std::sqrt(t);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int a : sample_nodes)
      for (int b : sample_nodes) {
        if (b < a) continue;
        const double dxy = coord_dist(form.node_coords[a], form.node_coords[b]);
        if (dxy > grid.max_pair_distance) continue;
        if (std::exp(-c2_max * dxy * dxy / t) < grid.noise_floor_rel) continue;
        if (!(H(a, b) > floor)) continue;
        const double model = model_factor(dom, alphas, form.node_coords[a], st) *
                             model_factor(dom, alphas, form.node_coords[b], st) *
                             std::pow(t, -0.5 * n_comp) *
                             std::exp(-cert.gauss_rate * dxy * dxy / t);
        const double ratio = H(a, b) / model;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
      }
    return lo < hi ? hi / lo - 1.0 : std::numeric_limits<double>::infinity();
  };

  std::vector<double> all_t = grid.times;
  all_t.insert(all_t.end(), grid.long_times.begin(), grid.long_times.end());
  std::sort(all_t.begin(), all_t.end());
  cert.crossover_T = all_t.back();
  for (double t : all_t) {
    auto [ls, lvl] = long_spread(t);
    if (ls < short_err(t)) {
      cert.crossover_T = t;
      break;
    }
  }
  cert.longtime_T = grid.long_times.empty() ? cert.crossover_T : grid.long_times.back();
  for (size_t i = 0; i < grid.long_times.size(); ++i) {
    bool tail_ok = true;
    for (size_t j = i; j < grid.long_times.size(); ++j) {
      auto [sp, lvl] = long_spread(grid.long_times[j]);
      if (sp > grid.longtime_target) {
        tail_ok = false;
        break;
      }
    }
    if (tail_ok) {
      cert.longtime_T = std::max(grid.long_times[i], cert.crossover_T);
      break;
    }
  }
  if (!grid.long_times.empty()) {
    auto [sp, lvl] = long_spread(grid.long_times.back());
    cert.longtime_spread = sp;
    cert.longtime_level = lvl;
  }

  // ultracontractive constant over the full scan
  const double expo = 0.5 * (n_comp + 2.0 * alphas.a_max);
  cert.ultracontractive_exponent = expo;
  double uc = 0.0;
  for (double t : all_t) {
    Eigen::MatrixXd H = kernel.kernel(t);
    const double floor = std::max(grid.kernel_floor, grid.noise_floor_rel * H.maxCoeff());
    for (int a : sample_nodes)
      for (int b : sample_nodes) {
        if (b < a || !(H(a, b) > floor)) continue;
        const double den = dist_power_product(dom, alphas, form.node_coords[a]) *
                           dist_power_product(dom, alphas, form.node_coords[b]);
        uc = std::max(uc, H(a, b) * std::pow(t, expo) * std::exp(lambda1 * t) / den);
      }
  }
  cert.ultracontractive_C = uc;
  return cert;
}

double ultracontractive_bound(const SpectralKernel& kernel, const PotentialSpec& spec,
                              const SandwichGrid& grid) {
  return fit_sandwich(kernel, spec, grid).ultracontractive_C;
}

HarnackResult harnack_scan(const SpectralKernel& kernel,
                           const std::vector<std::pair<Point, double>>& balls,
                           const HarnackOptions& opts) {
  const DiscreteForm& form = kernel.form();
  const StratifiedDomain& dom = *form.dom;
  const Eigen::VectorXd phi = kernel.phi1();
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  HarnackResult res;
  res.per_ball.assign(balls.size(), 0.0);

  std::vector<std::vector<int>> masks(balls.size());
  std::vector<bool> is_interior_ball(balls.size());
  for (size_t bi = 0; bi < balls.size(); ++bi) {
    const auto& [c, r] = balls[bi];
    BallSpec ball = dom.make_ball(c, r);
    is_interior_ball[bi] = ball.kind == BallKind::euclidean;
    for (int i = 0; i < form.n_nodes(); ++i) {
      const Point& x = form.node_coords[i];
      if (!dom.interior(x)) continue;
      if (coord_dist(x, c) <= 0.5 * r && phi[i] > 1e-250) masks[bi].push_back(i);
    }
    require(masks[bi].size() >= 3, Errc::empty_grid, "Harnack ball contains too few nodes");
  }

  for (int trial = 0; trial < opts.n_initial; ++trial) {
    Eigen::VectorXd u0 = Eigen::VectorXd::Zero(form.n_nodes());
    for (int i = 0; i < form.n_nodes(); ++i)
      if (dom.interior(form.node_coords[i])) u0[i] = std::abs(gauss(rng)) + 0.05;
    const double u0max = u0.maxCoeff();
    for (size_t bi = 0; bi < balls.size(); ++bi) {
      const double r = balls[bi].second;
      const double r2 = r * r;
      double sup = 0.0, inf = std::numeric_limits<double>::infinity();
      for (int k = 0; k < opts.time_samples; ++k) {
        const double f = opts.time_samples == 1 ? 0.0 : double(k) / (opts.time_samples - 1);
        const double t1 = r2 * (0.25 + 0.25 * f);
        const double t2 = r2 * (0.75 + 0.25 * f);
        Eigen::VectorXd ue = kernel.apply(t1, u0);
        Eigen::VectorXd ul = kernel.apply(t2, u0);
        require(ue.minCoeff() > -opts.positivity_tol * u0max &&
                    ul.minCoeff() > -opts.positivity_tol * u0max,
                Errc::nonpositive_solution, "evolved state dipped below zero");
        for (int i : masks[bi]) {
          sup = std::max(sup, ue[i] / phi[i]);
          inf = std::min(inf, ul[i] / phi[i]);
        }
      }
      require(inf > 0, Errc::nonpositive_solution, "late-window infimum is not positive");
      res.per_ball[bi] = std::max(res.per_ball[bi], sup / inf);
    }
  }
  for (size_t bi = 0; bi < balls.size(); ++bi) {
    res.c_h = std::max(res.c_h, res.per_ball[bi]);
    if (is_interior_ball[bi])
      res.interior_max = std::max(res.interior_max, res.per_ball[bi]);
    else
      res.boundary_max = std::max(res.boundary_max, res.per_ball[bi]);
  }
  return res;
}

}  // namespace hardyheat
