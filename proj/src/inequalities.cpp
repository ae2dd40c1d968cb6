#include "hardyheat/inequalities.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "hardyheat/errors.hpp"
#include "hardyheat/quadrature.hpp"

namespace hardyheat {

double admissible_threshold(int k, int n, double q) {
  return -0.5 * (k - 2.0) - (n - k) * (q - 2.0) / (2.0 * (q + 2.0));
}

double beta_exponent(int k, int n, double q, double alpha_k) {
  (void)k;
  return alpha_k - 1.0 + (q - 2.0) * n / (2.0 * q);
}

double log_sobolev_threshold(int k, int n) {
  return -0.5 * (k - 2.0) - (n - k) / (2.0 * (n - 1.0));
}

int formula_dimension(const StratifiedDomain& dom) {
  return std::max(dom.ambient_dimension(), 2);
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::bounded_below: return "BoundedBelow";
    case Verdict::degenerates_to_zero: return "DegeneratesToZero";
    case Verdict::inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

Verdict classify_levels(const std::vector<LevelEstimate>& levels) {
  if (levels.size() < 2) return Verdict::inconclusive;
  for (const auto& l : levels)
    if (!l.converged || !(l.value > 0) || !std::isfinite(l.value)) return Verdict::inconclusive;
  const size_t m = levels.size();
  const double r_last = levels[m - 1].value / levels[m - 2].value;
  if (r_last >= 0.9) return Verdict::bounded_below;

  bool decreasing = true;
  for (size_t i = 1; i < m; ++i)
    if (!(levels[i].value < levels[i - 1].value)) decreasing = false;
  if (!decreasing || r_last > 0.85 || m < 3) return Verdict::inconclusive;

  // slope in ln(value) vs ln|ln h|: log-rate degenerations steepen with depth,
  // power-law ones hold a constant slope well away from zero
  auto slope = [&](size_t i) {
    const double dl = std::log(std::abs(std::log(levels[i + 1].h_min)) /
                               std::abs(std::log(levels[i].h_min)));
    return std::log(levels[i + 1].value / levels[i].value) / dl;
  };
  const double s_first = slope(0), s_last = slope(m - 2);
  if (std::abs(s_last) >= 1.15 * std::abs(s_first) || std::abs(s_last) >= 0.3)
    return Verdict::degenerates_to_zero;
  return Verdict::inconclusive;
}

namespace {

Eigen::MatrixXd to_dense(const SpMat& m) { return Eigen::MatrixXd(m); }

struct ScaledPencil {
  Eigen::MatrixXd K;  // dense scaled numerator
  Eigen::MatrixXd M;
  Eigen::VectorXd scale;  // full-size; zero at eliminated nodes
  std::vector<int> keep;
};

ScaledPencil scale_pencil(const DiscreteForm& form, const SpMat& num_full,
                          const SpMat& mass_full) {
  ScaledPencil sp;
  sp.keep = form.interior();
  SpMat K = form.reduced(num_full), M = form.reduced(mass_full);
  const int n = static_cast<int>(sp.keep.size());
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) {
    const double mi = M.coeff(i, i);
    require(mi > 0, Errc::zero_denominator, "mass diagonal must be positive");
    d[i] = 1.0 / std::sqrt(mi);
  }
  sp.K = d.asDiagonal() * to_dense(K) * d.asDiagonal();
  sp.M = d.asDiagonal() * to_dense(M) * d.asDiagonal();
  sp.scale = Eigen::VectorXd::Zero(form.n_nodes());
  for (int i = 0; i < n; ++i) sp.scale[sp.keep[i]] = d[i];
  return sp;
}

// nested level meshes: each level's ladder nodes are unioned with the coarser ones
std::vector<std::shared_ptr<Mesh1D>> level_meshes(const StratifiedDomain& dom,
                                                  const PotentialSpec& spec,
                                                  const QuotientLevels& levels) {
  std::vector<std::shared_ptr<Mesh1D>> out;
  std::vector<double> accum;
  for (double h : levels.h_mins) {
    MeshParams p = levels.base;
    p.h_min = h;
    Mesh1D m = build_mesh_1d(dom, spec, p);
    accum.insert(accum.end(), m.nodes.begin(), m.nodes.end());
    std::sort(accum.begin(), accum.end());
    accum.erase(std::unique(accum.begin(), accum.end()), accum.end());
    Mesh1D u = m;
    u.nodes = accum;
    out.push_back(std::make_shared<Mesh1D>(std::move(u)));
  }
  return out;
}

/// q-norm functional int w(d) |u|^q dvol with w = d^s X(d/D)^p (d = global
/// stratum-min distance; an optional extra X power rides on the pole distance).
struct QNorm {
  const DiscreteForm* form = nullptr;
  double q = 2.0;
  double s = 0.0;
  double p = 0.0;
  int order = 10;

  double weight(double t) const {
    const auto& dom = *form->dom;
    Point x = {t};
    double dmin = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < dom.strata().size(); ++k)
      dmin = std::min(dmin, dom.stratum_distance(static_cast<int>(k), x));
    double w = s != 0.0 ? std::pow(dmin, s) : 1.0;
    if (p != 0.0) w *= std::pow(x_weight(dmin / sup_distance(dom)), p);
    return w;
  }

  template <typename F>
  void per_cell(const Eigen::VectorXd& u, F&& take) const {
    const auto& mesh = *form->mesh1;
    const auto& nodes = mesh.nodes;
    const auto& rule = quad::gauss(order);
    for (int e = 0; e + 1 < static_cast<int>(nodes.size()); ++e) {
      const double x0 = nodes[e], x1 = nodes[e + 1], h = x1 - x0;
      const bool sing_lo = (e == 0), sing_hi = (e + 2 == static_cast<int>(nodes.size()));
      auto point = [&](double t, double wq) {
        const double J = mesh.jacobian(t);
        const double uu = u[e] * (x1 - t) / h + u[e + 1] * (t - x0) / h;
        take(e, t, wq * J * weight(t), uu, (x1 - t) / h, (t - x0) / h);
      };
      if (sing_lo || sing_hi) {
        double hi_len = h;
        for (int k = 0; k < 52; ++k) {
          const double lo_len = hi_len * 0.5;
          const double pa = sing_lo ? x0 + lo_len : x1 - hi_len;
          const double pb = sing_lo ? x0 + hi_len : x1 - lo_len;
          const double mid = 0.5 * (pa + pb), half = 0.5 * (pb - pa);
          for (size_t qi = 0; qi < rule.x.size(); ++qi)
            point(mid + half * rule.x[qi], half * rule.w[qi]);
          hi_len = lo_len;
        }
      } else {
        const double mid = 0.5 * (x0 + x1), half = 0.5 * h;
        for (size_t qi = 0; qi < rule.x.size(); ++qi)
          point(mid + half * rule.x[qi], half * rule.w[qi]);
      }
    }
  }

  double value(const Eigen::VectorXd& u) const {
    double acc = 0.0;
    per_cell(u, [&](int, double, double w, double uu, double, double) {
      acc += w * std::pow(std::abs(uu), q);
    });
    return acc;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& u) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(u.size());
    per_cell(u, [&](int e, double, double w, double uu, double p0, double p1) {
      if (uu == 0.0) return;
      const double c = w * q * std::pow(std::abs(uu), q - 2.0) * uu;
      g[e] += c * p0;
      g[e + 1] += c * p1;
    });
    return g;
  }
};

struct MinimizeResult {
  double value = std::numeric_limits<double>::infinity();
  bool converged = false;
  Eigen::VectorXd minimizer;  // full-node u
};

MinimizeResult minimize_q_quotient(const ScaledPencil& sp, const DiscreteForm& form,
                                   const QNorm& den,
                                   const std::vector<Eigen::VectorXd>& inits_scaled,
                                   int iterations) {
  MinimizeResult best;
  const int n = static_cast<int>(sp.keep.size());
  auto to_full = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(form.n_nodes());
    for (int i = 0; i < n; ++i) full[sp.keep[i]] = sp.scale[sp.keep[i]] * v[i];
    return full;
  };
  for (const auto& init : inits_scaled) {
    Eigen::VectorXd v = init;
    double d = den.value(to_full(v));
    if (!(d > 0) || !std::isfinite(d)) continue;
    v /= std::pow(d, 1.0 / den.q);
    double f = v.dot(sp.K * v);
    double step = 1.0;
    bool converged = false;
    double last_drop = 0.0;
    for (int it = 0; it < iterations; ++it) {
      Eigen::VectorXd dgrad_full = den.gradient(to_full(v));
      Eigen::VectorXd dgrad(n);
      for (int i = 0; i < n; ++i) dgrad[i] = sp.scale[sp.keep[i]] * dgrad_full[sp.keep[i]];
      Eigen::VectorXd g = 2.0 * (sp.K * v) - (2.0 / den.q) * f * dgrad;
      const double gn = g.norm();
      if (gn <= 1e-12 * std::max(1.0, std::abs(f))) {
        converged = true;
        break;
      }
      bool moved = false;
      while (step > 1e-18) {
        Eigen::VectorXd vn = v - step * g;
        const double dn = den.value(to_full(vn));
        if (dn > 0 && std::isfinite(dn)) {
          vn /= std::pow(dn, 1.0 / den.q);
          const double fn = vn.dot(sp.K * vn);
          if (fn < f - 1e-14 * std::abs(f)) {
            last_drop = (f - fn) / std::max(std::abs(f), 1e-300);
            v = vn;
            f = fn;
            moved = true;
            step *= 1.4;
            break;
          }
        }
        step *= 0.5;
      }
      if (!moved) {
        converged = true;
        break;
      }
    }
    if (!converged && last_drop < 1e-4) converged = true;  // flat-landing stop
    if (f < best.value) {
      best.value = f;
      best.converged = converged;
      best.minimizer = to_full(v);
    }
  }
  require(std::isfinite(best.value), Errc::nonconverged_minimizer,
          "no admissible start produced a finite quotient");
  return best;
}

std::vector<Eigen::VectorXd> standard_inits(const ScaledPencil& sp, const DiscreteForm& form,
                                            std::uint64_t seed, int restarts) {
  std::vector<Eigen::VectorXd> inits;
  const int n = static_cast<int>(sp.keep.size());
  // eigen-initialization from the quadratic relaxation
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(sp.K, sp.M);
  if (es.info() == Eigen::Success) inits.push_back(es.eigenvectors().col(0));
  // mass concentrated at the nodes nearest either end (the singular pieces)
  for (int target = 0; target < 2; ++target) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    int idx = target == 0 ? 0 : n - 1;
    e[idx] = 1.0;
    if (n > 2) e[std::min(idx + 1, n - 1)] = 0.5;
    inits.push_back(e);
  }
  // log-ramp profile along the global distance (the degeneration family)
  {
    Eigen::VectorXd v(n);
    const double h = form.mesh1 ? form.mesh1->h_min : 1e-6;
    for (int i = 0; i < n; ++i) {
      const Point& x = form.node_coords[sp.keep[i]];
      double dmin = std::numeric_limits<double>::infinity();
      for (size_t k = 0; k < form.dom->strata().size(); ++k)
        dmin = std::min(dmin, form.dom->stratum_distance(static_cast<int>(k), x));
      const double ramp = std::clamp(std::log(dmin / (0.5 * h)) / std::log(1e-2 / h), 0.0, 1.0);
      const double power = std::pow(dmin, -0.5 * (form.dom->ambient_dimension() - 2.0) - 0.49);
      v[i] = ramp * power / std::max(sp.scale[sp.keep[i]], 1e-300);
    }
    if (v.allFinite()) inits.push_back(v);
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (static_cast<int>(inits.size()) < restarts + 3) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = gauss(rng);
    inits.push_back(v.cwiseAbs());
  }
  return inits;
}

double lifted_lambda1(const StratifiedDomain& dom, const PotentialSpec& spec,
                      std::shared_ptr<const Mesh1D> mesh) {
  AssembleOptions ao;
  ao.lifted = true;
  auto domp = std::make_shared<StratifiedDomain>(dom);
  DiscreteForm lf = assemble(domp, mesh, spec, ao);
  SolveOptions so;
  so.dense = lf.interior().size() <= 2200;
  return solve_ground_state(lf, so).lambda1;
}

}  // namespace

QuotientReport sobolev_quotient(const StratifiedDomain& dom, const PotentialSpec& spec,
                                double q, double lambda, const QuotientLevels& levels,
                                bool log_corrected) {
  require(lambda > 0, Errc::parameter_out_of_range, "the spectral shift lambda must be positive");
  const int n = formula_dimension(dom);
  if (dom.ambient_dimension() >= 3)
    require(q > 2.0 && q <= 2.0 * n / (n - 2.0) + 1e-12, Errc::parameter_out_of_range,
            "q must lie in (2, 2n/(n-2)]");
  else
    require(q > 2.0, Errc::parameter_out_of_range, "q must exceed 2");

  QuotientReport rep;
  rep.id = log_corrected ? "sobolev_log_corrected" : "sobolev";
  rep.q = q;
  rep.lambda = lambda;

  auto domp = std::make_shared<StratifiedDomain>(dom);
  auto meshes = level_meshes(dom, spec, levels);
  for (auto& mesh : meshes) {
    const double lam1 = lifted_lambda1(dom, spec, mesh);
    rep.lambda1 = lam1;
    AssembleOptions ao;  // plain truncated assembly: the quotient space is C_c
    DiscreteForm form = assemble(domp, mesh, spec, ao);
    SpMat num = form.stiffness - form.potential + (lambda - lam1) * form.unit_mass();
    ScaledPencil sp = scale_pencil(form, num, form.unit_mass());

    QNorm den;
    den.form = &form;
    den.q = q;
    den.s = 0.5 * (q * (n - 2.0) - 2.0 * n);
    den.p = log_corrected ? 0.5 * q + 1.0 : 0.0;

    auto inits = standard_inits(sp, form, levels.seed, levels.restarts);
    MinimizeResult res = minimize_q_quotient(sp, form, den, inits, levels.minimize_iterations);
    LevelEstimate le;
    le.h_min = mesh->h_min;
    le.value = res.value;
    le.nodes = static_cast<int>(mesh->nodes.size());
    le.converged = res.converged;
    rep.levels.push_back(le);
    if (&mesh == &meshes.back()) {
      rep.minimizer_values.assign(res.minimizer.data(),
                                  res.minimizer.data() + res.minimizer.size());
      for (const auto& pt : form.node_coords) rep.minimizer_coords.push_back(pt[0]);
    }
  }
  rep.verdict = classify_levels(rep.levels);
  return rep;
}

QuotientReport critical_hardy_log(const StratifiedDomain& dom, const PotentialSpec& spec,
                                  double lambda, const QuotientLevels& levels, bool with_x) {
  QuotientReport rep;
  rep.id = with_x ? "critical_hardy_log" : "critical_hardy_control";
  rep.q = 2.0;
  rep.lambda = lambda;
  auto domp = std::make_shared<StratifiedDomain>(dom);
  auto meshes = level_meshes(dom, spec, levels);
  for (auto& mesh : meshes) {
    const double lam1 = lifted_lambda1(dom, spec, mesh);
    rep.lambda1 = lam1;
    AssembleOptions ao;
    WeightSpec w;
    w.kind = WeightSpec::Kind::global_power_x;
    w.name = "denominator";
    w.s = -2.0;
    w.p = with_x ? 2.0 : 0.0;
    ao.weights = {w};
    DiscreteForm form = assemble(domp, mesh, spec, ao);
    SpMat num = form.stiffness - form.potential + (lambda - lam1) * form.unit_mass();
    ScaledPencil spn = scale_pencil(form, num, form.mass.at("denominator"));
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(spn.K, spn.M);
    require(es.info() == Eigen::Success, Errc::factorization_failed,
            "quotient eigensolve failed");
    LevelEstimate le;
    le.h_min = mesh->h_min;
    le.value = es.eigenvalues()(0);
    le.nodes = static_cast<int>(mesh->nodes.size());
    rep.levels.push_back(le);
  }
  rep.verdict = classify_levels(rep.levels);
  return rep;
}

QuotientReport codim_block(const StratifiedDomain& dom, int k, double q, double alpha_k,
                           double delta, const QuotientLevels& levels) {
  const int n = formula_dimension(dom);
  QuotientReport rep;
  rep.id = "codim_block";
  rep.q = q;
  rep.stratum_codim = k;
  rep.beta_k = beta_exponent(k, n, q, alpha_k);
  require(dom.stratum_of_codim(k) >= 0, Errc::no_such_stratum,
          "no stratum of the requested codimension");
  require(delta <= dom.localization_beta() + 1e-12, Errc::radius_too_large,
          "layer width exceeds the localization scale");

  const double excluded = admissible_threshold(k, n, q);
  if (std::abs(alpha_k - excluded) < 1e-12) {
    rep.excluded = true;
    rep.verdict = Verdict::inconclusive;
    return rep;
  }
  const bool log_corrected =
      k == dom.ambient_dimension() && std::abs(alpha_k + 0.5 * (k - 2.0)) < 1e-12;

  // layer coordinate: distance to the stratum, Jacobian from the geometry
  const bool radial_point = k == dom.ambient_dimension() && k >= 2;
  for (double h : levels.h_mins) {
    auto ladder = graded_ladder(delta, h * delta, levels.base.rho, levels.base.uniform_cells,
                                true, false);
    Mesh1D mesh;
    mesh.nodes = ladder;
    mesh.coord_lo = 0.0;
    mesh.coord_hi = delta;
    mesh.h_min = h;
    if (radial_point) {
      mesh.jac_exponent = dom.ambient_dimension() - 1.0;
      mesh.jac_scale = dom.ambient_dimension() == 3 ? 4.0 * M_PI : 2.0 * M_PI;
    }
    const int N = static_cast<int>(mesh.nodes.size());
    // numerator: int d^{2 alpha} (|v'|^2 + v^2); denominator: ||d^{beta} (X^..) v||_q
    std::vector<Eigen::Triplet<double>> ts, tg;
    const auto& rule = quad::gauss(10);
    for (int e = 0; e + 1 < N; ++e) {
      const double x0 = mesh.nodes[e], x1 = mesh.nodes[e + 1], hcell = x1 - x0;
      double ls[2][2] = {{0, 0}, {0, 0}}, lg[2][2] = {{0, 0}, {0, 0}};
      auto addp = [&](double t, double wq) {
        const double J = mesh.jacobian(t);
        const double w = std::pow(t, 2.0 * alpha_k) * J;
        const double phi[2] = {(x1 - t) / hcell, (t - x0) / hcell};
        const double dphi[2] = {-1.0 / hcell, 1.0 / hcell};
        for (int i = 0; i < 2; ++i)
          for (int j = i; j < 2; ++j) {
            ls[i][j] += wq * w * dphi[i] * dphi[j];
            lg[i][j] += wq * w * phi[i] * phi[j];
          }
      };
      if (e == 0) {
        double hi_len = hcell;
        for (int kk = 0; kk < 52; ++kk) {
          const double lo_len = hi_len * 0.5;
          const double mid = x0 + 0.5 * (lo_len + hi_len), half = 0.5 * (hi_len - lo_len);
          for (size_t qi = 0; qi < rule.x.size(); ++qi)
            addp(mid + half * rule.x[qi], half * rule.w[qi]);
          hi_len = lo_len;
        }
      } else {
        const double mid = 0.5 * (x0 + x1), half = 0.5 * hcell;
        for (size_t qi = 0; qi < rule.x.size(); ++qi)
          addp(mid + half * rule.x[qi], half * rule.w[qi]);
      }
      for (int i = 0; i < 2; ++i)
        for (int j = i; j < 2; ++j) {
          ts.emplace_back(e + i, e + j, ls[i][j]);
          if (i != j) ts.emplace_back(e + j, e + i, ls[i][j]);
          tg.emplace_back(e + i, e + j, lg[i][j]);
          if (i != j) tg.emplace_back(e + j, e + i, lg[i][j]);
        }
    }
    SpMat S(N, N), G(N, N);
    S.setFromTriplets(ts.begin(), ts.end());
    G.setFromTriplets(tg.begin(), tg.end());

    // compact support in the layer: Dirichlet at d = delta; the d -> 0 end is
    // free when the weight vanishes fast enough
    std::vector<uint8_t> dir(N, 0);
    dir[N - 1] = 1;
    if (2.0 * alpha_k + mesh.jac_exponent < 1.0 - 1e-12) dir[0] = 1;

    // wrap into a DiscreteForm shell so the q-minimizer machinery applies
    DiscreteForm shell;
    shell.dom = std::make_shared<StratifiedDomain>(StratifiedDomain::interval(0.0, delta));
    shell.mesh1 = std::make_shared<Mesh1D>(mesh);
    shell.stiffness = S;
    shell.potential = SpMat(N, N);
    shell.mass["unit"] = G;
    shell.dirichlet = dir;
    shell.lift_m = Eigen::VectorXd::Ones(N);
    for (double t : mesh.nodes) shell.node_coords.push_back({t});

    SpMat num = S + G;
    ScaledPencil sp = scale_pencil(shell, num, G);
    QNorm den;
    den.form = &shell;
    den.q = q;
    den.s = q * rep.beta_k;
    den.p = log_corrected ? 0.5 * q + 1.0 : 0.0;
    auto inits = standard_inits(sp, shell, levels.seed, levels.restarts);
    MinimizeResult res = minimize_q_quotient(sp, shell, den, inits, levels.minimize_iterations);
    LevelEstimate le;
    le.h_min = h;
    le.value = res.value;
    le.nodes = N;
    le.converged = res.converged;
    rep.levels.push_back(le);
  }
  rep.verdict = classify_levels(rep.levels);
  return rep;
}

namespace {

double dist_power_prefactor(const StratifiedDomain& dom, const PotentialSpec& spec,
                            const Point& x) {
  double v = 1.0;
  size_t pole_idx = 0;
  for (size_t s = 0; s < dom.strata().size(); ++s) {
    const Stratum& st = dom.strata()[s];
    double a = 0.0;
    if (st.geometry == StratumGeometry::point) {
      if (pole_idx < spec.pole_betas.size()) a = spec.pole_betas[pole_idx++];
    } else if (spec.boundary_alpha) {
      a = *spec.boundary_alpha;
    }
    if (a != 0.0) v *= std::pow(dom.stratum_distance(static_cast<int>(s), x), a);
  }
  return v;
}

}  // namespace

LogSobolevScan weighted_log_sobolev(const DiscreteForm& plain, const GroundState& gs,
                                    const PotentialSpec& spec, const std::vector<double>& eps,
                                    int n_random, std::uint64_t seed) {
  const StratifiedDomain& dom = *plain.dom;
  require(plain.mesh1 != nullptr, Errc::parameter_out_of_range,
          "the entropy scan is implemented for 1D reductions");
  const auto& mesh = *plain.mesh1;
  const auto& nodes = mesh.nodes;
  const int N = static_cast<int>(nodes.size());
  const SpMat K = plain.stiffness - plain.potential;
  const SpMat& M = plain.unit_mass();

  double a_max = 0.0;
  if (spec.boundary_alpha) a_max = std::max(a_max, *spec.boundary_alpha);
  for (double b : spec.pole_betas) a_max = std::max(a_max, b);
  const double slope_target = -0.25 * (dom.dimension() + 2.0 * a_max);

  auto entropy = [&](const Eigen::VectorXd& u, double nrm2) {
    const double nrm = std::sqrt(nrm2);
    double acc = 0.0;
    const auto& rule = quad::gauss(10);
    for (int e = 0; e + 1 < N; ++e) {
      const double x0 = nodes[e], x1 = nodes[e + 1], h = x1 - x0;
      const bool sing = (e == 0) || (e + 2 == N);
      auto point = [&](double t, double wq) {
        const double uu = u[e] * (x1 - t) / h + u[e + 1] * (t - x0) / h;
        if (uu == 0.0) return;
        const double pref = dist_power_prefactor(dom, spec, {t});
        const double val = uu * uu * std::log(std::abs(uu) / (nrm * pref));
        acc += wq * mesh.jacobian(t) * val;
      };
      if (sing) {
        double hi_len = h;
        for (int k = 0; k < 52; ++k) {
          const double lo_len = hi_len * 0.5;
          const double pa = (e == 0) ? x0 + lo_len : x1 - hi_len;
          const double pb = (e == 0) ? x0 + hi_len : x1 - lo_len;
          const double mid = 0.5 * (pa + pb), half = 0.5 * (pb - pa);
          for (size_t qi = 0; qi < rule.x.size(); ++qi)
            point(mid + half * rule.x[qi], half * rule.w[qi]);
          hi_len = lo_len;
        }
      } else {
        const double mid = 0.5 * (x0 + x1), half = 0.5 * h;
        for (size_t qi = 0; qi < rule.x.size(); ++qi)
          point(mid + half * rule.x[qi], half * rule.w[qi]);
      }
    }
    require(std::isfinite(acc), Errc::nonfinite_entropy, "entropy integral is not finite");
    return acc;
  };

  // sample menu: the ground state, prefactor-shaped Gaussians at the scale of
  // each eps (they saturate the bound), and random positive mixtures
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Eigen::VectorXd> base_menu;
  base_menu.push_back(gs.phi);
  for (int r = 0; r < n_random; ++r) {
    Eigen::VectorXd u(N);
    for (int i = 0; i < N; ++i)
      u[i] = plain.dirichlet[i] ? 0.0 : std::abs(gauss(rng)) + 0.1;
    base_menu.push_back(u);
  }

  LogSobolevScan scan;
  scan.eps = eps;
  scan.slope_target = slope_target;
  const double len = mesh.coord_hi - mesh.coord_lo;
  for (double e : eps) {
    double best = -std::numeric_limits<double>::infinity();
    std::vector<Eigen::VectorXd> menu = base_menu;
    for (double cmul : {0.5, 1.0, 2.0}) {
      const double sigma = std::min(std::sqrt(e * cmul), 0.45 * len);
      for (double frac : {0.0, 0.25, 0.5}) {
        // centers: graze the boundary at ~2 sigma, and the middle of the domain
        const double c = mesh.coord_lo + (frac == 0.0 ? std::min(2.0 * sigma, 0.4 * len)
                                                      : frac * len);
        Eigen::VectorXd u(N);
        for (int i = 0; i < N; ++i) {
          if (plain.dirichlet[i]) {
            u[i] = 0.0;
            continue;
          }
          const double t = nodes[i];
          u[i] = dist_power_prefactor(dom, spec, {t}) *
                 std::exp(-(t - c) * (t - c) / (2.0 * sigma * sigma));
        }
        menu.push_back(u);
      }
    }
    for (const auto& u : menu) {
      const double nrm2 = u.dot(M * u);
      if (!(nrm2 > 0)) continue;
      const double ent = entropy(u, nrm2);
      const double quad_form = u.dot(K * u);
      best = std::max(best, (ent - e * quad_form) / nrm2);
    }
    scan.c_of_eps.push_back(best);
    if (!std::isfinite(best)) scan.finite = false;
  }
  double khat = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < eps.size(); ++i)
    khat = std::max(khat, scan.c_of_eps[i] - slope_target * std::log(eps[i]));
  scan.k_hat = khat;
  scan.finite = scan.finite && std::isfinite(khat);

  // least-squares slope of C(eps) against ln eps on the small-eps range
  std::vector<double> lx, ly;
  for (size_t i = 0; i < eps.size(); ++i)
    if (eps[i] <= 0.05) {
      lx.push_back(std::log(eps[i]));
      ly.push_back(scan.c_of_eps[i]);
    }
  require(lx.size() >= 3, Errc::empty_grid, "eps grid has too few small values");
  const int m = static_cast<int>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < m; ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  scan.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return scan;
}

namespace {

// weighted Neumann pair on a 1D segment [lo, hi] (optionally with a radial
// jacobian); returns the smallest nonzero generalized eigenvalue
double segment_neumann_mu2(const StratifiedDomain& dom, const std::vector<double>& alphas,
                           double lo, double hi, double jac_exp, double jac_scale,
                           const MeshParams& params) {
  auto ladder = graded_ladder(hi - lo, params.h_min * (hi - lo), params.rho,
                              params.uniform_cells, true, true);
  std::vector<double> nodes;
  for (double t : ladder) nodes.push_back(lo + t);
  const int N = static_cast<int>(nodes.size());
  auto weight = [&](double t) {
    double v = jac_scale * (jac_exp == 0.0 ? 1.0 : std::pow(t, jac_exp));
    Point x = {t};
    for (size_t s = 0; s < dom.strata().size(); ++s) {
      double a = s < alphas.size() ? alphas[s] : 0.0;
      if (a != 0.0) v *= std::pow(dom.stratum_distance(static_cast<int>(s), x), 2.0 * a);
    }
    return v;
  };
  std::vector<Eigen::Triplet<double>> ts, tg;
  const auto& rule = quad::gauss(10);
  for (int e = 0; e + 1 < N; ++e) {
    const double x0 = nodes[e], x1 = nodes[e + 1], h = x1 - x0;
    double ls[2][2] = {{0, 0}, {0, 0}}, lg[2][2] = {{0, 0}, {0, 0}};
    auto addp = [&](double t, double wq) {
      const double w = weight(t);
      const double phi[2] = {(x1 - t) / h, (t - x0) / h};
      const double dphi[2] = {-1.0 / h, 1.0 / h};
      for (int i = 0; i < 2; ++i)
        for (int j = i; j < 2; ++j) {
          ls[i][j] += wq * w * dphi[i] * dphi[j];
          lg[i][j] += wq * w * phi[i] * phi[j];
        }
    };
    const bool sing = (e == 0) || (e + 2 == N);
    if (sing) {
      double hi_len = h;
      for (int k = 0; k < 52; ++k) {
        const double lo_len = hi_len * 0.5;
        const double pa = (e == 0) ? x0 + lo_len : x1 - hi_len;
        const double pb = (e == 0) ? x0 + hi_len : x1 - lo_len;
        const double mid = 0.5 * (pa + pb), half = 0.5 * (pb - pa);
        for (size_t qi = 0; qi < rule.x.size(); ++qi)
          addp(mid + half * rule.x[qi], half * rule.w[qi]);
        hi_len = lo_len;
      }
    } else {
      const double mid = 0.5 * (x0 + x1), half = 0.5 * h;
      for (size_t qi = 0; qi < rule.x.size(); ++qi)
        addp(mid + half * rule.x[qi], half * rule.w[qi]);
    }
    for (int i = 0; i < 2; ++i)
      for (int j = i; j < 2; ++j) {
        ts.emplace_back(e + i, e + j, ls[i][j]);
        if (i != j) ts.emplace_back(e + j, e + i, ls[i][j]);
        tg.emplace_back(e + i, e + j, lg[i][j]);
        if (i != j) tg.emplace_back(e + j, e + i, lg[i][j]);
      }
  }
  SpMat S(N, N), G(N, N);
  S.setFromTriplets(ts.begin(), ts.end());
  G.setFromTriplets(tg.begin(), tg.end());
  Eigen::VectorXd d(N);
  for (int i = 0; i < N; ++i) d[i] = 1.0 / std::sqrt(G.coeff(i, i));
  Eigen::MatrixXd Sd = d.asDiagonal() * Eigen::MatrixXd(S) * d.asDiagonal();
  Eigen::MatrixXd Gd = d.asDiagonal() * Eigen::MatrixXd(G) * d.asDiagonal();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Sd, Gd);
  require(es.info() == Eigen::Success, Errc::factorization_failed, "Neumann eigensolve failed");
  return es.eigenvalues()(1);
}

}  // namespace

PoincareScan local_poincare(const StratifiedDomain& dom, const std::vector<double>& alphas,
                            const std::vector<Point>& centers, const std::vector<double>& radii,
                            const MeshParams& params) {
  require(!centers.empty() && !radii.empty(), Errc::empty_grid, "empty scan");
  if (alphas.size() >= 1 && dom.stratum_of_codim(1) >= 0)
    require(alphas[0] > 0.0 || alphas[0] == 0.0, Errc::parameter_out_of_range,
            "alpha_1 must be nonnegative for the local scan");
  PoincareScan scan;
  scan.best_c_p = std::numeric_limits<double>::infinity();
  for (const auto& c : centers)
    for (double r : radii) {
      require(r < 0.5 * dom.localization_beta() + 1e-12, Errc::radius_too_large,
              "scan radii must stay below localization beta / 2");
      double mu2 = 0.0;
      switch (dom.shape()) {
        case ShapeKind::interval: {
          const double lo = std::max(dom.lo(0), c[0] - r), hi = std::min(dom.hi(0), c[0] + r);
          mu2 = segment_neumann_mu2(dom, alphas, lo, hi, 0.0, 1.0, params);
          break;
        }
        case ShapeKind::radial_ball:
        case ShapeKind::disc: {
          const double lo = std::max(0.0, c[0] - r), hi = std::min(dom.radius(), c[0] + r);
          const double jexp = dom.ambient_dimension() - 1.0;
          double mu_radial = segment_neumann_mu2(dom, alphas, lo, hi, jexp, 1.0, params);
          // tangential factor of the box surrogate: flat cube of side 2r
          const double mu_tang = std::pow(M_PI / (2.0 * r), 2.0);
          mu2 = std::min(mu_radial, mu_tang);
          break;
        }
        case ShapeKind::rectangle: {
          // tensor-box surrogate: the smallest nonzero eigenvalue of a product
          // splits into per-axis segment problems against the min-face weight
          double best = std::numeric_limits<double>::infinity();
          for (int axis = 0; axis < 2; ++axis) {
            const double lo = std::max(0.0, c[axis] - r);
            const double hi = std::min(dom.hi(axis), c[axis] + r);
            StratifiedDomain seg = StratifiedDomain::interval(0.0, dom.hi(axis));
            std::vector<double> a1 = {alphas.empty() ? 0.0 : alphas[0]};
            best = std::min(best, segment_neumann_mu2(seg, a1, lo, hi, 0.0, 1.0, params));
          }
          mu2 = best;
          break;
        }
      }
      require(mu2 > 0, Errc::zero_denominator, "vanishing Neumann gap");
      const double cp = 1.0 / (r * r * mu2);
      scan.per_ball.push_back(cp);
      scan.worst_c_p = std::max(scan.worst_c_p, cp);
      scan.best_c_p = std::min(scan.best_c_p, cp);
    }
  return scan;
}

MoserScan local_moser(const StratifiedDomain& dom, const std::vector<double>& alphas, double nu,
                      const std::vector<Point>& centers, const std::vector<double>& radii) {
  require(dom.dimension() == 1, Errc::parameter_out_of_range,
          "the Moser scan is implemented on 1D reductions");
  MoserScan scan;
  const double jexp = dom.shape() == ShapeKind::radial_ball || dom.shape() == ShapeKind::disc
                          ? dom.ambient_dimension() - 1.0
                          : 0.0;
  auto weight = [&](double t) {
    double v = jexp == 0.0 ? 1.0 : std::pow(t, jexp);
    Point x = {t};
    for (size_t s = 0; s < dom.strata().size(); ++s) {
      double a = s < alphas.size() ? alphas[s] : 0.0;
      if (a != 0.0) v *= std::pow(dom.stratum_distance(static_cast<int>(s), x), 2.0 * a);
    }
    return v;
  };
  for (const auto& c : centers)
    for (double r : radii) {
      const double lo = std::max(dom.lo(0), c[0] - r), hi = std::min(dom.hi(0), c[0] + r);
      const double vol = dom.weighted_volume(c, r, alphas);
      for (double srel : {1.0, 0.6, 0.3}) {
        const double s = srel * 0.5 * (hi - lo);
        const double mid = 0.5 * (lo + hi);
        auto f = [&](double t) {
          const double z = (t - mid) / s;
          return std::abs(z) >= 1.0 ? 0.0 : (1.0 - z * z) * (1.0 - z * z);
        };
        auto df = [&](double t) {
          const double z = (t - mid) / s;
          return std::abs(z) >= 1.0 ? 0.0 : -4.0 * z * (1.0 - z * z) / s;
        };
        const double p_high = 2.0 * (1.0 + 2.0 / nu);
        auto lhs_f = [&](double t) { return weight(t) * std::pow(f(t), p_high); };
        auto grad_f = [&](double t) { return weight(t) * df(t) * df(t); };
        auto mass_f = [&](double t) { return weight(t) * f(t) * f(t); };
        const double lhs = quad::integrate_endpoint_singular(lhs_f, lo, mid, true, 10, 48) +
                           quad::integrate_endpoint_singular(lhs_f, mid, hi, false, 10, 48);
        const double grd = quad::integrate_endpoint_singular(grad_f, lo, mid, true, 10, 48) +
                           quad::integrate_endpoint_singular(grad_f, mid, hi, false, 10, 48);
        const double mss = quad::integrate_endpoint_singular(mass_f, lo, mid, true, 10, 48) +
                           quad::integrate_endpoint_singular(mass_f, mid, hi, false, 10, 48);
        require(mss > 0 && grd > 0, Errc::zero_denominator, "degenerate Moser sample");
        const double rhs = r * r * std::pow(vol, -2.0 / nu) * grd * std::pow(mss, 2.0 / nu);
        scan.per_sample.push_back(lhs / rhs);
        scan.worst_c_m = std::max(scan.worst_c_m, lhs / rhs);
      }
    }
  return scan;
}

}  // namespace hardyheat
