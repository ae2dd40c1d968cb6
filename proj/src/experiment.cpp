#include "hardyheat/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <random>

#include "hardyheat/assemble.hpp"
#include "hardyheat/errors.hpp"
#include "hardyheat/geometry.hpp"
#include "hardyheat/heat.hpp"
#include "hardyheat/inequalities.hpp"
#include "hardyheat/mesh.hpp"
#include "hardyheat/potentials.hpp"
#include "hardyheat/spectral.hpp"

namespace fs = std::filesystem;

namespace hardyheat {

namespace {

void check_keys(const Json& obj, const std::string& where,
                const std::vector<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      fail(Errc::config_invalid, "unknown key '" + it.key() + "' in " + where);
  }
}

const std::vector<std::string> kTasks = {"spectrum",   "exponents", "heatkernel", "harnack",
                                         "sobolev",    "logsobolev", "poincare",  "moser",
                                         "volume",     "appendix"};

StratifiedDomain domain_from_config(const Json& d) {
  check_keys(d, "domain",
             {"shape", "a", "b", "widths", "radius", "punctured", "ambient_n",
              "localization_beta", "gamma"});
  require(d.contains("shape"), Errc::config_invalid, "domain.shape is required");
  const std::string shape = d.at("shape");
  StratifiedDomain dom = [&] {
    if (shape == "interval")
      return StratifiedDomain::interval(d.value("a", 0.0), d.value("b", 1.0));
    if (shape == "rectangle") {
      std::vector<double> w = d.value("widths", std::vector<double>{1.0, 1.0});
      return StratifiedDomain::rectangle(w);
    }
    if (shape == "disc")
      return StratifiedDomain::disc(d.value("radius", 1.0), d.value("punctured", false));
    if (shape == "radial_ball")
      return StratifiedDomain::radial_ball(d.value("radius", 1.0), d.value("ambient_n", 3),
                                           d.value("punctured", false));
    fail(Errc::config_invalid, "unknown domain.shape '" + shape + "'");
  }();
  if (d.contains("localization_beta")) dom.set_localization_beta(d.at("localization_beta"));
  if (d.contains("gamma")) dom.set_gamma(d.at("gamma"));
  return dom;
}

PotentialSpec potential_from_config(const Json& p, const StratifiedDomain& dom) {
  check_keys(p, "potential", {"catalog", "poles", "n", "a", "terms"});
  require(p.contains("catalog"), Errc::config_invalid, "potential.catalog is required");
  const std::string id = p.at("catalog");
  if (id == "zero") {
    PotentialSpec spec;
    spec.id = "zero";
    spec.ambient_n = dom.ambient_dimension();
    spec.boundary_alpha = 1.0;  // classical Dirichlet ground state
    spec.hint = Lambda1Hint::positive;
    return spec;
  }
  if (id == "example_I") {
    const int n = p.value("n", dom.ambient_dimension());
    std::vector<Pole> poles;
    require(p.contains("poles"), Errc::config_invalid, "example_I needs potential.poles");
    for (const auto& jp : p.at("poles")) {
      check_keys(jp, "potential.poles[]", {"location", "c"});
      Pole pole;
      pole.location = jp.value("location", Point(dom.dimension(), 0.0));
      pole.c = jp.value("c", 0.0);
      poles.push_back(pole);
    }
    return example_I(n, poles);
  }
  if (id == "example_II") return example_II_catalog(p.value("n", 4));
  if (id == "example_III") return example_III(dom);
  if (id == "example_IV") return example_IV(dom);
  if (id == "example_V")
    return example_V(p.value("a", -0.5), p.value("n", dom.ambient_dimension()));
  if (id == "sum") {
    require(p.contains("terms") && p.at("terms").is_array() && p.at("terms").size() == 2,
            Errc::config_invalid, "sum needs exactly two potential.terms");
    PotentialSpec a = potential_from_config(p.at("terms")[0], dom);
    PotentialSpec b = potential_from_config(p.at("terms")[1], dom);
    return sum_spec(a, b, dom);
  }
  fail(Errc::config_invalid, "unknown potential.catalog '" + id + "'");
}

MeshParams mesh_from_config(const Json& m) {
  check_keys(m, "mesh", {"h_min", "rho", "uniform_cells", "node_budget", "levels"});
  MeshParams p;
  p.h_min = m.value("h_min", p.h_min);
  p.rho = m.value("rho", p.rho);
  p.uniform_cells = m.value("uniform_cells", p.uniform_cells);
  p.node_budget = m.value("node_budget", p.node_budget);
  return p;
}

struct Workspace {
  std::shared_ptr<StratifiedDomain> dom;
  PotentialSpec spec;
  MeshParams mesh_params;
  int levels = 1;
  std::uint64_t seed = 0;
  Json tolerances;

  // per refinement level (halved h_min, doubled uniform_cells)
  std::vector<std::shared_ptr<Mesh1D>> meshes1;
  std::vector<std::shared_ptr<Mesh2D>> meshes2;
  std::vector<DiscreteForm> lifted;
  std::vector<DiscreteForm> plain;
  std::vector<GroundState> ground;
  std::vector<std::shared_ptr<SpectralKernel>> kernels;

  bool is_1d() const { return dom->dimension() == 1; }
};

MeshParams level_params(const MeshParams& base, int level) {
  MeshParams p = base;
  p.h_min = base.h_min * std::pow(0.5, level);
  p.uniform_cells = base.uniform_cells << level;
  return p;
}

void prepare(Workspace& ws, bool need_kernel) {
  for (int l = 0; l < ws.levels; ++l) {
    MeshParams p = level_params(ws.mesh_params, l);
    if (ws.is_1d()) {
      auto mesh = std::make_shared<Mesh1D>(build_mesh_1d(*ws.dom, ws.spec, p));
      ws.meshes1.push_back(mesh);
      AssembleOptions lifted_opts;
      lifted_opts.lifted = true;
      ws.lifted.push_back(assemble(ws.dom, mesh, ws.spec, lifted_opts));
      ws.plain.push_back(assemble(ws.dom, mesh, ws.spec, AssembleOptions{}));
    } else {
      auto mesh = std::make_shared<Mesh2D>(build_mesh_2d(*ws.dom, ws.spec, p));
      ws.meshes2.push_back(mesh);
      AssembleOptions lifted_opts;
      lifted_opts.lifted = true;
      ws.lifted.push_back(assemble(ws.dom, mesh, ws.spec, lifted_opts));
      ws.plain.push_back(assemble(ws.dom, mesh, ws.spec, AssembleOptions{}));
    }
    SolveOptions so;
    so.dense = ws.is_1d() && ws.lifted.back().interior().size() <= 2200;
    if (!so.dense && !ws.ground.empty()) so.shift = ws.ground.back().lambda1 - 1.0;
    ws.ground.push_back(solve_ground_state(ws.lifted.back(), so));
    if (need_kernel && ws.is_1d()) {
      require(ws.lifted.back().interior().size() <= 2200, Errc::budget_exceeded,
              "spectral synthesis is limited to about 2000 interior nodes");
      ws.kernels.push_back(std::make_shared<SpectralKernel>(ws.lifted.back()));
    }
  }
}

Json fits_to_json(const std::vector<ExponentFit>& fits, const StratifiedDomain& dom,
                  const PotentialSpec& spec) {
  Json out = Json::array();
  for (const auto& f : fits) {
    double predicted = 0.0;
    const Piece& piece = dom.pieces()[f.piece];
    if (piece.kind == PieceKind::point) {
      predicted = spec.pole_betas.empty() ? 0.0 : spec.pole_betas[0];
    } else {
      predicted = spec.boundary_alpha.value_or(0.0);
    }
    out.push_back(Json{{"piece", f.piece_label},
                       {"alpha_hat", f.alpha_hat},
                       {"predicted", predicted},
                       {"window_lo", f.r_lo},
                       {"window_hi", f.r_hi},
                       {"r_squared", f.r_squared},
                       {"samples", f.samples},
                       {"two_sided_spread", f.two_sided_spread}});
  }
  return out;
}

struct CheckList {
  Json checks = Json::array();
  bool all_passed = true;
  bool inconclusive = false;

  void add(const std::string& id, bool passed, double value, double threshold) {
    checks.push_back(Json{{"id", id}, {"passed", passed}, {"value", value},
                          {"threshold", threshold}});
    all_passed = all_passed && passed;
  }
  void add_verdict(const std::string& id, Verdict got, const std::string& expected) {
    const bool passed = std::string(verdict_name(got)) == expected;
    checks.push_back(Json{{"id", id}, {"passed", passed}, {"verdict", verdict_name(got)},
                          {"expected", expected}});
    if (got == Verdict::inconclusive) inconclusive = true;
    all_passed = all_passed && passed;
  }
};

Json quotient_to_json(const QuotientReport& rep) {
  Json levels = Json::array();
  for (const auto& l : rep.levels)
    levels.push_back(Json{{"h_min", l.h_min}, {"value", l.value}, {"nodes", l.nodes},
                          {"converged", l.converged}});
  return Json{{"id", rep.id},
              {"q", rep.q},
              {"lambda", rep.lambda},
              {"lambda1", rep.lambda1},
              {"beta_k", rep.beta_k},
              {"excluded", rep.excluded},
              {"levels", levels},
              {"verdict", verdict_name(rep.verdict)}};
}

}  // namespace

Json validate_config(const Json& cfg) {
  check_keys(cfg, "config",
             {"id", "domain", "potential", "mesh", "tasks", "tolerances", "seed", "out_dir",
              "heat", "harnack", "sobolev", "logsobolev", "poincare", "moser", "volume",
              "appendix", "exponents", "dump_phi"});
  require(cfg.contains("id") && cfg.at("id").is_string(), Errc::config_invalid,
          "config.id (string) is required");
  require(cfg.contains("domain"), Errc::config_invalid, "config.domain is required");
  require(cfg.contains("potential"), Errc::config_invalid, "config.potential is required");
  require(cfg.contains("tasks") && cfg.at("tasks").is_array(), Errc::config_invalid,
          "config.tasks (array) is required");
  for (const auto& t : cfg.at("tasks")) {
    const std::string name = t;
    require(std::find(kTasks.begin(), kTasks.end(), name) != kTasks.end(), Errc::config_invalid,
            "unknown task '" + name + "'");
  }
  if (cfg.contains("tolerances"))
    check_keys(cfg.at("tolerances"), "tolerances",
               {"lambda1_rel", "reference_lambda1", "exponent", "identity_defect",
                "sandwich_spread", "longtime", "poincare_uniformity", "logsobolev_slope_rel",
                "mu1_quotient", "two_sided_spread", "volume_spread", "doubling_stability"});
  // touch the domain/potential/mesh sections so key errors surface in dry runs
  StratifiedDomain dom = domain_from_config(cfg.at("domain"));
  potential_from_config(cfg.at("potential"), dom);
  if (cfg.contains("mesh")) mesh_from_config(cfg.at("mesh"));
  Json out = cfg;
  if (!out.contains("mesh")) out["mesh"] = Json::object();
  if (!out.contains("tolerances")) out["tolerances"] = Json::object();
  if (!out.contains("seed")) out["seed"] = 1;
  if (!out.contains("out_dir")) out["out_dir"] = "out";
  return out;
}

int run_experiment_json(const Json& raw_cfg, const RunOptions& opts, Json* report_out) {
  Json cfg = validate_config(raw_cfg);
  if (opts.dry_run) {
    if (report_out) *report_out = Json{{"validated", true}};
    return 0;
  }

  Workspace ws;
  ws.dom = std::make_shared<StratifiedDomain>(domain_from_config(cfg.at("domain")));
  ws.spec = potential_from_config(cfg.at("potential"), *ws.dom);
  require(ws.spec.meshable, Errc::parameter_out_of_range,
          "potential '" + ws.spec.id + "' is catalog-only and cannot be meshed");
  ws.mesh_params = mesh_from_config(cfg.at("mesh"));
  ws.levels = cfg.at("mesh").value("levels", 1);
  ws.seed = opts.seed.value_or(cfg.value("seed", 1));
  ws.tolerances = cfg.at("tolerances");

  std::vector<std::string> tasks;
  for (const auto& t : cfg.at("tasks")) tasks.push_back(t);
  const bool need_kernel =
      std::find(tasks.begin(), tasks.end(), "heatkernel") != tasks.end() ||
      std::find(tasks.begin(), tasks.end(), "harnack") != tasks.end();
  prepare(ws, need_kernel);

  const std::string out_dir = opts.out_dir.empty() ? cfg.value("out_dir", "out") : opts.out_dir;
  fs::create_directories(out_dir);

  CheckList checks;
  Json task_results = Json::object();
  const auto& tol = ws.tolerances;

  // task bodies; results are written back in fixed task order below
  auto run_task = [&](const std::string& name) -> Json {
    if (name == "spectrum") {
      Json levels = Json::array();
      for (int l = 0; l < ws.levels; ++l)
        levels.push_back(Json{{"h_min", level_params(ws.mesh_params, l).h_min},
                              {"lambda1", ws.ground[l].lambda1},
                              {"residual", ws.ground[l].residual},
                              {"iterations", ws.ground[l].iterations}});
      Json out;
      out["levels"] = levels;
      const double lam = ws.ground.back().lambda1;
      out["lambda1"] = lam;
      if (ws.levels >= 2)
        out["lambda1_richardson"] =
            richardson2(ws.ground[ws.levels - 2].lambda1, ws.ground.back().lambda1);
      if (ws.levels >= 3) {
        const double d1 = std::abs(ws.ground[1].lambda1 - ws.ground[0].lambda1);
        const double d2 = std::abs(ws.ground[2].lambda1 - ws.ground[1].lambda1);
        const bool decreasing = ws.ground[2].lambda1 < ws.ground[1].lambda1 &&
                                ws.ground[1].lambda1 < ws.ground[0].lambda1;
        out["not_bounded_below"] = decreasing && d2 > 0.6 * d1;
      }
      if (tol.contains("reference_lambda1")) {
        const double ref = tol.at("reference_lambda1");
        const double rel = std::abs(lam - ref) / std::abs(ref);
        out["lambda1_reference"] = ref;
        out["lambda1_rel_error"] = rel;
        checks.add("spectrum.lambda1", rel <= tol.value("lambda1_rel", 0.005), rel,
                   tol.value("lambda1_rel", 0.005));
      }
      // ground-state transform identity on phi-shaped bumps (1D reductions)
      if (ws.is_1d()) {
        const DiscreteForm& plain = ws.plain.back();
        const GroundState& gs = ws.ground.back();
        std::vector<Eigen::VectorXd> samples;
        const double lo = ws.dom->lo(0), hi = ws.dom->hi(0);
        for (double c : {0.45, 0.6}) {
          Eigen::VectorXd u = Eigen::VectorXd::Zero(plain.n_nodes());
          for (int i = 0; i < plain.n_nodes(); ++i) {
            const double t = plain.node_coords[i][0];
            const double z = (t - lo) / (hi - lo);
            if (z < 0.08 || z > 0.92) continue;
            const double bump = std::exp(-std::pow((z - c) / 0.18, 2));
            u[i] = gs.phi[i] * bump;
          }
          samples.push_back(u);
        }
        samples.push_back(gs.phi);  // v == 1: the gradient term vanishes
        const double defect = ground_state_identity(plain, gs, samples);
        out["identity_defect"] = defect;
        checks.add("spectrum.identity_defect", defect <= tol.value("identity_defect", 5e-3),
                   defect, tol.value("identity_defect", 5e-3));
      }
      return out;
    }

    if (name == "exponents") {
      std::optional<FitWindow> window;
      if (cfg.contains("exponents") && cfg.at("exponents").contains("window")) {
        auto w = cfg.at("exponents").at("window");
        window = FitWindow{w[0], w[1]};
      }
      auto fits = fit_exponents(ws.ground.back(), ws.lifted.back(), ws.spec, window);
      Json out;
      out["fits"] = fits_to_json(fits, *ws.dom, ws.spec);
      const double etol = tol.value("exponent", 0.025);
      const double stol = tol.value("two_sided_spread", 3.0);
      for (const auto& f : out["fits"]) {
        const double err = std::abs(f.at("alpha_hat").get<double>() -
                                    f.at("predicted").get<double>());
        checks.add("exponents." + f.at("piece").get<std::string>(), err <= etol, err, etol);
        checks.add("exponents.spread." + f.at("piece").get<std::string>(),
                   f.at("two_sided_spread").get<double>() <= stol,
                   f.at("two_sided_spread").get<double>(), stol);
      }
      return out;
    }

    if (name == "heatkernel") {
      require(ws.is_1d(), Errc::parameter_out_of_range,
              "kernel certificates run on 1D reductions");
      SandwichGrid grid;
      if (cfg.contains("heat")) {
        const Json& h = cfg.at("heat");
        check_keys(h, "heat",
                   {"times", "long_times", "node_stride", "max_pair_distance", "dump_slices"});
        if (h.contains("times")) grid.times = h.at("times").get<std::vector<double>>();
        if (h.contains("long_times"))
          grid.long_times = h.at("long_times").get<std::vector<double>>();
        grid.node_stride = h.value("node_stride", grid.node_stride);
        grid.max_pair_distance = h.value("max_pair_distance", grid.max_pair_distance);
      }
      if (grid.times.empty())
        for (int i = 0; i < 7; ++i) grid.times.push_back(1e-3 * std::pow(10.0, i / 3.0));
      if (grid.long_times.empty())
        for (double t : {0.2, 0.3, 0.45, 0.7, 1.0}) grid.long_times.push_back(t);
      grid.longtime_target = tol.value("longtime", 0.02);

      const bool dump = cfg.contains("heat") && cfg.at("heat").value("dump_slices", false);
      KernelCertificate cert = fit_sandwich(*ws.kernels.back(), ws.spec, grid, dump);
      Json out{{"c_lower", cert.c_lower},
               {"c_upper", cert.c_upper},
               {"gauss_rate", cert.gauss_rate},
               {"spread", cert.c_upper / cert.c_lower},
               {"crossover_T", cert.crossover_T},
               {"longtime_T", cert.longtime_T},
               {"longtime_spread", cert.longtime_spread},
               {"longtime_level", cert.longtime_level},
               {"ultracontractive_C", cert.ultracontractive_C},
               {"ultracontractive_exponent", cert.ultracontractive_exponent}};
      const double cap = tol.value("sandwich_spread", 100.0);
      checks.add("heatkernel.spread", cert.c_upper / cert.c_lower <= cap,
                 cert.c_upper / cert.c_lower, cap);
      checks.add("heatkernel.longtime", cert.longtime_spread <= grid.longtime_target,
                 cert.longtime_spread, grid.longtime_target);
      if (dump) {
        std::ofstream slc(out_dir + "/kernel_slices.csv");
        slc << "t,x,y,h,model,ratio\n";
        for (const auto& s : cert.samples)
          slc << s.t << "," << s.x << "," << s.y << "," << s.h << "," << s.model << ","
              << s.ratio << "\n";
      }
      return out;
    }

    if (name == "harnack") {
      require(ws.is_1d(), Errc::parameter_out_of_range, "the Harnack scan runs on 1D reductions");
      HarnackOptions hopts;
      std::vector<double> radii = {0.45 * ws.dom->localization_beta()};
      if (cfg.contains("harnack")) {
        const Json& h = cfg.at("harnack");
        check_keys(h, "harnack", {"radii", "n_initial", "time_samples"});
        if (h.contains("radii")) radii = h.at("radii").get<std::vector<double>>();
        hopts.n_initial = h.value("n_initial", hopts.n_initial);
        hopts.time_samples = h.value("time_samples", hopts.time_samples);
      }
      hopts.seed = ws.seed;
      std::vector<std::pair<Point, double>> balls;
      const double lo = ws.dom->lo(0), hi = ws.dom->hi(0);
      for (double r : radii) {
        balls.emplace_back(Point{0.5 * (lo + hi)}, r);              // interior
        balls.emplace_back(Point{lo + 0.5 * r}, r);                 // boundary-touching
      }
      HarnackResult res = harnack_scan(*ws.kernels.back(), balls, hopts);
      Json per = Json::array();
      for (double v : res.per_ball) per.push_back(v);
      Json out{{"c_h", res.c_h},
               {"interior_max", res.interior_max},
               {"boundary_max", res.boundary_max},
               {"per_ball", per}};
      checks.add("harnack.finite", std::isfinite(res.c_h) && res.c_h > 0, res.c_h, 1e6);
      return out;
    }

    if (name == "sobolev") {
      require(cfg.contains("sobolev"), Errc::config_invalid, "sobolev task needs a sobolev section");
      const Json& s = cfg.at("sobolev");
      check_keys(s, "sobolev",
                 {"q", "lambda", "variant", "level_h_mins", "expect", "iterations", "delta",
                  "codim", "alpha_k"});
      const double q = s.value("q", 6.0);
      const double lambda = s.value("lambda", 1.0);
      QuotientLevels lv;
      if (s.contains("level_h_mins")) lv.h_mins = s.at("level_h_mins").get<std::vector<double>>();
      lv.base = ws.mesh_params;
      lv.seed = ws.seed;
      lv.minimize_iterations = s.value("iterations", lv.minimize_iterations);
      const std::string variant = s.value("variant", "plain");
      QuotientReport rep;
      if (variant == "codim_block") {
        rep = codim_block(*ws.dom, s.value("codim", 1), q, s.value("alpha_k", 0.5),
                          s.value("delta", 0.5 * ws.dom->localization_beta()), lv);
      } else if (q == 2.0) {
        rep = critical_hardy_log(*ws.dom, ws.spec, lambda, lv, variant != "control_no_log");
      } else if (variant == "log") {
        rep = log_corrected_quotient(*ws.dom, ws.spec, q, lambda, lv);
      } else {
        rep = sobolev_quotient(*ws.dom, ws.spec, q, lambda, lv, false);
      }
      Json out = quotient_to_json(rep);
      if (s.contains("expect"))
        checks.add_verdict("sobolev." + variant, rep.verdict, s.at("expect"));
      else if (rep.verdict == Verdict::inconclusive)
        checks.inconclusive = true;
      return out;
    }

    if (name == "logsobolev") {
      std::vector<double> eps;
      int n_random = 12;
      if (cfg.contains("logsobolev")) {
        const Json& l = cfg.at("logsobolev");
        check_keys(l, "logsobolev", {"eps", "n_random"});
        if (l.contains("eps")) eps = l.at("eps").get<std::vector<double>>();
        n_random = l.value("n_random", n_random);
      }
      if (eps.empty())
        for (int i = 0; i < 8; ++i) eps.push_back(1e-3 * std::pow(1000.0, i / 7.0));
      LogSobolevScan scan =
          weighted_log_sobolev(ws.plain.back(), ws.ground.back(), ws.spec, eps, n_random,
                               ws.seed);
      Json ce = Json::array();
      for (size_t i = 0; i < scan.eps.size(); ++i)
        ce.push_back(Json{{"eps", scan.eps[i]}, {"c", scan.c_of_eps[i]}});
      Json out{{"k_hat", scan.k_hat},
               {"slope", scan.slope},
               {"slope_target", scan.slope_target},
               {"finite", scan.finite},
               {"c_of_eps", ce}};
      checks.add("logsobolev.finite", scan.finite, scan.k_hat, 1e300);
      const double srel = tol.value("logsobolev_slope_rel", 0.05);
      const double rel = std::abs(scan.slope - scan.slope_target) /
                         std::abs(scan.slope_target);
      checks.add("logsobolev.slope", rel <= srel, rel, srel);
      return out;
    }

    if (name == "poincare") {
      require(cfg.contains("poincare"), Errc::config_invalid,
              "poincare task needs a poincare section");
      const Json& pc = cfg.at("poincare");
      check_keys(pc, "poincare", {"alphas", "centers", "radii"});
      std::vector<double> alphas = pc.value("alphas", std::vector<double>{});
      std::vector<double> radii = pc.value("radii", std::vector<double>{});
      std::vector<Point> centers;
      for (const auto& c : pc.at("centers")) centers.push_back(c.get<Point>());
      MeshParams local = ws.mesh_params;
      local.h_min = std::max(local.h_min, 1e-8);
      PoincareScan scan = local_poincare(*ws.dom, alphas, centers, radii, local);
      Json per = Json::array();
      for (double v : scan.per_ball) per.push_back(v);
      Json out{{"worst_c_p", scan.worst_c_p}, {"best_c_p", scan.best_c_p}, {"per_ball", per}};
      const double cap = tol.value("poincare_uniformity", 10.0);
      checks.add("poincare.uniform", scan.worst_c_p / scan.best_c_p <= cap,
                 scan.worst_c_p / scan.best_c_p, cap);
      return out;
    }

    if (name == "moser") {
      require(cfg.contains("moser"), Errc::config_invalid, "moser task needs a moser section");
      const Json& mo = cfg.at("moser");
      check_keys(mo, "moser", {"alphas", "nu", "centers", "radii"});
      std::vector<double> alphas = mo.value("alphas", std::vector<double>{});
      std::vector<double> radii = mo.value("radii", std::vector<double>{});
      std::vector<Point> centers;
      for (const auto& c : mo.at("centers")) centers.push_back(c.get<Point>());
      const double a_max = *std::max_element(alphas.begin(), alphas.end());
      const double nu = mo.value("nu", ws.dom->dimension() + 2.0 * std::max(a_max, 0.0));
      MoserScan scan = local_moser(*ws.dom, alphas, nu, centers, radii);
      Json per = Json::array();
      for (double v : scan.per_sample) per.push_back(v);
      Json out{{"worst_c_m", scan.worst_c_m}, {"nu", nu}, {"per_sample", per}};
      checks.add("moser.finite", std::isfinite(scan.worst_c_m) && scan.worst_c_m > 0,
                 scan.worst_c_m, 1e300);
      return out;
    }

    if (name == "volume") {
      require(cfg.contains("volume"), Errc::config_invalid, "volume task needs a volume section");
      const Json& vo = cfg.at("volume");
      check_keys(vo, "volume", {"alphas", "grid", "radii"});
      std::vector<double> alphas = vo.value("alphas", std::vector<double>{});
      std::vector<double> radii = vo.value("radii", std::vector<double>{});
      const int grid_n = vo.value("grid", 100);
      // sample grid: points along a transversal sweep, radii log-spaced
      std::vector<std::pair<Point, double>> samples;
      const double beta = ws.dom->localization_beta();
      if (radii.empty())
        for (int i = 0; i < 4; ++i) radii.push_back(0.45 * beta * std::pow(0.5, i));
      const int per_r = std::max(1, grid_n / static_cast<int>(radii.size()));
      for (double r : radii)
        for (int i = 0; i < per_r; ++i) {
          const double f = (i + 0.5) / per_r;
          Point x;
          if (ws.is_1d()) {
            const double lo = ws.dom->lo(0), hi = ws.dom->hi(0);
            double t = lo + f * (hi - lo);
            if (ws.dom->shape() == ShapeKind::radial_ball) t = std::max(t, 1e-6);
            x = {t};
          } else {
            x = {ws.dom->hi(0) * f, ws.dom->hi(1) * (0.3 + 0.4 * f)};
          }
          if (!ws.dom->interior(x)) continue;
          samples.emplace_back(x, r);
        }
      double lo_ratio = std::numeric_limits<double>::infinity(), hi_ratio = 0.0;
      const int n_amb = ws.dom->ambient_dimension();
      for (const auto& [x, r] : samples) {
        const double v = ws.dom->weighted_volume(x, r, alphas);
        double model = std::pow(r, n_amb);
        for (size_t s = 0; s < ws.dom->strata().size(); ++s)
          model *= std::pow(ws.dom->stratum_distance(static_cast<int>(s), x) + r,
                            2.0 * alphas[s]);
        const double ratio = v / model;
        lo_ratio = std::min(lo_ratio, ratio);
        hi_ratio = std::max(hi_ratio, ratio);
      }
      // doubling stability under sample doubling
      std::vector<std::pair<Point, double>> half(samples.begin(),
                                                 samples.begin() + samples.size() / 2);
      for (auto& [x, r] : half) r = std::min(r, 0.49 * beta);
      auto full = samples;
      for (auto& [x, r] : full) r = std::min(r, 0.49 * beta);
      const double cd_half = ws.dom->doubling_constant(alphas, half);
      const double cd_full = ws.dom->doubling_constant(alphas, full);
      Json out{{"sandwich_lo", lo_ratio},
               {"sandwich_hi", hi_ratio},
               {"sandwich_spread", hi_ratio / lo_ratio},
               {"doubling_half", cd_half},
               {"doubling_full", cd_full},
               {"samples", static_cast<int>(samples.size())}};
      const double cap = tol.value("volume_spread", 40.0);
      checks.add("volume.sandwich", hi_ratio / lo_ratio <= cap, hi_ratio / lo_ratio, cap);
      const double ds = tol.value("doubling_stability", 0.05);
      const double drel = std::abs(cd_full - cd_half) / cd_half;
      checks.add("volume.doubling_stable", drel <= ds, drel, ds);
      return out;
    }

    if (name == "appendix") {
      std::vector<double> deltas = {0.2, 0.1, 0.05, 0.025};
      if (cfg.contains("appendix")) {
        const Json& ap = cfg.at("appendix");
        check_keys(ap, "appendix", {"deltas"});
        if (ap.contains("deltas")) deltas = ap.at("deltas").get<std::vector<double>>();
      }
      MeshParams p = ws.mesh_params;
      auto layers = boundary_layer_mu1(*ws.dom, deltas, p);
      Json arr = Json::array();
      bool increasing = true;
      double worst_quotient = std::numeric_limits<double>::infinity();
      for (size_t i = 0; i < layers.size(); ++i) {
        arr.push_back(Json{{"delta", layers[i].delta},
                           {"mu1", layers[i].mu1},
                           {"refined_hardy_quotient", layers[i].refined_hardy_quotient}});
        if (i > 0 && !(layers[i].mu1 > layers[i - 1].mu1)) increasing = false;
        worst_quotient = std::min(worst_quotient, layers[i].refined_hardy_quotient);
      }
      Json out{{"layers", arr}, {"strictly_increasing", increasing},
               {"worst_refined_hardy_quotient", worst_quotient}};
      checks.add("appendix.mu1_increasing", increasing, increasing ? 1.0 : 0.0, 1.0);
      const double qtol = tol.value("mu1_quotient", 0.125 - 1e-2);
      checks.add("appendix.refined_hardy", worst_quotient >= qtol, worst_quotient, qtol);
      return out;
    }

    fail(Errc::internal, "unhandled task " + name);
  };

  // task-level parallelism; results merged in task order for determinism
  std::vector<Json> results(tasks.size());
  if (opts.jobs > 1) {
    std::vector<std::future<Json>> futs(tasks.size());
    size_t next = 0;
    std::mutex mu;
    auto worker = [&]() {
      for (;;) {
        size_t i;
        {
          std::lock_guard<std::mutex> lock(mu);
          if (next >= tasks.size()) return;
          i = next++;
        }
        results[i] = run_task(tasks[i]);
      }
    };
    std::vector<std::thread> pool;
    for (int j = 0; j < std::min<int>(opts.jobs, static_cast<int>(tasks.size())); ++j)
      pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  } else {
    for (size_t i = 0; i < tasks.size(); ++i) results[i] = run_task(tasks[i]);
  }
  for (size_t i = 0; i < tasks.size(); ++i) task_results[tasks[i]] = results[i];

  Json report;
  report["schema_version"] = 1;
  report["id"] = cfg.at("id");
  report["seed"] = ws.seed;
  report["rng"] = "mt19937_64";
  report["config"] = cfg;
  report["tasks"] = task_results;
  report["checks"] = checks.checks;
  report["status"] =
      !checks.all_passed ? "failed" : (checks.inconclusive ? "inconclusive" : "ok");

  write_json(report, out_dir + "/report.json");
  {
    std::ofstream csv(out_dir + "/summary.csv");
    csv << summary_csv(report);
  }
  {
    Json meta;
    meta["generated_by"] = "hardyheat";
    meta["report"] = "report.json";
    std::time_t now = std::time(nullptr);
    meta["unix_time"] = static_cast<long>(now);
    write_json(meta, out_dir + "/run_meta.json");
  }
  if (cfg.value("dump_phi", false) && !ws.ground.empty()) {
    std::ofstream phi(out_dir + "/phi1.csv");
    phi << "coordinate,value\n";
    const auto& form = ws.lifted.back();
    for (int i = 0; i < form.n_nodes(); ++i) {
      phi << form.node_coords[i][0];
      if (form.node_coords[i].size() > 1) phi << ":" << form.node_coords[i][1];
      phi << "," << ws.ground.back().phi[i] << "\n";
    }
  }
  if (opts.dump_matrices) {
    dump_matrix_coo(ws.lifted.back().stiffness, out_dir + "/stiffness.txt");
    dump_matrix_coo(ws.lifted.back().potential, out_dir + "/potential.txt");
    dump_matrix_coo(ws.lifted.back().unit_mass(), out_dir + "/mass.txt");
  }

  if (report_out) *report_out = report;
  if (!checks.all_passed) return 1;
  return checks.inconclusive ? 2 : 0;
}

int run_experiment(const std::string& config_path, const RunOptions& opts) {
  Json cfg = load_json(config_path);
  return run_experiment_json(cfg, opts, nullptr);
}

Json catalog_json() {
  Json out = Json::array();
  out.push_back(Json{{"id", "zero"},
                     {"description", "V = 0, Dirichlet Laplacian baseline"},
                     {"predicted", Json{{"boundary_alpha", 1.0}}}});
  out.push_back(Json{
      {"id", "example_I"},
      {"description", "multipolar inverse-square wells c_i/|x-x_i|^2, 0 <= c_i <= (n-2)^2/4"},
      {"predicted",
       Json{{"boundary_alpha", 1.0},
            {"pole_beta", "(2 - n + sqrt((n-2)^2 - 4c)) / 2"}}}});
  out.push_back(Json{
      {"id", "example_II"},
      {"description",
       "boundary well plus codim-(n-1) circle well (catalog only, not meshed)"},
      {"predicted", Json{{"boundary_alpha", 0.5}, {"circle_alpha", "(3-n)/2"}}}});
  out.push_back(Json{{"id", "example_III"},
                     {"description", "critical boundary Hardy well 1/(4 dist^2(x, boundary))"},
                     {"predicted", Json{{"boundary_alpha", 0.5}}}});
  out.push_back(Json{
      {"id", "example_IV"},
      {"description", "boundary well plus critical point well (n-2)^2/(4|x|^2)"},
      {"predicted", Json{{"boundary_alpha", 0.5}, {"pole_beta", "(2-n)/2"}}}});
  out.push_back(Json{
      {"id", "example_V"},
      {"description",
       "off-diagonal coefficients delta_ij + |x|^{2-a}(1-delta_ij)/2 with well -a(n+a-2)/|x|^2"},
      {"predicted", Json{{"boundary_alpha", 1.0}, {"pole_beta", "a"}},},
      {"ellipticity", "eigenvalues within [1/2, 1 + n/2]"}});
  out.push_back(Json{{"id", "sum"},
                     {"description", "pointwise sum of two catalog entries with disjoint "
                                     "singular supports"}});
  return out;
}

}  // namespace hardyheat
