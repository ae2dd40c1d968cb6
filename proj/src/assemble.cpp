#include "hardyheat/assemble.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "hardyheat/errors.hpp"
#include "hardyheat/quadrature.hpp"

namespace hardyheat {

namespace {

// 1D/axis view of a piece: d(t) = sign * (t - loc), sign = +1 when the piece
// sits at the lower coordinate end.
struct AxisPiece {
  int piece = -1;
  int axis = 0;
  double loc = 0.0;
  int sign = 1;
  bool is_point = false;   // coordinate origin of a radial reduction
  bool curved = false;     // sphere/circle: Delta d = -(n-1)/t
};

std::vector<AxisPiece> axis_pieces(const StratifiedDomain& dom) {
  std::vector<AxisPiece> out;
  const auto& pieces = dom.pieces();
  for (size_t i = 0; i < pieces.size(); ++i) {
    const Piece& p = pieces[i];
    AxisPiece ap;
    ap.piece = static_cast<int>(i);
    switch (p.kind) {
      case PieceKind::endpoint:
        ap.axis = 0;
        ap.loc = p.at_upper ? dom.hi(0) : dom.lo(0);
        ap.sign = p.at_upper ? -1 : 1;
        break;
      case PieceKind::face:
        ap.axis = p.axis;
        ap.loc = p.at_upper ? dom.hi(p.axis) : 0.0;
        ap.sign = p.at_upper ? -1 : 1;
        break;
      case PieceKind::sphere:
      case PieceKind::circle:
        ap.axis = 0;
        ap.loc = dom.radius();
        ap.sign = -1;
        ap.curved = true;
        break;
      case PieceKind::point:
        ap.axis = 0;
        ap.loc = 0.0;
        ap.sign = 1;
        ap.is_point = true;
        break;
    }
    out.push_back(ap);
  }
  return out;
}

struct LiftEval {
  const StratifiedDomain* dom = nullptr;
  std::vector<AxisPiece> pieces;
  const LiftField* lift = nullptr;
  const PotentialSpec* spec = nullptr;
  int ambient_n = 1;

  double piece_dist(const AxisPiece& ap, const Point& x) const {
    return ap.sign * (x[ap.axis] - ap.loc);
  }

  double m2(const Point& x) const {
    double v = 1.0;
    for (const auto& t : lift->terms) {
      if (t.gamma == 0.0) continue;
      v *= std::pow(piece_dist(pieces[t.piece], x), 2.0 * t.gamma);
    }
    return v;
  }

  double m(const Point& x) const {
    double v = 1.0;
    for (const auto& t : lift->terms) {
      if (t.gamma == 0.0) continue;
      v *= std::pow(piece_dist(pieces[t.piece], x), t.gamma);
    }
    return v;
  }

  /// Residual potential (V + Delta m / m): inverse-square parts of lifted
  /// pieces cancel identically and are skipped rather than subtracted.
  double residual(const Point& x) const {
    double v = 0.0;
    for (const auto& term : spec->terms) {
      if (term.support == SingularTerm::Support::pole) {
        // locate the point piece
        int pc = -1;
        for (const auto& ap : pieces)
          if (ap.is_point) pc = ap.piece;
        int li = pc >= 0 ? lift->term_for_piece(pc) : -1;
        if (li >= 0) continue;  // folded: c + gamma(gamma + n - 2) = 0 exactly
        double d2 = 0.0;
        for (size_t i = 0; i < x.size(); ++i) {
          double dx = x[i] - (i < term.location.size() ? term.location[i] : 0.0);
          d2 += dx * dx;
        }
        v += term.coefficient / d2;
        continue;
      }
      // codim-1 boundary term: distance is the min over the stratum's pieces
      int argmin = -1;
      double dmin = std::numeric_limits<double>::infinity();
      for (const auto& ap : pieces) {
        if (ap.is_point) continue;
        double d = piece_dist(ap, x);
        if (d < dmin) { dmin = d; argmin = ap.piece; }
      }
      if (lift->term_for_piece(argmin) < 0) {
        v += term.coefficient / (dmin * dmin);
      } else {
        // c/d_min^2 + (gamma^2-gamma)/d_min^2 = 0; keep the other pieces' parts
        for (const auto& lt : lift->terms) {
          const AxisPiece& ap = pieces[lt.piece];
          if (ap.is_point || lt.piece == argmin) continue;
          double d = piece_dist(ap, x);
          v += lt.gamma * (lt.gamma - 1.0) / (d * d);
        }
      }
    }
    // curved-piece drift of the lift and pairwise gradient cross terms
    for (size_t i = 0; i < lift->terms.size(); ++i) {
      const auto& ti = lift->terms[i];
      const AxisPiece& pi = pieces[ti.piece];
      if (pi.curved && ti.gamma != 0.0) {
        double d = piece_dist(pi, x);
        v += ti.gamma * (-(ambient_n - 1.0) / x[pi.axis]) / d;
      }
      for (size_t j = i + 1; j < lift->terms.size(); ++j) {
        const auto& tj = lift->terms[j];
        const AxisPiece& pj = pieces[tj.piece];
        if (pi.axis != pj.axis && dom->dimension() > 1) continue;  // orthogonal gradients
        double di = piece_dist(pi, x), dj = piece_dist(pj, x);
        v += 2.0 * ti.gamma * tj.gamma * (pi.sign * pj.sign) / (di * dj);
      }
    }
    return v;
  }
};

double weight_value(const StratifiedDomain& dom, const WeightSpec& w, const Point& x) {
  switch (w.kind) {
    case WeightSpec::Kind::unit:
      return 1.0;
    case WeightSpec::Kind::dist_powers: {
      double v = 1.0;
      for (size_t s = 0; s < dom.strata().size(); ++s) {
        double a = s < w.alphas.size() ? w.alphas[s] : 0.0;
        if (a != 0.0) v *= std::pow(dom.stratum_distance(static_cast<int>(s), x), 2.0 * a);
      }
      return v;
    }
    case WeightSpec::Kind::global_power_x: {
      double dmin = std::numeric_limits<double>::infinity();
      for (size_t s = 0; s < dom.strata().size(); ++s)
        dmin = std::min(dmin, dom.stratum_distance(static_cast<int>(s), x));
      double v = w.s != 0.0 ? std::pow(dmin, w.s) : 1.0;
      if (w.p != 0.0) v *= std::pow(x_weight(dmin / sup_distance(dom)), w.p);
      return v;
    }
    case WeightSpec::Kind::nodal_squared:
      fail(Errc::internal, "nodal weights are interpolated per cell");
  }
  return 1.0;
}

}  // namespace

double sup_distance(const StratifiedDomain& dom) {
  switch (dom.shape()) {
    case ShapeKind::interval:
      return 0.5 * (dom.hi(0) - dom.lo(0));
    case ShapeKind::rectangle:
      return 0.5 * std::min(dom.hi(0), dom.hi(1));
    case ShapeKind::disc:
    case ShapeKind::radial_ball:
      return dom.radius();  // distance to the puncture dominates at the rim center
  }
  return 1.0;
}

LiftField derive_lift(const StratifiedDomain& dom, const PotentialSpec& spec) {
  LiftField lift;
  if (spec.terms.empty()) return lift;
  require(spec.coeff.kind == CoeffKind::identity, Errc::parameter_out_of_range,
          "the ground-state lift needs identity coefficients");
  const int n = dom.ambient_dimension();
  for (const auto& term : spec.terms) {
    if (term.coefficient == 0.0) continue;
    if (term.support == SingularTerm::Support::codim1_boundary) {
      const double g = PotentialSpec::lift_exponent(1, n, term.coefficient);
      int s = dom.stratum_of_codim(1);
      require(s >= 0, Errc::no_such_stratum, "no codim-1 stratum to lift");
      for (int pc : dom.pieces_of_stratum(s))
        lift.terms.push_back({pc, g, term.coefficient, false, 0.0});
    } else {
      const int k = dom.ambient_dimension();
      const double g = PotentialSpec::lift_exponent(k, n, term.coefficient);
      int s = dom.stratum_of_codim(k);
      require(s >= 0, Errc::no_such_stratum, "no point stratum matching the pole");
      auto pcs = dom.pieces_of_stratum(s);
      require(pcs.size() == 1, Errc::internal, "expected a single point piece");
      lift.terms.push_back({pcs[0], g, term.coefficient, true, n - 1.0});
    }
  }
  return lift;
}

std::vector<int> DiscreteForm::interior() const {
  std::vector<int> keep;
  for (int i = 0; i < n_nodes(); ++i)
    if (!dirichlet[i]) keep.push_back(i);
  return keep;
}

Eigen::VectorXd DiscreteForm::reduce(const Eigen::VectorXd& full) const {
  auto keep = interior();
  Eigen::VectorXd r(keep.size());
  for (size_t i = 0; i < keep.size(); ++i) r[i] = full[keep[i]];
  return r;
}

Eigen::VectorXd DiscreteForm::expand(const Eigen::VectorXd& red) const {
  auto keep = interior();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n_nodes());
  for (size_t i = 0; i < keep.size(); ++i) f[keep[i]] = red[i];
  return f;
}

SpMat DiscreteForm::reduced(const SpMat& full) const {
  auto keep = interior();
  std::vector<int> pos(n_nodes(), -1);
  for (size_t i = 0; i < keep.size(); ++i) pos[keep[i]] = static_cast<int>(i);
  std::vector<Eigen::Triplet<double>> trips;
  for (int k = 0; k < full.outerSize(); ++k)
    for (SpMat::InnerIterator it(full, k); it; ++it)
      if (pos[it.row()] >= 0 && pos[it.col()] >= 0)
        trips.emplace_back(pos[it.row()], pos[it.col()], it.value());
  SpMat out(keep.size(), keep.size());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

namespace {

}  // namespace

DiscreteForm assemble(std::shared_ptr<const StratifiedDomain> dom,
                      std::shared_ptr<const Mesh1D> mesh, const PotentialSpec& spec,
                      const AssembleOptions& opts) {
  require(dom->dimension() == 1, Errc::parameter_out_of_range, "1D assembly needs a 1D domain");
  DiscreteForm form;
  form.dom = dom;
  form.mesh1 = mesh;
  form.quad_order = opts.quad_order;
  form.lift = opts.lifted ? derive_lift(*dom, spec) : LiftField{};

  LiftEval lev;
  lev.dom = dom.get();
  lev.pieces = axis_pieces(*dom);
  lev.lift = &form.lift;
  lev.spec = &spec;
  lev.ambient_n = dom->ambient_dimension();

  const auto& nodes = mesh->nodes;
  const int n = static_cast<int>(nodes.size());
  form.node_coords.resize(n);
  form.lift_m = Eigen::VectorXd::Ones(n);
  for (int i = 0; i < n; ++i) {
    form.node_coords[i] = {nodes[i]};
    if (!form.lift.trivial()) form.lift_m[i] = lev.m({nodes[i]});
  }

  const double cscal = spec.coeff.scalar();
  require(spec.coeff.radial_scalar(), Errc::parameter_out_of_range,
          "coefficient field is not radially reducible");

  std::vector<Eigen::Triplet<double>> ta, tp;
  std::vector<std::vector<Eigen::Triplet<double>>> tm(opts.weights.size() + 1);

  // which coordinates demand endpoint-aware panels
  std::vector<double> singular_coords;
  for (const auto& ap : lev.pieces) singular_coords.push_back(ap.loc);
  if (mesh->jac_exponent > 0.0) singular_coords.push_back(0.0);

  const int order = opts.quad_order;
  for (int e = 0; e + 1 < n; ++e) {
    const double x0 = nodes[e], x1 = nodes[e + 1], h = x1 - x0;
    bool sing_lo = false, sing_hi = false;
    for (double sc : singular_coords) {
      if (std::abs(x0 - sc) <= 0.0) sing_lo = true;
      if (std::abs(x1 - sc) <= 0.0) sing_hi = true;
    }
    double loc_a[2][2] = {{0, 0}, {0, 0}};
    double loc_p[2][2] = {{0, 0}, {0, 0}};
    std::vector<std::array<double, 4>> loc_m(tm.size(), {0, 0, 0, 0});

    auto add_point = [&](double t, double wq) {
      const double J = mesh->jacobian(t);
      const double m2v = form.lift.trivial() ? 1.0 : lev.m2({t});
      const double base = wq * J * m2v;
      const double phi[2] = {(x1 - t) / h, (t - x0) / h};
      const double dphi[2] = {-1.0 / h, 1.0 / h};
      const double V =
          (spec.terms.empty() && form.lift.trivial()) ? 0.0 : lev.residual({t});
      for (int i = 0; i < 2; ++i)
        for (int j = i; j < 2; ++j) {
          loc_a[i][j] += base * cscal * dphi[i] * dphi[j];
          if (V != 0.0) loc_p[i][j] += base * V * phi[i] * phi[j];
          loc_m[0][i * 2 + j] += base * phi[i] * phi[j];
        }
      for (size_t wi = 0; wi < opts.weights.size(); ++wi) {
        const double wv = weight_value(*dom, opts.weights[wi], {t});
        for (int i = 0; i < 2; ++i)
          for (int j = i; j < 2; ++j) loc_m[wi + 1][i * 2 + j] += base * wv * phi[i] * phi[j];
      }
    };

    // quadrature points for this cell
    if (sing_lo || sing_hi) {
      // geometric panels toward the singular end; weights folded per point
      const double len = h;
      double hi_len = len;
      for (int k = 0; k < 52; ++k) {
        double lo_len = hi_len * 0.5;
        double pa = sing_lo ? x0 + lo_len : x1 - hi_len;
        double pb = sing_lo ? x0 + hi_len : x1 - lo_len;
        const auto& rule = quad::gauss(order);
        const double mid = 0.5 * (pa + pb), half = 0.5 * (pb - pa);
        for (size_t q = 0; q < rule.x.size(); ++q)
          add_point(mid + half * rule.x[q], half * rule.w[q]);
        hi_len = lo_len;
      }
    } else {
      const auto& rule = quad::gauss(order);
      const double mid = 0.5 * (x0 + x1), half = 0.5 * h;
      for (size_t q = 0; q < rule.x.size(); ++q)
        add_point(mid + half * rule.x[q], half * rule.w[q]);
    }

    for (int i = 0; i < 2; ++i)
      for (int j = i; j < 2; ++j) {
        ta.emplace_back(e + i, e + j, loc_a[i][j]);
        if (i != j) ta.emplace_back(e + j, e + i, loc_a[i][j]);
        tp.emplace_back(e + i, e + j, loc_p[i][j]);
        if (i != j) tp.emplace_back(e + j, e + i, loc_p[i][j]);
        for (size_t wi = 0; wi < tm.size(); ++wi) {
          tm[wi].emplace_back(e + i, e + j, loc_m[wi][i * 2 + j]);
          if (i != j) tm[wi].emplace_back(e + j, e + i, loc_m[wi][i * 2 + j]);
        }
      }
  }

  auto to_sparse = [&](std::vector<Eigen::Triplet<double>>& t) {
    SpMat m(n, n);
    m.setFromTriplets(t.begin(), t.end());
    return m;
  };
  form.stiffness = to_sparse(ta);
  form.potential = to_sparse(tp);
  form.mass["unit"] = to_sparse(tm[0]);
  for (size_t wi = 0; wi < opts.weights.size(); ++wi)
    form.mass[opts.weights[wi].name] = to_sparse(tm[wi + 1]);

  // boundary conditions: Dirichlet on boundary/stratum nodes unless the lifted
  // weight kills the node's capacity (total vanishing exponent >= 1)
  form.dirichlet.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    const double t = nodes[i];
    double vanish = 0.0;
    bool on_piece = false;
    for (const auto& ap : lev.pieces) {
      if (std::abs(t - ap.loc) == 0.0) {
        on_piece = true;
        int li = form.lift.term_for_piece(ap.piece);
        if (li >= 0) vanish += 2.0 * form.lift.terms[li].gamma;
      }
    }
    if (t == 0.0 && mesh->jac_exponent > 0.0) vanish += mesh->jac_exponent;
    if (on_piece && vanish < 1.0 - 1e-12) form.dirichlet[i] = 1;
  }
  if (!std::isfinite(form.stiffness.coeffs().sum()) ||
      !std::isfinite(form.potential.coeffs().sum()))
    fail(Errc::quadrature_breakdown, "nonfinite assembled entries");
  return form;
}

SpMat assemble_mass(const DiscreteForm& form, const WeightSpec& w) {
  require(form.mesh1 != nullptr, Errc::internal, "extra masses implemented for 1D forms");
  const auto& mesh = *form.mesh1;
  const auto& nodes = mesh.nodes;
  const int n = static_cast<int>(nodes.size());
  LiftEval lev;
  lev.dom = form.dom.get();
  lev.pieces = axis_pieces(*form.dom);
  lev.lift = &form.lift;
  lev.ambient_n = form.dom->ambient_dimension();

  std::vector<double> singular_coords;
  for (const auto& ap : lev.pieces) singular_coords.push_back(ap.loc);
  if (mesh.jac_exponent > 0.0) singular_coords.push_back(0.0);

  std::vector<Eigen::Triplet<double>> tm;
  const int order = form.quad_order;
  for (int e = 0; e + 1 < n; ++e) {
    const double x0 = nodes[e], x1 = nodes[e + 1], h = x1 - x0;
    bool sing_lo = false, sing_hi = false;
    for (double sc : singular_coords) {
      if (x0 == sc) sing_lo = true;
      if (x1 == sc) sing_hi = true;
    }
    double loc[2][2] = {{0, 0}, {0, 0}};
    auto add_point = [&](double t, double wq) {
      const double J = mesh.jacobian(t);
      const double m2v = form.lift.trivial() ? 1.0 : lev.m2({t});
      double wv;
      if (w.kind == WeightSpec::Kind::nodal_squared) {
        const double interp = w.nodal[e] * (x1 - t) / h + w.nodal[e + 1] * (t - x0) / h;
        wv = interp * interp;
      } else {
        wv = weight_value(*form.dom, w, {t});
      }
      const double base = wq * J * m2v * wv;
      const double phi[2] = {(x1 - t) / h, (t - x0) / h};
      for (int i = 0; i < 2; ++i)
        for (int j = i; j < 2; ++j) loc[i][j] += base * phi[i] * phi[j];
    };
    if (sing_lo || sing_hi) {
      double hi_len = h;
      for (int k = 0; k < 52; ++k) {
        double lo_len = hi_len * 0.5;
        double pa = sing_lo ? x0 + lo_len : x1 - hi_len;
        double pb = sing_lo ? x0 + hi_len : x1 - lo_len;
        const auto& rule = quad::gauss(order);
        const double mid = 0.5 * (pa + pb), half = 0.5 * (pb - pa);
        for (size_t q = 0; q < rule.x.size(); ++q) add_point(mid + half * rule.x[q], half * rule.w[q]);
        hi_len = lo_len;
      }
    } else {
      const auto& rule = quad::gauss(order);
      const double mid = 0.5 * (x0 + x1), half = 0.5 * h;
      for (size_t q = 0; q < rule.x.size(); ++q) add_point(mid + half * rule.x[q], half * rule.w[q]);
    }
    for (int i = 0; i < 2; ++i)
      for (int j = i; j < 2; ++j) {
        tm.emplace_back(e + i, e + j, loc[i][j]);
        if (i != j) tm.emplace_back(e + j, e + i, loc[i][j]);
      }
  }
  SpMat m(n, n);
  m.setFromTriplets(tm.begin(), tm.end());
  return m;
}

SpMat assemble_stiffness_nodal2(const DiscreteForm& form, const Eigen::VectorXd& nodal) {
  require(form.mesh1 != nullptr, Errc::internal, "nodal-weighted stiffness is 1D");
  const auto& mesh = *form.mesh1;
  const auto& nodes = mesh.nodes;
  const int n = static_cast<int>(nodes.size());
  std::vector<Eigen::Triplet<double>> tt;
  const auto& rule = quad::gauss(std::max(4, form.quad_order));
  for (int e = 0; e + 1 < n; ++e) {
    const double x0 = nodes[e], x1 = nodes[e + 1], h = x1 - x0;
    const double mid = 0.5 * (x0 + x1), half = 0.5 * h;
    double loc[2][2] = {{0, 0}, {0, 0}};
    for (size_t q = 0; q < rule.x.size(); ++q) {
      const double t = mid + half * rule.x[q];
      const double wq = half * rule.w[q];
      const double interp = nodal[e] * (x1 - t) / h + nodal[e + 1] * (t - x0) / h;
      const double base = wq * mesh.jacobian(t) * interp * interp;
      const double dphi[2] = {-1.0 / h, 1.0 / h};
      for (int i = 0; i < 2; ++i)
        for (int j = i; j < 2; ++j) loc[i][j] += base * dphi[i] * dphi[j];
    }
    for (int i = 0; i < 2; ++i)
      for (int j = i; j < 2; ++j) {
        tt.emplace_back(e + i, e + j, loc[i][j]);
        if (i != j) tt.emplace_back(e + j, e + i, loc[i][j]);
      }
  }
  SpMat m(n, n);
  m.setFromTriplets(tt.begin(), tt.end());
  return m;
}

DiscreteForm assemble(std::shared_ptr<const StratifiedDomain> dom,
                      std::shared_ptr<const Mesh2D> mesh, const PotentialSpec& spec,
                      const AssembleOptions& opts) {
  require(dom->shape() == ShapeKind::rectangle, Errc::parameter_out_of_range,
          "2D assembly supports tensor rectangles");
  require(spec.coeff.kind == CoeffKind::identity, Errc::parameter_out_of_range,
          "2D assembly supports identity coefficients");
  DiscreteForm form;
  form.dom = dom;
  form.mesh2 = mesh;
  form.quad_order = opts.quad_order;
  form.lift = opts.lifted ? derive_lift(*dom, spec) : LiftField{};

  LiftEval lev;
  lev.dom = dom.get();
  lev.pieces = axis_pieces(*dom);
  lev.lift = &form.lift;
  lev.spec = &spec;
  lev.ambient_n = dom->ambient_dimension();

  const auto& nx = mesh->x.nodes;
  const auto& ny = mesh->y.nodes;
  const int NX = static_cast<int>(nx.size()), NY = static_cast<int>(ny.size());
  const int n = NX * NY;
  form.node_coords.resize(n);
  form.lift_m = Eigen::VectorXd::Ones(n);
  for (int ix = 0; ix < NX; ++ix)
    for (int iy = 0; iy < NY; ++iy) {
      Point pt = {nx[ix], ny[iy]};
      form.node_coords[ix * NY + iy] = pt;
      if (!form.lift.trivial()) form.lift_m[ix * NY + iy] = lev.m(pt);
    }

  // per-axis gamma for the separable lift weight (equal on both ends by
  // construction: a single codim-1 boundary term lifts all faces alike)
  double gamma_axis = 0.0;
  for (const auto& t : form.lift.terms) gamma_axis = std::max(gamma_axis, t.gamma);

  auto axis_factors = [&](const std::vector<double>& an, double W) {
    const int N = static_cast<int>(an.size());
    std::vector<Eigen::Triplet<double>> ts, tg;
    auto wfun = [&](double t) {
      return gamma_axis == 0.0 ? 1.0 : std::pow(t * (W - t), 2.0 * gamma_axis);
    };
    for (int e = 0; e + 1 < N; ++e) {
      const double x0 = an[e], x1 = an[e + 1], h = x1 - x0;
      bool sing = (x0 == 0.0 || x1 == W) && gamma_axis != 0.0 &&
                  std::abs(2.0 * gamma_axis - std::round(2.0 * gamma_axis)) > 0.0;
      double ls[2][2] = {{0, 0}, {0, 0}}, lg[2][2] = {{0, 0}, {0, 0}};
      auto addp = [&](double t, double wq) {
        const double wv = wfun(t);
        const double phi[2] = {(x1 - t) / h, (t - x0) / h};
        const double dphi[2] = {-1.0 / h, 1.0 / h};
        for (int i = 0; i < 2; ++i)
          for (int j = i; j < 2; ++j) {
            ls[i][j] += wq * wv * dphi[i] * dphi[j];
            lg[i][j] += wq * wv * phi[i] * phi[j];
          }
      };
      const auto& rule = quad::gauss(opts.quad_order);
      if (sing) {
        bool lo = (x0 == 0.0);
        double hi_len = h;
        for (int k = 0; k < 52; ++k) {
          double lo_len = hi_len * 0.5;
          double pa = lo ? x0 + lo_len : x1 - hi_len;
          double pb = lo ? x0 + hi_len : x1 - lo_len;
          const double mid = 0.5 * (pa + pb), half = 0.5 * (pb - pa);
          for (size_t q = 0; q < rule.x.size(); ++q) addp(mid + half * rule.x[q], half * rule.w[q]);
          hi_len = lo_len;
        }
      } else {
        const double mid = 0.5 * (x0 + x1), half = 0.5 * h;
        for (size_t q = 0; q < rule.x.size(); ++q) addp(mid + half * rule.x[q], half * rule.w[q]);
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
    return std::make_pair(S, G);
  };

  auto [Sx, Gx] = axis_factors(nx, dom->hi(0));
  auto [Sy, Gy] = axis_factors(ny, dom->hi(1));

  auto kron = [&](const SpMat& A, const SpMat& B) {
    std::vector<Eigen::Triplet<double>> t;
    for (int ka = 0; ka < A.outerSize(); ++ka)
      for (SpMat::InnerIterator ia(A, ka); ia; ++ia)
        for (int kb = 0; kb < B.outerSize(); ++kb)
          for (SpMat::InnerIterator ib(B, kb); ib; ++ib)
            t.emplace_back(ia.row() * NY + ib.row(), ia.col() * NY + ib.col(),
                           ia.value() * ib.value());
    SpMat out(n, n);
    out.setFromTriplets(t.begin(), t.end());
    return out;
  };

  form.stiffness = kron(Sx, Gy) + kron(Gx, Sy);
  form.mass["unit"] = kron(Gx, Gy);

  // potential: per-cell tensor quadrature of the (lift-residual) potential
  std::vector<Eigen::Triplet<double>> tp;
  const auto& rule = quad::gauss(6);
  const bool have_pot = !spec.terms.empty() || !form.lift.trivial();
  if (have_pot) {
    for (int ex = 0; ex + 1 < NX; ++ex)
      for (int ey = 0; ey + 1 < NY; ++ey) {
        const double x0 = nx[ex], x1 = nx[ex + 1], hx = x1 - x0;
        const double y0 = ny[ey], y1 = ny[ey + 1], hy = y1 - y0;
        double loc[4][4] = {};
        for (size_t qx = 0; qx < rule.x.size(); ++qx)
          for (size_t qy = 0; qy < rule.x.size(); ++qy) {
            const double xq = 0.5 * (x0 + x1) + 0.5 * hx * rule.x[qx];
            const double yq = 0.5 * (y0 + y1) + 0.5 * hy * rule.x[qy];
            const double wq = 0.25 * hx * hy * rule.w[qx] * rule.w[qy];
            Point pt = {xq, yq};
            const double m2v = form.lift.trivial() ? 1.0 : lev.m2(pt);
            const double V = lev.residual(pt);
            const double px[2] = {(x1 - xq) / hx, (xq - x0) / hx};
            const double py[2] = {(y1 - yq) / hy, (yq - y0) / hy};
            const double base = wq * m2v * V;
            for (int i = 0; i < 4; ++i)
              for (int j = i; j < 4; ++j)
                loc[i][j] += base * px[i / 2] * py[i % 2] * px[j / 2] * py[j % 2];
          }
        const int id[4] = {ex * NY + ey, ex * NY + ey + 1, (ex + 1) * NY + ey,
                           (ex + 1) * NY + ey + 1};
        for (int i = 0; i < 4; ++i)
          for (int j = i; j < 4; ++j) {
            tp.emplace_back(id[i], id[j], loc[i][j]);
            if (i != j) tp.emplace_back(id[j], id[i], loc[i][j]);
          }
      }
  }
  form.potential = SpMat(n, n);
  form.potential.setFromTriplets(tp.begin(), tp.end());

  form.dirichlet.assign(n, 0);
  const double vanish_per_face = 2.0 * gamma_axis;
  for (int ix = 0; ix < NX; ++ix)
    for (int iy = 0; iy < NY; ++iy) {
      bool on_x = ix == 0 || ix == NX - 1;
      bool on_y = iy == 0 || iy == NY - 1;
      if (!(on_x || on_y)) continue;
      bool free_node = vanish_per_face >= 1.0 - 1e-12;
      form.dirichlet[ix * NY + iy] = free_node ? 0 : 1;
    }
  return form;
}

void dump_matrix_coo(const SpMat& m, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), Errc::io_error, "cannot open " + path);
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it)
      out << it.row() << " " << it.col() << " " << it.value() << "\n";
}

}  // namespace hardyheat
