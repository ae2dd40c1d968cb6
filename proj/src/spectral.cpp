#include "hardyheat/spectral.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>

#include "hardyheat/errors.hpp"
#include "hardyheat/quadrature.hpp"

namespace hardyheat {

namespace {

Eigen::MatrixXd to_dense(const SpMat& m) { return Eigen::MatrixXd(m); }

// inertia-checked shift: returns a factorization of K - sigma M with no
// eigenvalue of the pencil below sigma
struct ShiftedFactor {
  Eigen::SimplicialLDLT<SpMat> ldlt;
  double sigma = 0.0;
};

int negative_pivots(const Eigen::SimplicialLDLT<SpMat>& ldlt) {
  int neg = 0;
  const auto& d = ldlt.vectorD();
  for (int i = 0; i < d.size(); ++i)
    if (d[i] < 0) ++neg;
  return neg;
}

void factor_below_lambda1(ShiftedFactor& f, const SpMat& K, const SpMat& M, double sigma0) {
  f.sigma = sigma0;
  double dec = std::max(1.0, 0.5 * std::abs(sigma0));
  for (int attempt = 0; attempt < 60; ++attempt) {
    SpMat shifted = K - f.sigma * M;
    f.ldlt.compute(shifted);
    if (f.ldlt.info() == Eigen::Success && negative_pivots(f.ldlt) == 0) return;
    f.sigma -= dec;
    dec *= 2.0;
  }
  fail(Errc::factorization_failed, "could not place the shift below the spectrum");
}

}  // namespace

GroundState solve_ground_state(const DiscreteForm& form, const SolveOptions& opts) {
  const auto keep = form.interior();
  require(!keep.empty(), Errc::empty_grid, "no interior nodes");
  const SpMat K = form.reduced(form.stiffness - form.potential);
  const SpMat M = form.reduced(form.unit_mass());
  const int n = static_cast<int>(keep.size());

  GroundState gs;
  Eigen::VectorXd x;

  if (opts.dense || n <= 220) {
    // mass-diagonal scaling keeps the Cholesky inside the dense solver sane for
    // strongly graded weighted meshes
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) {
      const double mi = M.coeff(i, i);
      require(mi > 0, Errc::internal, "mass diagonal must be positive");
      d[i] = 1.0 / std::sqrt(mi);
    }
    Eigen::MatrixXd Kd = d.asDiagonal() * to_dense(K) * d.asDiagonal();
    Eigen::MatrixXd Md = d.asDiagonal() * to_dense(M) * d.asDiagonal();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Kd, Md);
    require(es.info() == Eigen::Success, Errc::factorization_failed, "dense eigensolver failed");
    gs.lambda1 = es.eigenvalues()(0);
    x = d.asDiagonal() * es.eigenvectors().col(0);
    gs.iterations = 0;
  } else {
    double sigma;
    if (opts.shift) {
      sigma = *opts.shift;
    } else {
      // cheap upper bound for lambda1 from a few inverse-free Rayleigh quotients
      Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
      double rq = v.dot(K * v) / v.dot(M * v);
      sigma = rq - std::max(1.0, 0.5 * std::abs(rq));
    }
    ShiftedFactor f;
    factor_below_lambda1(f, K, M, sigma);
    x = Eigen::VectorXd::Ones(n);
    x /= std::sqrt(x.dot(M * x));
    double lambda = x.dot(K * x);
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
      Eigen::VectorXd y = f.ldlt.solve(M * x);
      double nrm = std::sqrt(y.dot(M * y));
      require(std::isfinite(nrm) && nrm > 0, Errc::nonfinite_state, "inverse iteration diverged");
      y /= nrm;
      double lam_new = y.dot(K * y);
      Eigen::VectorXd resid = K * y - lam_new * (M * y);
      double scale = (K * y).norm() + std::abs(lam_new) * (M * y).norm();
      x = y;
      double delta = std::abs(lam_new - lambda);
      lambda = lam_new;
      if (resid.norm() <= opts.tol * std::max(scale, 1e-300) &&
          delta <= opts.tol * std::max(1.0, std::abs(lambda)))
        break;
    }
    gs.lambda1 = lambda;
    gs.iterations = it;
  }

  Eigen::VectorXd Kx = K * x, Mx = M * x;
  gs.residual = (Kx - gs.lambda1 * Mx).norm() / std::max(Kx.norm() + std::abs(gs.lambda1) * Mx.norm(), 1e-300);

  // Perron normalization: positive interior values, max-norm one
  if (x.sum() < 0) x = -x;
  Eigen::VectorXd full = form.expand(x);
  double mx = full.cwiseAbs().maxCoeff();
  require(mx > 0, Errc::internal, "zero eigenvector");
  gs.phi = full / mx;
  return gs;
}

DenseSpectrum solve_dense_spectrum(const DiscreteForm& form) {
  const auto keep = form.interior();
  const SpMat K = form.reduced(form.stiffness - form.potential);
  const SpMat M = form.reduced(form.unit_mass());
  const int n = static_cast<int>(keep.size());
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) {
    const double mi = M.coeff(i, i);
    require(mi > 0, Errc::internal, "mass diagonal must be positive");
    d[i] = 1.0 / std::sqrt(mi);
  }
  Eigen::MatrixXd Kd = d.asDiagonal() * to_dense(K) * d.asDiagonal();
  Eigen::MatrixXd Md = d.asDiagonal() * to_dense(M) * d.asDiagonal();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Kd, Md);
  require(es.info() == Eigen::Success, Errc::factorization_failed, "dense eigensolver failed");
  DenseSpectrum sp;
  sp.values = es.eigenvalues();
  sp.vectors = Eigen::MatrixXd::Zero(form.n_nodes(), keep.size());
  for (size_t i = 0; i < keep.size(); ++i)
    sp.vectors.row(keep[i]) = d[i] * es.eigenvectors().row(i);
  return sp;
}

namespace {

struct Ray {
  int piece = -1;
  std::string label;
  std::vector<int> nodes;  // node indices ordered by increasing piece distance
};

std::vector<Ray> transversal_rays(const DiscreteForm& form) {
  const auto& dom = *form.dom;
  std::vector<Ray> rays;
  if (form.mesh1) {
    for (size_t pc = 0; pc < dom.pieces().size(); ++pc) {
      Ray r;
      r.piece = static_cast<int>(pc);
      r.label = dom.pieces()[pc].label;
      std::vector<std::pair<double, int>> order;
      for (int i = 0; i < form.n_nodes(); ++i) {
        const Point& x = form.node_coords[i];
        if (!dom.interior(x)) continue;
        order.emplace_back(dom.piece_distance(r.piece, x), i);
      }
      std::sort(order.begin(), order.end());
      for (auto& [d, i] : order) r.nodes.push_back(i);
      rays.push_back(std::move(r));
    }
    return rays;
  }
  // 2D tensor rectangle: column of nodes through each face midpoint
  const auto& nx = form.mesh2->x.nodes;
  const auto& ny = form.mesh2->y.nodes;
  const int NY = static_cast<int>(ny.size());
  auto mid_index = [](const std::vector<double>& v) {
    double target = 0.5 * (v.front() + v.back());
    int best = 0;
    for (size_t i = 0; i < v.size(); ++i)
      if (std::abs(v[i] - target) < std::abs(v[best] - target)) best = static_cast<int>(i);
    return best;
  };
  const int mx = mid_index(nx), my = mid_index(ny);
  for (size_t pc = 0; pc < dom.pieces().size(); ++pc) {
    const Piece& p = dom.pieces()[pc];
    Ray r;
    r.piece = static_cast<int>(pc);
    r.label = p.label;
    if (p.axis == 0) {
      for (int ix = 0; ix < static_cast<int>(nx.size()); ++ix) {
        if (ix == 0 || ix + 1 == static_cast<int>(nx.size())) continue;
        r.nodes.push_back(ix * NY + my);
      }
      std::sort(r.nodes.begin(), r.nodes.end(), [&](int a, int b) {
        return dom.piece_distance(r.piece, form.node_coords[a]) <
               dom.piece_distance(r.piece, form.node_coords[b]);
      });
    } else {
      for (int iy = 1; iy + 1 < NY; ++iy) r.nodes.push_back(mx * NY + iy);
      std::sort(r.nodes.begin(), r.nodes.end(), [&](int a, int b) {
        return dom.piece_distance(r.piece, form.node_coords[a]) <
               dom.piece_distance(r.piece, form.node_coords[b]);
      });
    }
    rays.push_back(std::move(r));
  }
  return rays;
}

double predicted_for_piece(const StratifiedDomain& dom, const PotentialSpec& spec, int piece) {
  const Piece& p = dom.pieces()[piece];
  if (p.kind == PieceKind::point) {
    size_t pole_idx = 0;
    for (const auto& t : spec.terms) {
      if (t.support != SingularTerm::Support::pole) continue;
      if (pole_idx < spec.pole_betas.size()) return spec.pole_betas[pole_idx];
      ++pole_idx;
    }
    return 0.0;
  }
  return spec.boundary_alpha.value_or(dom.strata()[p.stratum].codim == 1 ? 1.0 : 0.0);
}

}  // namespace

std::vector<ExponentFit> fit_exponents(const GroundState& gs, const DiscreteForm& form,
                                       const PotentialSpec& spec,
                                       std::optional<FitWindow> window) {
  const auto& dom = *form.dom;
  const double h_min = form.mesh1 ? form.mesh1->h_min : form.mesh2->x.h_min;
  FitWindow win = window.value_or(
      FitWindow{std::max(10.0 * h_min, 1e-4), dom.localization_beta() / 4.0});
  require(win.lo < win.hi, Errc::window_too_narrow, "empty fit window");

  auto rays = transversal_rays(form);
  std::vector<double> alpha(dom.pieces().size());
  for (size_t pc = 0; pc < alpha.size(); ++pc)
    alpha[pc] = predicted_for_piece(dom, spec, static_cast<int>(pc));

  std::vector<ExponentFit> fits(rays.size());
  for (int pass = 0; pass < 2; ++pass) {
    for (size_t ri = 0; ri < rays.size(); ++ri) {
      const Ray& ray = rays[ri];
      std::vector<double> lx, ly, raw;
      for (int node : ray.nodes) {
        const Point& x = form.node_coords[node];
        const double d = dom.piece_distance(ray.piece, x);
        if (d < win.lo || d > win.hi) continue;
        double phi = gs.phi[node];
        if (phi <= 0) continue;
        double divided = phi;
        for (size_t pc = 0; pc < alpha.size(); ++pc) {
          if (pc == ri || alpha[pc] == 0.0) continue;
          divided /= std::pow(dom.piece_distance(static_cast<int>(pc), x), alpha[pc]);
        }
        lx.push_back(std::log(d));
        ly.push_back(std::log(divided));
        raw.push_back(divided);
      }
      require(lx.size() >= 8, Errc::window_too_narrow,
              "fewer than 8 sample radii in the fit window for piece " + ray.label);
      const int m = static_cast<int>(lx.size());
      double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
      for (int i = 0; i < m; ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
        syy += ly[i] * ly[i];
      }
      const double denom = m * sxx - sx * sx;
      const double slope = (m * sxy - sx * sy) / denom;
      const double intercept = (sy - slope * sx) / m;
      double ss_res = 0, ss_tot = 0;
      const double ybar = sy / m;
      for (int i = 0; i < m; ++i) {
        const double fit = slope * lx[i] + intercept;
        ss_res += (ly[i] - fit) * (ly[i] - fit);
        ss_tot += (ly[i] - ybar) * (ly[i] - ybar);
      }
      ExponentFit& f = fits[ri];
      f.piece = ray.piece;
      f.piece_label = ray.label;
      f.alpha_hat = slope;
      f.r_lo = win.lo;
      f.r_hi = win.hi;
      f.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
      f.samples = m;
      // two-sided realization: spread of phi / prod d^alpha over the window
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (int i = 0; i < m; ++i) {
        double v = raw[i] / std::exp(slope * lx[i]);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      f.two_sided_spread = hi / lo;
      alpha[ray.piece] = slope;
    }
  }
  return fits;
}

double ground_state_identity(const DiscreteForm& plain, const GroundState& gs,
                             const std::vector<Eigen::VectorXd>& u_samples) {
  const SpMat K = plain.stiffness - plain.potential;
  const SpMat& M = plain.unit_mass();
  const SpMat T = assemble_stiffness_nodal2(plain, gs.phi);
  double worst = 0.0;
  for (const auto& u : u_samples) {
    Eigen::VectorXd v(u.size());
    for (int i = 0; i < u.size(); ++i) {
      if (u[i] == 0.0) {
        v[i] = 0.0;
      } else {
        require(gs.phi[i] >= 1e-300, Errc::division_underflow,
                "u is supported where phi_1 underflows");
        v[i] = u[i] / gs.phi[i];
      }
    }
    const double q = u.dot(K * u);
    const double nrm = u.dot(M * u);
    const double transformed = v.dot(T * v);
    const double defect = std::abs(q - gs.lambda1 * nrm - transformed) / (std::abs(q) + nrm);
    worst = std::max(worst, defect);
  }
  return worst;
}

std::vector<LayerEigen> boundary_layer_mu1(const StratifiedDomain& dom,
                                           const std::vector<double>& deltas,
                                           const MeshParams& params) {
  require(dom.stratum_of_codim(1) >= 0, Errc::no_such_stratum,
          "layer eigenvalues need a codim-1 boundary");
  std::vector<LayerEigen> out;
  const bool radial = dom.shape() == ShapeKind::disc || dom.shape() == ShapeKind::radial_ball;
  const int n = dom.ambient_dimension();
  for (double delta : deltas) {
    require(delta > 0 && delta < dom.localization_beta() + 1e-12, Errc::radius_too_large,
            "layer width must stay below the localization scale");
    // layer coordinate t in (0, delta), t = distance to the boundary
    auto ladder = graded_ladder(delta, params.h_min * delta, params.rho, params.uniform_cells,
                                true, false);
    const int N = static_cast<int>(ladder.size());
    std::vector<Eigen::Triplet<double>> ts, tp, tmass, tx;
    const auto& rule = quad::gauss(10);
    const double D = delta;  // sup of d over the layer
    for (int e = 0; e + 1 < N; ++e) {
      const double x0 = ladder[e], x1 = ladder[e + 1], h = x1 - x0;
      double ls[2][2] = {{0, 0}, {0, 0}}, lp[2][2] = {{0, 0}, {0, 0}},
             lm[2][2] = {{0, 0}, {0, 0}}, lxq[2][2] = {{0, 0}, {0, 0}};
      auto addp = [&](double t, double wq) {
        // radial geometry: rho = R - t, area Jacobian rho^{n-1}; flat: 1
        const double J = radial ? std::pow(dom.radius() - t, n - 1.0) : 1.0;
        const double drift = radial ? -(n - 1.0) / (dom.radius() - t) : 0.0;  // Delta d
        const double phi[2] = {(x1 - t) / h, (t - x0) / h};
        const double dphi[2] = {-1.0 / h, 1.0 / h};
        const double xw = x_weight(t / D);
        for (int i = 0; i < 2; ++i)
          for (int j = i; j < 2; ++j) {
            ls[i][j] += wq * J * t * dphi[i] * dphi[j];
            lp[i][j] += wq * J * 0.5 * drift * phi[i] * phi[j];
            lm[i][j] += wq * J * t * phi[i] * phi[j];
            lxq[i][j] += wq * J * (xw * xw / t) * phi[i] * phi[j];
          }
      };
      bool sing = (e == 0);
      if (sing) {
        double hi_len = h;
        for (int k = 0; k < 52; ++k) {
          double lo_len = hi_len * 0.5;
          const double mid = x0 + 0.5 * (lo_len + hi_len), half = 0.5 * (hi_len - lo_len);
          for (size_t q = 0; q < rule.x.size(); ++q) addp(mid + half * rule.x[q], half * rule.w[q]);
          hi_len = lo_len;
        }
      } else {
        const double mid = 0.5 * (x0 + x1), half = 0.5 * h;
        for (size_t q = 0; q < rule.x.size(); ++q) addp(mid + half * rule.x[q], half * rule.w[q]);
      }
      for (int i = 0; i < 2; ++i)
        for (int j = i; j < 2; ++j) {
          auto push = [&](std::vector<Eigen::Triplet<double>>& v, double val) {
            v.emplace_back(e + i, e + j, val);
            if (i != j) v.emplace_back(e + j, e + i, val);
          };
          push(ts, ls[i][j]);
          push(tp, lp[i][j]);
          push(tmass, lm[i][j]);
          push(tx, lxq[i][j]);
        }
    }
    SpMat S(N, N), P(N, N), M(N, N), XQ(N, N);
    S.setFromTriplets(ts.begin(), ts.end());
    P.setFromTriplets(tp.begin(), tp.end());
    M.setFromTriplets(tmass.begin(), tmass.end());
    XQ.setFromTriplets(tx.begin(), tx.end());
    // Dirichlet at the inner interface t = delta; the weight-t end is free
    std::vector<int> keep;
    for (int i = 0; i + 1 < N; ++i) keep.push_back(i);
    auto red = [&](const SpMat& A) {
      std::vector<Eigen::Triplet<double>> tr;
      for (int k = 0; k < A.outerSize(); ++k)
        for (SpMat::InnerIterator it(A, k); it; ++it)
          if (it.row() + 1 < N && it.col() + 1 < N)
            tr.emplace_back(it.row(), it.col(), it.value());
      SpMat B(N - 1, N - 1);
      B.setFromTriplets(tr.begin(), tr.end());
      return B;
    };
    Eigen::MatrixXd Kd = to_dense(red(S)) - to_dense(red(P));
    Eigen::MatrixXd Md = to_dense(red(M));
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Kd, Md);
    require(es.info() == Eigen::Success, Errc::factorization_failed, "layer eigensolve failed");
    LayerEigen le;
    le.delta = delta;
    le.mu1 = es.eigenvalues()(0);
    Eigen::VectorXd v = es.eigenvectors().col(0);
    Eigen::MatrixXd Xd = to_dense(red(XQ));
    le.refined_hardy_quotient = v.dot(Kd * v) / v.dot(Xd * v);
    out.push_back(le);
  }
  return out;
}

}  // namespace hardyheat
