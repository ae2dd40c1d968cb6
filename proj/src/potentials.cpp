#include "hardyheat/potentials.hpp"

#include <cmath>

#include "hardyheat/errors.hpp"

namespace hardyheat {

Eigen::MatrixXd CoeffField::matrix(const std::vector<double>& x) const {
  const int dim = static_cast<int>(x.size());
  Eigen::MatrixXd a_mat = Eigen::MatrixXd::Identity(dim, dim);
  switch (kind) {
    case CoeffKind::identity:
      break;
    case CoeffKind::scaled_identity:
      a_mat *= scale;
      break;
    case CoeffKind::offdiagonal_radial: {
      double r2 = 0.0;
      for (double xi : x) r2 += xi * xi;
      const double off = 0.5 * std::pow(std::sqrt(r2), 2.0 - a);
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
          if (i != j) a_mat(i, j) = off;
      break;
    }
  }
  return a_mat;
}

double PotentialSpec::hardy_constant(int codim, int) {
  const double k = codim;
  return 0.25 * (k - 2.0) * (k - 2.0);
}

double PotentialSpec::lift_exponent(int codim, int, double c) {
  const double k = codim;
  const double disc = (k - 2.0) * (k - 2.0) - 4.0 * c;
  require(disc >= -1e-15, Errc::hardy_constant_exceeded,
          "coefficient exceeds the codim-" + std::to_string(codim) + " Hardy constant");
  return 0.5 * ((2.0 - k) + std::sqrt(std::max(disc, 0.0)));
}

double PotentialSpec::value(const StratifiedDomain& dom, const Point& x) const {
  double v = 0.0;
  for (const auto& t : terms) {
    double d;
    if (t.support == SingularTerm::Support::codim1_boundary) {
      int s = dom.stratum_of_codim(1);
      require(s >= 0, Errc::no_such_stratum, "potential needs a codim-1 stratum");
      d = dom.stratum_distance(s, x);
    } else {
      double s2 = 0.0;
      for (size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - (i < t.location.size() ? t.location[i] : 0.0);
        s2 += dx * dx;
      }
      d = std::sqrt(s2);
    }
    v += t.coefficient / (d * d);
  }
  return v;
}

PotentialSpec example_I(int n, const std::vector<Pole>& poles) {
  require(n >= 3, Errc::parameter_out_of_range, "multipolar potentials need n >= 3");
  const double cmax = 0.25 * (n - 2.0) * (n - 2.0);
  PotentialSpec spec;
  spec.id = "example_I";
  spec.ambient_n = n;
  spec.ellipticity_C0 = 1.0;
  spec.boundary_alpha = 1.0;
  spec.hint = Lambda1Hint::finite_unknown;
  for (size_t i = 0; i < poles.size(); ++i) {
    const auto& p = poles[i];
    require(p.c >= 0.0, Errc::parameter_out_of_range, "pole coefficients must be nonnegative");
    require(p.c <= cmax + 1e-15, Errc::hardy_constant_exceeded,
            "pole coefficient exceeds (n-2)^2/4");
    for (size_t j = 0; j < i; ++j) {
      double s2 = 0.0;
      for (size_t k = 0; k < p.location.size(); ++k) {
        double dx = p.location[k] - poles[j].location[k];
        s2 += dx * dx;
      }
      require(s2 > 0.0, Errc::parameter_out_of_range, "poles must be pairwise distinct");
    }
    spec.terms.push_back({SingularTerm::Support::pole, p.location, p.c, n});
    const double beta = 0.5 * (2.0 - n + std::sqrt(std::max((n - 2.0) * (n - 2.0) - 4.0 * p.c, 0.0)));
    spec.pole_betas.push_back(beta);
    if (std::abs(p.c - cmax) <= 1e-14) spec.critical = true;
  }
  return spec;
}

PotentialSpec example_II_catalog(int n) {
  require(n >= 4, Errc::parameter_out_of_range, "the codim-(n-1) circle example needs n >= 4");
  PotentialSpec spec;
  spec.id = "example_II";
  spec.ambient_n = n;
  spec.ellipticity_C0 = 1.0;
  spec.boundary_alpha = 0.5;
  spec.critical = true;  // both terms sit at their Hardy constants
  spec.meshable = false;
  spec.hint = Lambda1Hint::finite_unknown;
  spec.catalog_exponents.push_back({1, 0.5, "codim-1 boundary of B_R"});
  spec.catalog_exponents.push_back({n - 1, 0.5 * (3.0 - n), "unit circle of codimension n-1"});
  return spec;
}

PotentialSpec example_III(const StratifiedDomain& dom) {
  for (const auto& s : dom.strata())
    require(s.codim == 1, Errc::parameter_out_of_range,
            "the boundary Hardy example needs a purely codim-1 boundary");
  PotentialSpec spec;
  spec.id = "example_III";
  spec.ambient_n = dom.ambient_dimension();
  spec.ellipticity_C0 = 1.0;
  spec.terms.push_back({SingularTerm::Support::codim1_boundary, {}, 0.25, 1});
  spec.boundary_alpha = 0.5;
  spec.critical = true;
  spec.hint = Lambda1Hint::finite_unknown;
  return spec;
}

PotentialSpec example_IV(const StratifiedDomain& dom) {
  const int n = dom.ambient_dimension();
  require(n >= 3, Errc::parameter_out_of_range, "the punctured example needs n >= 3");
  int pole_stratum = dom.stratum_of_codim(n);
  require(pole_stratum >= 0, Errc::no_such_stratum, "domain has no codim-n point stratum");
  PotentialSpec spec;
  spec.id = "example_IV";
  spec.ambient_n = n;
  spec.ellipticity_C0 = 1.0;
  spec.terms.push_back({SingularTerm::Support::codim1_boundary, {}, 0.25, 1});
  const double cpole = 0.25 * (n - 2.0) * (n - 2.0);
  spec.terms.push_back(
      {SingularTerm::Support::pole, dom.strata()[pole_stratum].location, cpole, n});
  spec.pole_betas.push_back(0.5 * (2.0 - n));
  spec.boundary_alpha = 0.5;
  spec.critical = true;
  spec.hint = Lambda1Hint::finite_unknown;
  return spec;
}

PotentialSpec example_V(double a, int n) {
  require(n >= 3, Errc::parameter_out_of_range, "the off-diagonal example needs n >= 3");
  require(a >= -0.5 * (n - 2.0) && a < 0.0, Errc::parameter_out_of_range,
          "parameter a must lie in [-(n-2)/2, 0)");
  PotentialSpec spec;
  spec.id = "example_V";
  spec.ambient_n = n;
  spec.coeff = {CoeffKind::offdiagonal_radial, 1.0, a, n};
  spec.ellipticity_C0 = 1.0 / (1.0 + 0.5 * n);
  const double c = -a * (n + a - 2.0);
  spec.terms.push_back({SingularTerm::Support::pole, Point(1, 0.0), c, n});
  spec.pole_betas.push_back(a);
  spec.boundary_alpha = 1.0;
  spec.hint = Lambda1Hint::positive;
  spec.meshable = false;  // coefficients are not radially reducible
  return spec;
}

PotentialSpec sum_spec(const PotentialSpec& p1, const PotentialSpec& p2,
                       const StratifiedDomain& dom) {
  require(p1.coeff.kind == CoeffKind::identity && p2.coeff.kind == CoeffKind::identity,
          Errc::parameter_out_of_range, "sums are defined for identity coefficients");
  const double beta = dom.localization_beta();
  auto has_boundary = [](const PotentialSpec& p) {
    for (const auto& t : p.terms)
      if (t.support == SingularTerm::Support::codim1_boundary) return true;
    return false;
  };
  require(!(has_boundary(p1) && has_boundary(p2)), Errc::overlapping_singularities,
          "both potentials are singular on the codim-1 boundary");
  for (const auto& t1 : p1.terms)
    for (const auto& t2 : p2.terms) {
      if (t1.support == SingularTerm::Support::pole &&
          t2.support == SingularTerm::Support::pole) {
        double s2 = 0.0;
        for (size_t k = 0; k < t1.location.size() && k < t2.location.size(); ++k) {
          double dx = t1.location[k] - t2.location[k];
          s2 += dx * dx;
        }
        require(std::sqrt(s2) >= 2.0 * beta, Errc::overlapping_singularities,
                "pole neighborhoods intersect within the localization scale");
      }
    }

  PotentialSpec out;
  out.id = p1.id + "+" + p2.id;
  out.ambient_n = std::max(p1.ambient_n, p2.ambient_n);
  out.ellipticity_C0 = std::min(p1.ellipticity_C0, p2.ellipticity_C0);
  out.terms = p1.terms;
  out.terms.insert(out.terms.end(), p2.terms.begin(), p2.terms.end());
  out.pole_betas = p1.pole_betas;
  out.pole_betas.insert(out.pole_betas.end(), p2.pole_betas.begin(), p2.pole_betas.end());
  out.boundary_alpha = p1.boundary_alpha ? p1.boundary_alpha : p2.boundary_alpha;
  out.critical = p1.critical || p2.critical;
  out.hint = Lambda1Hint::finite_unknown;
  out.meshable = p1.meshable && p2.meshable;
  return out;
}

EllipticityReport check_ellipticity(const PotentialSpec& spec,
                                    const std::vector<std::vector<double>>& samples) {
  require(!samples.empty(), Errc::empty_grid, "no ellipticity sample points");
  EllipticityReport rep;
  rep.min_eig = std::numeric_limits<double>::infinity();
  rep.max_eig = -rep.min_eig;
  for (const auto& x : samples) {
    Eigen::MatrixXd a_mat = spec.coeff.matrix(x);
    require((a_mat - a_mat.transpose()).norm() <= 1e-12, Errc::asymmetric_coefficient,
            "coefficient matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a_mat);
    rep.min_eig = std::min(rep.min_eig, es.eigenvalues().minCoeff());
    rep.max_eig = std::max(rep.max_eig, es.eigenvalues().maxCoeff());
  }
  const double c0 = spec.ellipticity_C0;
  rep.c0_verified = rep.min_eig >= c0 - 1e-12 && rep.max_eig <= 1.0 / c0 + 1e-12;
  return rep;
}

bool harnack_admissible(const PotentialSpec& spec) {
  auto ok = [](int codim, double alpha) { return alpha >= -0.5 * (codim - 2.0) - 1e-12; };
  if (spec.boundary_alpha && !ok(1, *spec.boundary_alpha)) return false;
  size_t pole_idx = 0;
  for (const auto& t : spec.terms)
    if (t.support == SingularTerm::Support::pole) {
      if (pole_idx < spec.pole_betas.size() && !ok(t.codim, spec.pole_betas[pole_idx]))
        return false;
      ++pole_idx;
    }
  for (const auto& ce : spec.catalog_exponents)
    if (!ok(ce.codim, ce.alpha)) return false;
  return true;
}

}  // namespace hardyheat
