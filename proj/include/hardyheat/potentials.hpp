#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hardyheat/geometry.hpp"

namespace hardyheat {

enum class CoeffKind { identity, scaled_identity, offdiagonal_radial };

/// Symmetric uniformly elliptic coefficient matrix a_ij(x).
/// `offdiagonal_radial` is delta_ij + (1/2)|x|^{2-a}(1-delta_ij).
struct CoeffField {
  CoeffKind kind = CoeffKind::identity;
  double scale = 1.0;
  double a = 0.0;
  int n = 1;

  Eigen::MatrixXd matrix(const std::vector<double>& ambient_x) const;
  /// True when the field acts as a scalar on radially symmetric functions.
  bool radial_scalar() const { return kind != CoeffKind::offdiagonal_radial; }
  double scalar() const { return kind == CoeffKind::scaled_identity ? scale : 1.0; }
};

enum class Lambda1Hint { positive, finite_unknown };

/// One inverse-square singular term, c / dist(x, support)^2.
struct SingularTerm {
  enum class Support { codim1_boundary, pole } support = Support::codim1_boundary;
  Point location;          // poles only (computational coordinates)
  double coefficient = 0.0;
  int codim = 1;           // codim of the carrying stratum
};

/// Catalog-only exponent records (strata the artifact does not mesh).
struct CatalogExponent {
  int codim = 1;
  double alpha = 0.0;
  std::string note;
};

struct EllipticityReport {
  double min_eig = 0.0;
  double max_eig = 0.0;
  bool c0_verified = false;
};

/// A coefficient field plus a singular potential with predicted ground-state
/// exponents. Values are evaluated lazily at quadrature points; there is no
/// cutoff or regularization of the singularity.
struct PotentialSpec {
  std::string id;
  int ambient_n = 1;
  CoeffField coeff;
  double ellipticity_C0 = 1.0;
  std::vector<SingularTerm> terms;
  std::vector<double> pole_betas;          // predicted exponent per pole term
  std::optional<double> boundary_alpha;    // predicted exponent at the codim-1 boundary
  std::vector<CatalogExponent> catalog_exponents;
  Lambda1Hint hint = Lambda1Hint::positive;
  bool critical = false;   // some coefficient sits at its Hardy endpoint
  bool meshable = true;

  double value(const StratifiedDomain& dom, const Point& x) const;

  /// Hardy constant of a codim-k singularity: ((k-2)/2)^2, i.e. 1/4 for k=1.
  static double hardy_constant(int codim, int ambient_n);
  /// Principal indicial exponent for coefficient c on a codim-k singularity:
  /// gamma = ((2-k) + sqrt((k-2)^2 - 4c)) / 2 with k = ambient_n for poles.
  static double lift_exponent(int codim, int ambient_n, double c);
};

struct Pole {
  Point location;
  double c = 0.0;
};

PotentialSpec example_I(int n, const std::vector<Pole>& poles);
PotentialSpec example_II_catalog(int n);
PotentialSpec example_III(const StratifiedDomain& dom);
PotentialSpec example_IV(const StratifiedDomain& dom_with_puncture);
PotentialSpec example_V(double a, int n);

/// Pointwise sum of two potentials with disjoint singular supports.
PotentialSpec sum_spec(const PotentialSpec& p1, const PotentialSpec& p2,
                       const StratifiedDomain& dom);

EllipticityReport check_ellipticity(const PotentialSpec& spec,
                                    const std::vector<std::vector<double>>& ambient_samples);

/// Harnack admissibility alpha_k >= -(k-2)/2 for every predicted exponent.
bool harnack_admissible(const PotentialSpec& spec);

}  // namespace hardyheat
