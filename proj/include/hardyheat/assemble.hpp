#pragma once

#include <Eigen/Sparse>
#include <map>
#include <memory>
#include <string>

#include "hardyheat/mesh.hpp"
#include "hardyheat/potentials.hpp"

namespace hardyheat {

using SpMat = Eigen::SparseMatrix<double>;

/// Ground-state lift m(x) = prod_i dist(x, piece_i)^{gamma_i}: the substitution
/// u = m w removes the inverse-square parts of the potential exactly (gamma_i
/// is the principal indicial root of the piece's coefficient), leaving a
/// variational problem for w in the m^2-weighted forms.
struct LiftField {
  struct Term {
    int piece = -1;
    double gamma = 0.0;
    double coefficient = 0.0;  // inverse-square coefficient removed by this term
    bool folded = false;       // Delta d = kappa/d exactly (origin of a radial reduction)
    double kappa = 0.0;
  };
  std::vector<Term> terms;
  bool trivial() const { return terms.empty(); }
  int term_for_piece(int piece) const {
    for (size_t i = 0; i < terms.size(); ++i)
      if (terms[i].piece == piece) return static_cast<int>(i);
    return -1;
  }
};

LiftField derive_lift(const StratifiedDomain& dom, const PotentialSpec& spec);

struct WeightSpec {
  enum class Kind { unit, dist_powers, global_power_x, nodal_squared };
  Kind kind = Kind::unit;
  std::string name = "unit";
  std::vector<double> alphas;  // dist_powers: weight prod_k d_k^{2 alpha_k}
  double s = 0.0;              // global_power_x: d^s X(d/D)^p
  double p = 0.0;
  Eigen::VectorXd nodal;       // nodal_squared
};

/// X(t) = (1 - ln t)^{-1} on (0, 1].
inline double x_weight(double t) { return 1.0 / (1.0 - std::log(t)); }

/// sup of the global distance function over the domain (the D in X(d/D)).
double sup_distance(const StratifiedDomain& dom);

struct AssembleOptions {
  bool lifted = false;
  int quad_order = 10;
  std::vector<WeightSpec> weights;  // masses assembled besides "unit"
};

/// Assembled piecewise-linear forms over a mesh. Matrices are full symmetric;
/// `dirichlet` marks eliminated rows/columns for the reduced pencil.
struct DiscreteForm {
  std::shared_ptr<const StratifiedDomain> dom;
  std::shared_ptr<const Mesh1D> mesh1;
  std::shared_ptr<const Mesh2D> mesh2;
  SpMat stiffness;
  SpMat potential;
  std::map<std::string, SpMat> mass;
  std::vector<Point> node_coords;
  Eigen::VectorXd lift_m;
  std::vector<uint8_t> dirichlet;
  LiftField lift;
  int quad_order = 10;

  int n_nodes() const { return static_cast<int>(node_coords.size()); }
  std::vector<int> interior() const;
  Eigen::VectorXd reduce(const Eigen::VectorXd& full) const;
  Eigen::VectorXd expand(const Eigen::VectorXd& red) const;
  SpMat reduced(const SpMat& full) const;
  const SpMat& unit_mass() const { return mass.at("unit"); }
};

DiscreteForm assemble(std::shared_ptr<const StratifiedDomain> dom,
                      std::shared_ptr<const Mesh1D> mesh, const PotentialSpec& spec,
                      const AssembleOptions& opts);
DiscreteForm assemble(std::shared_ptr<const StratifiedDomain> dom,
                      std::shared_ptr<const Mesh2D> mesh, const PotentialSpec& spec,
                      const AssembleOptions& opts);

/// Extra mass with the given weight against the form's lift/jacobian measure.
SpMat assemble_mass(const DiscreteForm& form, const WeightSpec& w);
/// Stiffness weighted by the square of a P1 nodal field (the phi_1^2 form of
/// the ground-state identity).
SpMat assemble_stiffness_nodal2(const DiscreteForm& form, const Eigen::VectorXd& nodal);

void dump_matrix_coo(const SpMat& m, const std::string& path);

}  // namespace hardyheat
