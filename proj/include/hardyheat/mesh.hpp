#pragma once

#include <memory>
#include <vector>

#include "hardyheat/geometry.hpp"
#include "hardyheat/potentials.hpp"

namespace hardyheat {

struct MeshParams {
  double h_min = 1.0 / (1 << 12);
  double rho = 0.5;          // geometric grading ratio
  int uniform_cells = 64;    // resolution of the quasi-uniform middle, per unit length
  long node_budget = 400000;
};

/// 1D mesh: flat interval coordinate or the radial coordinate of a reduction.
/// The volume element is jac_scale * t^jac_exponent dt.
struct Mesh1D {
  std::vector<double> nodes;
  double coord_lo = 0.0;
  double coord_hi = 1.0;
  double jac_exponent = 0.0;
  double jac_scale = 1.0;
  double h_min = 0.0;
  double rho = 0.5;
  std::vector<int> graded_pieces;

  int cells() const { return static_cast<int>(nodes.size()) - 1; }
  double jacobian(double t) const {
    return jac_exponent == 0.0 ? jac_scale : jac_scale * std::pow(t, jac_exponent);
  }
};

struct Mesh2D {
  Mesh1D x;
  Mesh1D y;
  long nodes() const { return static_cast<long>(x.nodes.size()) * y.nodes.size(); }
};

/// Builds the computational mesh for a domain/potential pair: geometric layers
/// of ratio rho toward every piece carrying a singular term (or every graded
/// piece passed explicitly), glued to a quasi-uniform middle.
Mesh1D build_mesh_1d(const StratifiedDomain& dom, const PotentialSpec& spec,
                     const MeshParams& params);
Mesh2D build_mesh_2d(const StratifiedDomain& dom, const PotentialSpec& spec,
                     const MeshParams& params);

/// Graded 1D node ladder on [0, len] with layers toward 0 (utility for layer
/// problems and quotient level schedules).
std::vector<double> graded_ladder(double len, double h_min, double rho, int uniform_cells,
                                  bool grade_lo, bool grade_hi);

}  // namespace hardyheat
