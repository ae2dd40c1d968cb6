#include "hardyheat/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hardyheat/errors.hpp"

namespace hardyheat {

namespace {

// geometric ladder 0, h, h(1+1/rho), ... measured from one end, up to `cap`
void ladder_from(double cap, double h_min, double rho, std::vector<double>& out) {
  double pos = h_min, step = h_min;
  out.push_back(0.0);
  while (pos < cap) {
    out.push_back(pos);
    step /= rho;
    pos += step;
  }
}

std::vector<double> merge_nodes(std::vector<double> v, double lo, double hi) {
  v.push_back(lo);
  v.push_back(hi);
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  const double tol = 1e-300;
  for (double t : v) {
    t = std::clamp(t, lo, hi);
    if (out.empty() || t - out.back() > tol) out.push_back(t);
  }
  return out;
}

}  // namespace

std::vector<double> graded_ladder(double len, double h_min, double rho, int uniform_cells,
                                  bool grade_lo, bool grade_hi) {
  require(h_min > 0 && h_min < len, Errc::parameter_out_of_range, "h_min out of range");
  require(rho > 0 && rho < 1, Errc::parameter_out_of_range, "grading ratio must lie in (0,1)");
  std::vector<double> nodes;
  const double cap = 0.25 * len;
  if (grade_lo) {
    std::vector<double> lo;
    ladder_from(cap, h_min, rho, lo);
    nodes.insert(nodes.end(), lo.begin(), lo.end());
  }
  if (grade_hi) {
    std::vector<double> hi;
    ladder_from(cap, h_min, rho, hi);
    for (double t : hi) nodes.push_back(len - t);
  }
  const int nu = std::max(2, uniform_cells);
  for (int i = 0; i <= nu; ++i) nodes.push_back(len * i / nu);
  return merge_nodes(std::move(nodes), 0.0, len);
}

Mesh1D build_mesh_1d(const StratifiedDomain& dom, const PotentialSpec& spec,
                     const MeshParams& p) {
  require(dom.dimension() == 1, Errc::parameter_out_of_range, "1D mesh needs a 1D reduction");
  Mesh1D mesh;
  mesh.coord_lo = dom.lo(0);
  mesh.coord_hi = dom.hi(0);
  mesh.h_min = p.h_min;
  mesh.rho = p.rho;
  const double len = mesh.coord_hi - mesh.coord_lo;

  if (dom.shape() == ShapeKind::radial_ball) {
    const int n = dom.ambient_dimension();
    mesh.jac_exponent = n - 1.0;
    mesh.jac_scale = (n == 3) ? 4.0 * M_PI : (n == 2 ? 2.0 * M_PI : 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n));
  }

  // grade toward pieces that carry a singular term
  bool lo_singular = false, hi_singular = false;
  for (const auto& t : spec.terms) {
    if (t.support == SingularTerm::Support::codim1_boundary) {
      if (dom.shape() == ShapeKind::interval) lo_singular = hi_singular = true;
      if (dom.shape() == ShapeKind::radial_ball) hi_singular = true;  // sphere at r = R
    } else if (t.coefficient != 0.0) {
      lo_singular = true;  // origin pole in the radial reduction
    }
  }

  std::vector<double> ladder;
  const double cap = 0.25 * len;
  if (lo_singular) {
    std::vector<double> lo_nodes;
    ladder_from(cap, p.h_min, p.rho, lo_nodes);
    for (double t : lo_nodes) ladder.push_back(mesh.coord_lo + t);
    mesh.graded_pieces.push_back(0);
  }
  if (hi_singular) {
    std::vector<double> hi_nodes;
    ladder_from(cap, p.h_min, p.rho, hi_nodes);
    for (double t : hi_nodes) ladder.push_back(mesh.coord_hi - t);
    mesh.graded_pieces.push_back(1);
  }
  const int nu = std::max(2, p.uniform_cells);
  for (int i = 0; i <= nu; ++i) ladder.push_back(mesh.coord_lo + len * i / nu);
  mesh.nodes = merge_nodes(std::move(ladder), mesh.coord_lo, mesh.coord_hi);
  require(static_cast<long>(mesh.nodes.size()) <= p.node_budget, Errc::budget_exceeded,
          "mesh would exceed the node budget");
  return mesh;
}

Mesh2D build_mesh_2d(const StratifiedDomain& dom, const PotentialSpec& spec,
                     const MeshParams& p) {
  require(dom.shape() == ShapeKind::rectangle, Errc::parameter_out_of_range,
          "2D meshes are tensor-product rectangles");
  bool singular_boundary = false;
  for (const auto& t : spec.terms)
    if (t.support == SingularTerm::Support::codim1_boundary) singular_boundary = true;

  Mesh2D mesh;
  for (int axis = 0; axis < 2; ++axis) {
    Mesh1D& m = axis == 0 ? mesh.x : mesh.y;
    m.coord_lo = 0.0;
    m.coord_hi = dom.hi(axis);
    m.h_min = p.h_min;
    m.rho = p.rho;
    m.nodes = graded_ladder(dom.hi(axis), p.h_min, p.rho, p.uniform_cells, singular_boundary,
                            singular_boundary);
  }
  require(mesh.nodes() <= p.node_budget, Errc::budget_exceeded,
          "mesh would exceed the node budget");
  return mesh;
}

}  // namespace hardyheat
