#include <doctest.h>

#include <cmath>
#include <fstream>

#include "hardyheat/assemble.hpp"
#include "hardyheat/errors.hpp"
#include "hardyheat/mesh.hpp"
#include "hardyheat/spectral.hpp"

using namespace hardyheat;

namespace {

PotentialSpec zero_spec(int n) {
  PotentialSpec s;
  s.id = "zero";
  s.ambient_n = n;
  s.boundary_alpha = 1.0;
  return s;
}

}  // namespace

TEST_CASE("graded meshes: layer counts and budget") {
  auto iv = std::make_shared<StratifiedDomain>(StratifiedDomain::interval(0.0, 1.0));
  auto spec = example_III(*iv);
  MeshParams p;
  p.h_min = std::pow(2.0, -20);
  p.uniform_cells = 16;
  Mesh1D mesh = build_mesh_1d(*iv, spec, p);
  // geometric layers from both ends plus the uniform middle
  CHECK(mesh.nodes.size() <= 2 * 20 + 16 + 3);
  CHECK(mesh.nodes.front() == 0.0);
  CHECK(mesh.nodes.back() == 1.0);
  CHECK(mesh.nodes[1] == doctest::Approx(p.h_min));
  for (size_t i = 1; i < mesh.nodes.size(); ++i) CHECK(mesh.nodes[i] > mesh.nodes[i - 1]);

  // halving h_min adds exactly one layer per graded end at rho = 1/2
  MeshParams p2 = p;
  p2.h_min = 0.5 * p.h_min;
  Mesh1D mesh2 = build_mesh_1d(*iv, spec, p2);
  CHECK(mesh2.nodes.size() == mesh.nodes.size() + 2);

  MeshParams tiny = p;
  tiny.node_budget = 10;
  CHECK_THROWS_AS(build_mesh_1d(*iv, spec, tiny), Error);  // BudgetExceeded
}

TEST_CASE("radial reduction carries the sphere jacobian") {
  auto ball = std::make_shared<StratifiedDomain>(StratifiedDomain::radial_ball(1.0, 3, true));
  auto spec = example_I(3, {{{0.0}, 0.25}});
  MeshParams p;
  p.h_min = 1.0 / (1 << 12);
  Mesh1D mesh = build_mesh_1d(*ball, spec, p);
  CHECK(mesh.jac_exponent == doctest::Approx(2.0));
  CHECK(mesh.jacobian(0.5) == doctest::Approx(4.0 * M_PI * 0.25));
  CHECK(mesh.nodes.front() == 0.0);  // origin node present, Dirichlet-masked when plain
}

TEST_CASE("classical stiffness on a uniform mesh") {
  auto iv = std::make_shared<StratifiedDomain>(StratifiedDomain::interval(0.0, 1.0));
  auto spec = zero_spec(1);
  MeshParams p;
  p.h_min = 1.0 / 64;
  p.uniform_cells = 64;
  auto mesh = std::make_shared<Mesh1D>(build_mesh_1d(*iv, spec, p));
  DiscreteForm form = assemble(iv, mesh, spec, AssembleOptions{});
  const int n = form.n_nodes();
  CHECK(n == 65);
  // tridiagonal 1/h [2, -1] pattern
  const double h = 1.0 / 64;
  CHECK(form.stiffness.coeff(5, 5) == doctest::Approx(2.0 / h));
  CHECK(form.stiffness.coeff(5, 6) == doctest::Approx(-1.0 / h));
  CHECK(form.unit_mass().coeff(5, 5) == doctest::Approx(4.0 * h / 6.0));
  CHECK(form.dirichlet[0] == 1);
  CHECK(form.dirichlet[n - 1] == 1);
  // smallest eigenvalue approaches pi^2
  GroundState gs = solve_ground_state(form);
  CHECK(gs.lambda1 == doctest::Approx(M_PI * M_PI).epsilon(1e-4));
}

TEST_CASE("assembled matrices are symmetric and deterministic") {
  auto iv = std::make_shared<StratifiedDomain>(StratifiedDomain::interval(0.0, 1.0));
  auto spec = example_III(*iv);
  MeshParams p;
  p.h_min = 1.0 / (1 << 14);
  p.uniform_cells = 32;
  auto mesh = std::make_shared<Mesh1D>(build_mesh_1d(*iv, spec, p));
  AssembleOptions opts;
  opts.lifted = true;
  DiscreteForm a = assemble(iv, mesh, spec, opts);
  DiscreteForm b = assemble(iv, mesh, spec, opts);
  SpMat sym = SpMat(a.stiffness.transpose()) - a.stiffness;
  CHECK(sym.coeffs().cwiseAbs().maxCoeff() == 0.0);
  SpMat diff = a.potential - b.potential;
  CHECK(diff.coeffs().cwiseAbs().maxCoeff() == 0.0);  // bit-identical reassembly
}

TEST_CASE("weighted mass matches the exact integral for w = d") {
  auto iv = std::make_shared<StratifiedDomain>(StratifiedDomain::interval(0.0, 1.0));
  auto spec = zero_spec(1);
  MeshParams p;
  p.h_min = 1.0 / 128;
  p.uniform_cells = 128;
  auto mesh = std::make_shared<Mesh1D>(build_mesh_1d(*iv, spec, p));
  AssembleOptions opts;
  WeightSpec w;
  w.kind = WeightSpec::Kind::global_power_x;
  w.name = "d";
  w.s = 1.0;
  opts.weights = {w};
  DiscreteForm form = assemble(iv, mesh, spec, opts);
  // u = 1 - x nodal; int min(x,1-x) (1-x)^2 dx = 11/96 exactly
  Eigen::VectorXd u(form.n_nodes());
  for (int i = 0; i < form.n_nodes(); ++i) u[i] = 1.0 - form.node_coords[i][0];
  const double got = u.dot(form.mass.at("d") * u);
  CHECK(got == doctest::Approx(11.0 / 96.0).epsilon(1e-10));
}

TEST_CASE("galerkin consistency: quadratic convergence of the form value") {
  auto iv = std::make_shared<StratifiedDomain>(StratifiedDomain::interval(0.0, 1.0));
  auto spec = example_III(*iv);
  // smooth u supported away from the boundary
  auto exact_u = [](double x) {
    const double z = (x - 0.5) / 0.2;
    return std::abs(z) >= 1.0 ? 0.0 : std::exp(-1.0 / (1.0 - z * z));
  };
  double prev_err = 0.0;
  double q_ref = 0.0;
  {
    MeshParams pf;
    pf.h_min = 1.0 / 512;
    pf.uniform_cells = 4096;
    auto mesh = std::make_shared<Mesh1D>(build_mesh_1d(*iv, spec, pf));
    DiscreteForm f = assemble(iv, mesh, spec, AssembleOptions{});
    Eigen::VectorXd u(f.n_nodes());
    for (int i = 0; i < f.n_nodes(); ++i) u[i] = exact_u(f.node_coords[i][0]);
    q_ref = u.dot((f.stiffness - f.potential) * u);
  }
  std::vector<double> errs;
  for (int cells : {128, 256, 512}) {
    MeshParams pc;
    pc.h_min = 1.0 / cells;
    pc.uniform_cells = cells;
    auto mesh = std::make_shared<Mesh1D>(build_mesh_1d(*iv, spec, pc));
    DiscreteForm f = assemble(iv, mesh, spec, AssembleOptions{});
    Eigen::VectorXd u(f.n_nodes());
    for (int i = 0; i < f.n_nodes(); ++i) u[i] = exact_u(f.node_coords[i][0]);
    errs.push_back(std::abs(u.dot((f.stiffness - f.potential) * u) - q_ref));
  }
  CHECK(errs[1] < 0.35 * errs[0]);
  CHECK(errs[2] < 0.35 * errs[1]);
  (void)prev_err;
}

TEST_CASE("lifted interval form: free walls and positive mass") {
  auto iv = std::make_shared<StratifiedDomain>(StratifiedDomain::interval(0.0, 1.0));
  auto spec = example_III(*iv);
  MeshParams p;
  p.h_min = 1.0 / (1 << 12);
  auto mesh = std::make_shared<Mesh1D>(build_mesh_1d(*iv, spec, p));
  AssembleOptions opts;
  opts.lifted = true;
  DiscreteForm form = assemble(iv, mesh, spec, opts);
  CHECK(form.lift.terms.size() == 2);
  CHECK(form.lift.terms[0].gamma == doctest::Approx(0.5));
  CHECK(form.dirichlet[0] == 0);  // capacity-zero wall: the node stays free
  CHECK(form.dirichlet[form.n_nodes() - 1] == 0);
  for (int i = 0; i < form.n_nodes(); ++i) CHECK(form.unit_mass().coeff(i, i) > 0.0);
  // the lifted potential stays bounded: residual cancellation is analytic
  for (int i = 0; i < form.n_nodes(); ++i)
    CHECK(std::abs(form.potential.coeff(i, i)) <
          10.0 * form.unit_mass().coeff(i, i) / std::max(form.node_coords[i][0], 1e-6) + 10.0);
}

TEST_CASE("matrix dump roundtrip") {
  auto iv = std::make_shared<StratifiedDomain>(StratifiedDomain::interval(0.0, 1.0));
  auto spec = zero_spec(1);
  MeshParams p;
  p.h_min = 0.25;
  p.uniform_cells = 4;
  auto mesh = std::make_shared<Mesh1D>(build_mesh_1d(*iv, spec, p));
  DiscreteForm form = assemble(iv, mesh, spec, AssembleOptions{});
  dump_matrix_coo(form.stiffness, "/tmp/hh_dump_test.txt");
  std::ifstream in("/tmp/hh_dump_test.txt");
  int r, c;
  double v;
  int count = 0;
  while (in >> r >> c >> v) ++count;
  CHECK(count == form.stiffness.nonZeros());
}
