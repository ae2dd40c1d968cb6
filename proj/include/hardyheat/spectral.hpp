#pragma once

#include <optional>

#include "hardyheat/assemble.hpp"

namespace hardyheat {

struct ExponentFit {
  int piece = -1;
  std::string piece_label;
  double alpha_hat = 0.0;
  double r_lo = 0.0, r_hi = 0.0;
  double r_squared = 0.0;
  int samples = 0;
  double two_sided_spread = 0.0;  // max/min of phi / prod d^alpha over the window
};

struct GroundState {
  double lambda1 = 0.0;
  Eigen::VectorXd phi;  // full nodes, positive interior, max-normalized
  double residual = 0.0;
  int iterations = 0;
  std::vector<ExponentFit> fits;
};

struct SolveOptions {
  double tol = 1e-10;
  int max_iterations = 400;
  std::optional<double> shift;  // must sit below lambda1; estimated when absent
  bool dense = false;           // dense eigensolver (the small-problem oracle path)
};

/// Smallest eigenpair of (stiffness - potential, unit mass) on the interior
/// nodes. Shift-invert iteration with a reused factorization; the shift is
/// validated by matrix inertia so the iteration cannot lock onto a higher mode.
GroundState solve_ground_state(const DiscreteForm& form, const SolveOptions& opts = {});

/// All eigenpairs by dense decomposition (problems up to a few thousand nodes).
/// Columns of `vectors` are unit-mass-orthonormal, full-node layout.
struct DenseSpectrum {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};
DenseSpectrum solve_dense_spectrum(const DiscreteForm& form);

struct FitWindow {
  double lo = 0.0;
  double hi = 0.0;
};

/// Least-squares slope of log phi against log d_piece along a transversal ray,
/// other pieces' distance factors divided out (two fixed-point passes).
std::vector<ExponentFit> fit_exponents(const GroundState& gs, const DiscreteForm& form,
                                       const PotentialSpec& spec,
                                       std::optional<FitWindow> window = {});

/// Max over samples of the ground-state-transform defect
/// |Q[u] - lambda1 ||u||^2 - int phi1^2 |grad(u/phi1)|^2| / (|Q[u]| + ||u||^2).
double ground_state_identity(const DiscreteForm& plain, const GroundState& gs,
                             const std::vector<Eigen::VectorXd>& u_samples);

/// Richardson extrapolation for an h^2-convergent sequence at mesh ratio 2.
inline double richardson2(double coarse, double fine) { return fine + (fine - coarse) / 3.0; }

struct LayerEigen {
  double delta = 0.0;
  double mu1 = 0.0;
  double refined_hardy_quotient = 0.0;  // numerator form over the X^2/d-weighted norm
};

/// Boundary-layer eigenvalues mu_1(Omega_delta) of the d-weighted form
/// (weight d, drift potential (Delta d)/2) for a decreasing delta list.
std::vector<LayerEigen> boundary_layer_mu1(const StratifiedDomain& dom,
                                           const std::vector<double>& deltas,
                                           const MeshParams& params);

}  // namespace hardyheat
