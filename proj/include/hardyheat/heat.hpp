#pragma once

#include <functional>
#include <random>

#include "hardyheat/assemble.hpp"
#include "hardyheat/spectral.hpp"

namespace hardyheat {

/// Discrete heat kernel by spectral synthesis: h(t, x_i, y_j) = sum_k
/// e^{-lambda_k t} psi_k(x_i) psi_k(y_j) with unit-mass-orthonormal modes.
/// Exact semigroup/symmetry identities hold by construction; used up to a few
/// thousand interior nodes, time stepping covers the rest.
class SpectralKernel {
 public:
  explicit SpectralKernel(const DiscreteForm& form);

  const Eigen::VectorXd& eigenvalues() const { return lambda_; }
  const Eigen::MatrixXd& modes() const { return psi_; }  // full-node rows
  double lambda1() const { return lambda_(0); }
  Eigen::VectorXd phi1() const;  // max-normalized ground state

  /// Full kernel matrix at time t (row/col = node index).
  Eigen::MatrixXd kernel(double t) const;
  /// One kernel column h(t, ., y).
  Eigen::VectorXd column(double t, int y_node) const;
  /// Propagate nodal initial data: u(t) = H(t) M u0.
  Eigen::VectorXd apply(double t, const Eigen::VectorXd& u0) const;

  const DiscreteForm& form() const { return *form_; }

 private:
  const DiscreteForm* form_;
  Eigen::VectorXd lambda_;
  Eigen::MatrixXd psi_;
  SpMat mass_;
};

/// Crank-Nicolson with two half-step implicit-Euler startup sweeps.
Eigen::VectorXd propagate(const DiscreteForm& form, const Eigen::VectorXd& u0, double t,
                          int steps);

/// Kernel column by time stepping the mass-normalized nodal impulse
/// (the path used beyond the dense-synthesis size limit).
Eigen::VectorXd kernel_column_stepped(const DiscreteForm& form, int y_node, double t, int steps);

struct SandwichSample {
  double t, x, y, h, model, ratio;
};

/// Two-sided short-time certificate: fitted Gaussian rate, ratio envelope
/// [C1, C2'], long-time constants, and the crossover time.
struct KernelCertificate {
  double c_lower = 0.0;        // C1: min kernel/model ratio
  double c_upper = 0.0;        // C2': max ratio
  double gauss_rate = 0.25;    // fitted C2 in exp(-C2 |x-y|^2 / t)
  double crossover_T = 0.0;    // error-crossing time
  double longtime_T = 0.0;     // first scan time with long-model spread <= target
  double longtime_spread = 0.0;
  double longtime_level = 0.0; // limiting value of h e^{lambda1 t}/(phi phi)
  double ultracontractive_C = 0.0;
  double ultracontractive_exponent = 0.0;  // (n + 2A)/2
  std::vector<SandwichSample> samples;
};

struct SandwichGrid {
  std::vector<double> times;        // short-time scan
  std::vector<double> long_times;   // long-time scan
  int node_stride = 4;
  double max_pair_distance = 0.5;
  double kernel_floor = 1e-250;
  double noise_floor_rel = 1e-9;    // discrete-noise guard relative to max h(t)
  double longtime_target = 0.02;
};

KernelCertificate fit_sandwich(const SpectralKernel& kernel, const PotentialSpec& spec,
                               const SandwichGrid& grid, bool keep_samples = false);

/// C such that h <= C prod d^alpha(x) prod d^alpha(y) t^{-(n+2A)/2} e^{-lambda1 t}
/// over the grid.
double ultracontractive_bound(const SpectralKernel& kernel, const PotentialSpec& spec,
                              const SandwichGrid& grid);

struct HarnackResult {
  double c_h = 0.0;                   // max over the scan
  double interior_max = 0.0;
  double boundary_max = 0.0;
  std::vector<double> per_ball;
};

struct HarnackOptions {
  int n_initial = 10;
  std::uint64_t seed = 1234;
  int time_samples = 5;
  double positivity_tol = 1e-8;
};

/// sup/inf ratios of u/phi1 over the two Harnack time windows of each ball,
/// for random positive initial data evolved globally.
HarnackResult harnack_scan(const SpectralKernel& kernel,
                           const std::vector<std::pair<Point, double>>& balls,
                           const HarnackOptions& opts);

}  // namespace hardyheat
