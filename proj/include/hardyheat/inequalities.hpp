#pragma once

#include <optional>

#include "hardyheat/assemble.hpp"
#include "hardyheat/spectral.hpp"

namespace hardyheat {

/// Admissibility threshold for the exponent of a codim-k stratum:
/// alpha_k > -(k-2)/2 - (n-k)(q-2)/(2(q+2)).
double admissible_threshold(int k, int n, double q);
/// Layer trace exponent beta_k = alpha_k - 1 + (q-2) n / (2q).
double beta_exponent(int k, int n, double q, double alpha_k);
/// Entropy-inequality threshold -(k-2)/2 - (n-k)/(2(n-1)).
double log_sobolev_threshold(int k, int n);
/// Effective dimension used in the q-exponent formulas: flat reductions are
/// treated as sections of a slab, so n is never taken below 2.
int formula_dimension(const StratifiedDomain& dom);

enum class Verdict { bounded_below, degenerates_to_zero, inconclusive };
const char* verdict_name(Verdict v);

struct LevelEstimate {
  double h_min = 0.0;
  double value = 0.0;
  int nodes = 0;
  bool converged = true;
};

struct QuotientReport {
  std::string id;
  double q = 2.0;
  double lambda = 1.0;
  double lambda1 = 0.0;
  int stratum_codim = 0;
  double beta_k = 0.0;  // codim blocks
  bool excluded = false;
  std::vector<LevelEstimate> levels;
  Verdict verdict = Verdict::inconclusive;
  std::vector<double> minimizer_coords;
  std::vector<double> minimizer_values;
};

/// Level schedule for quotient estimators. Degeneration at critical exponents
/// is logarithmic in h_min, so levels are spaced geometrically in |ln h_min|.
struct QuotientLevels {
  std::vector<double> h_mins = {1.0 / (1 << 10), std::pow(2.0, -32), std::pow(2.0, -100)};
  MeshParams base;
  int minimize_iterations = 500;
  int restarts = 5;
  std::uint64_t seed = 99;
};

/// Verdict from per-level infimum estimates: BoundedBelow when the last level
/// retains >= 0.9 of the previous one, DegeneratesToZero when the estimates
/// decrease by >= 15% per level all the way down.
Verdict classify_levels(const std::vector<LevelEstimate>& levels);

QuotientReport sobolev_quotient(const StratifiedDomain& dom, const PotentialSpec& spec,
                                double q, double lambda, const QuotientLevels& levels,
                                bool log_corrected = false);

inline QuotientReport log_corrected_quotient(const StratifiedDomain& dom,
                                             const PotentialSpec& spec, double q,
                                             double lambda, const QuotientLevels& levels) {
  return sobolev_quotient(dom, spec, q, lambda, levels, true);
}

/// q = 2 critical quotient: numerator form over the X^2 u^2 / d^2 mass
/// (generalized eigenvalue, exact discrete minimum). `with_x = false` runs the
/// control with the plain u^2/d^2 denominator.
QuotientReport critical_hardy_log(const StratifiedDomain& dom, const PotentialSpec& spec,
                                  double lambda, const QuotientLevels& levels,
                                  bool with_x = true);

/// Layer quotient of a single codimension-k stratum. At the critical exponent
/// of a point stratum the denominator picks up the X^{1/2+1/q} factor; at the
/// excluded exponent the report is returned unminimized.
QuotientReport codim_block(const StratifiedDomain& dom, int k, double q, double alpha_k,
                           double delta, const QuotientLevels& levels);

struct LogSobolevScan {
  double k_hat = 0.0;
  double slope = 0.0;           // fitted d C(eps) / d ln(eps), small-eps range
  double slope_target = 0.0;    // -(n + 2A)/4
  std::vector<double> eps;
  std::vector<double> c_of_eps;
  bool finite = true;
};

LogSobolevScan weighted_log_sobolev(const DiscreteForm& plain, const GroundState& gs,
                                    const PotentialSpec& spec, const std::vector<double>& eps,
                                    int n_random, std::uint64_t seed);

struct PoincareScan {
  double worst_c_p = 0.0;
  double best_c_p = 0.0;
  std::vector<double> per_ball;
};

PoincareScan local_poincare(const StratifiedDomain& dom, const std::vector<double>& alphas,
                            const std::vector<Point>& centers, const std::vector<double>& radii,
                            const MeshParams& params);

struct MoserScan {
  double worst_c_m = 0.0;
  std::vector<double> per_sample;
};

MoserScan local_moser(const StratifiedDomain& dom, const std::vector<double>& alphas, double nu,
                      const std::vector<Point>& centers, const std::vector<double>& radii);

}  // namespace hardyheat
