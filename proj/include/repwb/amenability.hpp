#pragma once

#include <optional>
#include <string>
#include <vector>

#include "repwb/group.hpp"
#include "repwb/kernels.hpp"
#include "repwb/vector.hpp"

namespace repwb {

struct ReturnProbabilityOptions {
  int exact_steps = 40;                    // exact rationals for 2n <= exact_steps
  std::size_t support_cap = kDefaultElementCap;
  bool force_convolution = false;          // skip the radial shortcut for free groups
};

// p[n] = p_{2n}(e) for n = 0..n_max.
struct ReturnProbabilityTable {
  int n_max = 0;
  std::string method;              // "radial" or "convolution"
  std::vector<double> p;
  std::vector<std::string> exact;  // reduced fractions for 2n <= exact_steps
  std::vector<double> root;        // root[n] = p_{2n}^{1/(2n)}, root[0] = 1
  std::vector<double> ratio;       // ratio[n] = sqrt(p_{2n} / p_{2n-2}), ratio[0] = 1
  std::size_t max_support = 0;
};

ReturnProbabilityTable return_probabilities(const GroupOracle& oracle, int n_max,
                                            const ReturnProbabilityOptions& options = {});

struct EigenOptions {
  double tol = 1e-9;
  std::size_t max_iterations = 2000000;
  std::size_t cap = kDefaultElementCap;
};

// Markov operator M = (1/m) sum_s lambda(s) compressed to l2(B_r); row x lists
// the ball indices of s x.
kernels::NeighborTable ball_markov_table(const GroupOracle& oracle, const Ball& b);

struct TopEigen {
  double value = 0.0;  // Rayleigh quotient of `vector`
  std::vector<double> vector;
  double residual = 0.0;
  std::size_t iterations = 0;
};

// Largest eigenvalue of the compressed Markov operator by power iteration on
// (M + I)/2 from the constant vector. Throws ConvergenceError.
TopEigen top_eigenpair(const kernels::NeighborTable& table, const EigenOptions& options = {});

struct SchurBound {
  double value = 1.0;  // rounded outward; 1 when not certified
  double raw = 1.0;
  double alpha = 0.0;
  bool certified = false;
};

// Upper bound on the spectral radius by the Schur test with f(x) = exp(-alpha |x|).
// Certified for free groups on their standard letters (r >= 2) and for finite
// groups whose ball B_{r-1} is the whole group.
SchurBound schur_upper_bound(const GroupOracle& oracle, int radius, std::size_t cap = kDefaultElementCap);

struct DefectReport {
  int radius = 0;
  double min_avg_sq_defect = 0.0;  // 2 - 2 * lambda_max
  SparseVector argmin;             // unit vector on B_r
  double residual = 0.0;
  std::size_t iterations = 0;
  std::size_t ball_size = 0;
  bool certified_lower_bound_used = false;
  double certified_lower_bound = 0.0;  // 2 - 2 * (Schur bound) when certified
};

DefectReport min_defect(const GroupOracle& oracle, int radius, const EigenOptions& options = {});

struct SpectralBound {
  int radius = 0;
  int n_max = 0;
  double ball_eigenvalue = 0.0;  // lower bound
  double ratio_lower = 0.0;      // max_n sqrt(p_{2n}/p_{2n-2})
  double root_lower = 0.0;       // max_n p_{2n}^{1/(2n)}
  double lower = 0.0;
  double upper = 1.0;
  bool upper_certified = false;
  double schur_alpha = 0.0;
  double width() const { return upper - lower; }
};

SpectralBound spectral_radius_bound(const GroupOracle& oracle, int radius, int n_max,
                                    const EigenOptions& options = {}, const ReturnProbabilityOptions& rp = {});

}  // namespace repwb
