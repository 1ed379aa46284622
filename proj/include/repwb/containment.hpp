#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "repwb/representation.hpp"

namespace repwb {

// M[k](i, j) = <rep(F[k]) v_i, v_j>.
struct GramFunction {
  std::vector<Element> F;
  std::size_t n = 0;
  std::vector<Eigen::MatrixXcd> M;
};

GramFunction gram(const Representation& rep, std::span<const SparseVector> vectors, std::span<const Element> F);

// Max-abs entrywise deviation of two Gram functions over the same F and n.
double discrepancy(const GramFunction& target, const GramFunction& other);
double discrepancy(const GramFunction& target, const Representation& rep, std::span<const SparseVector> witnesses);

struct WitnessReport {
  std::vector<SparseVector> witnesses;
  double discrepancy = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> restart_discrepancies;
  std::size_t best_restart = 0;
};

struct SearchOptions {
  double tol = 1e-6;
  std::size_t budget = 2000;  // gradient steps per restart
  std::uint64_t seed = 0;
  std::size_t restarts = 8;
  // Extra starting points, each a list of n vectors projected onto the basis;
  // they run after the random restarts.
  std::vector<std::vector<SparseVector>> warm_starts;
};

// Least-squares search for witnesses in span(basis). The basis must be
// orthonormal in pi's space.
WitnessReport search_witness(const GramFunction& target, const Representation& pi, const Subspace& basis,
                             const SearchOptions& options);

// delta-vectors on B_r in every regular leaf of rep (the first `copies` copies
// of an infinite multiple) plus all coordinates of finite-dimensional leaves.
Subspace ball_basis(const Representation& rep, int radius, std::size_t copies = 1,
                    std::size_t cap = kDefaultElementCap);

struct FolnerWitness {
  SparseVector vector;         // chi_Phi / sqrt|Phi| in l2(G)
  std::int64_t box_side = 0;   // N; 0 for a finite group (Phi = G)
  std::size_t set_size = 0;    // |Phi|
  std::vector<double> defects; // exact ||lambda(g) w - w||^2 per g in F
  double total_defect = 0.0;
};

// Box Phi = [0,N)^d x torsion part with the smallest N such that
// sum_{g in F} ||lambda(g)w - w||^2 <= eps, counted exactly.
FolnerWitness folner_witness(const GroupOracle& oracle, std::span<const Element> F, double eps,
                             std::size_t cap = kDefaultElementCap);

struct TransferInput {
  Representation eta;    // pi + multiple(regular, infinity)
  Representation sigma;  // complement; the extension is direct_sum({eta, sigma})
  std::vector<SparseVector> params;   // in eta
  std::vector<SparseVector> targets;  // in the extension
  std::vector<Element> F;
  double eps = 0.05;
  std::size_t copy_cap = 4096;
  std::size_t element_cap = kDefaultElementCap;
};

struct TransferReport {
  WitnessReport report;               // witnesses = params followed by v_i'
  GramFunction target;                // Gram function of params + targets in the extension
  std::size_t supported_copies = 0;   // copies touched by params and eta-parts of targets
  std::vector<std::size_t> fresh_copies;
  std::optional<FolnerWitness> folner;
};

TransferReport transfer_witness(const TransferInput& input);

}  // namespace repwb
