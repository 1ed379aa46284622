#pragma once

#include <span>
#include <vector>

#include "repwb/representation.hpp"

namespace repwb {

inline constexpr std::size_t kDefaultDimensionCap = 100000;
inline constexpr double kDefaultOrthogonalityTol = 1e-6;

// Truncated G-closure: span{pi(g) a : g in B_r, a in A}. The realized basis is
// built in orbit order (ball order, then A), so its first dim_by_radius[k]
// vectors span the closure at radius k.
struct ClosureSpec {
  std::vector<SparseVector> generators;
  int radius = 0;
  Subspace realized;
  std::vector<std::size_t> dim_by_radius;
  // trace[p][k] = ||P_{C_k} probe_p|| for k = 0..radius
  std::vector<std::vector<double>> trace;

  Subspace at_radius(int k) const;
};

// Orbit vectors pi(g) a in enumeration order (g-major over B_r).
struct Orbit {
  std::vector<Element> g;
  std::vector<std::size_t> a;
  std::vector<SparseVector> vectors;
};

Orbit orbit(const Representation& pi, std::span<const SparseVector> A, int radius,
            std::size_t cap = kDefaultElementCap);

ClosureSpec closure(const Representation& pi, std::span<const SparseVector> A, int radius,
                    std::span<const SparseVector> probes = {}, std::size_t dim_cap = kDefaultDimensionCap,
                    std::size_t element_cap = kDefaultElementCap);

// Treats an explicit subspace as the closure data (orbit ball of radius r for
// the independence test). Used for C_0 and for canonical bases.
ClosureSpec span_closure(Subspace c, int radius);

struct IndependenceVerdict {
  bool independent = true;
  double tolerance = kDefaultOrthogonalityTol;
  // worst pair: |<pi(g) a_i - P pi(g) a_i, pi(h) b - P pi(h) b>|
  std::size_t i = 0;
  std::size_t b = 0;
  Element g;
  Element h;
  cplx value{};
  SparseVector residual_a;
  SparseVector residual_b;
};

IndependenceVerdict nondividing(const Representation& pi, std::span<const SparseVector> a_vec,
                                std::span<const SparseVector> B, const ClosureSpec& C,
                                double tol = kDefaultOrthogonalityTol);

// Orthonormal spanning set of {P_C pi(g) a_i : g in B_r}.
std::vector<SparseVector> canonical_base(const Representation& pi, std::span<const SparseVector> a_vec,
                                         const ClosureSpec& C);

struct SuperstableResult {
  ClosureSpec closure;
  Orbit orbit;
  std::vector<std::size_t> selected;  // indices into orbit
  Subspace c0;
  std::vector<SparseVector> b_vec;
  std::vector<double> gaps;           // ||P_C a_i - P_{C_0} a_i||
};

// Greedy largest-gain selection of orbit vectors until every gap is < eps.
SuperstableResult superstable_approx(const Representation& pi, std::span<const SparseVector> a_vec,
                                     std::span<const SparseVector> A, double eps, int radius,
                                     std::size_t dim_cap = kDefaultDimensionCap,
                                     std::size_t element_cap = kDefaultElementCap);

}  // namespace repwb
