#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "repwb/group.hpp"
#include "repwb/vector.hpp"

namespace repwb {

enum class RepKind { regular, trivial, matrix, direct_sum, multiple };

inline constexpr double kUnitarityTol = 1e-10;
inline constexpr double kRelationTol = 1e-8;

// Unitary representation of the oracle's group, described as a tree of
// regular / trivial / matrix leaves joined by direct sums and multiples.
// Immutable value type; copies share the description.
class Representation {
 public:
  static Representation regular(OraclePtr oracle);
  static Representation trivial(OraclePtr oracle, std::size_t dim);
  // One unitary matrix per generator of S. Relations are extra words over S
  // that must evaluate to the identity; the relations implied by the oracle
  // (table products, commutators and torsion, rewriting rules) are checked too.
  static Representation matrix(OraclePtr oracle, std::vector<Eigen::MatrixXcd> generators,
                               std::vector<Word> relations = {});
  static Representation direct_sum(std::vector<Representation> parts);
  // copies == nullopt means countably many copies (materialised lazily).
  static Representation multiple(Representation base, std::optional<std::size_t> copies);

  RepKind kind() const;
  const OraclePtr& oracle() const;
  const GroupOracle& group() const { return *oracle(); }

  // trivial / matrix leaves
  std::size_t leaf_dim() const;
  const std::vector<Eigen::MatrixXcd>& generator_matrices() const;
  const std::vector<Word>& relations() const;
  // direct sum
  const std::vector<Representation>& parts() const;
  // multiple
  const Representation& base() const;
  std::optional<std::size_t> copies() const;

  // Hilbert dimension when finite.
  std::optional<std::size_t> dimension() const;

  // Matrix of g for a trivial / matrix leaf.
  Eigen::MatrixXcd matrix_of(const Element& g) const;

  SparseVector apply(const Element& g, const SparseVector& v) const;

  // Throws StructuralError unless every key of v addresses this space.
  void check_member(const SparseVector& v) const;
  bool contains(const SparseVector& v) const;

  // Leaf reached by following `path` (throws StructuralError if invalid).
  Representation leaf_at(const std::vector<std::uint32_t>& path) const;

  friend bool operator==(const Representation& a, const Representation& b);

  struct Node;

 private:
  explicit Representation(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

// Orthonormal basis of a finite-dimensional subspace of a representation space.
struct Subspace {
  Representation ambient;
  std::vector<SparseVector> basis;

  std::size_t dim() const { return basis.size(); }
  // Throws PreconditionError when the basis is not orthonormal within tol.
  void check_orthonormal(double tol = kUnitarityTol) const;
};

SparseVector project(const SparseVector& v, const Subspace& c);

// Incremental modified Gram-Schmidt with one re-orthogonalisation pass.
// Vectors whose residual norm is below `drop_tol` are rejected.
class Orthonormalizer {
 public:
  explicit Orthonormalizer(double drop_tol = 1e-10) : drop_tol_(drop_tol) {}
  // Returns true if v contributed a new basis vector.
  bool add(const SparseVector& v);
  // Residual of v against the current basis (two MGS passes).
  SparseVector residual(const SparseVector& v) const;
  const std::vector<SparseVector>& basis() const { return basis_; }
  std::vector<SparseVector> take() && { return std::move(basis_); }

 private:
  double drop_tol_;
  std::vector<SparseVector> basis_;
};

// Dense coordinates of a finite-dimensional representation, basis keys in
// sorted order.
struct DenseModel {
  std::vector<BasisKey> keys;
  std::map<BasisKey, std::size_t> index;
  std::vector<Eigen::MatrixXcd> generators;

  std::size_t dim() const { return keys.size(); }
  Eigen::VectorXcd to_dense(const SparseVector& v) const;
  SparseVector from_dense(const Eigen::VectorXcd& x) const;
};

DenseModel dense_model(const Representation& rep);
// Matrix of g in the dense model (product of generator matrices along word_of).
Eigen::MatrixXcd dense_matrix_of(const DenseModel& model, const GroupOracle& oracle, const Element& g);

// Lazy allocation of copies inside a multiple(rep, infinity) summand reached by
// `prefix`. fresh() returns the lowest untouched copy index. Not thread-safe:
// keep one allocator per task.
class CopyAllocator {
 public:
  CopyAllocator(std::vector<std::uint32_t> prefix, std::size_t cap) : prefix_(std::move(prefix)), cap_(cap) {}
  void touch(const SparseVector& v);
  void touch_index(std::size_t copy) { touched_.insert(copy); }
  std::size_t fresh();
  bool touched(std::size_t copy) const { return touched_.contains(copy); }
  // One past the largest touched copy index (0 if none).
  std::size_t extent() const { return touched_.empty() ? 0 : *touched_.rbegin() + 1; }

 private:
  std::vector<std::uint32_t> prefix_;
  std::size_t cap_;
  std::set<std::size_t> touched_;
};

}  // namespace repwb
