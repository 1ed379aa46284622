#include "repwb/representation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "repwb/errors.hpp"

namespace repwb {

struct Representation::Node {
  RepKind kind = RepKind::trivial;
  OraclePtr oracle;
  std::size_t dim = 0;
  std::vector<Eigen::MatrixXcd> generators;
  std::vector<Word> relations;
  std::vector<Representation> parts;
  std::vector<Representation> base;  // holds exactly one entry for `multiple`
  std::optional<std::size_t> copies;
};

namespace {

Eigen::MatrixXcd evaluate_word(const std::vector<Eigen::MatrixXcd>& gens, std::size_t dim, const Word& word) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (auto letter : word) {
    auto k = static_cast<std::size_t>(letter < 0 ? -letter : letter);
    if (letter == 0 || k > gens.size()) throw StructuralError("relation letter outside the generating set");
    if (letter > 0) {
      m = m * gens[k - 1];
    } else {
      m = m * gens[k - 1].adjoint();
    }
  }
  return m;
}

double max_abs(const Eigen::MatrixXcd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

Representation Representation::regular(OraclePtr oracle) {
  if (!oracle) throw PreconditionError("regular representation needs a group");
  auto n = std::make_shared<Node>();
  n->kind = RepKind::regular;
  n->oracle = std::move(oracle);
  return Representation(std::move(n));
}

Representation Representation::trivial(OraclePtr oracle, std::size_t dim) {
  if (!oracle) throw PreconditionError("trivial representation needs a group");
  auto n = std::make_shared<Node>();
  n->kind = RepKind::trivial;
  n->oracle = std::move(oracle);
  n->dim = dim;
  return Representation(std::move(n));
}

Representation Representation::matrix(OraclePtr oracle, std::vector<Eigen::MatrixXcd> generators,
                                      std::vector<Word> relations) {
  if (!oracle) throw PreconditionError("matrix representation needs a group");
  const auto& g = *oracle;
  if (generators.size() != g.generators().size()) {
    throw PreconditionError("matrix representation: expected " + std::to_string(g.generators().size()) +
                            " generator matrices, got " + std::to_string(generators.size()));
  }
  std::size_t dim = 0;
  if (!generators.empty()) dim = static_cast<std::size_t>(generators.front().rows());
  for (std::size_t k = 0; k < generators.size(); ++k) {
    const auto& u = generators[k];
    if (static_cast<std::size_t>(u.rows()) != dim || static_cast<std::size_t>(u.cols()) != dim) {
      throw PreconditionError("generator matrix " + std::to_string(k) + " has the wrong shape");
    }
    auto defect = max_abs(u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols()));
    if (defect > kUnitarityTol) {
      throw PreconditionError("generator matrix " + std::to_string(k) + " is not unitary (defect " +
                              std::to_string(defect) + ")");
    }
  }
  const auto eye = Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  auto check = [&](const Eigen::MatrixXcd& lhs, const Eigen::MatrixXcd& rhs, const std::string& what) {
    auto d = max_abs(lhs - rhs);
    if (d > kRelationTol) {
      throw PreconditionError("matrix representation violates " + what + " (defect " + std::to_string(d) + ")");
    }
  };
  for (const auto& w : relations) check(evaluate_word(generators, dim, w), eye, "a supplied relation");
  switch (g.kind()) {
    case GroupKind::finite_table: {
      const auto n = g.table().size();
      for (std::size_t x = 0; x < n; ++x) {
        Element ex(GroupKind::finite_table, {static_cast<std::int64_t>(x)});
        auto mx = evaluate_word(generators, dim, g.word_of(ex));
        for (std::size_t k = 0; k < generators.size(); ++k) {
          auto y = g.multiply(ex, g.generators()[k]);
          check(mx * generators[k], evaluate_word(generators, dim, g.word_of(y)), "the multiplication table");
        }
      }
      break;
    }
    case GroupKind::fg_abelian: {
      if (!g.standard_generators()) {
        throw UnsupportedError("matrix representations of abelian groups need the standard generators");
      }
      for (std::size_t i = 0; i < generators.size(); ++i) {
        for (std::size_t j = i + 1; j < generators.size(); ++j) {
          check(generators[i] * generators[j], generators[j] * generators[i], "commutativity");
        }
        if (auto t = g.torsion()[i]; t != 0) {
          check(evaluate_word(generators, dim, Word(static_cast<std::size_t>(t), static_cast<std::int64_t>(i + 1))),
                eye, "a torsion relation");
        }
      }
      break;
    }
    case GroupKind::rewriting:
      for (const auto& r : g.rules()) {
        check(evaluate_word(generators, dim, r.lhs), evaluate_word(generators, dim, r.rhs), "a rewriting rule");
      }
      break;
    case GroupKind::free:
    case GroupKind::coordinate: break;
  }
  auto n = std::make_shared<Node>();
  n->kind = RepKind::matrix;
  n->oracle = std::move(oracle);
  n->dim = dim;
  n->generators = std::move(generators);
  n->relations = std::move(relations);
  return Representation(std::move(n));
}

Representation Representation::direct_sum(std::vector<Representation> parts) {
  if (parts.empty()) throw PreconditionError("direct sum of an empty list");
  for (const auto& p : parts) {
    if (!(*p.oracle() == *parts.front().oracle())) throw PreconditionError("direct sum of incompatible groups");
  }
  auto n = std::make_shared<Node>();
  n->kind = RepKind::direct_sum;
  n->oracle = parts.front().oracle();
  n->parts = std::move(parts);
  return Representation(std::move(n));
}

Representation Representation::multiple(Representation base, std::optional<std::size_t> copies) {
  if (copies && *copies == 0) throw PreconditionError("multiple needs at least one copy");
  auto n = std::make_shared<Node>();
  n->kind = RepKind::multiple;
  n->oracle = base.oracle();
  n->base.push_back(std::move(base));
  n->copies = copies;
  return Representation(std::move(n));
}

RepKind Representation::kind() const { return node_->kind; }
const OraclePtr& Representation::oracle() const { return node_->oracle; }

std::size_t Representation::leaf_dim() const {
  if (kind() != RepKind::trivial && kind() != RepKind::matrix) throw StructuralError("not a finite-dimensional leaf");
  return node_->dim;
}

const std::vector<Eigen::MatrixXcd>& Representation::generator_matrices() const { return node_->generators; }
const std::vector<Word>& Representation::relations() const { return node_->relations; }
const std::vector<Representation>& Representation::parts() const { return node_->parts; }

const Representation& Representation::base() const {
  if (kind() != RepKind::multiple) throw StructuralError("not a multiple");
  return node_->base.front();
}

std::optional<std::size_t> Representation::copies() const { return node_->copies; }

std::optional<std::size_t> Representation::dimension() const {
  switch (kind()) {
    case RepKind::regular: return group().order();
    case RepKind::trivial:
    case RepKind::matrix: return node_->dim;
    case RepKind::direct_sum: {
      std::size_t total = 0;
      for (const auto& p : parts()) {
        auto d = p.dimension();
        if (!d) return std::nullopt;
        total += *d;
      }
      return total;
    }
    case RepKind::multiple: {
      auto d = base().dimension();
      if (!d || !copies()) return std::nullopt;
      return *d * *copies();
    }
  }
  return std::nullopt;
}

Eigen::MatrixXcd Representation::matrix_of(const Element& g) const {
  group().validate(g);
  if (kind() == RepKind::trivial) {
    return Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(node_->dim), static_cast<Eigen::Index>(node_->dim));
  }
  if (kind() != RepKind::matrix) throw StructuralError("matrix_of needs a trivial or matrix leaf");
  return evaluate_word(node_->generators, node_->dim, group().word_of(g));
}

Representation Representation::leaf_at(const std::vector<std::uint32_t>& path) const {
  Representation cur = *this;
  std::size_t pos = 0;
  while (true) {
    switch (cur.kind()) {
      case RepKind::direct_sum:
        if (pos >= path.size()) throw StructuralError("vector key path too short for a direct sum");
        if (path[pos] >= cur.parts().size()) {
          throw StructuralError("summand index " + std::to_string(path[pos]) + " out of range");
        }
        cur = Representation(cur.parts()[path[pos]]);
        ++pos;
        break;
      case RepKind::multiple:
        if (pos >= path.size()) throw StructuralError("vector key path too short for a multiple");
        if (cur.copies() && path[pos] >= *cur.copies()) {
          throw StructuralError("copy-index " + std::to_string(path[pos]) + " out of range (" +
                                std::to_string(*cur.copies()) + " copies)");
        }
        cur = Representation(cur.base());
        ++pos;
        break;
      default:
        if (pos != path.size()) throw StructuralError("vector key path too long for a leaf representation");
        return cur;
    }
  }
}

void Representation::check_member(const SparseVector& v) const {
  const std::vector<std::uint32_t>* last_path = nullptr;
  std::optional<Representation> leaf;
  for (const auto& [key, amp] : v.entries()) {
    if (!last_path || *last_path != key.path) {
      leaf = leaf_at(key.path);
      last_path = &key.path;
    }
    if (leaf->kind() == RepKind::regular) {
      leaf->group().validate(key.site);
    } else {
      const auto& p = key.site.payload();
      if (key.site.kind() != GroupKind::coordinate || p.size() != 1 || p[0] < 0 ||
          static_cast<std::size_t>(p[0]) >= leaf->leaf_dim()) {
        throw StructuralError("coordinate label invalid for a " + std::to_string(leaf->leaf_dim()) +
                              "-dimensional summand");
      }
    }
  }
}

bool Representation::contains(const SparseVector& v) const {
  try {
    check_member(v);
    return true;
  } catch (const StructuralError&) {
    return false;
  }
}

SparseVector Representation::apply(const Element& g, const SparseVector& v) const {
  group().validate(g);
  check_member(v);
  SparseVector out;
  const auto& entries = v.entries();
  auto it = entries.begin();
  while (it != entries.end()) {
    const auto& path = it->first.path;
    auto end = it;
    while (end != entries.end() && end->first.path == path) ++end;
    auto leaf = leaf_at(path);
    switch (leaf.kind()) {
      case RepKind::regular:
        for (auto e = it; e != end; ++e) {
          out.add(BasisKey{path, leaf.group().multiply(g, e->first.site)}, e->second);
        }
        break;
      case RepKind::trivial:
        for (auto e = it; e != end; ++e) out.add(e->first, e->second);
        break;
      case RepKind::matrix: {
        const auto d = static_cast<Eigen::Index>(leaf.leaf_dim());
        Eigen::VectorXcd x = Eigen::VectorXcd::Zero(d);
        for (auto e = it; e != end; ++e) x(static_cast<Eigen::Index>(e->first.site.payload()[0])) = e->second;
        Eigen::VectorXcd y = leaf.matrix_of(g) * x;
        for (Eigen::Index i = 0; i < d; ++i) {
          if (y(i) != cplx{}) out.set(BasisKey{path, Element::coordinate(i)}, y(i));
        }
        break;
      }
      default: throw StructuralError("unexpected composite leaf");
    }
    it = end;
  }
  return out;
}

bool operator==(const Representation& a, const Representation& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.kind != y.kind || !(*x.oracle == *y.oracle) || x.dim != y.dim || x.relations != y.relations ||
      x.copies != y.copies || x.parts != y.parts || x.base != y.base || x.generators.size() != y.generators.size()) {
    return false;
  }
  for (std::size_t k = 0; k < x.generators.size(); ++k) {
    if (x.generators[k] != y.generators[k]) return false;
  }
  return true;
}

void Subspace::check_orthonormal(double tol) const {
  for (std::size_t i = 0; i < basis.size(); ++i) {
    ambient.check_member(basis[i]);
    for (std::size_t j = i; j < basis.size(); ++j) {
      auto d = std::abs(inner(basis[i], basis[j]) - (i == j ? cplx{1.0} : cplx{}));
      if (d > tol) {
        throw PreconditionError("subspace basis not orthonormal at (" + std::to_string(i) + "," + std::to_string(j) +
                                "), defect " + std::to_string(d));
      }
    }
  }
}

SparseVector project(const SparseVector& v, const Subspace& c) {
  SparseVector out;
  for (const auto& b : c.basis) {
    const cplx a = inner(v, b);
    if (a != cplx{}) axpy(a, b, out);
  }
  return out;
}

SparseVector Orthonormalizer::residual(const SparseVector& v) const {
  SparseVector r = v;
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& b : basis_) axpy(-inner(r, b), b, r);
  }
  return r;
}

bool Orthonormalizer::add(const SparseVector& v) {
  auto r = residual(v);
  const double n = norm(r);
  if (n < drop_tol_) return false;
  r *= 1.0 / n;
  r.prune(0.0);
  basis_.push_back(std::move(r));
  return true;
}

Eigen::VectorXcd DenseModel::to_dense(const SparseVector& v) const {
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim()));
  for (const auto& [k, a] : v.entries()) {
    auto it = index.find(k);
    if (it == index.end()) throw StructuralError("vector key outside the dense model");
    x(static_cast<Eigen::Index>(it->second)) = a;
  }
  return x;
}

SparseVector DenseModel::from_dense(const Eigen::VectorXcd& x) const {
  SparseVector v;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (x(static_cast<Eigen::Index>(i)) != cplx{}) v.set(keys[i], x(static_cast<Eigen::Index>(i)));
  }
  return v;
}

namespace {

void enumerate_keys(const Representation& rep, std::vector<std::uint32_t>& path, std::vector<BasisKey>& out) {
  switch (rep.kind()) {
    case RepKind::regular: {
      auto order = rep.group().order();
      if (!order) throw UnsupportedError("dense model of an infinite regular representation");
      auto b = ball(rep.group(), static_cast<int>(*order));
      for (const auto& e : b.elements) out.push_back(BasisKey{path, e});
      break;
    }
    case RepKind::trivial:
    case RepKind::matrix:
      for (std::size_t i = 0; i < rep.leaf_dim(); ++i) {
        out.push_back(BasisKey{path, Element::coordinate(static_cast<std::int64_t>(i))});
      }
      break;
    case RepKind::direct_sum:
      for (std::size_t i = 0; i < rep.parts().size(); ++i) {
        path.push_back(static_cast<std::uint32_t>(i));
        enumerate_keys(rep.parts()[i], path, out);
        path.pop_back();
      }
      break;
    case RepKind::multiple: {
      if (!rep.copies()) throw UnsupportedError("dense model of infinitely many copies");
      for (std::size_t i = 0; i < *rep.copies(); ++i) {
        path.push_back(static_cast<std::uint32_t>(i));
        enumerate_keys(rep.base(), path, out);
        path.pop_back();
      }
      break;
    }
  }
}

}  // namespace

DenseModel dense_model(const Representation& rep) {
  DenseModel m;
  std::vector<std::uint32_t> path;
  enumerate_keys(rep, path, m.keys);
  std::sort(m.keys.begin(), m.keys.end());
  for (std::size_t i = 0; i < m.keys.size(); ++i) m.index.emplace(m.keys[i], i);
  const auto d = static_cast<Eigen::Index>(m.dim());
  for (const auto& s : rep.group().generators()) {
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
      auto col = rep.apply(s, SparseVector::delta(m.keys[static_cast<std::size_t>(k)].site,
                                                  m.keys[static_cast<std::size_t>(k)].path));
      u.col(k) = m.to_dense(col);
    }
    m.generators.push_back(std::move(u));
  }
  return m;
}

Eigen::MatrixXcd dense_matrix_of(const DenseModel& model, const GroupOracle& oracle, const Element& g) {
  return evaluate_word(model.generators, model.dim(), oracle.word_of(g));
}

void CopyAllocator::touch(const SparseVector& v) {
  for (const auto& [k, a] : v.entries()) {
    if (k.path.size() > prefix_.size() && std::equal(prefix_.begin(), prefix_.end(), k.path.begin())) {
      touched_.insert(k.path[prefix_.size()]);
    }
  }
}

std::size_t CopyAllocator::fresh() {
  std::size_t i = 0;
  while (touched_.contains(i)) ++i;
  if (i >= cap_) throw ResourceError("fresh copy: copy cap " + std::to_string(cap_) + " exhausted");
  touched_.insert(i);
  return i;
}

}  // namespace repwb
