#pragma once

#include <compare>
#include <complex>
#include <cstdint>
#include <map>
#include <vector>

#include "repwb/group.hpp"

namespace repwb {

using cplx = std::complex<double>;

// Address of one basis vector of a representation space. `path` selects the
// summand / copy through the descriptor tree (empty for a leaf
// representation); `site` is a group element for regular leaves and
// Element::coordinate(i) for finite-dimensional leaves.
struct BasisKey {
  std::vector<std::uint32_t> path;
  Element site;

  friend bool operator==(const BasisKey&, const BasisKey&) = default;
  friend std::strong_ordering operator<=>(const BasisKey& a, const BasisKey& b) {
    if (auto c = a.path <=> b.path; c != 0) return c;
    return a.site <=> b.site;
  }
};

// Finitely supported vector in a (direct sum of) l^2(G) / C^d spaces. Entries
// are kept exactly as supplied; nothing is dropped unless prune() is called.
class SparseVector {
 public:
  using Map = std::map<BasisKey, cplx>;

  SparseVector() = default;

  static SparseVector delta(Element site, std::vector<std::uint32_t> path = {}, cplx amplitude = 1.0);

  const Map& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  cplx get(const BasisKey& key) const;
  void set(const BasisKey& key, cplx value) { entries_[key] = value; }
  void add(const BasisKey& key, cplx value) { entries_[key] += value; }

  // Drop entries with modulus <= tol.
  void prune(double tol);

  double norm2() const;

  // Same vector with `head` prepended to every path (embedding into a summand).
  SparseVector prefixed(std::uint32_t head) const;
  // Entries whose path starts with `head`, with that component stripped.
  SparseVector component(std::uint32_t head) const;

  SparseVector& operator+=(const SparseVector& other);
  SparseVector& operator-=(const SparseVector& other);
  SparseVector& operator*=(cplx s);

  friend SparseVector operator+(SparseVector a, const SparseVector& b) { return a += b; }
  friend SparseVector operator-(SparseVector a, const SparseVector& b) { return a -= b; }
  friend SparseVector operator*(cplx s, SparseVector a) { return a *= s; }
  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  Map entries_;
};

// <u, v> = sum u(x) conj(v(x)); linear in the first argument.
cplx inner(const SparseVector& u, const SparseVector& v);
double norm(const SparseVector& v);
// a += s * b
void axpy(cplx s, const SparseVector& b, SparseVector& a);

}  // namespace repwb
