#include "repwb/vector.hpp"

#include <cmath>

namespace repwb {

SparseVector SparseVector::delta(Element site, std::vector<std::uint32_t> path, cplx amplitude) {
  SparseVector v;
  v.entries_.emplace(BasisKey{std::move(path), std::move(site)}, amplitude);
  return v;
}

cplx SparseVector::get(const BasisKey& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? cplx{} : it->second;
}

void SparseVector::prune(double tol) {
  std::erase_if(entries_, [tol](const auto& kv) { return std::abs(kv.second) <= tol; });
}

double SparseVector::norm2() const {
  double s = 0.0;
  for (const auto& [k, a] : entries_) s += std::norm(a);
  return s;
}

SparseVector SparseVector::prefixed(std::uint32_t head) const {
  SparseVector out;
  for (const auto& [k, a] : entries_) {
    BasisKey key{{head}, k.site};
    key.path.insert(key.path.end(), k.path.begin(), k.path.end());
    out.entries_.emplace_hint(out.entries_.end(), std::move(key), a);
  }
  return out;
}

SparseVector SparseVector::component(std::uint32_t head) const {
  SparseVector out;
  for (const auto& [k, a] : entries_) {
    if (k.path.empty() || k.path.front() != head) continue;
    BasisKey key{std::vector<std::uint32_t>(k.path.begin() + 1, k.path.end()), k.site};
    out.entries_.emplace_hint(out.entries_.end(), std::move(key), a);
  }
  return out;
}

SparseVector& SparseVector::operator+=(const SparseVector& other) {
  for (const auto& [k, a] : other.entries_) entries_[k] += a;
  return *this;
}

SparseVector& SparseVector::operator-=(const SparseVector& other) {
  for (const auto& [k, a] : other.entries_) entries_[k] -= a;
  return *this;
}

SparseVector& SparseVector::operator*=(cplx s) {
  for (auto& [k, a] : entries_) a *= s;
  return *this;
}

cplx inner(const SparseVector& u, const SparseVector& v) {
  // merge walk over the two sorted supports
  cplx s{};
  auto a = u.entries().begin();
  auto b = v.entries().begin();
  while (a != u.entries().end() && b != v.entries().end()) {
    if (a->first < b->first) {
      ++a;
    } else if (b->first < a->first) {
      ++b;
    } else {
      s += a->second * std::conj(b->second);
      ++a;
      ++b;
    }
  }
  return s;
}

double norm(const SparseVector& v) { return std::sqrt(v.norm2()); }

void axpy(cplx s, const SparseVector& b, SparseVector& a) {
  for (const auto& [k, x] : b.entries()) a.add(k, s * x);
}

}  // namespace repwb
