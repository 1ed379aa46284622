#pragma once

#include <algorithm>
#include <array>
#include <random>

#include "repwb/group.hpp"
#include "repwb/representation.hpp"

namespace testing {

using namespace repwb;

inline OraclePtr make(GroupOracle g) { return std::make_shared<const GroupOracle>(std::move(g)); }

inline OraclePtr integers() { return make(GroupOracle::fg_abelian({0})); }
inline OraclePtr lattice2() { return make(GroupOracle::fg_abelian({0, 0})); }
inline OraclePtr free2() { return make(GroupOracle::free(2)); }

inline OraclePtr cyclic_table(int n) {
  std::vector<std::vector<std::int64_t>> t(n, std::vector<std::int64_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) t[i][j] = (i + j) % n;
  }
  return make(GroupOracle::finite_table(t, {Element(GroupKind::finite_table, {1})}));
}

// S3 as permutations of {0,1,2}; generated by a transposition and a 3-cycle.
inline OraclePtr s3_table() {
  std::vector<std::array<int, 3>> perms;
  std::array<int, 3> p{0, 1, 2};
  do {
    perms.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  auto index_of = [&](const std::array<int, 3>& q) {
    return static_cast<std::int64_t>(std::find(perms.begin(), perms.end(), q) - perms.begin());
  };
  std::vector<std::vector<std::int64_t>> t(6, std::vector<std::int64_t>(6));
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      std::array<int, 3> c{};
      for (int k = 0; k < 3; ++k) c[k] = perms[i][perms[j][k]];
      t[i][j] = index_of(c);
    }
  }
  return make(GroupOracle::finite_table(
      t, {Element(GroupKind::finite_table, {index_of({1, 0, 2})}), Element(GroupKind::finite_table, {index_of({1, 2, 0})})}));
}

// <a | a^3> as a complete rewriting system.
inline OraclePtr z3_rewriting() { return make(GroupOracle::rewriting(1, {{{1, 1}, {-1}}, {{-1, -1}, {1}}})); }

// <a, b | ab = ba> with shortlex-complete rules pushing a's left.
inline OraclePtr z2_rewriting() {
  return make(GroupOracle::rewriting(2, {{{2, 1}, {1, 2}}, {{-2, 1}, {1, -2}}, {{2, -1}, {-1, 2}}, {{-2, -1}, {-1, -2}}}));
}

inline Element random_element(const GroupOracle& g, std::mt19937_64& rng, int max_len = 8) {
  std::uniform_int_distribution<int> len(0, max_len);
  std::uniform_int_distribution<std::int64_t> letter(1, static_cast<std::int64_t>(g.generators().size()));
  std::bernoulli_distribution sign(0.5);
  Word w;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) w.push_back(sign(rng) ? letter(rng) : -letter(rng));
  return g.evaluate(w);
}

inline cplx random_complex(std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  return {d(rng), d(rng)};
}

// Random unitary via QR of a Gaussian matrix.
inline Eigen::MatrixXcd random_unitary(std::size_t dim, std::mt19937_64& rng) {
  Eigen::MatrixXcd a(dim, dim);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = random_complex(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
  Eigen::MatrixXcd q = qr.householderQ();
  return q;
}

}  // namespace testing
