#include <cmath>

#include "dense_oracle.hpp"
#include "doctest.h"
#include "helpers.hpp"
#include "repwb/errors.hpp"
#include "repwb/stability.hpp"

using namespace repwb;
using namespace testing;

namespace {

Element zi(std::int64_t k) { return {GroupKind::fg_abelian, {k}}; }
SparseVector d(std::int64_t k) { return SparseVector::delta(zi(k)); }

double residual_norm(const SparseVector& v, const Subspace& c) { return norm(v - project(v, c)); }

SparseVector random_z(std::mt19937_64& rng, int lo, int hi, int terms) {
  std::uniform_int_distribution<int> pos(lo, hi);
  SparseVector v;
  for (int t = 0; t < terms; ++t) v.add({{}, zi(pos(rng))}, random_complex(rng));
  return v;
}

}  // namespace

TEST_CASE("closure: examples") {
  auto triv = Representation::trivial(free2(), 3);
  std::vector<SparseVector> A{SparseVector::delta(Element::coordinate(0)) + SparseVector::delta(Element::coordinate(2))};
  for (int r = 0; r <= 3; ++r) CHECK(closure(triv, A, r).realized.dim() == 1);

  auto z = Representation::regular(integers());
  std::vector<SparseVector> d0{d(0)};
  auto c = closure(z, d0, 2);
  CHECK(c.realized.dim() == 5);
  for (int k = -2; k <= 2; ++k) CHECK(residual_norm(d(k), c.realized) < 1e-12);
  CHECK(c.dim_by_radius == std::vector<std::size_t>{1, 3, 5});
  std::vector<SparseVector> with_zero{d(0), SparseVector{}};
  CHECK(closure(z, with_zero, 2).realized.dim() == 5);
  std::vector<SparseVector> none;
  CHECK_THROWS_AS(closure(z, none, 1), PreconditionError);
  CHECK_THROWS_AS(closure(z, d0, 10, {}, 5), ResourceError);
}

TEST_CASE("closure invariants on random instances") {
  std::mt19937_64 rng(41);
  auto f = free2();
  auto pi = Representation::regular(f);
  for (int t = 0; t < 10; ++t) {
    std::vector<SparseVector> A;
    for (int i = 0; i < 2; ++i) {
      SparseVector v;
      for (int k = 0; k < 3; ++k) v.add({{}, random_element(*f, rng, 2)}, random_complex(rng));
      A.push_back(v);
    }
    std::vector<SparseVector> probes{SparseVector::delta(random_element(*f, rng, 3))};
    auto c = closure(pi, A, 3, probes);
    CHECK_NOTHROW(c.realized.check_orthonormal(1e-10));
    for (const auto& g : ball(*f, 3).elements) {
      for (const auto& a : A) CHECK(residual_norm(pi.apply(g, a), c.realized) < 1e-8 * std::max(1.0, norm(a)));
    }
    for (int r = 0; r < 3; ++r) {
      auto lower = c.at_radius(r);
      auto fresh = closure(pi, A, r);
      CHECK(lower.dim() == fresh.realized.dim());
      for (const auto& b : fresh.realized.basis) CHECK(residual_norm(b, lower) < 1e-8);
      for (const auto& b : lower.basis) CHECK(residual_norm(b, c.at_radius(r + 1)) < 1e-8);
      CHECK(c.trace[0][r] <= c.trace[0][r + 1] + 1e-12);
    }
    CHECK(c.trace[0].back() <= 1.0 + 1e-12);
  }
}

TEST_CASE("project: examples and properties") {
  auto z = Representation::regular(integers());
  Subspace c{z, {(1 / std::sqrt(2.0)) * (d(0) + d(1))}};
  auto p = project(d(0), c);
  CHECK(norm(p - 0.5 * (d(0) + d(1))) < 1e-15);
  CHECK(norm(project(c.basis[0], c) - c.basis[0]) < 1e-15);
  CHECK(norm(project(d(7), c)) == 0.0);

  std::mt19937_64 rng(42);
  std::vector<SparseVector> A{random_z(rng, -2, 2, 3), random_z(rng, -2, 2, 3)};
  auto cl = closure(z, A, 2);
  for (int t = 0; t < 50; ++t) {
    auto u = random_z(rng, -6, 6, 5), v = random_z(rng, -6, 6, 5);
    auto pu = project(u, cl.realized);
    CHECK(norm(project(pu, cl.realized) - pu) < 1e-8);
    CHECK(std::abs(inner(pu, v) - inner(u, project(v, cl.realized))) < 1e-8);
    CHECK(std::abs((u - pu).norm2() + pu.norm2() - u.norm2()) < 1e-8);
  }
}

TEST_CASE("nondividing: examples") {
  auto z = Representation::regular(integers());
  std::vector<SparseVector> d0{d(0)};
  auto c = closure(z, d0, 3);
  std::vector<SparseVector> a{d(5)}, b{d(100)};
  CHECK(nondividing(z, a, b, c, 1e-6).independent);
  std::vector<SparseVector> inside{d(2), d(-1) + d(3)};
  auto v = nondividing(z, a, inside, span_closure(c.realized, 0));
  CHECK(v.independent);
  CHECK(v.value == cplx(0.0));

  auto zero = span_closure(Subspace{z, {}}, 0);
  auto dep = nondividing(z, d0, d0, zero, 1e-6);
  CHECK_FALSE(dep.independent);
  CHECK(dep.value == cplx(1.0));
  CHECK(dep.tolerance == 1e-6);
  // the worst pair re-verifies with one inner product
  CHECK(inner(dep.residual_a, dep.residual_b) == dep.value);
}

TEST_CASE("nondividing and canonical_base agree with the dense oracle") {
  std::mt19937_64 rng(43);
  for (int t = 0; t < 100; ++t) {
    auto inst = random_dense_instance(rng);
    DenseOracle oracle(inst);
    const auto dim = inst.gens[0].rows();
    auto A = from_dense(inst.A), a = from_dense(inst.a), B = from_dense(inst.B);
    auto c = closure(inst.rep, A, inst.radius);
    auto q = oracle.closure(inst.A);
    REQUIRE(static_cast<Eigen::Index>(c.realized.dim()) == q.cols());

    auto v = nondividing(inst.rep, a, B, c, 1e-6);
    auto dv = oracle.verdict(inst.a, inst.B, q, 1e-6);
    CHECK(v.independent == dv.independent);
    CHECK(std::abs(std::abs(v.value) - dv.worst) < 1e-8);

    // tuple verdict = conjunction of singleton verdicts
    bool all = true;
    for (const auto& x : a) {
      std::vector<SparseVector> one{x};
      all = all && nondividing(inst.rep, one, B, c, 1e-6).independent;
    }
    CHECK(all == v.independent);
    // symmetry for singletons
    std::vector<SparseVector> x{a[0]}, y{B[0]};
    auto xy = nondividing(inst.rep, x, y, c, 1e-6), yx = nondividing(inst.rep, y, x, c, 1e-6);
    CHECK(xy.independent == yx.independent);
    CHECK(std::abs(std::abs(xy.value) - std::abs(yx.value)) < 1e-12);

    // canonical base spans {P_C g a_i}; reproduces P_C a_i
    auto cb = canonical_base(inst.rep, a, c);
    Eigen::MatrixXcd proj_orbit(dim, 0);
    Eigen::MatrixXcd pc = q * q.adjoint();
    {
      std::vector<Eigen::VectorXcd> projected;
      for (const auto& g : ball(*inst.group, inst.radius).elements) {
        for (const auto& x0 : inst.a) projected.push_back(pc * word_matrix(inst.gens, inst.group->word_of(g)) * x0);
      }
      proj_orbit.resize(dim, static_cast<Eigen::Index>(projected.size()));
      for (std::size_t k = 0; k < projected.size(); ++k) proj_orbit.col(static_cast<Eigen::Index>(k)) = projected[k];
    }
    auto qb = DenseOracle::range(proj_orbit);
    REQUIRE(static_cast<Eigen::Index>(cb.size()) == qb.cols());
    Subspace cbs{inst.rep, cb};
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK((to_dense(project(a[i], cbs), dim) - pc * inst.a[i]).norm() < 1e-8);
    }
    // independence over the canonical base, for B inside C
    auto cv = nondividing(inst.rep, a, A, span_closure(cbs, inst.radius), 1e-6);
    CHECK(cv.independent);
  }
}

TEST_CASE("canonical_base: examples and stationarity") {
  auto z = Representation::regular(integers());
  std::vector<SparseVector> d0{d(0)}, far{d(50)};
  auto c = closure(z, d0, 2);
  CHECK(canonical_base(z, far, c).empty());
  std::vector<SparseVector> in{d(1)};
  auto cb = canonical_base(z, in, c);
  CHECK(cb.size() == 4);  // P_C of delta_{-1..3} spans delta_{-1..2}

  std::mt19937_64 rng(44);
  std::vector<SparseVector> A{random_z(rng, -3, 3, 4), random_z(rng, -3, 3, 4), random_z(rng, -3, 3, 4)};
  std::vector<SparseVector> a{random_z(rng, -6, 6, 5), random_z(rng, -6, 6, 5)};
  auto c1 = closure(z, A, 2);
  std::vector<SparseVector> A2{A[2], A[0], A[1]};
  auto c2 = closure(z, A2, 2);
  std::vector<SparseVector> a2{a[1], a[0]};
  Subspace s1{z, canonical_base(z, a, c1)}, s2{z, canonical_base(z, a2, c2)};
  CHECK(s1.dim() == s2.dim());
  for (const auto& b : s1.basis) CHECK(residual_norm(b, s2) < 1e-8);
  for (const auto& b : s2.basis) CHECK(residual_norm(b, s1) < 1e-8);
}

TEST_CASE("superstable_approx: examples") {
  auto z = Representation::regular(integers());
  std::vector<SparseVector> A{d(0)};
  // a_vec covering C forces C_0 = C
  std::vector<SparseVector> a{d(-2), d(-1) + 0.5 * d(9), d(0), d(1), cplx(0, 1) * d(2)};
  auto all = superstable_approx(z, a, A, 1e-12, 2);
  CHECK(all.c0.dim() == all.closure.realized.dim());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(all.gaps[i] < 1e-12);
    CHECK(norm(all.b_vec[i] - a[i]) < 1e-12);
  }
  // greedy stops as soon as P_C a is captured
  std::vector<SparseVector> one{d(1) + 0.5 * d(9)};
  auto part = superstable_approx(z, one, A, 1e-12, 2);
  CHECK(part.selected.size() == 1);
  CHECK(norm(part.b_vec[0] - one[0]) < 1e-12);

  std::vector<SparseVector> perp{d(40)};
  auto none = superstable_approx(z, perp, A, 1e-3, 2);
  CHECK(none.selected.empty());
  CHECK(none.b_vec[0] == perp[0]);
  CHECK_THROWS_AS(superstable_approx(z, a, A, 0.0, 2), PreconditionError);
  CHECK_THROWS_AS(superstable_approx(z, a, A, 1e-12, 2, 1), ResourceError);
}

TEST_CASE("superstable_approx: 200 orbit vectors in regular(Z)") {
  std::mt19937_64 rng(45);
  auto z = Representation::regular(integers());
  std::vector<SparseVector> A;
  for (int i = 0; i < 8; ++i) A.push_back(random_z(rng, -3, 3, 3));
  std::vector<SparseVector> a{random_z(rng, -20, 20, 10), random_z(rng, -20, 20, 10)};
  auto out = superstable_approx(z, a, A, 1e-3, 12);
  CHECK(out.orbit.vectors.size() == 200);
  Orthonormalizer pcs;
  for (const auto& x : a) pcs.add(project(x, out.closure.realized));
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(norm(a[i] - out.b_vec[i]) < 1e-3);
    auto gap = norm(project(a[i], out.closure.realized) - project(a[i], out.c0));
    CHECK(std::abs(norm(a[i] - out.b_vec[i]) - gap) < 1e-10);
    CHECK(std::abs(out.gaps[i] - gap) < 1e-10);
  }
  CHECK(out.selected.size() <= out.closure.realized.dim());
  auto verdict = nondividing(z, out.b_vec, out.orbit.vectors, span_closure(out.c0, 0), 1e-3);
  CHECK(verdict.independent);
}
