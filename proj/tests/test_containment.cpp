#include <cmath>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "repwb/amenability.hpp"
#include "repwb/containment.hpp"
#include "repwb/errors.hpp"

using namespace repwb;
using namespace testing;

namespace {

Element zi(std::int64_t k) { return {GroupKind::fg_abelian, {k}}; }
Element z2i(std::int64_t a, std::int64_t b) { return {GroupKind::fg_abelian, {a, b}}; }

SparseVector unit_coord(std::int64_t k, std::vector<std::uint32_t> path = {}) {
  return SparseVector::delta(Element::coordinate(k), std::move(path));
}

// Random vector supported on B_r of a regular leaf.
SparseVector random_l2(const GroupOracle& g, std::mt19937_64& rng, int terms, std::vector<std::uint32_t> path = {}) {
  SparseVector v;
  for (int t = 0; t < terms; ++t) v.add({path, random_element(g, rng, 3)}, random_complex(rng));
  return v;
}

std::vector<Element> with_identity_and_generators(const GroupOracle& g) {
  std::vector<Element> F{g.identity()};
  for (const auto& s : g.generators()) F.push_back(s);
  return F;
}

GramFunction trivial_target(const OraclePtr& g) {
  std::vector<SparseVector> v{unit_coord(0)};
  return gram(Representation::trivial(g, 1), v, with_identity_and_generators(*g));
}

}  // namespace

TEST_CASE("gram: examples") {
  auto z = Representation::regular(integers());
  std::vector<SparseVector> d0{SparseVector::delta(zi(0))};
  std::vector<Element> F{zi(-1), zi(0), zi(1)};
  auto m = gram(z, d0, F);
  CHECK(m.M[2](0, 0) == cplx(0.0));
  CHECK(m.M[1](0, 0) == cplx(1.0));
  std::vector<SparseVector> u{(1 / std::sqrt(2.0)) * (SparseVector::delta(zi(0)) + SparseVector::delta(zi(1)))};
  std::vector<Element> one{zi(1)};
  CHECK(std::abs(gram(z, u, one).M[0](0, 0) - 0.5) < 1e-15);
  // trivial representation: constant in g
  auto triv = Representation::trivial(free2(), 2);
  std::vector<SparseVector> w{unit_coord(0) + unit_coord(1), cplx(0, 1) * unit_coord(1)};
  std::mt19937_64 rng(4);
  std::vector<Element> Ff{random_element(*free2(), rng), random_element(*free2(), rng)};
  auto tm = gram(triv, w, Ff);
  CHECK(tm.M[0] == tm.M[1]);
  CHECK(tm.M[0](0, 1) == cplx(0, -1));
  std::vector<Element> empty;
  CHECK_THROWS_AS(gram(z, d0, empty), PreconditionError);
  std::vector<SparseVector> stray{unit_coord(0)};
  CHECK_THROWS_AS(gram(z, stray, F), StructuralError);
}

TEST_CASE("gram symmetry and positivity on random vectors") {
  std::mt19937_64 rng(12);
  auto f = free2();
  auto rep = Representation::direct_sum({Representation::regular(f),
                                         Representation::matrix(f, {random_unitary(3, rng), random_unitary(3, rng)})});
  for (int t = 0; t < 30; ++t) {
    std::vector<SparseVector> vs;
    for (int i = 0; i < 3; ++i) vs.push_back(random_l2(*f, rng, 4).prefixed(0) + (random_complex(rng) * unit_coord(i % 3, {1})));
    auto g = random_element(*f, rng);
    std::vector<Element> F{f->identity(), g, f->invert(g)};
    auto m = gram(rep, vs, F);
    CHECK((m.M[0] - m.M[0].adjoint()).cwiseAbs().maxCoeff() < 1e-8);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m.M[0]);
    CHECK(es.eigenvalues().minCoeff() > -1e-8);
    CHECK((m.M[2] - m.M[1].adjoint()).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("discrepancy: examples") {
  auto zg = integers();
  auto z = Representation::regular(zg);
  std::vector<Element> one{zi(1)};
  std::vector<SparseVector> v{unit_coord(0)};
  auto target = gram(Representation::trivial(zg, 1), v, one);
  SparseVector w;
  for (int k = 0; k < 10; ++k) w.set({{}, zi(k)}, 1 / std::sqrt(10.0));
  std::vector<SparseVector> ws{w};
  CHECK(std::abs(discrepancy(target, z, ws) - 0.1) < 1e-14);
  std::vector<SparseVector> zero{SparseVector{}};
  CHECK(discrepancy(target, z, zero) == 1.0);
  std::vector<SparseVector> two{w, w};
  CHECK_THROWS_AS(discrepancy(target, z, two), PreconditionError);
}

TEST_CASE("containment invariants on random instances") {
  std::mt19937_64 rng(21);
  auto f = free2();
  auto pi = Representation::regular(f);
  auto sigma = Representation::matrix(f, {random_unitary(2, rng), random_unitary(2, rng)});
  auto big = Representation::direct_sum({pi, sigma});
  for (int t = 0; t < 100; ++t) {
    std::vector<SparseVector> vs, ws;
    for (int i = 0; i < 2; ++i) {
      vs.push_back(random_l2(*f, rng, 3));
      ws.push_back(random_l2(*f, rng, 3));
    }
    std::vector<Element> F;
    for (int k = 0; k < 4; ++k) F.push_back(random_element(*f, rng, 4));
    auto target = gram(pi, vs, F);
    // reflexivity is exact
    CHECK(discrepancy(target, pi, vs) == 0.0);
    // monotone in F
    const double full = discrepancy(target, pi, ws);
    GramFunction sub{{F.begin(), F.begin() + 2}, 2, {target.M.begin(), target.M.begin() + 2}};
    CHECK(discrepancy(sub, pi, ws) <= full);
    // witnesses embed into pi + sigma with identical discrepancy
    std::vector<SparseVector> embedded;
    for (const auto& w : ws) embedded.push_back(w.prefixed(0));
    CHECK(discrepancy(target, big, embedded) == full);
  }
}

TEST_CASE("search_witness: realizable target") {
  auto zg = integers();
  auto z = Representation::regular(zg);
  std::vector<SparseVector> v{SparseVector::delta(zi(1)), (1 / std::sqrt(2.0)) * (SparseVector::delta(zi(0)) - SparseVector::delta(zi(-1)))};
  std::vector<Element> F{zi(0), zi(1), zi(-1)};
  auto target = gram(z, v, F);
  auto rep = search_witness(target, z, ball_basis(z, 3), {.tol = 1e-7, .budget = 5000, .seed = 3});
  CHECK(rep.discrepancy <= 1e-6);
  CHECK(rep.converged);
}

TEST_CASE("search_witness: trivial target in Z over B_40") {
  auto zg = integers();
  auto z = Representation::regular(zg);
  auto basis = ball_basis(z, 40);
  auto rep = search_witness(trivial_target(zg), z, basis, {.tol = 1e-6, .budget = 2000, .seed = 0});
  CHECK(rep.discrepancy <= 0.05);
  // report invariants: recomputed discrepancy, witnesses inside the span
  CHECK(std::abs(discrepancy(trivial_target(zg), z, rep.witnesses) - rep.discrepancy) <= 1e-12);
  auto b = ball(*zg, 40);
  for (const auto& [k, a] : rep.witnesses[0].entries()) CHECK(b.find(k.site).has_value());
  CHECK(rep.restart_discrepancies.size() == 8);
  // same seed, same report
  auto again = search_witness(trivial_target(zg), z, basis, {.tol = 1e-6, .budget = 2000, .seed = 0});
  CHECK(again.witnesses == rep.witnesses);
  CHECK(again.discrepancy == rep.discrepancy);
}

TEST_CASE("search_witness: trivial target in F2 stays above the ball floor") {
  auto f = free2();
  auto pi = Representation::regular(f);
  const int r = 5;
  // For a unit-normalised witness and F = {e} u S, the best achievable
  // deviation is at least (1 - mu) / (1 + mu), mu the top eigenvalue of the
  // ball-compressed operator (1/|S|) sum_s Re lambda(s), here = the Markov one.
  const double mu = top_eigenpair(ball_markov_table(*f, ball(*f, r))).value;
  const double floor = (1 - mu) / (1 + mu);
  CHECK(floor > 0.11);
  auto basis = ball_basis(pi, r);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto rep = search_witness(trivial_target(f), pi, basis, {.tol = 1e-6, .budget = 500, .seed = seed});
    CHECK(rep.discrepancy >= floor - 1e-9);
    CHECK_FALSE(rep.converged);
  }
}

TEST_CASE("search_witness preconditions") {
  auto zg = integers();
  auto z = Representation::regular(zg);
  Subspace empty{z, {}};
  CHECK_THROWS_AS(search_witness(trivial_target(zg), z, empty, {}), PreconditionError);
  CHECK_THROWS_AS(search_witness(trivial_target(zg), z, ball_basis(z, 2), {.tol = 0.0}), PreconditionError);
  Subspace skew{z, {SparseVector::delta(zi(0)), SparseVector::delta(zi(0)) + SparseVector::delta(zi(1))}};
  CHECK_THROWS_AS(search_witness(trivial_target(zg), z, skew, {}), PreconditionError);
}

TEST_CASE("folner_witness") {
  auto zg = integers();
  auto z = Representation::regular(zg);
  std::vector<Element> F{zi(1)};
  auto w = folner_witness(*zg, F, 0.2);
  CHECK(w.box_side == 10);
  CHECK(w.defects[0] == 0.2);
  auto moved = z.apply(zi(1), w.vector) - w.vector;
  CHECK(std::abs(moved.norm2() - 0.2) < 1e-12);

  auto l2 = lattice2();
  std::vector<Element> F2{z2i(1, 0), z2i(0, 1)};
  auto w2 = folner_witness(*l2, F2, 0.1);
  CHECK(w2.box_side == 40);
  CHECK(w2.set_size == 1600);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(w2.defects[k] == 2.0 / 40);
    auto d = Representation::regular(l2).apply(F2[k], w2.vector) - w2.vector;
    CHECK(std::abs(d.norm2() - 2.0 / 40) < 1e-12);
  }

  // smallest box: one size down violates the bound
  std::vector<Element> F3{zi(3), zi(-1)};
  auto w3 = folner_witness(*zg, F3, 0.05);
  CHECK(w3.total_defect <= 0.05);
  CHECK(8.0 / (w3.box_side - 1) > 0.05);

  auto s3 = s3_table();
  std::vector<Element> Fs{s3->generators()[0], s3->generators()[1]};
  auto ws = folner_witness(*s3, Fs, 1e-9);
  CHECK(ws.set_size == 6);
  auto reg = Representation::regular(s3);
  for (const auto& g : Fs) CHECK(reg.apply(g, ws.vector) == ws.vector);

  // mixed torsion: Z x Z/4
  auto mixed = make(GroupOracle::fg_abelian({0, 4}));
  std::vector<Element> Fm{z2i(1, 0), z2i(0, 1)};
  auto wm = folner_witness(*mixed, Fm, 0.1);
  CHECK(wm.defects[1] == 0.0);
  CHECK(wm.box_side == 20);

  std::vector<Element> Ff{free2()->generators()[0]};
  CHECK_THROWS_AS(folner_witness(*free2(), Ff, 0.1), UnsupportedError);
  CHECK_THROWS_AS(folner_witness(*zg, F, 0.0), PreconditionError);
  CHECK_THROWS_AS(folner_witness(*zg, F, 1e-6, 1000), ResourceError);
}

namespace {

Representation eta_over(const OraclePtr& g, const Representation& pi) {
  return Representation::direct_sum({pi, Representation::multiple(Representation::regular(g), std::nullopt)});
}

}  // namespace

TEST_CASE("transfer_witness: targets already in eta are unchanged") {
  auto zg = integers();
  std::mt19937_64 rng(31);
  auto eta = eta_over(zg, Representation::trivial(zg, 1));
  TransferInput in{eta, Representation::regular(zg), {random_l2(*zg, rng, 3, {1, 0})}, {}, {zi(0), zi(1)}, 0.05};
  auto t = random_l2(*zg, rng, 3, {1, 1}) + unit_coord(0, {0});
  in.targets = {t.prefixed(0)};
  auto out = transfer_witness(in);
  CHECK(out.report.discrepancy == 0.0);
  CHECK(out.report.witnesses[1] == t);
  CHECK(out.fresh_copies.empty());
}

TEST_CASE("transfer_witness: regular complement is relabelled into a fresh copy") {
  auto zg = integers();
  std::mt19937_64 rng(32);
  auto eta = eta_over(zg, Representation::trivial(zg, 1));
  auto sigma = Representation::regular(zg);
  auto param = random_l2(*zg, rng, 4, {1, 0});
  auto target = random_l2(*zg, rng, 4).prefixed(1);
  TransferInput in{eta, sigma, {param}, {target}, {zi(0), zi(1), zi(2), zi(-3)}, 1e-3};
  auto out = transfer_witness(in);
  CHECK(out.report.discrepancy <= 1e-12);
  CHECK(out.supported_copies == 1);
  REQUIRE(out.fresh_copies.size() == 1);
  CHECK(out.fresh_copies[0] == 1);
  for (const auto& [k, a] : out.report.witnesses[1].entries()) CHECK(k.path == std::vector<std::uint32_t>{1, 1});
}

namespace {

// Targets u_i + w_i with u_i in eta and w_i spread over a finite-dimensional
// leaf and a regular leaf of sigma (leaf 0 of sigma has dimension 2).
void check_mixed_transfer(const OraclePtr& g, const Representation& sigma, const std::vector<Element>& F,
                          double w_scale, std::mt19937_64& rng) {
  auto eta = eta_over(g, Representation::trivial(g, 1));
  std::vector<SparseVector> params{random_l2(*g, rng, 3, {1, 0}), random_l2(*g, rng, 2, {1, 2})};
  std::vector<SparseVector> targets;
  for (int i = 0; i < 2; ++i) {
    SparseVector w = random_complex(rng) * unit_coord(0, {0}) + random_complex(rng) * unit_coord(1, {0}) +
                     random_l2(*g, rng, 2, {1});
    auto u = random_l2(*g, rng, 3, {1, 0}) + random_complex(rng) * unit_coord(0, {0});
    targets.push_back(u.prefixed(0) + (w_scale * w).prefixed(1));
  }
  TransferInput in{eta, sigma, params, targets, F, 0.05};
  auto out = transfer_witness(in);
  CHECK(out.report.discrepancy <= 0.05);
  CHECK(out.report.converged);
  REQUIRE(out.folner.has_value());
  CHECK(std::abs(discrepancy(out.target, eta, out.report.witnesses) - out.report.discrepancy) <= 1e-12);
  // the realised parts sit in copies no eta-part touches: cross terms vanish exactly
  std::set<std::uint32_t> touched;
  for (const auto& v : params) {
    for (const auto& [k, x] : v.entries()) touched.insert(k.path.size() > 1 ? k.path[1] : 0);
  }
  for (const auto& t : targets) {
    const auto u = t.component(0);
    for (const auto& [k, x] : u.entries()) {
      if (k.path.size() > 1) touched.insert(k.path[1]);
    }
  }
  for (std::size_t i = 0; i < 2; ++i) {
    auto u = targets[i].component(0);
    auto w = out.report.witnesses[2 + i] - u;
    w.prune(0.0);
    for (const auto& [k, x] : w.entries()) {
      CHECK(k.path.size() == 2);
      CHECK(k.path[0] == 1);
      CHECK_FALSE(touched.contains(k.path[1]));
    }
    for (std::size_t j = 0; j < 2; ++j) {
      for (const auto& h : F) CHECK(inner(eta.apply(h, targets[j].component(0)), w) == cplx(0.0));
      for (const auto& p : params) CHECK(inner(eta.apply(F[1], p), w) == cplx(0.0));
    }
  }
}

}  // namespace

TEST_CASE("transfer_witness: mixed targets with a finite-dimensional complement") {
  std::mt19937_64 rng(33);
  auto zg = integers();
  Eigen::MatrixXcd rot(2, 2);
  rot << 0.6, -0.8, 0.8, 0.6;
  auto sigma_z = Representation::direct_sum({Representation::matrix(zg, {rot}), Representation::regular(zg)});
  check_mixed_transfer(zg, sigma_z, {zi(0), zi(1), zi(2)}, 1.0, rng);

  auto lg = lattice2();
  Eigen::MatrixXcd a(2, 2);
  a << std::polar(1.0, 0.7), 0, 0, std::polar(1.0, -1.3);
  Eigen::MatrixXcd b = std::polar(1.0, 0.4) * Eigen::MatrixXcd::Identity(2, 2);
  auto sigma_l = Representation::direct_sum({Representation::matrix(lg, {a, b}), Representation::regular(lg)});
  check_mixed_transfer(lg, sigma_l, {z2i(0, 0), z2i(1, 0), z2i(0, 1), z2i(1, -1)}, 0.3, rng);
}

TEST_CASE("transfer_witness: errors") {
  auto f = free2();
  auto eta_f = eta_over(f, Representation::trivial(f, 1));
  TransferInput bad{eta_f, Representation::regular(f), {}, {}, {f->identity()}, 0.1};
  CHECK_THROWS_AS(transfer_witness(bad), UnsupportedError);

  auto zg = integers();
  auto eta = eta_over(zg, Representation::trivial(zg, 1));
  TransferInput cap{eta, Representation::regular(zg), {SparseVector::delta(zi(0), {1, 0})},
                    {SparseVector::delta(zi(0), {1})}, {zi(1)}, 0.1, 1};
  CHECK_THROWS_AS(transfer_witness(cap), ResourceError);
  TransferInput shape{Representation::regular(zg), Representation::regular(zg), {}, {}, {zi(1)}, 0.1};
  CHECK_THROWS_AS(transfer_witness(shape), PreconditionError);
}
