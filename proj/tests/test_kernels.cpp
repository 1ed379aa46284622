#include <omp.h>

#include <random>

#include "doctest.h"
#include "repwb/kernels.hpp"

using namespace repwb::kernels;

namespace {

NeighborTable random_table(std::mt19937_64& rng, std::size_t rows, std::size_t width) {
  NeighborTable t{rows, width, {}, 1.0 / static_cast<double>(width)};
  std::uniform_int_distribution<std::int64_t> pick(-1, static_cast<std::int64_t>(rows) - 1);
  for (std::size_t i = 0; i < rows * width; ++i) t.index.push_back(pick(rng));
  return t;
}

GramTensor random_tensor(std::mt19937_64& rng, std::size_t K, std::size_t count) {
  std::normal_distribution<double> d;
  std::bernoulli_distribution keep(0.2);
  GramTensor t;
  t.basis_size = K;
  for (std::size_t g = 0; g < count; ++g) {
    CsrMatrix m;
    m.rows = m.cols = K;
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t l = 0; l < K; ++l) {
        if (!keep(rng)) continue;
        m.col.push_back(l);
        m.val.emplace_back(d(rng), d(rng));
      }
      m.row_ptr.push_back(m.col.size());
    }
    t.transposed.push_back(m.transpose());
    t.forward.push_back(std::move(m));
  }
  return t;
}

std::vector<cplx> random_coeffs(std::mt19937_64& rng, std::size_t size) {
  std::normal_distribution<double> d;
  std::vector<cplx> c(size);
  for (auto& x : c) x = {d(rng), d(rng)};
  return c;
}

// f(C) = sum |forms(C) - target|^2
double objective(const GramTensor& t, const std::vector<cplx>& c, std::size_t n, const std::vector<cplx>& target,
                 std::vector<cplx>& residual) {
  residual.assign(target.size(), {});
  serial::gram_forms(t, c, n, residual);
  double f = 0.0;
  for (std::size_t q = 0; q < residual.size(); ++q) {
    residual[q] -= target[q];
    f += std::norm(residual[q]);
  }
  return f;
}

}  // namespace

TEST_CASE("markov_apply: serial and parallel agree bitwise") {
  std::mt19937_64 rng(5);
  omp_set_num_threads(4);
  for (int t = 0; t < 5; ++t) {
    auto table = random_table(rng, 3000, 6);
    std::vector<double> x(3000);
    std::normal_distribution<double> d;
    for (auto& v : x) v = d(rng);
    std::vector<double> a(3000), b(3000);
    serial::markov_apply(table, x, a);
    parallel::markov_apply(table, x, b);
    CHECK(a == b);
  }
}

TEST_CASE("markov_apply on a 3-cycle") {
  NeighborTable t{3, 2, {1, 2, 2, 0, 0, 1}, 0.5};
  std::vector<double> x{1, 2, 4}, y(3);
  serial::markov_apply(t, x, y);
  CHECK(y == std::vector<double>{3.0, 2.5, 1.5});
}

TEST_CASE("gram forms and gradient: serial and parallel agree bitwise") {
  std::mt19937_64 rng(6);
  omp_set_num_threads(4);
  const std::size_t K = 40, n = 3;
  auto t = random_tensor(rng, K, 3);
  auto c = random_coeffs(rng, n * K);
  auto r = random_coeffs(rng, 3 * n * n);
  std::vector<cplx> fs(3 * n * n), fp(3 * n * n), gs(n * K), gp(n * K);
  serial::gram_forms(t, c, n, fs);
  parallel::gram_forms(t, c, n, fp);
  CHECK(fs == fp);
  serial::gram_gradient(t, c, n, r, gs);
  parallel::gram_gradient(t, c, n, r, gp);
  CHECK(gs == gp);
}

TEST_CASE("gram forms match a dense evaluation") {
  std::mt19937_64 rng(8);
  const std::size_t K = 6, n = 2;
  auto t = random_tensor(rng, K, 1);
  auto c = random_coeffs(rng, n * K);
  std::vector<cplx> f(n * n);
  serial::gram_forms(t, c, n, f);
  std::vector<cplx> dense(K * K);
  for (std::size_t k = 0; k < K; ++k) {
    for (auto p = t.forward[0].row_ptr[k]; p < t.forward[0].row_ptr[k + 1]; ++p) {
      dense[k * K + t.forward[0].col[p]] = t.forward[0].val[p];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cplx s{};
      for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t l = 0; l < K; ++l) s += c[i * K + k] * dense[k * K + l] * std::conj(c[j * K + l]);
      }
      CHECK(std::abs(s - f[i * n + j]) < 1e-12);
    }
  }
}

TEST_CASE("gradient matches central finite differences") {
  std::mt19937_64 rng(9);
  const std::size_t K = 12, n = 2, G = 3;
  auto t = random_tensor(rng, K, G);
  auto c = random_coeffs(rng, n * K);
  auto target = random_coeffs(rng, G * n * n);
  std::vector<cplx> res, grad(n * K);
  objective(t, c, n, target, res);
  serial::gram_gradient(t, c, n, res, grad);
  for (int trial = 0; trial < 10; ++trial) {
    auto e = random_coeffs(rng, n * K);
    const double h = 1e-6;
    auto plus = c, minus = c;
    for (std::size_t q = 0; q < c.size(); ++q) {
      plus[q] += h * e[q];
      minus[q] -= h * e[q];
    }
    std::vector<cplx> scratch;
    const double fd = (objective(t, plus, n, target, scratch) - objective(t, minus, n, target, scratch)) / (2 * h);
    // directional derivative of a real function of C along E: 2 Re <E, grad>
    double analytic = 0.0;
    for (std::size_t q = 0; q < c.size(); ++q) analytic += 2.0 * std::real(std::conj(grad[q]) * e[q]);
    CHECK(std::abs(fd - analytic) < 1e-5 * std::max(1.0, std::abs(analytic)));
  }
}
