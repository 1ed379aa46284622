#pragma once

// Data-parallel inner loops. Each kernel has a serial reference in
// kernels::serial and an OpenMP version in kernels::parallel; both compute
// every output element with the same summation order, so results agree
// bitwise. Library code calls kernels::parallel.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace repwb::kernels {

using cplx = std::complex<double>;

// Fixed-width neighbour lists: row i holds `width` indices into the input
// vector, -1 meaning "outside the support".
struct NeighborTable {
  std::size_t rows = 0;
  std::size_t width = 0;
  std::vector<std::int64_t> index;
  double weight = 1.0;

  std::int64_t at(std::size_t row, std::size_t k) const { return index[row * width + k]; }
};

// Compressed sparse row complex matrix.
struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::size_t> col;
  std::vector<cplx> val;

  CsrMatrix transpose() const;
};

// Per-g tensors of the witness search: forward = T_g, transposed = T_g^T.
struct GramTensor {
  std::vector<CsrMatrix> forward;
  std::vector<CsrMatrix> transposed;
  std::size_t basis_size = 0;
};

namespace serial {

// y[i] = weight * sum_k x[nbr(i, k)]
void markov_apply(const NeighborTable& table, std::span<const double> x, std::span<double> y);

// forms[g*n*n + i*n + j] = sum_{k,l} C[i,k] T_g[k,l] conj(C[j,l]); C is n x K row-major.
void gram_forms(const GramTensor& t, std::span<const cplx> coeffs, std::size_t n, std::span<cplx> forms);

// grad = sum_g R_g C T_g^* + R_g^* C T_g, with R_g the n x n blocks of `residual`.
void gram_gradient(const GramTensor& t, std::span<const cplx> coeffs, std::size_t n, std::span<const cplx> residual,
                   std::span<cplx> grad);

}  // namespace serial

namespace parallel {

void markov_apply(const NeighborTable& table, std::span<const double> x, std::span<double> y);
void gram_forms(const GramTensor& t, std::span<const cplx> coeffs, std::size_t n, std::span<cplx> forms);
void gram_gradient(const GramTensor& t, std::span<const cplx> coeffs, std::size_t n, std::span<const cplx> residual,
                   std::span<cplx> grad);

}  // namespace parallel

}  // namespace repwb::kernels
