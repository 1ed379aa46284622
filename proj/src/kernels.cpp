#include "repwb/kernels.hpp"

namespace repwb::kernels {

CsrMatrix CsrMatrix::transpose() const {
  CsrMatrix t;
  t.rows = cols;
  t.cols = rows;
  t.row_ptr.assign(cols + 1, 0);
  for (auto c : col) ++t.row_ptr[c + 1];
  for (std::size_t i = 0; i < cols; ++i) t.row_ptr[i + 1] += t.row_ptr[i];
  t.col.resize(col.size());
  t.val.resize(val.size());
  std::vector<std::size_t> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (std::size_t r = 0; r < rows; ++r) {
    for (auto p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
      auto q = next[col[p]]++;
      t.col[q] = r;
      t.val[q] = val[p];
    }
  }
  return t;
}

namespace {

inline double markov_row(const NeighborTable& table, std::span<const double> x, std::size_t i) {
  double s = 0.0;
  for (std::size_t k = 0; k < table.width; ++k) {
    auto j = table.at(i, k);
    if (j >= 0) s += x[static_cast<std::size_t>(j)];
  }
  return table.weight * s;
}

// sum_k C[i,k] sum_{l in row k} T[k,l] conj(C[j,l])
inline cplx form_entry(const CsrMatrix& t, std::span<const cplx> c, std::size_t basis, std::size_t i,
                       std::size_t j) {
  cplx s{};
  const cplx* ci = c.data() + i * basis;
  const cplx* cj = c.data() + j * basis;
  for (std::size_t k = 0; k < t.rows; ++k) {
    if (ci[k] == cplx{}) continue;
    cplx row{};
    for (auto p = t.row_ptr[k]; p < t.row_ptr[k + 1]; ++p) row += t.val[p] * std::conj(cj[t.col[p]]);
    s += ci[k] * row;
  }
  return s;
}

inline cplx gradient_entry(const GramTensor& t, std::span<const cplx> c, std::size_t n, std::span<const cplx> res,
                           std::size_t i, std::size_t k) {
  const std::size_t basis = t.basis_size;
  cplx s{};
  for (std::size_t g = 0; g < t.forward.size(); ++g) {
    const auto& fw = t.forward[g];
    const auto& tr = t.transposed[g];
    const cplx* r = res.data() + g * n * n;
    for (std::size_t j = 0; j < n; ++j) {
      const cplx* cj = c.data() + j * basis;
      cplx ct_adj{};
      for (auto p = fw.row_ptr[k]; p < fw.row_ptr[k + 1]; ++p) ct_adj += cj[fw.col[p]] * std::conj(fw.val[p]);
      cplx ct{};
      for (auto p = tr.row_ptr[k]; p < tr.row_ptr[k + 1]; ++p) ct += cj[tr.col[p]] * tr.val[p];
      s += r[i * n + j] * ct_adj + std::conj(r[j * n + i]) * ct;
    }
  }
  return s;
}

}  // namespace

namespace serial {

void markov_apply(const NeighborTable& table, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < table.rows; ++i) y[i] = markov_row(table, x, i);
}

void gram_forms(const GramTensor& t, std::span<const cplx> coeffs, std::size_t n, std::span<cplx> forms) {
  for (std::size_t g = 0; g < t.forward.size(); ++g) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        forms[g * n * n + i * n + j] = form_entry(t.forward[g], coeffs, t.basis_size, i, j);
      }
    }
  }
}

void gram_gradient(const GramTensor& t, std::span<const cplx> coeffs, std::size_t n, std::span<const cplx> residual,
                   std::span<cplx> grad) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < t.basis_size; ++k) {
      grad[i * t.basis_size + k] = gradient_entry(t, coeffs, n, residual, i, k);
    }
  }
}

}  // namespace serial

namespace parallel {

void markov_apply(const NeighborTable& table, std::span<const double> x, std::span<double> y) {
  const auto rows = static_cast<std::int64_t>(table.rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < rows; ++i) {
    y[static_cast<std::size_t>(i)] = markov_row(table, x, static_cast<std::size_t>(i));
  }
}

void gram_forms(const GramTensor& t, std::span<const cplx> coeffs, std::size_t n, std::span<cplx> forms) {
  const auto total = static_cast<std::int64_t>(t.forward.size() * n * n);
#pragma omp parallel for schedule(static)
  for (std::int64_t q = 0; q < total; ++q) {
    const auto u = static_cast<std::size_t>(q);
    const auto g = u / (n * n);
    const auto i = (u / n) % n;
    const auto j = u % n;
    forms[u] = form_entry(t.forward[g], coeffs, t.basis_size, i, j);
  }
}

void gram_gradient(const GramTensor& t, std::span<const cplx> coeffs, std::size_t n, std::span<const cplx> residual,
                   std::span<cplx> grad) {
  const auto total = static_cast<std::int64_t>(n * t.basis_size);
#pragma omp parallel for schedule(static)
  for (std::int64_t q = 0; q < total; ++q) {
    const auto u = static_cast<std::size_t>(q);
    grad[u] = gradient_entry(t, coeffs, n, residual, u / t.basis_size, u % t.basis_size);
  }
}

}  // namespace parallel

}  // namespace repwb::kernels
