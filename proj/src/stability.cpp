#include "repwb/stability.hpp"

#include <cmath>
#include <string>

#include "repwb/errors.hpp"

namespace repwb {

Subspace ClosureSpec::at_radius(int k) const {
  const auto d = dim_by_radius.at(static_cast<std::size_t>(k));
  return {realized.ambient, {realized.basis.begin(), realized.basis.begin() + static_cast<std::ptrdiff_t>(d)}};
}

Orbit orbit(const Representation& pi, std::span<const SparseVector> A, int radius, std::size_t cap) {
  if (radius < 0) throw PreconditionError("radius must be >= 0");
  for (const auto& a : A) pi.check_member(a);
  const auto b = ball(pi.group(), radius, cap);
  Orbit o;
  for (const auto& g : b.elements) {
    for (std::size_t i = 0; i < A.size(); ++i) {
      o.g.push_back(g);
      o.a.push_back(i);
      o.vectors.push_back(pi.apply(g, A[i]));
    }
  }
  return o;
}

ClosureSpec closure(const Representation& pi, std::span<const SparseVector> A, int radius,
                    std::span<const SparseVector> probes, std::size_t dim_cap, std::size_t element_cap) {
  if (A.empty()) throw PreconditionError("closure: A must be nonempty");
  if (radius < 0) throw PreconditionError("closure: radius must be >= 0");
  for (const auto& a : A) pi.check_member(a);
  for (const auto& p : probes) pi.check_member(p);
  const auto b = ball(pi.group(), radius, element_cap);
  ClosureSpec c{{A.begin(), A.end()}, radius, {pi, {}}, {}, {}};
  Orthonormalizer gs;
  std::size_t layer = 0;
  for (std::size_t x = 0; x < b.size(); ++x) {
    for (const auto& a : A) {
      gs.add(pi.apply(b.elements[x], a));
      if (gs.basis().size() > dim_cap) {
        throw ResourceError("closure: dimension cap " + std::to_string(dim_cap) + " exceeded at radius " +
                            std::to_string(b.length[x]));
      }
    }
    while (layer < b.layer_end.size() && x + 1 == b.layer_end[layer]) {
      c.dim_by_radius.push_back(gs.basis().size());
      ++layer;
    }
  }
  c.realized.basis = std::move(gs).take();
  for (const auto& p : probes) {
    std::vector<double> row;
    double acc = 0.0;
    std::size_t j = 0;
    for (auto d : c.dim_by_radius) {
      for (; j < d; ++j) acc += std::norm(inner(p, c.realized.basis[j]));
      row.push_back(std::sqrt(acc));
    }
    c.trace.push_back(std::move(row));
  }
  return c;
}

ClosureSpec span_closure(Subspace c, int radius) {
  std::vector<std::size_t> dims(static_cast<std::size_t>(radius) + 1, c.dim());
  auto generators = c.basis;
  return {std::move(generators), radius, std::move(c), std::move(dims), {}};
}

IndependenceVerdict nondividing(const Representation& pi, std::span<const SparseVector> a_vec,
                                std::span<const SparseVector> B, const ClosureSpec& C, double tol) {
  for (const auto& v : a_vec) pi.check_member(v);
  for (const auto& v : B) pi.check_member(v);
  const auto ball_r = ball(pi.group(), C.radius);
  const auto& els = ball_r.elements;
  auto residuals = [&](std::span<const SparseVector> vs) {
    std::vector<SparseVector> out;
    for (const auto& g : els) {
      for (const auto& v : vs) {
        auto gv = pi.apply(g, v);
        out.push_back(gv - project(gv, C.realized));
      }
    }
    return out;
  };
  const auto ra = residuals(a_vec);
  const auto rb = residuals(B);

  // one slot per (g, i) row; rows merge in order so the worst pair is
  // independent of thread scheduling
  const auto rows = static_cast<std::int64_t>(ra.size());
  std::vector<std::pair<std::size_t, cplx>> row_worst(ra.size(), {0, cplx{}});
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t r = 0; r < rows; ++r) {
    auto& slot = row_worst[static_cast<std::size_t>(r)];
    for (std::size_t q = 0; q < rb.size(); ++q) {
      const cplx v = inner(ra[static_cast<std::size_t>(r)], rb[q]);
      if (std::abs(v) > std::abs(slot.second)) slot = {q, v};
    }
  }

  IndependenceVerdict out;
  out.tolerance = tol;
  out.g = out.h = pi.group().identity();
  if (!ra.empty() && !rb.empty()) {
    std::size_t best_row = 0;
    for (std::size_t r = 1; r < row_worst.size(); ++r) {
      if (std::abs(row_worst[r].second) > std::abs(row_worst[best_row].second)) best_row = r;
    }
    const auto best_col = row_worst[best_row].first;
    out.value = row_worst[best_row].second;
    out.g = els[best_row / a_vec.size()];
    out.i = best_row % a_vec.size();
    out.h = els[best_col / B.size()];
    out.b = best_col % B.size();
    out.residual_a = ra[best_row];
    out.residual_b = rb[best_col];
  }
  out.independent = std::abs(out.value) <= tol;
  return out;
}

std::vector<SparseVector> canonical_base(const Representation& pi, std::span<const SparseVector> a_vec,
                                         const ClosureSpec& C) {
  for (const auto& v : a_vec) pi.check_member(v);
  const auto b = ball(pi.group(), C.radius);
  Orthonormalizer gs;
  for (const auto& g : b.elements) {
    for (const auto& a : a_vec) gs.add(project(pi.apply(g, a), C.realized));
  }
  return std::move(gs).take();
}

SuperstableResult superstable_approx(const Representation& pi, std::span<const SparseVector> a_vec,
                                     std::span<const SparseVector> A, double eps, int radius, std::size_t dim_cap,
                                     std::size_t element_cap) {
  if (!(eps > 0)) throw PreconditionError("superstable: eps must be positive");
  for (const auto& v : a_vec) pi.check_member(v);
  SuperstableResult out{closure(pi, A, radius, {}, dim_cap, element_cap), orbit(pi, A, radius, element_cap), {},
                        Subspace{pi, {}}, {}, {}};

  const auto n = a_vec.size();
  std::vector<SparseVector> target, d;  // P_C a_i and P_C a_i - P_{C_0} a_i
  for (const auto& a : a_vec) {
    target.push_back(project(a, out.closure.realized));
    d.push_back(target.back());
  }
  auto worst_gap = [&] {
    double w = 0.0;
    for (const auto& x : d) w = std::max(w, norm(x));
    return w;
  };

  std::vector<SparseVector> cand = out.orbit.vectors;  // residuals against C_0
  std::vector<bool> used(cand.size(), false);
  while (worst_gap() >= eps) {
    if (out.selected.size() >= dim_cap) {
      throw ResourceError("superstable: dimension cap " + std::to_string(dim_cap) + " reached; best gap " +
                          std::to_string(worst_gap()));
    }
    std::size_t pick = cand.size();
    double best = 0.0;
    for (std::size_t j = 0; j < cand.size(); ++j) {
      if (used[j]) continue;
      const double c2 = cand[j].norm2();
      if (c2 < 1e-20) continue;
      double gain = 0.0;
      for (std::size_t i = 0; i < n; ++i) gain += std::norm(inner(d[i], cand[j]));
      gain /= c2;
      if (gain > best) {
        best = gain;
        pick = j;
      }
    }
    if (pick == cand.size() || best <= 1e-300) {
      throw ResourceError("superstable: no orbit vector reduces the gap further; best gap " +
                          std::to_string(worst_gap()));
    }
    used[pick] = true;
    out.selected.push_back(pick);
    SparseVector q = cand[pick];
    for (const auto& b : out.c0.basis) axpy(-inner(q, b), b, q);
    q *= 1.0 / norm(q);
    q.prune(0.0);
    for (auto& x : d) axpy(-inner(x, q), q, x);
    for (std::size_t j = 0; j < cand.size(); ++j) {
      if (!used[j]) axpy(-inner(cand[j], q), q, cand[j]);
    }
    out.c0.basis.push_back(std::move(q));
  }

  for (std::size_t i = 0; i < n; ++i) {
    auto p0 = project(a_vec[i], out.c0);
    out.gaps.push_back(norm(target[i] - p0));
    auto b = a_vec[i] - target[i] + p0;
    b.prune(0.0);
    out.b_vec.push_back(std::move(b));
  }
  return out;
}

}  // namespace repwb
