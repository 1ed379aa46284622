#include "repwb/amenability.hpp"

#include <algorithm>
#include <array>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <string>
#include <unordered_map>

#include "repwb/errors.hpp"

namespace repwb {

namespace {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

std::string fraction(const cpp_int& num, const cpp_int& den) {
  cpp_rational q(num, den);
  return q.str();
}

double ratio_to_double(const cpp_int& num, const cpp_int& den) {
  return static_cast<double>(cpp_rational(num, den));
}

void finish_estimators(ReturnProbabilityTable& t) {
  t.root.assign(t.p.size(), 1.0);
  t.ratio.assign(t.p.size(), 1.0);
  for (std::size_t n = 1; n < t.p.size(); ++n) {
    t.root[n] = std::pow(t.p[n], 1.0 / (2.0 * static_cast<double>(n)));
    t.ratio[n] = std::sqrt(t.p[n] / t.p[n - 1]);
  }
}

// Walks on a free group on its standard letters, lumped by distance from e:
// from 0 there are m ways out, from d >= 1 there are m - 1 ways out and 1 back.
void radial(ReturnProbabilityTable& t, std::size_t m, const ReturnProbabilityOptions& opt) {
  const int steps = 2 * t.n_max;
  std::vector<cpp_int> cnt{1};
  std::vector<double> prob;
  cpp_int total = 1;
  bool exact = true;
  for (int s = 1; s <= steps; ++s) {
    if (exact && s > opt.exact_steps) {
      exact = false;
      prob.resize(cnt.size());
      for (std::size_t d = 0; d < cnt.size(); ++d) prob[d] = ratio_to_double(cnt[d], total);
    }
    if (exact) {
      std::vector<cpp_int> next(cnt.size() + 1);
      for (std::size_t d = 0; d < cnt.size(); ++d) {
        if (cnt[d] == 0) continue;
        next[d + 1] += cnt[d] * (d == 0 ? m : m - 1);
        if (d > 0) next[d - 1] += cnt[d];
      }
      cnt.swap(next);
      total *= m;
      if (s % 2 == 0) {
        t.p.push_back(ratio_to_double(cnt[0], total));
        t.exact.push_back(fraction(cnt[0], total));
      }
    } else {
      const double md = static_cast<double>(m);
      std::vector<double> next(prob.size() + 1, 0.0);
      for (std::size_t d = 0; d < prob.size(); ++d) {
        next[d + 1] += prob[d] * (d == 0 ? 1.0 : (md - 1.0) / md);
        if (d > 0) next[d - 1] += prob[d] / md;
      }
      prob.swap(next);
      if (s % 2 == 0) t.p.push_back(prob[0]);
    }
    t.max_support = std::max(t.max_support, static_cast<std::size_t>(s + 1));
  }
}

void convolution(ReturnProbabilityTable& t, const GroupOracle& g, const ReturnProbabilityOptions& opt) {
  const auto& sym = g.symmetric_generators();
  const std::size_t m = sym.size();
  const int steps = 2 * t.n_max;
  std::vector<Element> cur{g.identity()};
  std::vector<cpp_int> cnt{1};
  std::vector<double> prob;
  cpp_int total = 1;
  bool exact = true;
  t.max_support = 1;
  for (int s = 1; s <= steps; ++s) {
    std::vector<Element> next;
    std::unordered_map<Element, std::size_t, ElementHash> next_index;
    for (const auto& x : cur) {
      for (const auto& a : sym) {
        auto y = g.multiply(x, a);
        if (next_index.emplace(y, next.size()).second) next.push_back(std::move(y));
      }
    }
    if (next.size() > opt.support_cap) {
      throw ResourceError("return probabilities: support cap " + std::to_string(opt.support_cap) +
                          " exceeded at step " + std::to_string(s));
    }
    std::unordered_map<Element, std::size_t, ElementHash> cur_index;
    for (std::size_t i = 0; i < cur.size(); ++i) cur_index.emplace(cur[i], i);
    kernels::NeighborTable table{next.size(), m, std::vector<std::int64_t>(next.size() * m, -1),
                                 1.0 / static_cast<double>(m)};
    for (std::size_t i = 0; i < next.size(); ++i) {
      for (std::size_t k = 0; k < m; ++k) {
        auto it = cur_index.find(g.multiply(next[i], sym[k]));
        if (it != cur_index.end()) table.index[i * m + k] = static_cast<std::int64_t>(it->second);
      }
    }

    if (exact && s > opt.exact_steps) {
      exact = false;
      prob.resize(cnt.size());
      for (std::size_t i = 0; i < cnt.size(); ++i) prob[i] = ratio_to_double(cnt[i], total);
    }
    if (exact) {
      std::vector<cpp_int> nc(next.size());
      for (std::size_t i = 0; i < next.size(); ++i) {
        for (std::size_t k = 0; k < m; ++k) {
          auto j = table.at(i, k);
          if (j >= 0) nc[i] += cnt[static_cast<std::size_t>(j)];
        }
      }
      cnt.swap(nc);
      total *= m;
    } else {
      std::vector<double> np(next.size());
      kernels::parallel::markov_apply(table, prob, np);
      prob.swap(np);
    }
    cur.swap(next);
    t.max_support = std::max(t.max_support, cur.size());
    if (s % 2 == 0) {
      const auto e = next_index.at(g.identity());
      if (exact) {
        t.p.push_back(ratio_to_double(cnt[e], total));
        t.exact.push_back(fraction(cnt[e], total));
      } else {
        t.p.push_back(prob[e]);
      }
    }
  }
}

}  // namespace

ReturnProbabilityTable return_probabilities(const GroupOracle& oracle, int n_max, const ReturnProbabilityOptions& opt) {
  if (n_max < 1) throw PreconditionError("return probabilities: n_max must be >= 1");
  ReturnProbabilityTable t;
  t.n_max = n_max;
  t.p.push_back(1.0);
  t.exact.push_back("1");
  const std::size_t m = oracle.symmetric_generators().size();
  if (m == 0) {
    t.method = "convolution";
    for (int n = 1; n <= n_max; ++n) {
      t.p.push_back(1.0);
      if (2 * n <= opt.exact_steps) t.exact.push_back("1");
    }
    t.max_support = 1;
  } else if (oracle.kind() == GroupKind::free && oracle.standard_generators() && !opt.force_convolution) {
    t.method = "radial";
    radial(t, m, opt);
  } else {
    t.method = "convolution";
    convolution(t, oracle, opt);
  }
  finish_estimators(t);
  return t;
}

kernels::NeighborTable ball_markov_table(const GroupOracle& oracle, const Ball& b) {
  const auto& sym = oracle.symmetric_generators();
  const std::size_t m = sym.size();
  kernels::NeighborTable table{b.size(), m, std::vector<std::int64_t>(b.size() * m, -1),
                               m == 0 ? 0.0 : 1.0 / static_cast<double>(m)};
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      if (auto j = b.find(oracle.multiply(sym[k], b.elements[i]))) table.index[i * m + k] = static_cast<std::int64_t>(*j);
    }
  }
  return table;
}

TopEigen top_eigenpair(const kernels::NeighborTable& table, const EigenOptions& opt) {
  const std::size_t n = table.rows;
  TopEigen out;
  out.vector.assign(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> y(n);
  double best = 0.0;
  for (std::size_t it = 0; it < opt.max_iterations; ++it) {
    kernels::parallel::markov_apply(table, out.vector, y);
    double theta = 0.0;
    for (std::size_t i = 0; i < n; ++i) theta += out.vector[i] * y[i];
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) res += (y[i] - theta * out.vector[i]) * (y[i] - theta * out.vector[i]);
    res = std::sqrt(res);
    best = theta;
    if (res <= opt.tol) {
      out.value = theta;
      out.residual = res;
      out.iterations = it;
      return out;
    }
    // power step on (M + I) / 2
    double nrm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      out.vector[i] = 0.5 * (out.vector[i] + y[i]);
      nrm += out.vector[i] * out.vector[i];
    }
    nrm = std::sqrt(nrm);
    for (auto& v : out.vector) v /= nrm;
  }
  throw ConvergenceError("power iteration did not reach residual " + std::to_string(opt.tol) + " within " +
                             std::to_string(opt.max_iterations) + " iterations",
                         best);
}

SchurBound schur_upper_bound(const GroupOracle& oracle, int radius, std::size_t cap) {
  SchurBound out;
  const auto& sym = oracle.symmetric_generators();
  const auto m = static_cast<double>(sym.size());
  if (sym.empty() || radius < 1) return out;
  const auto b = ball(oracle, radius, cap);
  const auto inner_end = b.layer_end[static_cast<std::size_t>(radius - 1)];
  const bool free_ok = oracle.kind() == GroupKind::free && oracle.standard_generators() && radius >= 2;
  const auto order = oracle.order();
  const bool finite_ok = order && inner_end == *order;
  if (!free_ok && !finite_ok) return out;

  // (down, level, up) counts of |s x| - |x| over x in B_{r-1}
  std::vector<std::array<int, 3>> profiles;
  for (std::size_t i = 0; i < inner_end; ++i) {
    std::array<int, 3> p{0, 0, 0};
    for (const auto& s : sym) {
      const int d = b.length[*b.find(oracle.multiply(s, b.elements[i]))] - b.length[i];
      ++p[static_cast<std::size_t>(d + 1)];
    }
    if (std::find(profiles.begin(), profiles.end(), p) == profiles.end()) profiles.push_back(p);
  }
  auto c = [&](double alpha) {
    double worst = 0.0;
    for (const auto& p : profiles) {
      worst = std::max(worst, (p[0] * std::exp(alpha) + p[1] + p[2] * std::exp(-alpha)) / m);
    }
    return worst;
  };
  // c is convex in alpha: golden-section search on [0, 50]
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0, hi = 50.0;
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = c(x1), f2 = c(x2);
  for (int it = 0; it < 200; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = c(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = c(x2);
    }
  }
  out.alpha = 0.5 * (lo + hi);
  out.raw = std::min(c(out.alpha), c(0.0));
  if (out.raw == c(0.0)) out.alpha = 0.0;
  out.value = std::min(1.0, out.raw * (1.0 + 1e-12));
  out.certified = true;
  return out;
}

DefectReport min_defect(const GroupOracle& oracle, int radius, const EigenOptions& opt) {
  if (radius < 1) throw PreconditionError("min_defect: radius must be >= 1");
  DefectReport out;
  out.radius = radius;
  const auto b = ball(oracle, radius, opt.cap);
  out.ball_size = b.size();
  if (oracle.symmetric_generators().empty()) {
    out.argmin = SparseVector::delta(oracle.identity());
    out.certified_lower_bound_used = true;
    return out;
  }
  const auto top = top_eigenpair(ball_markov_table(oracle, b), opt);
  out.min_avg_sq_defect = std::max(0.0, 2.0 - 2.0 * top.value);
  out.residual = top.residual;
  out.iterations = top.iterations;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (top.vector[i] != 0.0) out.argmin.set({{}, b.elements[i]}, top.vector[i]);
  }
  const auto schur = schur_upper_bound(oracle, radius, opt.cap);
  out.certified_lower_bound_used = schur.certified;
  out.certified_lower_bound = schur.certified ? std::max(0.0, 2.0 - 2.0 * schur.value) : 0.0;
  return out;
}

SpectralBound spectral_radius_bound(const GroupOracle& oracle, int radius, int n_max, const EigenOptions& opt,
                                    const ReturnProbabilityOptions& rp) {
  if (radius < 1) throw PreconditionError("spectral_radius_bound: radius must be >= 1");
  SpectralBound out;
  out.radius = radius;
  out.n_max = n_max;
  if (oracle.symmetric_generators().empty()) {
    out.ball_eigenvalue = out.ratio_lower = out.root_lower = out.lower = out.upper = 1.0;
    out.upper_certified = true;
    return out;
  }
  const auto b = ball(oracle, radius, opt.cap);
  out.ball_eigenvalue = top_eigenpair(ball_markov_table(oracle, b), opt).value;
  const auto table = return_probabilities(oracle, n_max, rp);
  for (std::size_t n = 1; n < table.p.size(); ++n) {
    out.ratio_lower = std::max(out.ratio_lower, table.ratio[n]);
    out.root_lower = std::max(out.root_lower, table.root[n]);
  }
  // a Markov operator has norm <= 1; only rounding can push an estimator past it
  out.lower = std::min(1.0, std::max({out.ball_eigenvalue, out.ratio_lower, out.root_lower}));
  const auto schur = schur_upper_bound(oracle, radius, opt.cap);
  out.upper = schur.value;
  out.upper_certified = schur.certified;
  out.schur_alpha = schur.alpha;
  return out;
}

}  // namespace repwb
