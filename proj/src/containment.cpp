#include "repwb/containment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>

#include "repwb/errors.hpp"
#include "repwb/kernels.hpp"

namespace repwb {

namespace {

void check_elements(const GroupOracle& g, std::span<const Element> F) {
  if (F.empty()) throw PreconditionError("F must be nonempty");
  for (const auto& x : F) g.validate(x);
}

}  // namespace

GramFunction gram(const Representation& rep, std::span<const SparseVector> vectors, std::span<const Element> F) {
  check_elements(rep.group(), F);
  for (const auto& v : vectors) rep.check_member(v);
  GramFunction out{{F.begin(), F.end()}, vectors.size(), {}};
  const auto n = static_cast<Eigen::Index>(vectors.size());
  for (const auto& g : F) {
    Eigen::MatrixXcd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      auto gv = rep.apply(g, vectors[static_cast<std::size_t>(i)]);
      for (Eigen::Index j = 0; j < n; ++j) m(i, j) = inner(gv, vectors[static_cast<std::size_t>(j)]);
    }
    out.M.push_back(std::move(m));
  }
  return out;
}

double discrepancy(const GramFunction& target, const GramFunction& other) {
  if (target.n != other.n) {
    throw PreconditionError("witness count " + std::to_string(other.n) + " does not match target count " +
                            std::to_string(target.n));
  }
  if (target.F != other.F) throw PreconditionError("Gram functions are over different sets F");
  double worst = 0.0;
  for (std::size_t g = 0; g < target.M.size(); ++g) {
    if (target.n > 0) worst = std::max(worst, (target.M[g] - other.M[g]).cwiseAbs().maxCoeff());
  }
  return worst;
}

double discrepancy(const GramFunction& target, const Representation& rep, std::span<const SparseVector> witnesses) {
  if (witnesses.size() != target.n) {
    throw PreconditionError("witness count " + std::to_string(witnesses.size()) + " does not match target count " +
                            std::to_string(target.n));
  }
  return discrepancy(target, gram(rep, witnesses, target.F));
}

namespace {

using kernels::cplx;

kernels::GramTensor build_tensor(const Representation& pi, const Subspace& basis, std::span<const Element> F) {
  const std::size_t K = basis.dim();
  std::map<BasisKey, std::vector<std::pair<std::size_t, cplx>>> where;
  for (std::size_t l = 0; l < K; ++l) {
    for (const auto& [key, c] : basis.basis[l].entries()) where[key].emplace_back(l, c);
  }
  kernels::GramTensor t;
  t.basis_size = K;
  for (const auto& g : F) {
    kernels::CsrMatrix m;
    m.rows = m.cols = K;
    for (std::size_t k = 0; k < K; ++k) {
      std::map<std::size_t, cplx> row;
      const auto image = pi.apply(g, basis.basis[k]);
      for (const auto& [key, a] : image.entries()) {
        auto it = where.find(key);
        if (it == where.end()) continue;
        for (const auto& [l, c] : it->second) row[l] += a * std::conj(c);
      }
      for (const auto& [l, v] : row) {
        if (v == cplx{}) continue;
        m.col.push_back(l);
        m.val.push_back(v);
      }
      m.row_ptr.push_back(m.col.size());
    }
    t.transposed.push_back(m.transpose());
    t.forward.push_back(std::move(m));
  }
  return t;
}

struct Restart {
  std::vector<cplx> coeffs;
  double discrepancy = 0.0;
  std::size_t iterations = 0;
};

class Objective {
 public:
  Objective(const kernels::GramTensor& t, const GramFunction& target) : t_(t), n_(target.n) {
    for (const auto& m : target.M) {
      for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = 0; j < n_; ++j) flat_.push_back(m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      }
    }
    residual_.resize(flat_.size());
  }

  // Fills the residual; returns (sum of squares, max abs).
  std::pair<double, double> eval(const std::vector<cplx>& c) {
    kernels::parallel::gram_forms(t_, c, n_, residual_);
    double f = 0.0, worst = 0.0;
    for (std::size_t q = 0; q < residual_.size(); ++q) {
      residual_[q] -= flat_[q];
      const double a = std::abs(residual_[q]);
      f += a * a;
      worst = std::max(worst, a);
    }
    return {f, worst};
  }

  void gradient(const std::vector<cplx>& c, std::vector<cplx>& grad) const {
    kernels::parallel::gram_gradient(t_, c, n_, residual_, grad);
  }

 private:
  const kernels::GramTensor& t_;
  std::size_t n_;
  std::vector<cplx> flat_;
  std::vector<cplx> residual_;
};

// Initial witness norms: sqrt of the largest diagonal target entry.
std::vector<double> start_scales(const GramFunction& target) {
  std::vector<double> s(target.n, 0.0);
  for (std::size_t i = 0; i < target.n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (const auto& m : target.M) s[i] = std::max(s[i], std::abs(m(ii, ii)));
    s[i] = std::sqrt(s[i]);
  }
  return s;
}

Restart descend(const kernels::GramTensor& t, const GramFunction& target, const SearchOptions& opt,
                std::vector<cplx> c);

Restart run_restart(const kernels::GramTensor& t, const GramFunction& target, const std::vector<double>& scales,
                    const SearchOptions& opt, std::size_t index, const Subspace& basis) {
  const std::size_t K = t.basis_size, n = target.n;
  std::vector<cplx> c(n * K);
  if (index >= opt.restarts) {
    const auto& warm = opt.warm_starts[index - opt.restarts];
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < K; ++k) c[i * K + k] = inner(warm[i], basis.basis[k]);
    }
    return descend(t, target, opt, std::move(c));
  }
  std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal;
  for (std::size_t i = 0; i < n; ++i) {
    double nrm = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      c[i * K + k] = {normal(rng), normal(rng)};
      nrm += std::norm(c[i * K + k]);
    }
    const double s = nrm > 0 ? scales[i] / std::sqrt(nrm) : 0.0;
    for (std::size_t k = 0; k < K; ++k) c[i * K + k] *= s;
  }
  return descend(t, target, opt, std::move(c));
}

Restart descend(const kernels::GramTensor& t, const GramFunction& target, const SearchOptions& opt,
                std::vector<cplx> c) {
  const std::size_t K = t.basis_size, n = target.n;
  Objective obj(t, target);
  std::vector<cplx> grad(n * K), trial(n * K);
  auto [f, worst] = obj.eval(c);
  Restart best{c, worst, 0};
  double step = 1.0;
  std::size_t it = 0;
  for (; it < opt.budget && worst > opt.tol; ++it) {
    obj.gradient(c, grad);
    double g2 = 0.0;
    for (const auto& x : grad) g2 += std::norm(x);
    if (!(g2 > 1e-300)) break;
    bool accepted = false;
    for (; step > 1e-20; step *= 0.5) {
      for (std::size_t q = 0; q < c.size(); ++q) trial[q] = c[q] - step * grad[q];
      auto [ft, wt] = obj.eval(trial);
      if (ft <= f - 1e-4 * step * 2.0 * g2) {
        c.swap(trial);
        f = ft;
        worst = wt;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    step *= 2.0;
    if (worst < best.discrepancy) best = {c, worst, it + 1};
  }
  best.iterations = it;
  return best;
}

}  // namespace

WitnessReport search_witness(const GramFunction& target, const Representation& pi, const Subspace& basis,
                             const SearchOptions& options) {
  if (basis.dim() == 0) throw PreconditionError("search_witness: empty basis");
  if (!(options.tol > 0)) throw PreconditionError("search_witness: tol must be positive");
  if (options.restarts + options.warm_starts.size() == 0) throw PreconditionError("search_witness: need at least one restart");
  if (target.n == 0) throw PreconditionError("search_witness: target has no vectors");
  check_elements(pi.group(), target.F);
  for (const auto& b : basis.basis) pi.check_member(b);
  basis.check_orthonormal();

  const auto t = build_tensor(pi, basis, target.F);
  const auto scales = start_scales(target);
  for (const auto& w : options.warm_starts) {
    if (w.size() != target.n) throw PreconditionError("search_witness: warm start has the wrong number of vectors");
    for (const auto& v : w) pi.check_member(v);
  }
  const std::size_t total = options.restarts + options.warm_starts.size();
  std::vector<Restart> runs(total);
  const auto count = static_cast<std::int64_t>(total);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t r = 0; r < count; ++r) {
    runs[static_cast<std::size_t>(r)] = run_restart(t, target, scales, options, static_cast<std::size_t>(r), basis);
  }

  WitnessReport rep;
  std::size_t best = 0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    rep.restart_discrepancies.push_back(runs[r].discrepancy);
    if (runs[r].discrepancy < runs[best].discrepancy) best = r;
  }
  rep.best_restart = best;
  rep.iterations = runs[best].iterations;
  const std::size_t K = basis.dim();
  for (std::size_t i = 0; i < target.n; ++i) {
    SparseVector w;
    for (std::size_t k = 0; k < K; ++k) {
      const cplx a = runs[best].coeffs[i * K + k];
      if (a != cplx{}) axpy(a, basis.basis[k], w);
    }
    w.prune(0.0);
    rep.witnesses.push_back(std::move(w));
  }
  rep.discrepancy = discrepancy(target, pi, rep.witnesses);
  rep.converged = rep.discrepancy <= options.tol;
  return rep;
}

namespace {

void collect_basis(const Representation& rep, std::vector<std::uint32_t>& path, const Ball& b, std::size_t copies,
                   std::vector<SparseVector>& out) {
  switch (rep.kind()) {
    case RepKind::regular:
      for (const auto& x : b.elements) out.push_back(SparseVector::delta(x, path));
      break;
    case RepKind::trivial:
    case RepKind::matrix:
      for (std::size_t k = 0; k < rep.leaf_dim(); ++k) {
        out.push_back(SparseVector::delta(Element::coordinate(static_cast<std::int64_t>(k)), path));
      }
      break;
    case RepKind::direct_sum:
      for (std::uint32_t i = 0; i < rep.parts().size(); ++i) {
        path.push_back(i);
        collect_basis(rep.parts()[i], path, b, copies, out);
        path.pop_back();
      }
      break;
    case RepKind::multiple: {
      const auto n = rep.copies().value_or(copies);
      for (std::uint32_t i = 0; i < n; ++i) {
        path.push_back(i);
        collect_basis(rep.base(), path, b, copies, out);
        path.pop_back();
      }
      break;
    }
  }
}

}  // namespace

Subspace ball_basis(const Representation& rep, int radius, std::size_t copies, std::size_t cap) {
  const auto b = ball(rep.group(), radius, cap);
  std::vector<std::uint32_t> path;
  Subspace s{rep, {}};
  collect_basis(rep, path, b, copies, s.basis);
  if (s.basis.size() > cap) {
    throw ResourceError("ball basis of size " + std::to_string(s.basis.size()) + " exceeds cap " + std::to_string(cap));
  }
  return s;
}

FolnerWitness folner_witness(const GroupOracle& oracle, std::span<const Element> F, double eps, std::size_t cap) {
  if (!(eps > 0)) throw PreconditionError("folner_witness: eps must be positive");
  check_elements(oracle, F);
  FolnerWitness out;
  out.defects.assign(F.size(), 0.0);

  if (oracle.kind() == GroupKind::finite_table) {
    const auto n = oracle.table().size();
    const double amp = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      out.vector.set({{}, Element(GroupKind::finite_table, {static_cast<std::int64_t>(i)})}, amp);
    }
    out.set_size = n;
    return out;
  }
  if (oracle.kind() != GroupKind::fg_abelian) {
    throw UnsupportedError("folner_witness: no Folner construction for " + to_string(oracle.kind()) + " groups");
  }

  const auto& tor = oracle.torsion();
  std::vector<std::size_t> free_coords;
  std::size_t torsion_size = 1;
  for (std::size_t i = 0; i < tor.size(); ++i) {
    if (tor[i] == 0) {
      free_coords.push_back(i);
    } else {
      torsion_size *= static_cast<std::size_t>(tor[i]);
    }
  }
  if (torsion_size > cap) throw ResourceError("folner_witness: torsion part exceeds element cap " + std::to_string(cap));

  // |g Phi \ Phi| / |Phi| = (N^f - prod_i max(0, N - |c_i|)) / N^f for the box [0,N)^f.
  auto numerators = [&](std::int64_t N, std::int64_t& volume) {
    volume = 1;
    for (std::size_t k = 0; k < free_coords.size(); ++k) volume *= N;
    std::vector<std::int64_t> num;
    for (const auto& g : F) {
      std::int64_t overlap = 1;
      for (auto i : free_coords) overlap *= std::max<std::int64_t>(0, N - std::abs(g.payload()[i]));
      num.push_back(2 * (volume - overlap));
    }
    return num;
  };

  std::int64_t N = 1, volume = 1;
  std::vector<std::int64_t> num;
  if (!free_coords.empty()) {
    for (;; ++N) {
      num = numerators(N, volume);
      if (static_cast<std::size_t>(volume) * torsion_size > cap) {
        throw ResourceError("folner_witness: box exceeds element cap " + std::to_string(cap) + " at side " +
                            std::to_string(N));
      }
      std::int64_t total = 0;
      for (auto x : num) total += x;
      if (static_cast<long double>(total) <= static_cast<long double>(eps) * static_cast<long double>(volume)) break;
    }
    out.box_side = N;
    double total = 0.0;
    for (std::size_t k = 0; k < F.size(); ++k) {
      out.defects[k] = static_cast<double>(num[k]) / static_cast<double>(volume);
      total += out.defects[k];
    }
    out.total_defect = total;
  }

  out.set_size = static_cast<std::size_t>(volume) * torsion_size;
  const double amp = 1.0 / std::sqrt(static_cast<double>(out.set_size));
  std::vector<std::int64_t> x(tor.size(), 0);
  for (std::size_t idx = 0; idx < out.set_size; ++idx) {
    std::size_t rest = idx;
    for (std::size_t i = 0; i < tor.size(); ++i) {
      const auto side = static_cast<std::size_t>(tor[i] == 0 ? N : tor[i]);
      x[i] = static_cast<std::int64_t>(rest % side);
      rest /= side;
    }
    out.vector.set({{}, Element(GroupKind::fg_abelian, x)}, amp);
  }
  return out;
}

TransferReport transfer_witness(const TransferInput& in) {
  const auto& eta = in.eta;
  if (eta.kind() != RepKind::direct_sum || eta.parts().size() != 2 || eta.parts()[1].kind() != RepKind::multiple ||
      eta.parts()[1].copies().has_value() || eta.parts()[1].base().kind() != RepKind::regular) {
    throw PreconditionError("transfer: eta must be direct_sum(pi, multiple(regular, inf))");
  }
  const auto& oracle = eta.group();
  if (!(in.sigma.group() == oracle)) throw PreconditionError("transfer: sigma is over a different group");
  if (oracle.kind() != GroupKind::fg_abelian && oracle.kind() != GroupKind::finite_table) {
    throw UnsupportedError("transfer: " + to_string(oracle.kind()) + " is not an amenable oracle kind");
  }
  if (!(in.eps > 0)) throw PreconditionError("transfer: eps must be positive");
  const auto rho = Representation::direct_sum({eta, in.sigma});
  for (const auto& p : in.params) eta.check_member(p);
  for (const auto& t : in.targets) rho.check_member(t);

  TransferReport out;
  std::vector<SparseVector> defining;
  for (const auto& p : in.params) defining.push_back(p.prefixed(0));
  defining.insert(defining.end(), in.targets.begin(), in.targets.end());
  out.target = gram(rho, defining, in.F);

  CopyAllocator alloc({1}, in.copy_cap);
  std::vector<SparseVector> u, w;
  for (const auto& p : in.params) alloc.touch(p);
  for (const auto& t : in.targets) {
    u.push_back(t.component(0));
    w.push_back(t.component(1));
    alloc.touch(u.back());
  }
  out.supported_copies = alloc.extent();

  // sigma leaves carrying target mass, by path
  std::map<std::vector<std::uint32_t>, std::vector<SparseVector>> parts;
  double w_max = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w_max = std::max(w_max, w[i].norm2());
    for (const auto& [key, a] : w[i].entries()) {
      auto& slot = parts[key.path];
      slot.resize(w.size());
      slot[i].set({{}, key.site}, a);
    }
  }

  std::vector<SparseVector> realized(w.size());
  for (const auto& [path, comps] : parts) {
    const auto leaf = in.sigma.leaf_at(path);
    if (leaf.kind() == RepKind::regular) {
      const auto c = static_cast<std::uint32_t>(alloc.fresh());
      out.fresh_copies.push_back(c);
      for (std::size_t i = 0; i < comps.size(); ++i) {
        for (const auto& [key, a] : comps[i].entries()) realized[i].add({{1, c}, key.site}, a);
      }
      continue;
    }
    // finite-dimensional leaf tau: W(k, y) = phi(y) (tau(y^-1) x)_k over d fresh copies,
    // so <lambda(g) W_i, W_j> = <lambda(g) phi, phi> <tau(g) x_i, x_j>
    if (!out.folner) out.folner = folner_witness(oracle, in.F, in.eps / w_max, in.element_cap);
    const auto d = leaf.leaf_dim();
    std::vector<std::uint32_t> copies;
    for (std::size_t k = 0; k < d; ++k) copies.push_back(static_cast<std::uint32_t>(alloc.fresh()));
    out.fresh_copies.insert(out.fresh_copies.end(), copies.begin(), copies.end());
    for (const auto& [ykey, phi] : out.folner->vector.entries()) {
      const auto& y = ykey.site;
      const Eigen::MatrixXcd m = leaf.matrix_of(oracle.invert(y));
      for (std::size_t i = 0; i < comps.size(); ++i) {
        Eigen::VectorXcd x = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(d));
        for (const auto& [key, a] : comps[i].entries()) x(key.site.payload()[0]) = a;
        if (x.isZero(0.0)) continue;
        Eigen::VectorXcd mx = phi * (m * x);
        for (std::size_t k = 0; k < d; ++k) {
          const cplx v = mx(static_cast<Eigen::Index>(k));
          if (v != cplx{}) realized[i].add({{1, copies[k]}, y}, v);
        }
      }
    }
  }

  auto& rep = out.report;
  rep.witnesses = in.params;
  for (std::size_t i = 0; i < u.size(); ++i) rep.witnesses.push_back(u[i] + realized[i]);
  rep.discrepancy = discrepancy(out.target, eta, rep.witnesses);
  rep.converged = rep.discrepancy < in.eps;
  rep.restart_discrepancies = {rep.discrepancy};
  return out;
}

}  // namespace repwb
