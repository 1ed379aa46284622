#include "repwb/amalgam.hpp"

#include <algorithm>
#include <string>

#include "repwb/errors.hpp"

namespace repwb {

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;

double max_abs(const MatrixXcd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// Orthonormal basis of the orthogonal complement of the columns of b (assumed
// orthonormal), from Gram-Schmidt over the standard basis with one
// re-orthogonalisation pass.
MatrixXcd complement(const MatrixXcd& b) {
  const Index d = b.rows();
  const Index want = d - b.cols();
  MatrixXcd basis(d, d);
  basis.leftCols(b.cols()) = b;
  Index have = b.cols();
  for (Index k = 0; k < d && have < d; ++k) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Unit(d, k);
    for (int pass = 0; pass < 2; ++pass) v -= basis.leftCols(have) * (basis.leftCols(have).adjoint() * v);
    const double nv = v.norm();
    if (nv < 1e-8) continue;
    basis.col(have++) = v / nv;
  }
  if (have != d) throw std::logic_error("complement: rank deficiency in Gram-Schmidt");
  return basis.rightCols(want);
}

// Nearest unitary (polar factor); absorbs rounding left over from
// compressing an approximately invariant complement.
MatrixXcd polar_unitary(const MatrixXcd& m) {
  if (m.size() == 0) return m;
  Eigen::JacobiSVD<MatrixXcd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

struct Side {
  DenseModel model;
  MatrixXcd incl;
  MatrixXcd comp;
};

Side prepare(const Representation& pi, const DenseModel& pi_model, const Inclusion& inc, const char* name) {
  if (!(inc.target.group() == pi.group())) {
    throw PreconditionError(std::string(name) + ": inclusion target is over a different group");
  }
  if (inc.image.dim() != pi_model.dim()) {
    throw PreconditionError(std::string(name) + ": image has " + std::to_string(inc.image.dim()) +
                            " vectors, pi has dimension " + std::to_string(pi_model.dim()));
  }
  Side s{dense_model(inc.target), {}, {}};
  const auto d = static_cast<Index>(s.model.dim());
  const auto p = static_cast<Index>(pi_model.dim());
  s.incl.resize(d, p);
  for (Index k = 0; k < p; ++k) {
    inc.target.check_member(inc.image.basis[static_cast<std::size_t>(k)]);
    s.incl.col(k) = s.model.to_dense(inc.image.basis[static_cast<std::size_t>(k)]);
  }
  const double iso = max_abs(s.incl.adjoint() * s.incl - MatrixXcd::Identity(p, p));
  if (iso > kInvarianceTol) {
    throw PreconditionError(std::string(name) + ": inclusion is not isometric (defect " + std::to_string(iso) + ")");
  }
  const auto& gens = pi.group().generators();
  for (std::size_t g = 0; g < gens.size(); ++g) {
    const MatrixXcd& u = s.model.generators[g];
    MatrixXcd ub = u * s.incl;
    const double leak = max_abs(ub - s.incl * (s.incl.adjoint() * ub));
    const double equiv = max_abs(ub - s.incl * pi_model.generators[g]);
    const double worst = std::max(leak, equiv);
    if (worst > kInvarianceTol) {
      throw PreconditionError(std::string(name) + ": image is not " + (leak > kInvarianceTol ? "invariant" : "equivariant") +
                              " under generator " + pi.group().format(gens[g]) + " (defect " + std::to_string(worst) + ")");
    }
  }
  s.comp = complement(s.incl);
  return s;
}

}  // namespace

Amalgam amalgamate(const Representation& pi, const Inclusion& rho, const Inclusion& eta) {
  if (!pi.dimension()) throw UnsupportedError("amalgamate: pi must be finite-dimensional");
  if (!rho.target.dimension() || !eta.target.dimension()) {
    throw UnsupportedError("amalgamate: rho and eta must be finite-dimensional");
  }
  auto pi_model = dense_model(pi);
  auto r = prepare(pi, pi_model, rho, "rho");
  auto e = prepare(pi, pi_model, eta, "eta");

  const Index p = static_cast<Index>(pi_model.dim());
  const Index cr = r.comp.cols();
  const Index ce = e.comp.cols();
  const Index total = p + cr + ce;

  std::vector<MatrixXcd> gens;
  for (std::size_t g = 0; g < pi_model.generators.size(); ++g) {
    MatrixXcd a = MatrixXcd::Zero(total, total);
    a.block(0, 0, p, p) = pi_model.generators[g];
    a.block(p, p, cr, cr) = polar_unitary(r.comp.adjoint() * r.model.generators[g] * r.comp);
    a.block(p + cr, p + cr, ce, ce) = polar_unitary(e.comp.adjoint() * e.model.generators[g] * e.comp);
    gens.push_back(std::move(a));
  }

  Amalgam out{Representation::matrix(pi.oracle(), std::move(gens)),
              static_cast<std::size_t>(p),
              static_cast<std::size_t>(cr),
              static_cast<std::size_t>(ce),
              std::move(r.model),
              std::move(e.model),
              MatrixXcd::Zero(total, static_cast<Index>(r.incl.rows())),
              MatrixXcd::Zero(total, static_cast<Index>(e.incl.rows())),
              r.incl,
              e.incl};
  out.embed_rho.topRows(p) = r.incl.adjoint();
  out.embed_rho.middleRows(p, cr) = r.comp.adjoint();
  out.embed_eta.topRows(p) = e.incl.adjoint();
  out.embed_eta.bottomRows(ce) = e.comp.adjoint();
  return out;
}

AmalgamCheck check_amalgam(const Amalgam& a, int radius) {
  AmalgamCheck c;
  const auto& oracle = a.rep.group();
  auto amalgam_model = dense_model(a.rep);
  const auto& jr = a.embed_rho;
  const auto& je = a.embed_eta;
  c.rho_isometry_defect = max_abs(jr.adjoint() * jr - MatrixXcd::Identity(jr.cols(), jr.cols()));
  c.eta_isometry_defect = max_abs(je.adjoint() * je - MatrixXcd::Identity(je.cols(), je.cols()));
  c.common_part_error = max_abs(jr * a.rho_inclusion - je * a.eta_inclusion);
  auto b = ball(oracle, radius);
  for (const auto& g : b.elements) {
    MatrixXcd ag = dense_matrix_of(amalgam_model, oracle, g);
    c.rho_gram_error =
        std::max(c.rho_gram_error, max_abs(jr.adjoint() * ag * jr - dense_matrix_of(a.rho_model, oracle, g)));
    c.eta_gram_error =
        std::max(c.eta_gram_error, max_abs(je.adjoint() * ag * je - dense_matrix_of(a.eta_model, oracle, g)));
  }
  return c;
}

}  // namespace repwb
