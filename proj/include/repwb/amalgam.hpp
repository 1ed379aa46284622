#pragma once

#include <Eigen/Dense>

#include "repwb/representation.hpp"

namespace repwb {

// Equivariant isometric inclusion of pi into `target`: image.basis[k] is the
// image of the k-th dense basis vector of pi.
struct Inclusion {
  Representation target;
  Subspace image;
};

// pi + rho' + eta', where rho' and eta' are the restrictions of rho and eta to
// the orthogonal complements of the embedded copies of pi. The embedding
// matrices map dense coordinates of rho (resp. eta) into the amalgam.
struct Amalgam {
  Representation rep;
  std::size_t dim_pi = 0;
  std::size_t dim_rho_complement = 0;
  std::size_t dim_eta_complement = 0;
  DenseModel rho_model;
  DenseModel eta_model;
  Eigen::MatrixXcd embed_rho;
  Eigen::MatrixXcd embed_eta;
  Eigen::MatrixXcd rho_inclusion;  // dense columns of the rho image basis
  Eigen::MatrixXcd eta_inclusion;
};

inline constexpr double kInvarianceTol = 1e-8;

// Finite-dimensional representations only. Throws PreconditionError naming the
// worst generator when an inclusion is not invariant / equivariant within
// kInvarianceTol.
Amalgam amalgamate(const Representation& pi, const Inclusion& rho, const Inclusion& eta);

struct AmalgamCheck {
  double rho_isometry_defect = 0.0;  // max |J^* J - I|
  double eta_isometry_defect = 0.0;
  double rho_gram_error = 0.0;       // max over g in B_r of |J^* A(g) J - rho(g)|
  double eta_gram_error = 0.0;
  double common_part_error = 0.0;    // max |J_rho iota_rho - J_eta iota_eta|
};

AmalgamCheck check_amalgam(const Amalgam& amalgam, int radius);

}  // namespace repwb
