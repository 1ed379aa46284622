#pragma once

// Dense brute-force independence oracle for small finite-dimensional
// instances, written against Eigen only.

#include <Eigen/Dense>
#include <random>

#include "helpers.hpp"

namespace testing {

struct DenseInstance {
  OraclePtr group;
  std::vector<Eigen::MatrixXcd> gens;  // generator matrices in standard coordinates
  Representation rep;
  int radius = 1;
  std::vector<Eigen::VectorXcd> A, a, B;
};

inline Eigen::VectorXcd to_dense(const SparseVector& v, Eigen::Index dim) {
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(dim);
  for (const auto& [k, c] : v.entries()) x(k.site.payload()[0]) = c;
  return x;
}

inline SparseVector from_dense(const Eigen::VectorXcd& x) {
  SparseVector v;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) != cplx{}) v.set({{}, Element::coordinate(i)}, x(i));
  }
  return v;
}

inline std::vector<SparseVector> from_dense(const std::vector<Eigen::VectorXcd>& xs) {
  std::vector<SparseVector> out;
  for (const auto& x : xs) out.push_back(from_dense(x));
  return out;
}

inline Eigen::MatrixXcd word_matrix(const std::vector<Eigen::MatrixXcd>& gens, const Word& w) {
  const auto d = gens[0].rows();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(d, d);
  for (auto l : w) {
    const auto& s = gens[static_cast<std::size_t>(std::abs(l) - 1)];
    m = m * (l > 0 ? Eigen::MatrixXcd(s) : Eigen::MatrixXcd(s.adjoint()));
  }
  return m;
}

// Random vector in the span of a random subset of the columns of u.
inline Eigen::VectorXcd random_block_vector(const Eigen::MatrixXcd& u, std::mt19937_64& rng) {
  std::bernoulli_distribution keep(0.5);
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(u.rows());
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    if (keep(rng)) x += random_complex(rng) * u.col(j);
  }
  return x;
}

// Cyclic, Z^2 or S3 acting on C^d (d <= 8) in a random orthonormal basis, with
// vectors drawn from random sums of eigenlines so that both verdicts occur.
inline DenseInstance random_dense_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 2), dim(2, 8), small(1, 3), count(1, 3);
  const int k = kind(rng);
  DenseInstance inst{nullptr, {}, Representation::trivial(free2(), 1), small(rng), {}, {}, {}};
  Eigen::MatrixXcd u;
  if (k == 2) {
    inst.group = s3_table();
    auto model = dense_model(Representation::regular(inst.group));
    u = random_unitary(6, rng);
    for (const auto& m : model.generators) inst.gens.push_back(u * m * u.adjoint());
    inst.radius = 1;
  } else {
    const int d = dim(rng);
    u = random_unitary(static_cast<std::size_t>(d), rng);
    if (k == 0) {
      const int n = std::uniform_int_distribution<int>(2, 6)(rng);
      inst.group = cyclic_table(n);
      std::uniform_int_distribution<int> ch(0, n - 1);
      Eigen::VectorXcd phases(d);
      for (int j = 0; j < d; ++j) phases(j) = std::polar(1.0, 2 * M_PI * ch(rng) / n);
      inst.gens.push_back(u * phases.asDiagonal() * u.adjoint());
    } else {
      inst.group = lattice2();
      std::uniform_int_distribution<int> ch(0, 3);
      for (int g = 0; g < 2; ++g) {
        Eigen::VectorXcd phases(d);
        for (int j = 0; j < d; ++j) phases(j) = std::polar(1.0, 2 * M_PI * ch(rng) / 4);
        inst.gens.push_back(u * phases.asDiagonal() * u.adjoint());
      }
    }
  }
  inst.rep = Representation::matrix(inst.group, inst.gens);
  for (int i = count(rng); i > 0; --i) inst.A.push_back(random_block_vector(u, rng));
  for (int i = count(rng); i > 0; --i) inst.a.push_back(random_block_vector(u, rng));
  for (int i = count(rng); i > 0; --i) inst.B.push_back(random_block_vector(u, rng));
  return inst;
}

struct DenseVerdict {
  bool independent = true;
  double worst = 0.0;
};

class DenseOracle {
 public:
  DenseOracle(const DenseInstance& inst) : inst_(inst) {
    for (const auto& g : ball(*inst.group, inst.radius).elements) {
      mats_.push_back(word_matrix(inst.gens, inst.group->word_of(g)));
    }
  }

  // Orthonormal basis of span{g a : g in B_r, a in vs} (SVD rank).
  Eigen::MatrixXcd closure(const std::vector<Eigen::VectorXcd>& vs) const {
    const auto d = inst_.gens[0].rows();
    Eigen::MatrixXcd orbit(d, static_cast<Eigen::Index>(mats_.size() * vs.size()));
    Eigen::Index c = 0;
    for (const auto& m : mats_) {
      for (const auto& v : vs) orbit.col(c++) = m * v;
    }
    return range(orbit);
  }

  static Eigen::MatrixXcd range(const Eigen::MatrixXcd& m) {
    if (m.cols() == 0) return Eigen::MatrixXcd(m.rows(), 0);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeFullU);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
      if (svd.singularValues()(i) > 1e-9) ++rank;
    }
    return svd.matrixU().leftCols(rank);
  }

  DenseVerdict verdict(const std::vector<Eigen::VectorXcd>& a, const std::vector<Eigen::VectorXcd>& b,
                       const Eigen::MatrixXcd& q, double tol) const {
    const auto d = inst_.gens[0].rows();
    Eigen::MatrixXcd perp = Eigen::MatrixXcd::Identity(d, d) - q * q.adjoint();
    DenseVerdict out;
    for (const auto& g : mats_) {
      for (const auto& x : a) {
        Eigen::VectorXcd rx = perp * g * x;
        for (const auto& h : mats_) {
          for (const auto& y : b) {
            Eigen::VectorXcd ry = perp * h * y;
            out.worst = std::max(out.worst, std::abs(ry.dot(rx)));
          }
        }
      }
    }
    out.independent = out.worst <= tol;
    return out;
  }

 private:
  const DenseInstance& inst_;
  std::vector<Eigen::MatrixXcd> mats_;
};

}  // namespace testing
