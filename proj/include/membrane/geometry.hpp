#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace membrane {

/// Problem instance: diffusion operator B, membrane normal nu, permeability
/// q in [-1,1], tangential drift coefficient alpha in the hyperplane
/// S = { x : (x, nu) = 0 }.
struct ModelParams {
  int d = 2;
  Eigen::MatrixXd B;      // d x d, symmetric positive definite
  Eigen::VectorXd nu;     // unit normal of S
  double q = 0.0;
  Eigen::VectorXd alpha;  // must satisfy (alpha, nu) = 0

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const;
};

/// Linear-algebra decomposition induced by (B, nu): the normal variance
/// sigma2 = (B nu, nu), the coupling vector b = pi_S B nu, and the lateral
/// covariance operator B_S expressed in an orthonormal basis of S. Immutable
/// after construction; safe to share across threads.
struct SpaceDecomposition {
  int d = 0;
  Eigen::VectorXd nu;
  Eigen::VectorXd N;         // conormal vector B nu
  double sigma2 = 0.0;       // (B nu, nu)
  Eigen::VectorXd b;         // pi_S B nu, ambient coordinates
  Eigen::MatrixXd basis;     // d x (d-1), orthonormal columns spanning S
  Eigen::MatrixXd B_S;       // (d-1) x (d-1), in basis coordinates
  Eigen::MatrixXd chol_B_S;  // lower-triangular L with B_S = L L^T

  // Cached for density evaluation in the quadrature hot loop.
  Eigen::VectorXd b_basis;      // basis^T b
  Eigen::VectorXd alpha_basis;  // basis^T alpha
  double log_det_B_S = 0.0;
  Eigen::MatrixXd chol_B;  // lower-triangular factor of B
  double log_det_B = 0.0;
};

/// Builds the decomposition. The basis of S comes from the Householder
/// reflection taking nu to (a sign of) e_d, so it is deterministic; B_S is
/// computed as the Schur complement basis^T (B - (B nu)(B nu)^T / sigma2) basis.
SpaceDecomposition build_decomposition(const ModelParams& params);

/// Orthogonal projection x - (x, nu) nu onto S.
Eigen::VectorXd project_to_S(const Eigen::VectorXd& x,
                             const SpaceDecomposition& dec);

/// Scalar component (x, nu).
double nu_component(const Eigen::VectorXd& x, const SpaceDecomposition& dec);

}  // namespace membrane
