#include "membrane/geometry.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace membrane {

namespace {

constexpr double kExactTol = 1e-12;

[[noreturn]] void reject(const std::string& what) {
  throw std::invalid_argument("ModelParams: " + what);
}

}  // namespace

void ModelParams::validate() const {
  if (d < 2) reject("d must be >= 2");
  if (B.rows() != d || B.cols() != d)
    reject("B must be d x d");
  if (nu.size() != d) reject("nu must have dimension d");
  if (alpha.size() != d) reject("alpha must have dimension d");
  const double asym = (B - B.transpose()).cwiseAbs().maxCoeff();
  if (asym > kExactTol) {
    std::ostringstream os;
    os << "B is not symmetric (max |B - B^T| = " << asym << ")";
    reject(os.str());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
    reject("B is not positive definite");
  if (std::abs(nu.norm() - 1.0) > kExactTol) reject("nu is not a unit vector");
  if (std::abs(alpha.dot(nu)) > kExactTol)
    reject("alpha is not orthogonal to nu (alpha must lie in S)");
  if (std::abs(q) > 1.0) reject("|q| must be <= 1");
}

SpaceDecomposition build_decomposition(const ModelParams& params) {
  params.validate();
  const int d = params.d;

  SpaceDecomposition dec;
  dec.d = d;
  dec.nu = params.nu;
  dec.N = params.B * params.nu;
  dec.sigma2 = params.nu.dot(dec.N);
  dec.b = dec.N - dec.sigma2 * params.nu;  // pi_S B nu

  // Householder reflection H = I - 2 v v^T / (v, v) with v = nu + sign(nu_d) e_d
  // maps nu onto -sign(nu_d) e_d; its first d-1 columns are an orthonormal
  // basis of S.
  Eigen::VectorXd v = params.nu;
  const double s = (v[d - 1] >= 0.0) ? 1.0 : -1.0;
  v[d - 1] += s;
  const Eigen::MatrixXd H =
      Eigen::MatrixXd::Identity(d, d) - (2.0 / v.squaredNorm()) * v * v.transpose();
  dec.basis = H.leftCols(d - 1);

  dec.b_basis = dec.basis.transpose() * dec.b;
  dec.alpha_basis = dec.basis.transpose() * params.alpha;
  dec.B_S = dec.basis.transpose() * params.B * dec.basis -
            dec.b_basis * dec.b_basis.transpose() / dec.sigma2;

  Eigen::LLT<Eigen::MatrixXd> llt_s(dec.B_S);
  if (llt_s.info() != Eigen::Success)
    throw std::invalid_argument("ModelParams: lateral operator B_S is not positive definite");
  dec.chol_B_S = llt_s.matrixL();
  dec.log_det_B_S = 2.0 * dec.chol_B_S.diagonal().array().log().sum();

  Eigen::LLT<Eigen::MatrixXd> llt_b(params.B);
  dec.chol_B = llt_b.matrixL();
  dec.log_det_B = 2.0 * dec.chol_B.diagonal().array().log().sum();
  return dec;
}

Eigen::VectorXd project_to_S(const Eigen::VectorXd& x,
                             const SpaceDecomposition& dec) {
  return x - x.dot(dec.nu) * dec.nu;
}

double nu_component(const Eigen::VectorXd& x, const SpaceDecomposition& dec) {
  return x.dot(dec.nu);
}

}  // namespace membrane
