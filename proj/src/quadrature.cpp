#include "dualquant/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include "dualquant/error.hpp"

namespace dualquant {

GaussLegendre::GaussLegendre(int order) {
  require(order >= 1, ErrorKind::InvalidArgument, "quadrature order must be >= 1");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  nodes_ = eig.eigenvalues();
  weights_ = 2.0 * eig.eigenvectors().row(0).transpose().array().square();
}

}  // namespace dualquant
