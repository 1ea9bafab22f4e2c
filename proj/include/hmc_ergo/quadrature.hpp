#ifndef HMC_ERGO_QUADRATURE_HPP
#define HMC_ERGO_QUADRATURE_HPP

#include <Eigen/Dense>

#include <cmath>

#include "hmc_ergo/errors.hpp"

namespace hmc_ergo {

/// n-point Gauss-Legendre rule on [-1, 1] from the Golub-Welsch eigenproblem.
template <typename Scalar = double>
class GaussLegendre {
 public:
  explicit GaussLegendre(int order) {
    if (order < 1) throw ContractViolation("quadrature order must be positive");
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Matrix jacobi = Matrix::Zero(order, order);
    for (int k = 1; k < order; ++k) {
      const Scalar b = Scalar(k) / std::sqrt(Scalar(4) * k * k - 1);
      jacobi(k, k - 1) = b;
      jacobi(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(jacobi);
    nodes_ = eig.eigenvalues();
    weights_ = Scalar(2) * eig.eigenvectors().row(0).transpose().array().square().matrix();
  }

  int order() const { return static_cast<int>(nodes_.size()); }
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& nodes() const { return nodes_; }
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& weights() const { return weights_; }

  /// Integral of f over [a, b] split into `panels` equal pieces.
  template <typename F>
  Scalar integrate(F&& f, Scalar a, Scalar b, long panels = 1) const {
    const Scalar width = (b - a) / Scalar(panels);
    Scalar total = 0;
    for (long j = 0; j < panels; ++j) {
      const Scalar lo = a + width * Scalar(j);
      const Scalar mid = lo + width / 2;
      Scalar panel = 0;
      for (Eigen::Index i = 0; i < nodes_.size(); ++i) panel += weights_(i) * f(mid + width / 2 * nodes_(i));
      total += panel * width / 2;
    }
    return total;
  }

 private:
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> nodes_;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weights_;
};

}  // namespace hmc_ergo

#endif  // HMC_ERGO_QUADRATURE_HPP
