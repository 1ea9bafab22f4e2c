#ifndef HMC_ERGO_TARGETS_HPP
#define HMC_ERGO_TARGETS_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "hmc_ergo/errors.hpp"

namespace hmc_ergo {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Analytic tail parameters of pi(x) ~ exp(-alpha |x|^beta), when known.
struct TailMeta {
  double alpha;
  double beta;
};

/// A differentiable potential U = -log pi (up to a constant) on R^dim.
///
/// Type-erased so that kernels and diagnostics work with any user potential.
/// Instances are immutable and can be shared across threads.
template <typename Scalar = double>
class TargetDensity {
 public:
  using VectorType = Vector<Scalar>;
  using PotentialFn = std::function<Scalar(const VectorType&)>;
  using GradientFn = std::function<VectorType(const VectorType&)>;

  TargetDensity(Eigen::Index dim, PotentialFn potential, GradientFn gradient,
                std::optional<TailMeta> tail = std::nullopt, std::string name = "custom")
      : dim_(dim),
        potential_(std::move(potential)),
        gradient_(std::move(gradient)),
        tail_(tail),
        name_(std::move(name)) {
    if (dim_ < 1) throw ContractViolation("target dimension must be positive");
    if (!potential_ || !gradient_) throw ContractViolation("target needs potential and gradient");
  }

  Eigen::Index dim() const { return dim_; }
  const std::optional<TailMeta>& tail_meta() const { return tail_; }
  const std::string& name() const { return name_; }

  Scalar potential(const VectorType& x) const {
    check_input(x);
    return potential_(x);
  }

  VectorType gradient(const VectorType& x) const {
    check_input(x);
    return gradient_(x);
  }

 private:
  void check_input(const VectorType& x) const {
    if (x.size() != dim_) {
      throw ContractViolation("expected a point of dimension " + std::to_string(dim_) + ", got " +
                              std::to_string(x.size()));
    }
    if (!x.allFinite()) throw RejectedInput("non-finite coordinates passed to target '" + name_ + "'");
  }

  Eigen::Index dim_;
  PotentialFn potential_;
  GradientFn gradient_;
  std::optional<TailMeta> tail_;
  std::string name_;
};

template <typename Scalar>
Scalar potential(const TargetDensity<Scalar>& target, const Vector<Scalar>& x) {
  return target.potential(x);
}

template <typename Scalar>
Vector<Scalar> gradient(const TargetDensity<Scalar>& target, const Vector<Scalar>& x) {
  return target.gradient(x);
}

/// U(x) = alpha (kappa^2 + |x|^2)^(beta/2).
///
/// kappa > 0 smooths the core so U is C^1 everywhere; kappa = 0 gives the
/// exact power law, whose gradient at the origin is undefined for beta < 1.
struct ExpFamilyTarget {
  double alpha = 1.0;
  double beta = 2.0;
  double kappa = 1.0;
  Eigen::Index dim = 1;

  void validate() const {
    if (!(alpha > 0) || !std::isfinite(alpha)) throw ContractViolation("alpha must be positive");
    if (!(beta > 0) || !std::isfinite(beta)) throw ContractViolation("beta must be positive");
    if (!(kappa >= 0) || !std::isfinite(kappa)) throw ContractViolation("kappa must be nonnegative");
    if (dim < 1) throw ContractViolation("dim must be positive");
  }

  template <typename Scalar>
  Scalar potential(const Vector<Scalar>& x) const {
    using std::pow;
    const Scalar k = kappa;
    const Scalar s = k * k + x.squaredNorm();
    return Scalar(alpha) * pow(s, Scalar(beta) / 2);
  }

  template <typename Scalar>
  Vector<Scalar> gradient(const Vector<Scalar>& x) const {
    using std::pow;
    const Scalar k = kappa;
    const Scalar s = k * k + x.squaredNorm();
    if (s == Scalar(0)) {
      if (beta < 1) throw DomainError("gradient of alpha |x|^beta is singular at the origin for beta < 1");
      return Vector<Scalar>::Zero(x.size());
    }
    return (Scalar(alpha) * Scalar(beta) * pow(s, Scalar(beta) / 2 - 1)) * x;
  }

  template <typename Scalar = double>
  TargetDensity<Scalar> to_target() const {
    validate();
    const ExpFamilyTarget self = *this;
    return TargetDensity<Scalar>(
        dim, [self](const Vector<Scalar>& x) { return self.potential<Scalar>(x); },
        [self](const Vector<Scalar>& x) { return self.gradient<Scalar>(x); },
        TailMeta{alpha, beta}, "expfam");
  }
};

/// U(x) = 1/2 sum_i precision_i x_i^2.
struct GaussianTarget {
  Eigen::VectorXd precision_diag = Eigen::VectorXd::Ones(1);

  static GaussianTarget standard(Eigen::Index dim = 1) {
    return GaussianTarget{Eigen::VectorXd::Ones(dim)};
  }

  void validate() const {
    if (precision_diag.size() < 1) throw ContractViolation("precision_diag must be non-empty");
    if (!precision_diag.allFinite() || (precision_diag.array() <= 0).any()) {
      throw ContractViolation("precision_diag entries must be positive and finite");
    }
  }

  template <typename Scalar = double>
  TargetDensity<Scalar> to_target() const {
    validate();
    const Vector<Scalar> prec = precision_diag.cast<Scalar>();
    std::optional<TailMeta> tail;
    // Isotropic precision c is the exp-family case alpha = c/2, beta = 2.
    if ((precision_diag.array() == precision_diag(0)).all()) tail = TailMeta{precision_diag(0) / 2, 2.0};
    return TargetDensity<Scalar>(
        precision_diag.size(),
        [prec](const Vector<Scalar>& x) { return Scalar(0.5) * (prec.array() * x.array().square()).sum(); },
        [prec](const Vector<Scalar>& x) -> Vector<Scalar> { return prec.cwiseProduct(x); }, tail,
        "gaussian");
  }
};

/// U = 0 on R^dim; the free particle, useful as a reference case.
template <typename Scalar = double>
TargetDensity<Scalar> flat_target(Eigen::Index dim) {
  return TargetDensity<Scalar>(
      dim, [](const Vector<Scalar>&) { return Scalar(0); },
      [dim](const Vector<Scalar>&) -> Vector<Scalar> { return Vector<Scalar>::Zero(dim); },
      std::nullopt, "flat");
}

/// Rewrites a diagonal-mass Hamiltonian in unit-mass coordinates y = sqrt(m) x.
///
/// With p ~ N(0, diag(m)) and q = p / sqrt(m), the Hamiltonian becomes
/// U(y / sqrt(m)) + |q|^2 / 2, so all M = I formulas apply to the result.
template <typename Scalar>
TargetDensity<Scalar> unit_mass_view(const TargetDensity<Scalar>& target,
                                     const Eigen::VectorXd& mass_diag) {
  if (mass_diag.size() != target.dim()) throw ContractViolation("mass_diag length must equal target dim");
  if (!mass_diag.allFinite() || (mass_diag.array() <= 0).any()) {
    throw ContractViolation("mass entries must be positive and finite");
  }
  const Vector<Scalar> inv_sqrt = mass_diag.cast<Scalar>().array().sqrt().inverse();
  return TargetDensity<Scalar>(
      target.dim(),
      [target, inv_sqrt](const Vector<Scalar>& y) {
        return target.potential(Vector<Scalar>(inv_sqrt.cwiseProduct(y)));
      },
      [target, inv_sqrt](const Vector<Scalar>& y) -> Vector<Scalar> {
        return inv_sqrt.cwiseProduct(target.gradient(Vector<Scalar>(inv_sqrt.cwiseProduct(y))));
      },
      std::nullopt, target.name() + "/mass-scaled");
}

/// Largest |central difference - analytic gradient| over coordinates.
///
/// h <= 0 selects the default 1e-5 * max(1, |x|).
template <typename Scalar>
Scalar grad_fd_check(const TargetDensity<Scalar>& target, const Vector<Scalar>& x, Scalar h = Scalar(0)) {
  using std::abs;
  using std::max;
  if (h <= Scalar(0)) h = Scalar(1e-5) * max(Scalar(1), x.norm());
  const Vector<Scalar> g = target.gradient(x);
  Scalar worst = 0;
  Vector<Scalar> probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe(i) = x(i) + h;
    const Scalar up = target.potential(probe);
    probe(i) = x(i) - h;
    const Scalar down = target.potential(probe);
    probe(i) = x(i);
    worst = max(worst, abs((up - down) / (2 * h) - g(i)));
  }
  return worst;
}

}  // namespace hmc_ergo

#endif  // HMC_ERGO_TARGETS_HPP
