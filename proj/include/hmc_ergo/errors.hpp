#ifndef HMC_ERGO_ERRORS_HPP
#define HMC_ERGO_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace hmc_ergo {

/// Caller broke a precondition (dimension mismatch, non-positive step size, ...).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input carried non-finite values.
class RejectedInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Gradient requested at an excluded singular point.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A leapfrog trajectory produced a non-finite state.
class TrajectoryDivergence : public std::runtime_error {
 public:
  TrajectoryDivergence(int last_finite_index)
      : std::runtime_error("trajectory diverged after step " +
                           std::to_string(last_finite_index)),
        last_finite_index_(last_finite_index) {}

  int last_finite_index() const { return last_finite_index_; }

 private:
  int last_finite_index_;
};

/// Energy level at or below the potential minimum: the orbit is a fixed point.
class DegenerateOrbit : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical refinement loop hit its cap before meeting tolerance.
class AccuracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every problem found while validating an experiment configuration.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> problems)
      : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

  const std::vector<std::string>& problems() const { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& problems) {
    std::string out = "invalid configuration:";
    for (const auto& p : problems) out += "\n  " + p;
    return out;
  }

  std::vector<std::string> problems_;
};

/// Report rows that do not share one schema.
class SchemaError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace hmc_ergo

#endif  // HMC_ERGO_ERRORS_HPP
