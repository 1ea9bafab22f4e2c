#ifndef HMC_ERGO_CONFIG_HPP
#define HMC_ERGO_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "hmc_ergo/dynamic1d.hpp"
#include "hmc_ergo/kernels.hpp"
#include "hmc_ergo/targets.hpp"

namespace hmc_ergo {

struct TargetSpec {
  std::string kind = "gaussian";  // gaussian | expfam
  long dim = 1;
  std::vector<double> precision;  // gaussian; empty means all ones
  double alpha = 1.0;             // expfam
  double beta = 2.0;
  double kappa = 1.0;

  TargetDensity<double> build() const;
};

struct KernelSpec {
  double epsilon = 0.1;
  std::string law = "fixed";  // fixed | uniform
  int steps = 1;              // L for fixed, Lmax for uniform
  std::vector<double> mass;   // empty means unit mass

  HmcKernelConfig build() const;
};

/// One diagnostic probe. Unused fields keep their defaults.
struct ProbeSpec {
  std::string kind;  // drift | rejection | inward_rejection | ball_mass | sc_scan | classify
  std::vector<double> x0;
  double s = 0.1;
  long n = 10000;
  double delta = 1.0;
  std::vector<double> direction;
  std::vector<double> radii;
  double beta = 1.0;
};

struct DynamicSpec {
  double beta = 2.0;
  double x0 = 2.0;
  double p0 = 0.0;
  std::string probe = "drift";  // drift | virial | period | exhaustion | chain
  long n = 10000;
  double delta = 1.0;
  dynamic1d::FlowConfig flow;
};

struct SweepSpec {
  std::vector<double> betas{0.5, 1.0, 1.5, 2.0, 4.0};
  double x0 = 50.0;
  double s = 0.1;
  long n = 2000;
};

struct ExperimentConfig {
  TargetSpec target;
  KernelSpec kernel;
  std::vector<ProbeSpec> probes;
  DynamicSpec dynamic;
  SweepSpec sweep;
  std::uint64_t seed = 0;
  int chains = 1;
  int jobs = 1;
  long samples = 1000;
  std::vector<double> x0;  // start of sample chains; empty means the origin
  std::string output_dir = "out";
  bool timing = true;

  /// Every problem with the configuration, empty if valid.
  std::vector<std::string> problems() const;
  /// Throws ValidationError listing all problems.
  void validate() const;
};

/// Parses a JSON configuration document. Unknown keys, type errors and
/// contract violations are all collected into one ValidationError.
ExperimentConfig parse_config(const std::string& text);

/// Canonical JSON form of a configuration (stable key order).
std::string to_json(const ExperimentConfig& cfg);

/// FNV-1a 64-bit hash of to_json(cfg) ignoring jobs and output_dir, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace hmc_ergo

#endif  // HMC_ERGO_CONFIG_HPP
