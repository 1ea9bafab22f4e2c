// hmc-ergo: sampling and ergodicity diagnostics from the command line.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "hmc_ergo/config.hpp"
#include "hmc_ergo/errors.hpp"
#include "hmc_ergo/experiment.hpp"

namespace {

using hmc_ergo::Command;
using hmc_ergo::ExperimentConfig;

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::string> out;
  std::optional<double> beta;
  std::optional<double> epsilon;
  std::optional<int> steps;
  std::optional<double> x0;
  std::optional<long> n;
  std::optional<std::string> probe;
  bool no_timing = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw hmc_ergo::ValidationError({"config: cannot read '" + path + "'"});
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::uint64_t parse_seed(const std::string& text, const std::string& origin) {
  std::size_t used = 0;
  unsigned long long value = 0;
  try {
    value = std::stoull(text, &used, 10);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || text.front() == '-') {
    throw hmc_ergo::ValidationError({origin + ": not an unsigned 64-bit integer ('" + text + "')"});
  }
  return value;
}

void apply_environment(ExperimentConfig& cfg) {
  if (const char* seed = std::getenv("HMC_ERGO_SEED"); seed && *seed) cfg.seed = parse_seed(seed, "HMC_ERGO_SEED");
  if (const char* out = std::getenv("HMC_ERGO_OUT"); out && *out) cfg.output_dir = out;
}

void set_first(std::vector<double>& v, long dim, double value) {
  if (v.empty()) v.assign(static_cast<std::size_t>(std::max(1L, dim)), 0.0);
  v.front() = value;
}

void apply_flags(ExperimentConfig& cfg, const Overrides& o, Command command) {
  if (o.seed) cfg.seed = *o.seed;
  if (o.jobs) cfg.jobs = *o.jobs;
  if (o.out) cfg.output_dir = *o.out;
  if (o.no_timing) cfg.timing = false;
  if (o.epsilon) cfg.kernel.epsilon = *o.epsilon;
  if (o.steps) cfg.kernel.steps = *o.steps;

  switch (command) {
    case Command::dynamic:
      if (o.beta) cfg.dynamic.beta = *o.beta;
      if (o.x0) cfg.dynamic.x0 = *o.x0;
      if (o.n) cfg.dynamic.n = *o.n;
      if (o.probe) cfg.dynamic.probe = *o.probe;
      break;
    case Command::sweep:
      if (o.beta) cfg.sweep.betas = {*o.beta};
      if (o.x0) cfg.sweep.x0 = *o.x0;
      if (o.n) cfg.sweep.n = *o.n;
      break;
    case Command::diagnose:
      if (o.beta) {
        cfg.target.kind = "expfam";
        cfg.target.beta = *o.beta;
      }
      for (auto& p : cfg.probes) {
        if (o.x0) set_first(p.x0, cfg.target.dim, *o.x0);
        if (o.n) p.n = *o.n;
      }
      break;
    case Command::sample:
    case Command::degenerate_demo:
      if (o.beta) {
        cfg.target.kind = "expfam";
        cfg.target.beta = *o.beta;
      }
      if (o.x0) set_first(cfg.x0, cfg.target.dim, *o.x0);
      if (o.n) cfg.samples = *o.n;
      break;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HMC sampling and geometric-ergodicity diagnostics"};
  app.set_version_flag("--version", std::string(hmc_ergo::kVersion));
  app.require_subcommand(1);

  Overrides o;
  auto common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "master seed (unsigned 64-bit)");
    sub->add_option("--jobs", o.jobs, "maximum concurrent chains or probes");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--beta", o.beta, "tail exponent");
    sub->add_option("--epsilon", o.epsilon, "leapfrog step size");
    sub->add_option("--steps", o.steps, "leapfrog steps (L, or Lmax for the uniform law)");
    sub->add_option("--x0", o.x0, "start point (first coordinate)");
    sub->add_option("--n", o.n, "number of draws or transitions");
    sub->add_flag("--no-timing", o.no_timing, "write 0 for wall time so reruns are byte-identical");
  };

  const std::pair<const char*, const char*> subcommands[] = {
      {"sample", "run HMC chains and write every transition"},
      {"diagnose", "run the configured drift, rejection and tail probes"},
      {"sweep", "drift ratio and tail class across beta"},
      {"dynamic", "one-dimensional randomized-time sampler probes"},
      {"degenerate-demo", "Gaussian chain trapped on a two-point orbit"},
  };
  for (const auto& [name, description] : subcommands) {
    auto* sub = app.add_subcommand(name, description);
    common(sub);
    if (std::string(name) == "dynamic") {
      sub->add_option("--probe", o.probe, "drift | virial | period | exhaustion | chain");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : hmc_ergo::kExitValidation;
  }

  const auto* chosen = app.get_subcommands().front();
  const Command command = *hmc_ergo::parse_command(chosen->get_name());

  ExperimentConfig cfg;
  try {
    if (!o.config_path.empty()) cfg = hmc_ergo::parse_config(read_file(o.config_path));
    apply_environment(cfg);
    apply_flags(cfg, o, command);
  } catch (const hmc_ergo::ValidationError& e) {
    std::cerr << e.what() << '\n';
    return hmc_ergo::kExitValidation;
  }
  return hmc_ergo::run_experiment(cfg, command);
}
