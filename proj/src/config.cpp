#include "hmc_ergo/config.hpp"

#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <set>

#include <json.hpp>

#include "hmc_ergo/errors.hpp"

namespace hmc_ergo {

using nlohmann::json;

TargetDensity<double> TargetSpec::build() const {
  if (kind == "gaussian") {
    GaussianTarget g;
    g.precision_diag = precision.empty() ? Eigen::VectorXd::Ones(dim)
                                         : Eigen::Map<const Eigen::VectorXd>(precision.data(), precision.size()).eval();
    return g.to_target<double>();
  }
  if (kind == "expfam") return ExpFamilyTarget{alpha, beta, kappa, dim}.to_target<double>();
  throw ContractViolation("unknown target kind '" + kind + "'");
}

HmcKernelConfig KernelSpec::build() const {
  HmcKernelConfig cfg;
  cfg.epsilon = epsilon;
  if (law == "fixed") {
    cfg.steps = StepCountDistribution::fixed(steps);
  } else if (law == "uniform") {
    cfg.steps = StepCountDistribution::uniform(steps);
  } else {
    throw ContractViolation("unsupported step law '" + law + "'");
  }
  if (!mass.empty()) cfg.mass_diag = Eigen::Map<const Eigen::VectorXd>(mass.data(), mass.size());
  return cfg;
}

namespace {

const std::set<std::string> kProbeKinds{"drift", "rejection", "inward_rejection", "ball_mass", "sc_scan", "classify"};
const std::set<std::string> kDynamicProbes{"drift", "virial", "period", "exhaustion", "chain"};
const std::set<std::string> kUnboundedLaws{"geometric", "poisson", "negative_binomial", "exponential"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

bool positive(double v) { return v > 0 && std::isfinite(v); }

class Problems {
 public:
  void add(const std::string& field, const std::string& message) { list_.push_back(field + ": " + message); }
  void require(bool ok, const std::string& field, const std::string& message) {
    if (!ok) add(field, message);
  }
  std::vector<std::string> take() { return std::move(list_); }

 private:
  std::vector<std::string> list_;
};

void check_vector(Problems& problems, const std::string& field, const std::vector<double>& v, long dim) {
  if (static_cast<long>(v.size()) != dim) {
    problems.add(field, "expected " + std::to_string(dim) + " entries, got " + std::to_string(v.size()));
  }
  for (double e : v) {
    if (!std::isfinite(e)) {
      problems.add(field, "entries must be finite");
      break;
    }
  }
}

void check_probe(Problems& problems, const ProbeSpec& probe, std::size_t index, long dim) {
  const std::string at = "probes[" + std::to_string(index) + "]";
  if (!kProbeKinds.count(probe.kind)) {
    problems.add(at + ".kind", "unknown probe kind '" + probe.kind + "'");
    return;
  }
  if (probe.kind == "classify") {
    problems.require(positive(probe.beta), at + ".beta", "must be positive (got " + num(probe.beta) + ")");
    return;
  }
  if (probe.kind == "sc_scan") {
    check_vector(problems, at + ".direction", probe.direction, dim);
    bool nonzero = false;
    for (double e : probe.direction) nonzero |= e != 0;
    problems.require(nonzero, at + ".direction", "must be non-zero");
    problems.require(!probe.radii.empty(), at + ".radii", "must not be empty");
    for (std::size_t i = 0; i < probe.radii.size(); ++i) {
      if (!positive(probe.radii[i]) || (i > 0 && probe.radii[i] <= probe.radii[i - 1])) {
        problems.add(at + ".radii", "must be positive and strictly increasing");
        break;
      }
    }
    return;
  }
  check_vector(problems, at + ".x0", probe.x0, dim);
  problems.require(probe.n >= 100, at + ".n", "must be at least 100 (got " + std::to_string(probe.n) + ")");
  if (probe.kind == "drift") problems.require(positive(probe.s), at + ".s", "must be positive (got " + num(probe.s) + ")");
  if (probe.kind == "ball_mass") {
    problems.require(positive(probe.delta), at + ".delta", "must be positive (got " + num(probe.delta) + ")");
  }
}

}  // namespace

std::vector<std::string> ExperimentConfig::problems() const {
  Problems problems;

  // target
  const bool known_target = target.kind == "gaussian" || target.kind == "expfam";
  problems.require(known_target, "target.kind", "must be 'gaussian' or 'expfam' (got '" + target.kind + "')");
  problems.require(target.dim >= 1, "target.dim", "must be at least 1 (got " + std::to_string(target.dim) + ")");
  const long dim = std::max(1L, target.dim);
  if (target.kind == "gaussian" && !target.precision.empty()) {
    check_vector(problems, "target.precision", target.precision, dim);
    for (double e : target.precision) {
      if (!(e > 0)) {
        problems.add("target.precision", "entries must be positive");
        break;
      }
    }
  }
  if (target.kind == "expfam") {
    problems.require(positive(target.alpha), "target.alpha", "must be positive (got " + num(target.alpha) + ")");
    problems.require(positive(target.beta), "target.beta", "must be positive (got " + num(target.beta) + ")");
    problems.require(target.kappa >= 0 && std::isfinite(target.kappa), "target.kappa",
                     "must be nonnegative (got " + num(target.kappa) + ")");
  }

  // kernel
  problems.require(positive(kernel.epsilon), "kernel.epsilon", "must be positive (got " + num(kernel.epsilon) + ")");
  if (kUnboundedLaws.count(kernel.law)) {
    problems.add("kernel.law", "'" + kernel.law +
                                   "' has unbounded support; the step-count law must have bounded support "
                                   "and give L = 1 positive probability (use 'fixed' or 'uniform')");
  } else if (kernel.law != "fixed" && kernel.law != "uniform") {
    problems.add("kernel.law", "must be 'fixed' or 'uniform' (got '" + kernel.law + "')");
  }
  problems.require(kernel.steps >= 1, "kernel.steps", "must be at least 1 (got " + std::to_string(kernel.steps) + ")");
  if (!kernel.mass.empty()) {
    check_vector(problems, "kernel.mass", kernel.mass, dim);
    for (double m : kernel.mass) {
      if (!(m > 0)) {
        problems.add("kernel.mass", "entries must be positive");
        break;
      }
    }
  }

  for (std::size_t i = 0; i < probes.size(); ++i) check_probe(problems, probes[i], i, dim);

  // dynamic
  problems.require(positive(dynamic.beta), "dynamic.beta", "must be positive (got " + num(dynamic.beta) + ")");
  problems.require(std::isfinite(dynamic.x0), "dynamic.x0", "must be finite");
  problems.require(std::isfinite(dynamic.p0), "dynamic.p0", "must be finite");
  problems.require(kDynamicProbes.count(dynamic.probe) > 0, "dynamic.probe",
                   "must be one of drift, virial, period, exhaustion, chain (got '" + dynamic.probe + "')");
  problems.require(dynamic.n >= (dynamic.probe == "drift" ? 100 : 1), "dynamic.n",
                   "too small (got " + std::to_string(dynamic.n) + ")");
  problems.require(positive(dynamic.delta), "dynamic.delta", "must be positive (got " + num(dynamic.delta) + ")");
  problems.require(positive(dynamic.flow.energy_tol), "dynamic.energy_tol", "must be positive");
  problems.require(positive(dynamic.flow.average_tol), "dynamic.average_tol", "must be positive");
  problems.require(positive(dynamic.flow.initial_step), "dynamic.initial_step", "must be positive");
  problems.require(dynamic.flow.max_substeps >= 1, "dynamic.max_substeps", "must be positive");

  // sweep
  problems.require(!sweep.betas.empty(), "sweep.betas", "must not be empty");
  for (double b : sweep.betas) {
    if (!positive(b)) {
      problems.add("sweep.betas", "entries must be positive");
      break;
    }
  }
  problems.require(positive(sweep.x0), "sweep.x0", "must be positive (got " + num(sweep.x0) + ")");
  problems.require(positive(sweep.s), "sweep.s", "must be positive (got " + num(sweep.s) + ")");
  problems.require(sweep.n >= 100, "sweep.n", "must be at least 100 (got " + std::to_string(sweep.n) + ")");

  // run
  problems.require(chains >= 1, "chains", "must be at least 1");
  problems.require(jobs >= 1, "jobs", "must be at least 1");
  problems.require(samples >= 1, "samples", "must be at least 1");
  if (!x0.empty()) check_vector(problems, "x0", x0, dim);
  problems.require(!output_dir.empty(), "output_dir", "must not be empty");
  return problems.take();
}

void ExperimentConfig::validate() const {
  auto list = problems();
  if (!list.empty()) throw ValidationError(std::move(list));
}

namespace {

/// Reads typed fields out of one JSON object, recording every problem.
class Section {
 public:
  Section(const json& node, std::string path, std::vector<std::string>& errors)
      : node_(node), path_(std::move(path)), errors_(errors) {
    if (!node_.is_object()) error(path_, "expected an object");
  }

  bool ok() const { return node_.is_object(); }

  void allow(std::initializer_list<const char*> keys) {
    if (!ok()) return;
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, _] : node_.items()) {
      if (!allowed.count(key)) error(field(key), "unknown key");
    }
  }

  bool has(const char* key) const { return ok() && node_.contains(key); }
  const json& at(const char* key) const { return node_.at(key); }
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void read(const char* key, double& out) {
    if (!has(key)) return;
    if (!at(key).is_number()) return error(field(key), "expected a number");
    out = at(key).get<double>();
  }

  void read(const char* key, long& out) {
    if (!has(key)) return;
    if (!at(key).is_number_integer()) return error(field(key), "expected an integer");
    out = at(key).get<long>();
  }

  void read(const char* key, int& out) {
    long v = out;
    read(key, v);
    out = static_cast<int>(v);
  }

  void read(const char* key, bool& out) {
    if (!has(key)) return;
    if (!at(key).is_boolean()) return error(field(key), "expected true or false");
    out = at(key).get<bool>();
  }

  void read(const char* key, std::string& out) {
    if (!has(key)) return;
    if (!at(key).is_string()) return error(field(key), "expected a string");
    out = at(key).get<std::string>();
  }

  void read(const char* key, std::uint64_t& out) {
    if (!has(key)) return;
    if (!at(key).is_number_unsigned()) return error(field(key), "expected a nonnegative 64-bit integer");
    out = at(key).get<std::uint64_t>();
  }

  void read(const char* key, std::vector<double>& out) {
    if (!has(key)) return;
    const json& v = at(key);
    if (v.is_number()) {
      out = {v.get<double>()};
      return;
    }
    if (!v.is_array()) return error(field(key), "expected a number or an array of numbers");
    out.clear();
    for (const auto& e : v) {
      if (!e.is_number()) return error(field(key), "expected an array of numbers");
      out.push_back(e.get<double>());
    }
  }

  void error(const std::string& where, const std::string& message) { errors_.push_back(where + ": " + message); }

 private:
  const json& node_;
  std::string path_;
  std::vector<std::string>& errors_;
};

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError({std::string("config: malformed JSON: ") + e.what()});
  }

  std::vector<std::string> errors;
  ExperimentConfig cfg;
  Section root(doc, "", errors);
  root.allow({"target", "kernel", "probes", "dynamic", "sweep", "seed", "chains", "jobs", "samples", "x0",
              "output_dir", "timing"});
  root.read("seed", cfg.seed);
  root.read("chains", cfg.chains);
  root.read("jobs", cfg.jobs);
  root.read("samples", cfg.samples);
  root.read("x0", cfg.x0);
  root.read("output_dir", cfg.output_dir);
  root.read("timing", cfg.timing);

  if (root.has("target")) {
    Section s(root.at("target"), "target", errors);
    s.allow({"kind", "dim", "precision", "alpha", "beta", "kappa"});
    s.read("kind", cfg.target.kind);
    s.read("dim", cfg.target.dim);
    s.read("precision", cfg.target.precision);
    s.read("alpha", cfg.target.alpha);
    s.read("beta", cfg.target.beta);
    s.read("kappa", cfg.target.kappa);
    if (!s.has("dim") && !cfg.target.precision.empty()) cfg.target.dim = static_cast<long>(cfg.target.precision.size());
  }
  if (root.has("kernel")) {
    Section s(root.at("kernel"), "kernel", errors);
    s.allow({"epsilon", "law", "steps", "mass"});
    s.read("epsilon", cfg.kernel.epsilon);
    s.read("law", cfg.kernel.law);
    s.read("steps", cfg.kernel.steps);
    s.read("mass", cfg.kernel.mass);
  }
  if (root.has("probes")) {
    const json& list = root.at("probes");
    if (!list.is_array()) {
      root.error("probes", "expected an array");
    } else {
      for (std::size_t i = 0; i < list.size(); ++i) {
        Section s(list[i], "probes[" + std::to_string(i) + "]", errors);
        s.allow({"kind", "x0", "s", "n", "delta", "direction", "radii", "beta"});
        ProbeSpec probe;
        s.read("kind", probe.kind);
        s.read("x0", probe.x0);
        s.read("s", probe.s);
        s.read("n", probe.n);
        s.read("delta", probe.delta);
        s.read("direction", probe.direction);
        s.read("radii", probe.radii);
        s.read("beta", probe.beta);
        cfg.probes.push_back(std::move(probe));
      }
    }
  }
  if (root.has("dynamic")) {
    Section s(root.at("dynamic"), "dynamic", errors);
    s.allow({"beta", "x0", "p0", "probe", "n", "delta", "energy_tol", "average_tol", "initial_step", "max_substeps"});
    s.read("beta", cfg.dynamic.beta);
    s.read("x0", cfg.dynamic.x0);
    s.read("p0", cfg.dynamic.p0);
    s.read("probe", cfg.dynamic.probe);
    s.read("n", cfg.dynamic.n);
    s.read("delta", cfg.dynamic.delta);
    s.read("energy_tol", cfg.dynamic.flow.energy_tol);
    s.read("average_tol", cfg.dynamic.flow.average_tol);
    s.read("initial_step", cfg.dynamic.flow.initial_step);
    s.read("max_substeps", cfg.dynamic.flow.max_substeps);
  }
  if (root.has("sweep")) {
    Section s(root.at("sweep"), "sweep", errors);
    s.allow({"betas", "x0", "s", "n"});
    s.read("betas", cfg.sweep.betas);
    s.read("x0", cfg.sweep.x0);
    s.read("s", cfg.sweep.s);
    s.read("n", cfg.sweep.n);
  }

  for (auto& p : cfg.problems()) errors.push_back(std::move(p));
  if (!errors.empty()) throw ValidationError(std::move(errors));
  return cfg;
}

std::string to_json(const ExperimentConfig& cfg) {
  json probes = json::array();
  for (const auto& p : cfg.probes) {
    probes.push_back({{"kind", p.kind},
                      {"x0", p.x0},
                      {"s", p.s},
                      {"n", p.n},
                      {"delta", p.delta},
                      {"direction", p.direction},
                      {"radii", p.radii},
                      {"beta", p.beta}});
  }
  const json doc = {
      {"target",
       {{"kind", cfg.target.kind},
        {"dim", cfg.target.dim},
        {"precision", cfg.target.precision},
        {"alpha", cfg.target.alpha},
        {"beta", cfg.target.beta},
        {"kappa", cfg.target.kappa}}},
      {"kernel",
       {{"epsilon", cfg.kernel.epsilon}, {"law", cfg.kernel.law}, {"steps", cfg.kernel.steps}, {"mass", cfg.kernel.mass}}},
      {"probes", probes},
      {"dynamic",
       {{"beta", cfg.dynamic.beta},
        {"x0", cfg.dynamic.x0},
        {"p0", cfg.dynamic.p0},
        {"probe", cfg.dynamic.probe},
        {"n", cfg.dynamic.n},
        {"delta", cfg.dynamic.delta},
        {"energy_tol", cfg.dynamic.flow.energy_tol},
        {"average_tol", cfg.dynamic.flow.average_tol},
        {"initial_step", cfg.dynamic.flow.initial_step},
        {"max_substeps", cfg.dynamic.flow.max_substeps}}},
      {"sweep", {{"betas", cfg.sweep.betas}, {"x0", cfg.sweep.x0}, {"s", cfg.sweep.s}, {"n", cfg.sweep.n}}},
      {"seed", cfg.seed},
      {"chains", cfg.chains},
      {"jobs", cfg.jobs},
      {"samples", cfg.samples},
      {"x0", cfg.x0},
      {"output_dir", cfg.output_dir},
      {"timing", cfg.timing}};
  return doc.dump();
}

std::string config_hash(const ExperimentConfig& cfg) {
  // Where and how fast a run executes does not change what it computes.
  ExperimentConfig canonical = cfg;
  canonical.jobs = 1;
  canonical.output_dir.clear();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_json(canonical)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace hmc_ergo
