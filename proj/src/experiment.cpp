#include "hmc_ergo/experiment.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <thread>

#include <json.hpp>

#include "hmc_ergo/diagnostics.hpp"
#include "hmc_ergo/dynamic1d.hpp"
#include "hmc_ergo/errors.hpp"
#include "hmc_ergo/kernels.hpp"
#include "hmc_ergo/report.hpp"

namespace hmc_ergo {

namespace fs = std::filesystem;

std::optional<Command> parse_command(const std::string& name) {
  static const std::map<std::string, Command> table{{"sample", Command::sample},
                                                    {"diagnose", Command::diagnose},
                                                    {"sweep", Command::sweep},
                                                    {"dynamic", Command::dynamic},
                                                    {"degenerate-demo", Command::degenerate_demo}};
  const auto it = table.find(name);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

std::string to_string(Command command) {
  switch (command) {
    case Command::sample:
      return "sample";
    case Command::diagnose:
      return "diagnose";
    case Command::sweep:
      return "sweep";
    case Command::dynamic:
      return "dynamic";
    case Command::degenerate_demo:
      return "degenerate-demo";
  }
  return "unknown";
}

namespace {

// Stream indices per use, so that probes and chains never share draws.
constexpr std::uint64_t kChainStreams = 0;
constexpr std::uint64_t kProbeStreams = 1'000'000;
constexpr std::uint64_t kSweepStreams = 2'000'000;
constexpr std::uint64_t kDynamicStream = 3'000'000;

/// Runs task(i) for i in [0, count) on up to `jobs` threads; the first
/// exception (by index) is rethrown after all threads finish.
template <typename Task>
void parallel_for(std::size_t count, int jobs, Task&& task) {
  std::vector<std::exception_ptr> errors(count);
  auto guarded = [&](std::size_t i) {
    try {
      task(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t workers = std::min<std::size_t>(std::max(1, jobs), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) guarded(i);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < count; i += workers) guarded(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

class Stopwatch {
 public:
  explicit Stopwatch(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    if (!enabled_) return 0.0;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

nlohmann::json to_json_array(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Cell vector_cell(const std::vector<double>& v) {
  if (v.size() == 1) return v.front();
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_number(v[i]);
  return s;
}

Cell vector_cell(const Eigen::VectorXd& v) { return vector_cell(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<std::string> preamble(const ExperimentConfig& cfg, Command command) {
  return {std::string("hmc-ergo ") + kVersion + " command=" + to_string(command) +
          " config_hash=" + config_hash(cfg) + " seed=" + std::to_string(cfg.seed)};
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open " + path.string());
  for (const auto& line : lines) file << line << '\n';
  if (!file) throw std::runtime_error("failed writing " + path.string());
}

void write_report(const ExperimentConfig& cfg, Command command, const fs::path& path,
                  const std::vector<ReportRow>& rows, const ReportSchema& schema) {
  emit_report(schema, rows, path, preamble(cfg, command));
}

void write_report(const ExperimentConfig& cfg, Command command, const fs::path& path,
                  const std::vector<ReportRow>& rows) {
  if (rows.empty()) throw std::logic_error("report needs at least one row to infer its schema");
  write_report(cfg, command, path, rows, ReportSchema::of(rows.front()));
}

std::string transition_line(long chain, long iteration, const TransitionRecord& rec) {
  const nlohmann::json line = {{"chain", chain},
                               {"iter", iteration},
                               {"x1", to_json_array(rec.x1)},
                               {"accept_prob", rec.accept_prob},
                               {"L", rec.L},
                               {"diverged", rec.diverged}};
  return line.dump();
}

Eigen::VectorXd chain_start(const ExperimentConfig& cfg) {
  return cfg.x0.empty() ? Eigen::VectorXd::Zero(cfg.target.dim) : to_eigen(cfg.x0);
}

int run_sample(const ExperimentConfig& cfg, const fs::path& out) {
  const auto target = cfg.target.build();
  const auto kernel = cfg.kernel.build();
  const Eigen::VectorXd x0 = chain_start(cfg);

  std::vector<std::vector<std::string>> traces(cfg.chains);
  std::vector<ReportRow> rows(cfg.chains);
  parallel_for(cfg.chains, cfg.jobs, [&](std::size_t c) {
    Stopwatch clock(cfg.timing);
    RandomStream rng(cfg.seed, kChainStreams + c);
    auto& trace = traces[c];
    trace.reserve(cfg.samples);
    const auto result = run_chain(kernel, target, x0, cfg.samples, rng, [&](long i, const TransitionRecord& rec) {
      trace.push_back(transition_line(static_cast<long>(c), i, rec));
    });
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(target.dim());
    for (const auto& s : result.samples) mean += s;
    mean /= static_cast<double>(result.samples.size());

    const double a = result.summary.acceptance_rate;
    ReportRow& row = rows[c];
    row.probe = "chain";
    row.inputs = {{"chain", static_cast<long>(c)}, {"x0", vector_cell(x0)}};
    row.estimate = a;
    row.std_error = std::sqrt(a * (1 - a) / static_cast<double>(result.summary.n));
    row.n = result.summary.n;
    row.extras = {{"divergences", result.summary.divergences},
                  {"mean_steps", result.summary.mean_steps},
                  {"sample_mean", vector_cell(mean)}};
    row.wall_time_s = clock.seconds();
  });

  std::vector<std::string> lines;
  for (auto& t : traces) lines.insert(lines.end(), t.begin(), t.end());
  write_lines(out / "samples.jsonl", lines);
  write_report(cfg, Command::sample, out / "report.csv", rows);
  return kExitOk;
}

ReportRow run_probe(const ProbeSpec& probe, const TargetDensity<double>& target, const HmcKernelConfig& kernel,
                    RandomStream& rng, bool timing) {
  Stopwatch clock(timing);
  ReportRow row;
  row.probe = probe.kind;
  if (probe.kind == "classify") {
    row.inputs = {{"beta", probe.beta}};
    row.estimate = probe.beta;
    row.n = 1;
    row.extras = {{"tail_class", to_string(tail_classify(probe.beta))}};
  } else if (probe.kind == "sc_scan") {
    const auto rows = sc_scan(target, to_eigen(probe.direction), probe.radii);
    // One summary row at the largest evaluated radius; the trend columns
    // compare it with the smallest.
    row.inputs = {{"direction", vector_cell(probe.direction)}};
    row.n = static_cast<long>(rows.size());
    if (!rows.empty()) {
      row.estimate = rows.back().growth_ratio;
      row.extras = {{"radius", rows.back().radius},
                    {"grad_norm", rows.back().grad_norm},
                    {"inward_cosine", rows.back().inward_cosine},
                    {"growth_ratio_first", rows.front().growth_ratio}};
    } else {
      row.extras = {{"radius", 0.0}, {"grad_norm", 0.0}, {"inward_cosine", 0.0}, {"growth_ratio_first", 0.0}};
    }
  } else {
    const Eigen::VectorXd x0 = to_eigen(probe.x0);
    McEstimate est;
    if (probe.kind == "drift") {
      const auto d = drift_ratio(kernel, target, x0, probe.s, probe.n, rng);
      est = {d.ratio_mean, d.ratio_stderr, d.n};
      row.inputs = {{"x0", vector_cell(x0)}, {"s", probe.s}};
    } else if (probe.kind == "rejection") {
      est = rejection_prob(kernel, target, x0, probe.n, rng);
      row.inputs = {{"x0", vector_cell(x0)}};
    } else if (probe.kind == "inward_rejection") {
      est = inward_rejection_mass(kernel, target, x0, probe.n, rng);
      row.inputs = {{"x0", vector_cell(x0)}};
    } else if (probe.kind == "ball_mass") {
      est = ball_mass(kernel, target, x0, probe.delta, probe.n, rng);
      row.inputs = {{"x0", vector_cell(x0)}, {"delta", probe.delta}};
    } else {
      throw ContractViolation("unknown probe kind '" + probe.kind + "'");
    }
    row.estimate = est.estimate;
    row.std_error = est.std_error;
    row.n = est.n;
  }
  row.wall_time_s = clock.seconds();
  return row;
}

int run_diagnose(const ExperimentConfig& cfg, const fs::path& out) {
  if (cfg.probes.empty()) throw ValidationError({"probes: diagnose needs at least one probe"});
  const auto target = cfg.target.build();
  const auto kernel = cfg.kernel.build();
  std::vector<ReportRow> rows(cfg.probes.size());
  parallel_for(cfg.probes.size(), cfg.jobs, [&](std::size_t i) {
    RandomStream rng(cfg.seed, kProbeStreams + i);
    rows[i] = run_probe(cfg.probes[i], target, kernel, rng, cfg.timing);
  });

  std::map<std::string, std::vector<ReportRow>> by_kind;
  for (auto& row : rows) by_kind[row.probe].push_back(std::move(row));
  if (by_kind.size() == 1) {
    write_report(cfg, Command::diagnose, out / "report.csv", by_kind.begin()->second);
  } else {
    for (const auto& [kind, group] : by_kind) write_report(cfg, Command::diagnose, out / ("report." + kind + ".csv"), group);
  }
  return kExitOk;
}

int run_sweep(const ExperimentConfig& cfg, const fs::path& out) {
  const auto kernel = cfg.kernel.build();
  std::vector<ReportRow> rows(cfg.sweep.betas.size());
  parallel_for(rows.size(), cfg.jobs, [&](std::size_t i) {
    Stopwatch clock(cfg.timing);
    const double beta = cfg.sweep.betas[i];
    const auto target = ExpFamilyTarget{cfg.target.kind == "expfam" ? cfg.target.alpha : 1.0, beta,
                                        cfg.target.kind == "expfam" ? cfg.target.kappa : 1.0, cfg.target.dim}
                            .to_target<double>();
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(cfg.target.dim);
    x0(0) = cfg.sweep.x0;
    RandomStream rng(cfg.seed, kSweepStreams + i);
    const auto drift = drift_ratio(kernel, target, x0, cfg.sweep.s, cfg.sweep.n, rng);
    ReportRow& row = rows[i];
    row.probe = "sweep";
    row.inputs = {{"beta", beta}, {"x0", cfg.sweep.x0}, {"s", cfg.sweep.s}};
    row.estimate = drift.ratio_mean;
    row.std_error = drift.ratio_stderr;
    row.n = drift.n;
    row.extras = {{"tail_class", to_string(tail_classify(beta))}};
    row.wall_time_s = clock.seconds();
  });
  write_report(cfg, Command::sweep, out / "report.csv", rows);
  return kExitOk;
}

int run_dynamic(const ExperimentConfig& cfg, const fs::path& out) {
  using namespace dynamic1d;
  const auto& spec = cfg.dynamic;
  const SmoothExpFamily1D target(spec.beta);
  RandomStream rng(cfg.seed, kDynamicStream);
  Stopwatch clock(cfg.timing);
  ReportRow row;
  const PhasePoint1D z0{spec.x0, spec.p0};

  if (spec.probe == "drift") {
    const auto est = dynamic_drift_estimate(target, spec.x0, spec.n, rng, spec.flow);
    row.probe = "dynamic_drift";
    row.inputs = {{"beta", spec.beta}, {"x0", spec.x0}};
    row.estimate = est.pv_estimate;
    row.std_error = est.std_error;
    row.n = est.n;
    row.extras = {{"predicted", est.predicted}};
  } else if (spec.probe == "virial") {
    row.probe = "virial";
    row.inputs = {{"beta", spec.beta}, {"x0", spec.x0}, {"p0", spec.p0}};
    row.estimate = virial_residual(target, z0, spec.flow);
    row.n = 1;
  } else if (spec.probe == "period") {
    const auto orbit = period(target, z0);
    row.probe = "period";
    row.inputs = {{"beta", spec.beta}, {"x0", spec.x0}, {"p0", spec.p0}};
    row.estimate = orbit.period;
    row.n = 1;
    row.extras = {{"energy", orbit.energy}, {"x_plus", orbit.x_plus}};
  } else if (spec.probe == "exhaustion") {
    row.probe = "exhaustion";
    row.inputs = {{"beta", spec.beta}, {"x0", spec.x0}, {"p0", spec.p0}, {"delta", spec.delta}};
    row.estimate = exhaustion_time(target, z0, spec.delta, spec.flow);
    row.n = 1;
    row.extras = {{"period", period(target, z0).period}};
  } else if (spec.probe == "chain") {
    std::vector<std::string> lines;
    lines.reserve(spec.n);
    double x = spec.x0;
    double mean = 0;
    double m2 = 0;
    for (long i = 0; i < spec.n; ++i) {
      x = dynamic_hmc_step(target, x, rng, spec.flow);
      lines.push_back(nlohmann::json{{"chain", 0}, {"iter", i}, {"x1", {x}}}.dump());
      const double d = x - mean;
      mean += d / static_cast<double>(i + 1);
      m2 += d * (x - mean);
    }
    write_lines(out / "samples.jsonl", lines);
    const double var = spec.n > 1 ? m2 / static_cast<double>(spec.n - 1) : 0.0;
    row.probe = "dynamic_chain";
    row.inputs = {{"beta", spec.beta}, {"x0", spec.x0}};
    row.estimate = mean;
    row.std_error = std::sqrt(var / static_cast<double>(spec.n));
    row.n = spec.n;
    row.extras = {{"variance", var}};
  }
  row.wall_time_s = clock.seconds();
  write_report(cfg, Command::dynamic, out / "report.csv", {row});
  return kExitOk;
}

int run_degenerate_demo(const ExperimentConfig& cfg, const fs::path& out) {
  // Standard Gaussian with eps = sqrt(2), L = 2: the leapfrog map sends x0 to
  // -x0 whatever the momentum.
  const auto target = GaussianTarget::standard(1).to_target<double>();
  HmcKernelConfig kernel;
  kernel.epsilon = std::numbers::sqrt2;
  kernel.steps = StepCountDistribution::fixed(2);
  Eigen::VectorXd x0(1);
  x0(0) = cfg.x0.empty() ? 3.0 : cfg.x0.front();

  Stopwatch clock(cfg.timing);
  RandomStream rng(cfg.seed, kChainStreams);
  std::vector<std::string> lines;
  long on_orbit = 0;
  const double tol = 1e-9 * std::max(1.0, std::abs(x0(0)));
  run_chain(kernel, target, x0, cfg.samples, rng, [&](long i, const TransitionRecord& rec) {
    lines.push_back(transition_line(0, i, rec));
    on_orbit += std::abs(std::abs(rec.x1(0)) - std::abs(x0(0))) <= tol;
  });
  write_lines(out / "samples.jsonl", lines);

  ReportRow row;
  row.probe = "degenerate_demo";
  row.inputs = {{"x0", x0(0)}, {"epsilon", kernel.epsilon}, {"L", 2L}};
  row.estimate = static_cast<double>(on_orbit) / static_cast<double>(cfg.samples);
  row.n = cfg.samples;
  row.wall_time_s = clock.seconds();
  write_report(cfg, Command::degenerate_demo, out / "report.csv", {row});
  return kExitOk;
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg, Command command) {
  try {
    cfg.validate();
    const fs::path out(cfg.output_dir);
    fs::create_directories(out);
    switch (command) {
      case Command::sample:
        return run_sample(cfg, out);
      case Command::diagnose:
        return run_diagnose(cfg, out);
      case Command::sweep:
        return run_sweep(cfg, out);
      case Command::dynamic:
        return run_dynamic(cfg, out);
      case Command::degenerate_demo:
        return run_degenerate_demo(cfg, out);
    }
  } catch (const ValidationError& e) {
    std::cerr << e.what() << '\n';
    return kExitValidation;
  } catch (const ContractViolation& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DegenerateOrbit& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const AccuracyError& e) {
    std::cerr << "accuracy failure: " << e.what() << '\n';
    return kExitAccuracy;
  }
  return kExitOk;
}

}  // namespace hmc_ergo
