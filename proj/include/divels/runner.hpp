#pragma once

#include "divels/dualiv.hpp"
#include "divels/envs.hpp"
#include "divels/kernels.hpp"
#include "divels/policy.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace divels {

enum class PolicyKind { DivEls, DivElsInfinite, NaiveKrr, Uniform };

std::string_view to_string(PolicyKind kind);
PolicyKind parse_policy_kind(std::string_view name);

/// Everything needed to reproduce an experiment. Defaults are the K = 4
/// polynomial experiment: T = 1024, 20 repeats, delta = 0.1, eta = 200 rho^2,
/// eta1 = eta2 = 1, (w^T w' + 1)^3 on both sides, doubling epochs.
struct RunConfig {
  std::uint64_t horizon = 1024;
  int repeats = 20;
  std::uint64_t base_seed = 0;

  int n_arms = 4;
  double rho = 0.95;
  double noise_scale = kDefaultNoiseScale;
  bool confounded = true;

  PolicyKind policy = PolicyKind::DivEls;
  std::optional<double> eta;  // unset: 200 rho^2
  double eta1 = 1.0;
  double eta2 = 1.0;
  double delta = 0.1;
  KernelSpec kernel = KernelSpec::polynomial(3, 1.0);
  std::optional<int> d_tilde;  // unset: effective_dim of the kernels
  std::optional<double> nu;    // infinite-rank variant only
  std::optional<int> nu_dim;   // unset: dimension of x

  EpochSchedule::Kind schedule = EpochSchedule::Kind::Doubling;
  std::string output_path = "regret.csv";

  /// Throws InputError for out-of-range values or flag combinations that do
  /// not belong together (nu with a finite-rank policy, rbf without it).
  void validate() const;

  double resolved_eta() const { return eta.value_or(200.0 * rho * rho); }
  EpochSchedule epoch_schedule() const;
  /// Resolved learner configuration for environments of this shape.
  PolicyConfig policy_config() const;
};

/// One run: cumulative pseudo-regret after each round plus what produced it.
struct RunResult {
  std::uint64_t run_index = 0;
  std::uint64_t seed = 0;
  std::vector<double> cumulative_regret;  // length T
  EnvSpec env;
  std::size_t fit_count = 0;
  std::vector<EpochDiagnostics> epochs;
};

struct ExperimentResult {
  std::vector<double> mean_regret;
  std::vector<double> stderr_regret;
  std::vector<RunResult> runs;  // ordered by run_index
};

using PolicyFactory =
    std::function<std::unique_ptr<Policy>(const RunConfig&, const EnvSpec&)>;

/// The learner selected by config.policy.
std::unique_ptr<Policy> make_policy(const RunConfig& config, const EnvSpec& env);

/// Run seed = base_seed + run_index, split into independent streams for the
/// environment instance, the rounds and the policy. Regret accrues
/// f(c, a*) - f(c, a_t) under the true structural f (noise excluded).
RunResult run_once(const RunConfig& config, std::uint64_t run_index);
RunResult run_once(const RunConfig& config, std::uint64_t run_index,
                   const PolicyFactory& factory);

/// Thrown when some repeats fail; lists them.
class ExperimentError : public std::runtime_error {
 public:
  ExperimentError(const std::string& what, std::vector<std::uint64_t> failed)
      : std::runtime_error(what), failed_(std::move(failed)) {}
  const std::vector<std::uint64_t>& failed_runs() const { return failed_; }

 private:
  std::vector<std::uint64_t> failed_;
};

/// Executes config.repeats runs on up to `workers` threads and averages them
/// in run order, so the result does not depend on `workers`. The standard
/// error uses the sample standard deviation (zero for a single run).
ExperimentResult run_experiment(const RunConfig& config, int workers = 1);
ExperimentResult run_experiment(const RunConfig& config, int workers,
                                const PolicyFactory& factory);

/// `t,mean_regret,stderr` then one row per round; numbers use the shortest
/// representation that round-trips exactly.
std::string format_csv(const ExperimentResult& result);
void emit_csv(const ExperimentResult& result, const std::string& path);

/// JSON document with the full config (loadable again with --config), the
/// resolved learner parameters and each run's seed, alpha and action set.
std::string format_metadata(const RunConfig& config, const ExperimentResult& result);
void emit_metadata(const RunConfig& config, const ExperimentResult& result,
                   const std::string& path);
/// results.csv -> results.meta.json
std::string metadata_path_for(const std::string& csv_path);

/// One structured log line per epoch.
std::string format_epoch_log(std::uint64_t run_index, const EpochDiagnostics& diag);

/// Monte-Carlo L2(P_X) distance between a fitted model and the structural
/// reward, over `samples` fresh regressors (uniform arms).
double structural_l2_error(const DualIVModel& model, const EnvSpec& env, std::size_t samples,
                           std::uint64_t seed);

// Config files are JSON trees; see config.cpp for the schema.
RunConfig load_config(const std::string& path);
RunConfig parse_config(std::string_view json_text);
std::string dump_config(const RunConfig& config);

}  // namespace divels
