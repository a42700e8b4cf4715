#include "divels/runner.hpp"

#include "divels/errors.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace divels {

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::DivEls:
      return "div-els";
    case PolicyKind::DivElsInfinite:
      return "div-els-infinite";
    case PolicyKind::NaiveKrr:
      return "naive-krr";
    case PolicyKind::Uniform:
      return "uniform";
  }
  return "unknown";
}

PolicyKind parse_policy_kind(std::string_view name) {
  for (auto kind : {PolicyKind::DivEls, PolicyKind::DivElsInfinite, PolicyKind::NaiveKrr,
                    PolicyKind::Uniform}) {
    if (name == to_string(kind)) return kind;
  }
  throw InputError("unknown policy '" + std::string(name) + "'");
}

namespace {

constexpr int kContextDim = 2;
constexpr int kActionDim = 2;

}  // namespace

void RunConfig::validate() const {
  if (horizon < 2) throw InputError("T must be >= 2");
  if (repeats < 1) throw InputError("repeats must be >= 1");
  if (n_arms < 1) throw InputError("K must be >= 1");
  if (!(rho >= 0.0 && rho <= 1.0)) throw InputError("rho must lie in [0, 1]");
  if (!(noise_scale > 0.0) || !std::isfinite(noise_scale)) throw InputError("noise_scale must be > 0");
  if (eta && (!(*eta >= 0.0) || !std::isfinite(*eta))) throw InputError("eta must be >= 0");
  if (!(eta1 > 0.0) || !(eta2 > 0.0)) throw InputError("eta1 and eta2 must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw InputError("delta must lie in (0, 1)");
  if (d_tilde && *d_tilde < 1) throw InputError("d_tilde must be >= 1");
  kernel.validate();
  const bool infinite = policy == PolicyKind::DivElsInfinite;
  if (nu && !infinite) throw InputError("nu only applies to the div-els-infinite policy");
  if (nu_dim && !infinite) throw InputError("nu_dim only applies to the div-els-infinite policy");
  if (infinite && !nu) throw InputError("div-els-infinite needs nu");
  if (!infinite && policy != PolicyKind::Uniform && !kernel.finite_rank() && !d_tilde) {
    throw InputError("an infinite-rank kernel needs div-els-infinite or an explicit d_tilde");
  }
  if (infinite) policy_config().validate();
}

EpochSchedule RunConfig::epoch_schedule() const {
  return schedule == EpochSchedule::Kind::Doubling ? EpochSchedule::doubling()
                                                   : EpochSchedule::horizon_aware(horizon);
}

PolicyConfig RunConfig::policy_config() const {
  PolicyConfig pc;
  pc.eta = resolved_eta();
  pc.eta1 = eta1;
  pc.eta2 = eta2;
  pc.delta = delta;
  pc.k_spec = kernel;
  pc.l_spec = kernel;
  const int d_x = kContextDim + kActionDim;
  const int d_yz = 1 + kContextDim;
  if (d_tilde) {
    pc.d_tilde = *d_tilde;
  } else if (kernel.finite_rank()) {
    pc.d_tilde = static_cast<int>(effective_dim(kernel, kernel, d_x, d_yz));
  } else {
    pc.d_tilde = 1;  // unused by the infinite-rank schedules
  }
  if (policy == PolicyKind::DivElsInfinite && nu) {
    pc.infinite = InfiniteRank{*nu, nu_dim.value_or(d_x)};
  }
  return pc;
}

std::unique_ptr<Policy> make_policy(const RunConfig& config, const EnvSpec& env) {
  if (config.policy == PolicyKind::Uniform) {
    return std::make_unique<UniformPolicy>(static_cast<std::size_t>(env.n_arms));
  }
  const auto learner = config.policy == PolicyKind::NaiveKrr ? EpochPolicy::Learner::NaiveKrr
                                                             : EpochPolicy::Learner::DualIV;
  return std::make_unique<EpochPolicy>(config.policy_config(), learner, config.epoch_schedule(),
                                       config.horizon, env.action_set, env.context_dim,
                                       env.context_dim);
}

RunResult run_once(const RunConfig& config, std::uint64_t run_index) {
  return run_once(config, run_index, make_policy);
}

RunResult run_once(const RunConfig& config, std::uint64_t run_index,
                   const PolicyFactory& factory) {
  config.validate();
  RunResult result;
  result.run_index = run_index;
  result.seed = config.base_seed + run_index;

  EnvSpec spec = sample_env(config.n_arms, config.rho,
                            stream_seed(result.seed, Stream::EnvSampling), config.noise_scale);
  if (!config.confounded) spec = unconfounded_variant(spec);
  result.env = spec;

  ConfoundedEnv env(spec, stream_seed(result.seed, Stream::Rounds));
  Rng policy_rng = make_stream(result.seed, Stream::Policy);
  auto policy = factory(config, spec);

  result.cumulative_regret.resize(config.horizon);
  double regret = 0.0;
  for (std::uint64_t t = 1; t <= config.horizon; ++t) {
    policy->begin_round(t);
    const RoundObservation obs = env.next_round();
    const std::size_t arm = policy->act(obs.context, policy_rng);
    const double reward = realized_reward(spec, obs, arm);
    policy->observe(obs.context, obs.instrument, arm, reward);
    regret += best_arm(spec, obs.context).second - structural_value(spec, obs.context, arm);
    result.cumulative_regret[t - 1] = regret;
  }
  result.fit_count = policy->fit_count();
  result.epochs = policy->diagnostics();
  return result;
}

ExperimentResult run_experiment(const RunConfig& config, int workers) {
  return run_experiment(config, workers, make_policy);
}

ExperimentResult run_experiment(const RunConfig& config, int workers,
                                const PolicyFactory& factory) {
  config.validate();
  if (workers < 1) throw InputError("workers must be >= 1");
  const int repeats = config.repeats;
  ExperimentResult out;
  out.runs.resize(static_cast<std::size_t>(repeats));
  std::vector<std::string> errors(static_cast<std::size_t>(repeats));

#pragma omp parallel for num_threads(workers) schedule(dynamic, 1)
  for (int i = 0; i < repeats; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      out.runs[idx] = run_once(config, idx, factory);
    } catch (const std::exception& e) {
      errors[idx] = e.what();
    }
  }

  std::vector<std::uint64_t> failed;
  std::string message;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (errors[i].empty()) continue;
    failed.push_back(i);
    message += "\n  run " + std::to_string(i) + ": " + errors[i];
  }
  if (!failed.empty()) {
    throw ExperimentError(std::to_string(failed.size()) + " run(s) failed:" + message, failed);
  }

  const std::size_t horizon = config.horizon;
  const double r = static_cast<double>(repeats);
  out.mean_regret.assign(horizon, 0.0);
  out.stderr_regret.assign(horizon, 0.0);
  for (const auto& run : out.runs) {
    for (std::size_t t = 0; t < horizon; ++t) out.mean_regret[t] += run.cumulative_regret[t];
  }
  for (double& m : out.mean_regret) m /= r;
  if (repeats > 1) {
    for (std::size_t t = 0; t < horizon; ++t) {
      double ss = 0.0;
      for (const auto& run : out.runs) {
        const double d = run.cumulative_regret[t] - out.mean_regret[t];
        ss += d * d;
      }
      out.stderr_regret[t] = std::sqrt(ss / (r - 1.0)) / std::sqrt(r);
    }
  }
  return out;
}

namespace {

void append_number(std::string& out, double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, res.ptr);
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open '" + path + "' for writing");
  file << contents;
  file.flush();
  if (!file) throw IoError("failed writing '" + path + "'");
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string format_csv(const ExperimentResult& result) {
  std::string out = "t,mean_regret,stderr\n";
  out.reserve(out.size() + result.mean_regret.size() * 48);
  for (std::size_t t = 0; t < result.mean_regret.size(); ++t) {
    out += std::to_string(t + 1);
    out += ',';
    append_number(out, result.mean_regret[t]);
    out += ',';
    append_number(out, result.stderr_regret[t]);
    out += '\n';
  }
  return out;
}

void emit_csv(const ExperimentResult& result, const std::string& path) {
  write_file(path, format_csv(result));
}

std::string format_metadata(const RunConfig& config, const ExperimentResult& result) {
  nlohmann::json meta;
  meta["config"] = nlohmann::json::parse(dump_config(config));
  const PolicyConfig pc = config.policy_config();
  meta["resolved"] = {{"eta", pc.eta},
                      {"eta1", pc.eta1},
                      {"eta2", pc.eta2},
                      {"delta", pc.delta},
                      {"d_tilde", pc.d_tilde},
                      {"epoch_boundaries", config.epoch_schedule().boundaries(config.horizon)}};
  if (pc.infinite) {
    meta["resolved"]["nu"] = pc.infinite->nu;
    meta["resolved"]["nu_dim"] = pc.infinite->dim;
  }
  auto runs = nlohmann::json::array();
  for (const auto& run : result.runs) {
    nlohmann::json r;
    r["run_index"] = run.run_index;
    r["seed"] = run.seed;
    r["alpha"] = std::vector<double>(run.env.alpha.data(), run.env.alpha.data() + run.env.alpha.size());
    r["action_set"] = matrix_json(run.env.action_set);
    r["fit_count"] = run.fit_count;
    r["final_regret"] = run.cumulative_regret.empty() ? 0.0 : run.cumulative_regret.back();
    runs.push_back(std::move(r));
  }
  meta["runs"] = std::move(runs);
  return meta.dump(2) + "\n";
}

void emit_metadata(const RunConfig& config, const ExperimentResult& result,
                   const std::string& path) {
  write_file(path, format_metadata(config, result));
}

std::string metadata_path_for(const std::string& csv_path) {
  const auto slash = csv_path.find_last_of('/');
  const auto dot = csv_path.find_last_of('.');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) {
    return csv_path.substr(0, dot) + ".meta.json";
  }
  return csv_path + ".meta.json";
}

std::string format_epoch_log(std::uint64_t run_index, const EpochDiagnostics& d) {
  std::ostringstream os;
  os << "epoch run=" << run_index << " m=" << d.epoch << " n=" << d.samples
     << " lambda1=" << d.lambda1 << " lambda2=" << d.lambda2 << " gamma=" << d.gamma
     << " inner_residual=" << d.inner_residual << " outer_residual=" << d.outer_residual
     << " rank=" << d.rank;
  return os.str();
}

double structural_l2_error(const DualIVModel& model, const EnvSpec& env, std::size_t samples,
                           std::uint64_t seed) {
  if (samples == 0) throw InputError("structural_l2_error needs samples >= 1");
  ConfoundedEnv fresh(env, stream_seed(seed, Stream::Rounds));
  Rng arm_rng = make_stream(seed, Stream::Evaluation);
  const Eigen::MatrixXd xs = sample_regressors(fresh, samples, arm_rng);
  const Eigen::VectorXd pred = predict_batch(model, xs);
  double ss = 0.0;
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    const double s = env.alpha.dot(xs.row(i).transpose()) + 1.0;
    const double d = pred(i) - s * s * s;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(samples));
}

}  // namespace divels
