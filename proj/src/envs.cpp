#include "divels/envs.hpp"

#include "divels/errors.hpp"

#include <string>

namespace divels {

void EnvSpec::validate() const {
  if (n_arms < 1) throw InputError("environment needs at least one arm");
  if (context_dim < 1 || action_dim < 1) throw InputError("environment dimensions must be >= 1");
  if (!(rho >= 0.0 && rho <= 1.0)) throw InputError("rho must lie in [0, 1]");
  if (!(noise_scale > 0.0) || !std::isfinite(noise_scale)) {
    throw InputError("noise_scale must be finite and > 0");
  }
  if (alpha.size() != x_dim()) throw InputError("alpha must have context_dim + action_dim entries");
  if (action_set.rows() != n_arms || action_set.cols() != action_dim) {
    throw InputError("action_set must be n_arms x action_dim");
  }
}

EnvSpec sample_env(int n_arms, double rho, std::uint64_t seed, double noise_scale) {
  EnvSpec env;
  env.n_arms = n_arms;
  env.rho = rho;
  env.noise_scale = noise_scale;
  env.seed = seed;
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> box(-2.0, 2.0);
  env.alpha.resize(env.x_dim());
  for (Eigen::Index i = 0; i < env.alpha.size(); ++i) env.alpha(i) = unit(rng);
  env.action_set.resize(std::max(n_arms, 0), env.action_dim);
  for (Eigen::Index a = 0; a < env.action_set.rows(); ++a) {
    for (Eigen::Index j = 0; j < env.action_dim; ++j) env.action_set(a, j) = box(rng);
  }
  env.validate();
  return env;
}

EnvSpec unconfounded_variant(const EnvSpec& env) {
  EnvSpec out = env;
  out.confounded = false;
  return out;
}

Eigen::VectorXd regressor(const EnvSpec& env, const Eigen::VectorXd& context, std::size_t arm) {
  if (arm >= static_cast<std::size_t>(env.n_arms)) {
    throw InputError("arm index " + std::to_string(arm) + " out of range");
  }
  if (context.size() != env.context_dim) throw InputError("context has the wrong dimension");
  Eigen::VectorXd x(env.x_dim());
  x.head(env.context_dim) = context;
  x.tail(env.action_dim) = env.action_set.row(static_cast<Eigen::Index>(arm)).transpose();
  return x;
}

double structural_value(const EnvSpec& env, const Eigen::VectorXd& context, std::size_t arm) {
  const double s = env.alpha.dot(regressor(env, context, arm)) + 1.0;
  return s * s * s;
}

std::pair<std::size_t, double> best_arm(const EnvSpec& env, const Eigen::VectorXd& context) {
  std::size_t best = 0;
  double value = structural_value(env, context, 0);
  for (std::size_t a = 1; a < static_cast<std::size_t>(env.n_arms); ++a) {
    const double v = structural_value(env, context, a);
    if (v > value) {
      best = a;
      value = v;
    }
  }
  return {best, value};
}

double realized_reward(const EnvSpec& env, const RoundObservation& obs, std::size_t arm) {
  return structural_value(env, obs.context, arm) + obs.reward_noise;
}

ConfoundedEnv::ConfoundedEnv(EnvSpec spec, std::uint64_t round_seed)
    : spec_(std::move(spec)),
      rounds_(round_seed),
      reward_noise_(stream_seed(round_seed, Stream::RewardNoise)),
      noise_(0.0, spec_.noise_scale),
      reward_dist_(0.0, spec_.noise_scale) {
  spec_.validate();
}

RoundObservation ConfoundedEnv::next_round() {
  RoundObservation obs;
  obs.instrument.resize(spec_.context_dim);
  for (Eigen::Index j = 0; j < spec_.context_dim; ++j) obs.instrument(j) = unit_(rounds_);
  obs.confounder = noise_(rounds_);
  obs.context = spec_.rho * obs.instrument +
                Eigen::VectorXd::Constant(spec_.context_dim, (1.0 - spec_.rho) * obs.confounder);
  obs.reward_noise = spec_.confounded ? obs.confounder : reward_dist_(reward_noise_);
  return obs;
}

TripleDataset sample_uniform_dataset(ConfoundedEnv& env, std::size_t n, Rng& arm_rng) {
  const EnvSpec& spec = env.spec();
  std::uniform_int_distribution<std::size_t> arm_dist(0, static_cast<std::size_t>(spec.n_arms) - 1);
  TripleDataset data;
  data.xs.resize(static_cast<Eigen::Index>(n), spec.x_dim());
  data.ys.resize(static_cast<Eigen::Index>(n));
  data.zs.resize(static_cast<Eigen::Index>(n), spec.context_dim);
  for (std::size_t i = 0; i < n; ++i) {
    const auto obs = env.next_round();
    const std::size_t arm = arm_dist(arm_rng);
    const auto r = static_cast<Eigen::Index>(i);
    data.xs.row(r) = regressor(spec, obs.context, arm).transpose();
    data.ys(r) = realized_reward(spec, obs, arm);
    data.zs.row(r) = obs.instrument.transpose();
  }
  return data;
}

Eigen::MatrixXd sample_regressors(ConfoundedEnv& env, std::size_t n, Rng& arm_rng) {
  const EnvSpec& spec = env.spec();
  std::uniform_int_distribution<std::size_t> arm_dist(0, static_cast<std::size_t>(spec.n_arms) - 1);
  Eigen::MatrixXd xs(static_cast<Eigen::Index>(n), spec.x_dim());
  for (std::size_t i = 0; i < n; ++i) {
    const auto obs = env.next_round();
    xs.row(static_cast<Eigen::Index>(i)) = regressor(spec, obs.context, arm_dist(arm_rng)).transpose();
  }
  return xs;
}

}  // namespace divels
