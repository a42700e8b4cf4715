#pragma once

#include "divels/dataset.hpp"
#include "divels/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <utility>

namespace divels {

/// Default confounder scale: N(0, 0.1) read as variance 0.1.
inline const double kDefaultNoiseScale = std::sqrt(0.1);

/// Polynomial confounded bandit:
///
///   z ~ U[0,1]^2,  e ~ N(0, noise_scale^2),  c = rho z + (1 - rho) e (1, 1)
///   x = (c, a),    y = (alpha^T x + 1)^3 + e
///
/// The reward reuses the e that entered the context; `confounded = false`
/// replaces it by an independent draw from a separate stream.
struct EnvSpec {
  int n_arms = 4;
  int context_dim = 2;
  int action_dim = 2;
  double rho = 0.5;
  double noise_scale = kDefaultNoiseScale;
  Eigen::VectorXd alpha;       // context_dim + action_dim
  Eigen::MatrixXd action_set;  // n_arms x action_dim, fixed for the run
  std::uint64_t seed = 0;
  bool confounded = true;

  int x_dim() const { return context_dim + action_dim; }
  void validate() const;
};

/// alpha ~ U[0,1]^4 and action rows ~ U[-2,2]^2, a pure function of seed.
EnvSpec sample_env(int n_arms, double rho, std::uint64_t seed,
                   double noise_scale = kDefaultNoiseScale);

/// Control condition: same contexts and instruments, reward noise independent.
EnvSpec unconfounded_variant(const EnvSpec& env);

struct RoundObservation {
  Eigen::VectorXd context;
  Eigen::VectorXd instrument;
  /// e that entered the context. Hidden from policies.
  double confounder = 0.0;
  /// Noise added to the reward: the confounder itself, or an independent
  /// draw for the unconfounded variant.
  double reward_noise = 0.0;
};

/// concat(context, action_set.row(arm)); throws InputError on a bad arm.
Eigen::VectorXd regressor(const EnvSpec& env, const Eigen::VectorXd& context, std::size_t arm);

/// Noiseless structural reward (alpha^T x + 1)^3.
double structural_value(const EnvSpec& env, const Eigen::VectorXd& context, std::size_t arm);

/// Best arm under the structural reward; ties go to the lowest index.
std::pair<std::size_t, double> best_arm(const EnvSpec& env, const Eigen::VectorXd& context);

/// structural_value + the round's reward noise.
double realized_reward(const EnvSpec& env, const RoundObservation& obs, std::size_t arm);

/// Owns the per-round random streams of one environment instance.
class ConfoundedEnv {
 public:
  /// `round_seed` seeds the context/instrument stream; the independent reward
  /// noise of the unconfounded variant comes from a stream derived from it.
  ConfoundedEnv(EnvSpec spec, std::uint64_t round_seed);

  const EnvSpec& spec() const { return spec_; }
  RoundObservation next_round();

 private:
  EnvSpec spec_;
  Rng rounds_;
  Rng reward_noise_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  // separate objects: normal_distribution caches a spare draw, so sharing
  // one between the two engines would couple the streams
  std::normal_distribution<double> noise_;
  std::normal_distribution<double> reward_dist_;
};

/// n rounds with arms drawn uniformly from the action set (the data an
/// epoch of uniform exploration produces).
TripleDataset sample_uniform_dataset(ConfoundedEnv& env, std::size_t n, Rng& arm_rng);

/// n regressors x = (c, a) from fresh rounds and uniform arms, one per row.
Eigen::MatrixXd sample_regressors(ConfoundedEnv& env, std::size_t n, Rng& arm_rng);

}  // namespace divels
