#pragma once

#include "divels/dataset.hpp"
#include "divels/dualiv.hpp"
#include "divels/kernels.hpp"
#include "divels/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace divels {

/// Epoch boundaries 0 = tau_0 < tau_1 < tau_2 < ...
///   Doubling:      tau_m = 2^m
///   HorizonAware:  tau_m = floor(2 T^(1 - 2^-m))
struct EpochSchedule {
  enum class Kind { Doubling, HorizonAware };
  Kind kind = Kind::Doubling;
  std::uint64_t horizon = 0;  // T; required by HorizonAware

  static EpochSchedule doubling() { return {Kind::Doubling, 0}; }
  static EpochSchedule horizon_aware(std::uint64_t horizon) {
    return {Kind::HorizonAware, horizon};
  }

  /// Unclipped tau_m.
  std::uint64_t boundary(int m) const;

  /// Epoch ends tau_1 < tau_2 < ... clipped to `horizon` and deduplicated;
  /// the last entry is always `horizon`.
  std::vector<std::uint64_t> boundaries(std::uint64_t horizon) const;

  /// Number of model fits over a run of `horizon` rounds: one per epoch
  /// after the first.
  std::size_t fit_count(std::uint64_t horizon) const;
};

std::string_view to_string(EpochSchedule::Kind kind);
EpochSchedule::Kind parse_schedule_kind(std::string_view name);

/// Schedules for infinite-rank kernels: lambda and gamma follow
/// n^(-nu / (2 nu + d)) up to log factors.
struct InfiniteRank {
  double nu = 0.0;
  int dim = 0;
};

struct PolicyConfig {
  double eta = 1.0;
  double eta1 = 1.0;
  double eta2 = 1.0;
  double delta = 0.1;
  KernelSpec k_spec;
  KernelSpec l_spec;
  int d_tilde = 1;
  std::optional<InfiniteRank> infinite;

  /// Throws InputError on any violated positivity constraint, delta outside
  /// (0, 1) or nu <= dim / 2.
  void validate() const;
};

/// max(dim H, dim U) for finite-rank kernels k on d_x and l on d_yz
/// variables. Throws UnsupportedFamilyError for infinite-rank kernels.
std::size_t effective_dim(const KernelSpec& k, const KernelSpec& l, int d_x, int d_yz);

/// (lambda1, lambda2) for a fit on n samples:
///   finite rank:    lambda_i = eta_i sqrt(d_tilde / n)
///   infinite rank:  lambda_i = eta_i (log n)^s n^-s,  s = nu / (2 nu + d)
/// The infinite-rank form needs n >= 2.
std::pair<double, double> lambda_schedule(const PolicyConfig& config, std::size_t n);

/// Exploration strength of epoch m >= 2 with previous epoch length `epoch_len`:
///   finite rank:    sqrt(eta K len / (d_tilde log(2 m^2 / delta)))
///   infinite rank:  sqrt(eta K / log(2 m^2 / delta)) (log len)^-s len^s
double gamma_schedule(const PolicyConfig& config, int n_arms, int m, std::size_t epoch_len);

/// Lowest index attaining the maximum.
std::size_t argmax_lowest(const std::vector<double>& values);

/// Inverse gap weighting: p(a) = 1 / (K + gamma (f(a_hat) - f(a))) for
/// a != a_hat, and a_hat takes the remaining mass.
std::vector<double> igw_probabilities(const std::vector<double>& fhat_values, double gamma);

/// Inverse-CDF draw from a probability vector using one uniform variate.
std::size_t sample_index(const std::vector<double>& probs, Rng& rng);

struct EpochDiagnostics {
  int epoch = 0;
  std::size_t samples = 0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double gamma = 0.0;
  double inner_residual = 0.0;
  double outer_residual = 0.0;
  Eigen::Index rank = 0;
  std::uint64_t data_checksum = 0;
};

/// Interface shared by the bandit learners. The runner calls, per round t:
/// begin_round(t), act(c), then observe(c, z, arm, y).
class Policy {
 public:
  virtual ~Policy() = default;
  virtual void begin_round(std::uint64_t t) { (void)t; }
  virtual std::size_t act(const Eigen::VectorXd& context, Rng& rng) = 0;
  virtual void observe(const Eigen::VectorXd& context, const Eigen::VectorXd& instrument,
                       std::size_t arm, double reward) {
    (void)context, (void)instrument, (void)arm, (void)reward;
  }
  virtual std::size_t fit_count() const { return 0; }
  virtual const std::vector<EpochDiagnostics>& diagnostics() const;
};

class UniformPolicy : public Policy {
 public:
  explicit UniformPolicy(std::size_t n_arms);
  std::size_t act(const Eigen::VectorXd& context, Rng& rng) override;

 private:
  std::size_t n_arms_;
};

/// State of the epoch learner during epoch m.
struct EpochState {
  int epoch = 1;
  std::optional<DualIVModel> model;  // empty: f_hat = 0 (epoch 1)
  double gamma = 1.0;
  std::uint64_t epoch_end = 0;      // tau_m
  std::uint64_t prev_epoch_len = 0;  // tau_{m-1} - tau_{m-2}
  TripleBuffer buffer;               // rows observed in epoch m
};

/// DIV-ELS and its naive-regression control. Each epoch refits f_hat on the
/// previous epoch's rows only, then samples arms by inverse gap weighting.
class EpochPolicy : public Policy {
 public:
  enum class Learner { DualIV, NaiveKrr };

  /// The learner sees the action set but never the environment's alpha.
  EpochPolicy(PolicyConfig config, Learner learner, EpochSchedule schedule,
              std::uint64_t horizon, Eigen::MatrixXd action_set, int context_dim,
              int instrument_dim);

  void begin_round(std::uint64_t t) override;
  std::size_t act(const Eigen::VectorXd& context, Rng& rng) override;
  void observe(const Eigen::VectorXd& context, const Eigen::VectorXd& instrument,
               std::size_t arm, double reward) override;
  std::size_t fit_count() const override { return fits_; }
  const std::vector<EpochDiagnostics>& diagnostics() const override { return diagnostics_; }

  const EpochState& state() const { return state_; }
  /// f_hat(c, a) for every arm; zeros in epoch 1.
  std::vector<double> arm_values(const Eigen::VectorXd& context) const;
  /// IGW probabilities the current epoch assigns at this context.
  std::vector<double> probabilities(const Eigen::VectorXd& context) const;

 private:
  void advance_epoch();

  PolicyConfig config_;
  Learner learner_;
  std::vector<std::uint64_t> boundaries_;
  Eigen::MatrixXd action_set_;
  int context_dim_;
  EpochState state_;
  std::size_t fits_ = 0;
  std::vector<EpochDiagnostics> diagnostics_;
};

}  // namespace divels
