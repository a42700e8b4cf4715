#include "divels/policy.hpp"

#include "divels/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace divels {

std::string_view to_string(EpochSchedule::Kind kind) {
  return kind == EpochSchedule::Kind::Doubling ? "doubling" : "horizon";
}

EpochSchedule::Kind parse_schedule_kind(std::string_view name) {
  if (name == "doubling") return EpochSchedule::Kind::Doubling;
  if (name == "horizon" || name == "horizon-aware") return EpochSchedule::Kind::HorizonAware;
  throw InputError("unknown epoch schedule '" + std::string(name) + "'");
}

std::uint64_t EpochSchedule::boundary(int m) const {
  if (m < 0) throw InputError("epoch index must be >= 0");
  if (m == 0) return 0;
  if (kind == Kind::Doubling) {
    if (m >= 64) return std::numeric_limits<std::uint64_t>::max();
    return std::uint64_t{1} << m;
  }
  if (horizon == 0) throw InputError("horizon-aware schedule needs T >= 1");
  // 2 T^(1 - 2^-m) through exp2/log2, so exact powers of two stay exact.
  const long double exponent =
      1.0L + (1.0L - std::ldexp(1.0L, -m)) * std::log2(static_cast<long double>(horizon));
  const long double value = std::exp2(exponent);
  return static_cast<std::uint64_t>(std::floor(value * (1.0L + 1e-15L)));
}

std::vector<std::uint64_t> EpochSchedule::boundaries(std::uint64_t T) const {
  if (T == 0) throw InputError("horizon must be >= 1");
  EpochSchedule sched = *this;
  if (sched.kind == Kind::HorizonAware && sched.horizon == 0) sched.horizon = T;
  std::vector<std::uint64_t> out;
  for (int m = 1;; ++m) {
    const std::uint64_t tau = std::min(sched.boundary(m), T);
    if (tau == 0) continue;
    if (out.empty() || tau > out.back()) out.push_back(tau);
    if (tau == T) break;
  }
  return out;
}

std::size_t EpochSchedule::fit_count(std::uint64_t T) const { return boundaries(T).size() - 1; }

void PolicyConfig::validate() const {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw InputError("eta must be finite and >= 0");
  if (!positive(eta1) || !positive(eta2)) throw InputError("eta1 and eta2 must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw InputError("delta must lie in (0, 1)");
  if (d_tilde < 1) throw InputError("d_tilde must be >= 1");
  k_spec.validate();
  l_spec.validate();
  if (infinite) {
    if (infinite->dim < 1) throw InputError("infinite-rank schedule needs d >= 1");
    if (!(infinite->nu > infinite->dim / 2.0) || !std::isfinite(infinite->nu)) {
      throw InputError("infinite-rank schedule needs nu > d / 2");
    }
  }
}

std::size_t effective_dim(const KernelSpec& k, const KernelSpec& l, int d_x, int d_yz) {
  if (!k.finite_rank() || !l.finite_rank()) {
    throw UnsupportedFamilyError(
        "effective dimension is undefined for infinite-rank kernels; use the "
        "infinite-rank schedule");
  }
  return std::max(rkhs_dimension(k, d_x), rkhs_dimension(l, d_yz));
}

namespace {

double infinite_exponent(const InfiniteRank& inf) {
  return inf.nu / (2.0 * inf.nu + static_cast<double>(inf.dim));
}

}  // namespace

std::pair<double, double> lambda_schedule(const PolicyConfig& config, std::size_t n) {
  if (n < 1) throw InputError("lambda schedule needs n >= 1");
  const double nd = static_cast<double>(n);
  if (!config.infinite) {
    const double base = std::sqrt(static_cast<double>(config.d_tilde) / nd);
    return {config.eta1 * base, config.eta2 * base};
  }
  if (n < 2) throw InputError("infinite-rank lambda schedule needs n >= 2");
  const double s = infinite_exponent(*config.infinite);
  const double base = std::pow(std::log(nd), s) * std::pow(nd, -s);
  return {config.eta1 * base, config.eta2 * base};
}

double gamma_schedule(const PolicyConfig& config, int n_arms, int m, std::size_t epoch_len) {
  if (m < 2) throw InputError("gamma schedule starts at epoch 2");
  if (epoch_len < 1) throw InputError("gamma schedule needs a non-empty previous epoch");
  const double log_term = std::log(2.0 * m * static_cast<double>(m) / config.delta);
  const double len = static_cast<double>(epoch_len);
  if (!config.infinite) {
    return std::sqrt(config.eta * n_arms * len / (config.d_tilde * log_term));
  }
  if (epoch_len < 2) throw InputError("infinite-rank gamma schedule needs epoch length >= 2");
  const double s = infinite_exponent(*config.infinite);
  return std::sqrt(config.eta * n_arms / log_term) * std::pow(std::log(len), -s) *
         std::pow(len, s);
}

std::size_t argmax_lowest(const std::vector<double>& values) {
  if (values.empty()) throw InputError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t a = 1; a < values.size(); ++a) {
    if (values[a] > values[best]) best = a;
  }
  return best;
}

std::vector<double> igw_probabilities(const std::vector<double>& fhat_values, double gamma) {
  if (fhat_values.empty()) throw InputError("igw needs at least one arm");
  for (double v : fhat_values) {
    if (!std::isfinite(v)) throw InputError("igw: non-finite value estimate");
  }
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InputError("igw: gamma must be finite and >= 0");
  const std::size_t k = fhat_values.size();
  const std::size_t best = argmax_lowest(fhat_values);
  const double uniform = 1.0 / static_cast<double>(k);
  std::vector<double> p(k, 0.0);
  // best gets 1/K plus what each other arm gave up; 1 - sum can round below 1/K
  double slack = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    if (a == best) continue;
    const double gap = fhat_values[best] - fhat_values[a];
    p[a] = 1.0 / (static_cast<double>(k) + gamma * gap);
    slack += uniform - p[a];
  }
  p[best] = uniform + slack;
  return p;
}

std::size_t sample_index(const std::vector<double>& probs, Rng& rng) {
  if (probs.empty()) throw InputError("cannot sample from an empty distribution");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    if (probs[a] <= 0.0) continue;
    last_positive = a;
    cumulative += probs[a];
    if (u < cumulative) return a;
  }
  return last_positive;
}

const std::vector<EpochDiagnostics>& Policy::diagnostics() const {
  static const std::vector<EpochDiagnostics> empty;
  return empty;
}

UniformPolicy::UniformPolicy(std::size_t n_arms) : n_arms_(n_arms) {
  if (n_arms == 0) throw InputError("uniform policy needs at least one arm");
}

std::size_t UniformPolicy::act(const Eigen::VectorXd&, Rng& rng) {
  return sample_index(std::vector<double>(n_arms_, 1.0 / static_cast<double>(n_arms_)), rng);
}

EpochPolicy::EpochPolicy(PolicyConfig config, Learner learner, EpochSchedule schedule,
                         std::uint64_t horizon, Eigen::MatrixXd action_set, int context_dim,
                         int instrument_dim)
    : config_(std::move(config)),
      learner_(learner),
      boundaries_(schedule.boundaries(horizon)),
      action_set_(std::move(action_set)),
      context_dim_(context_dim) {
  config_.validate();
  if (action_set_.rows() < 1) throw InputError("policy needs at least one arm");
  state_.epoch = 1;
  state_.gamma = 1.0;
  state_.epoch_end = boundaries_.front();
  state_.buffer = TripleBuffer(context_dim + static_cast<int>(action_set_.cols()), instrument_dim);
}

void EpochPolicy::begin_round(std::uint64_t t) {
  if (t > state_.epoch_end && static_cast<std::size_t>(state_.epoch) < boundaries_.size()) {
    advance_epoch();
  }
}

void EpochPolicy::advance_epoch() {
  const TripleDataset data = state_.buffer.to_dataset();
  const int next = state_.epoch + 1;
  const std::size_t n = data.size();
  try {
    const auto [lambda1, lambda2] = lambda_schedule(config_, n);
    DualIVModel model = learner_ == Learner::DualIV
                            ? fit(data, config_.k_spec, config_.l_spec, lambda1, lambda2)
                            : naive_krr_fit(data, config_.k_spec, lambda2);
    const double gamma = gamma_schedule(config_, static_cast<int>(action_set_.rows()), next, n);

    EpochDiagnostics diag;
    diag.epoch = next;
    diag.samples = n;
    diag.lambda1 = lambda1;
    diag.lambda2 = lambda2;
    diag.gamma = gamma;
    diag.inner_residual = model.diagnostics.inner_residual;
    diag.outer_residual = model.diagnostics.outer_residual;
    diag.rank = model.diagnostics.rank;
    diag.data_checksum = data.checksum();
    diagnostics_.push_back(diag);

    state_.model = std::move(model);
    state_.gamma = gamma;
  } catch (const NumericalError& e) {
    throw NumericalError("epoch " + std::to_string(next) + ": " + e.what(),
                         e.condition_estimate());
  } catch (const InputError& e) {
    throw InputError("epoch " + std::to_string(next) + ": " + e.what());
  }
  ++fits_;
  state_.epoch = next;
  state_.prev_epoch_len = n;
  state_.epoch_end = boundaries_[static_cast<std::size_t>(next) - 1];
  state_.buffer.clear();
}

std::vector<double> EpochPolicy::arm_values(const Eigen::VectorXd& context) const {
  const auto k = static_cast<std::size_t>(action_set_.rows());
  std::vector<double> values(k, 0.0);
  if (!state_.model) return values;
  Eigen::VectorXd x(context_dim_ + action_set_.cols());
  x.head(context_dim_) = context;
  for (std::size_t a = 0; a < k; ++a) {
    x.tail(action_set_.cols()) = action_set_.row(static_cast<Eigen::Index>(a)).transpose();
    values[a] = predict(*state_.model, x);
  }
  return values;
}

std::vector<double> EpochPolicy::probabilities(const Eigen::VectorXd& context) const {
  return igw_probabilities(arm_values(context), state_.gamma);
}

std::size_t EpochPolicy::act(const Eigen::VectorXd& context, Rng& rng) {
  if (context.size() != context_dim_) throw InputError("policy: context has the wrong dimension");
  return sample_index(probabilities(context), rng);
}

void EpochPolicy::observe(const Eigen::VectorXd& context, const Eigen::VectorXd& instrument,
                          std::size_t arm, double reward) {
  if (arm >= static_cast<std::size_t>(action_set_.rows())) throw InputError("policy: arm out of range");
  Eigen::VectorXd x(context_dim_ + action_set_.cols());
  x.head(context_dim_) = context;
  x.tail(action_set_.cols()) = action_set_.row(static_cast<Eigen::Index>(arm)).transpose();
  state_.buffer.append(x, reward, instrument);
}

}  // namespace divels
