#include "divels/envs.hpp"
#include "divels/errors.hpp"

#include "doctest.h"

#include <cmath>
#include <cstring>
#include <vector>

using namespace divels;

namespace {

// Independent reward evaluator: expands (alpha . x + 1)^3 by hand.
double cubic_reward(const EnvSpec& env, const Eigen::VectorXd& c, std::size_t arm, double e) {
  double s = 1.0;
  for (int j = 0; j < env.context_dim; ++j) s += env.alpha(j) * c(j);
  for (int j = 0; j < env.action_dim; ++j)
    s += env.alpha(env.context_dim + j) * env.action_set(static_cast<Eigen::Index>(arm), j);
  return s * s * s + e;
}

double corr(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

EnvSpec flat_env(double rho) {
  EnvSpec env = sample_env(3, rho, 1);
  env.alpha.setZero();
  return env;
}

}  // namespace

TEST_CASE("sample_env") {
  const auto a = sample_env(4, 0.5, 17), b = sample_env(4, 0.5, 17);
  CHECK(a.alpha == b.alpha);
  CHECK(a.action_set == b.action_set);
  CHECK(sample_env(4, 0.5, 18).alpha != a.alpha);

  CHECK(a.action_set.rows() == 4);
  CHECK(a.action_set.cols() == 2);
  CHECK(a.alpha.size() == 4);
  CHECK(a.action_set.minCoeff() >= -2.0);
  CHECK(a.action_set.maxCoeff() <= 2.0);
  CHECK(a.alpha.minCoeff() >= 0.0);
  CHECK(a.alpha.maxCoeff() <= 1.0);
  CHECK(a.noise_scale == doctest::Approx(std::sqrt(0.1)));

  CHECK(sample_env(10, 0.5, 3).action_set.rows() == 10);
  CHECK_THROWS_AS(sample_env(4, 1.5, 1), InputError);
  CHECK_THROWS_AS(sample_env(4, -0.1, 1), InputError);
  CHECK_THROWS_AS(sample_env(4, 0.5, 1, 0.0), InputError);
}

TEST_CASE("next_round extremes of rho") {
  ConfoundedEnv one(sample_env(4, 1.0, 2), 5);
  for (int t = 0; t < 100; ++t) {
    const auto obs = one.next_round();
    CHECK(obs.context == obs.instrument);
    CHECK(obs.instrument.minCoeff() >= 0.0);
    CHECK(obs.instrument.maxCoeff() <= 1.0);
  }
  ConfoundedEnv zero(sample_env(4, 0.0, 2), 5);
  for (int t = 0; t < 100; ++t) {
    const auto obs = zero.next_round();
    CHECK(obs.context(0) == obs.context(1));
    CHECK(obs.context(0) == obs.confounder);
  }
}

TEST_CASE("context identity c = rho z + (1 - rho) e") {
  ConfoundedEnv env(sample_env(4, 0.3, 2), 6);
  for (int t = 0; t < 200; ++t) {
    const auto o = env.next_round();
    for (int j = 0; j < 2; ++j)
      REQUIRE(o.context(j) == doctest::Approx(0.3 * o.instrument(j) + 0.7 * o.confounder).epsilon(1e-15));
    REQUIRE(o.reward_noise == o.confounder);
  }
}

TEST_CASE("confounder moments over 1e5 draws") {
  ConfoundedEnv env(sample_env(4, 0.5, 3), 99);
  const int n = 100000;
  double s = 0, ss = 0;
  for (int t = 0; t < n; ++t) {
    const double e = env.next_round().confounder;
    s += e;
    ss += e * e;
  }
  const double mean = s / n, var = ss / n - mean * mean;
  CHECK(std::abs(mean) <= 0.004);
  CHECK(std::abs(var - 0.1) <= 0.005);
}

TEST_CASE("realized_reward examples") {
  EnvSpec env = flat_env(0.5);
  RoundObservation obs;
  obs.context = Eigen::Vector2d(0.3, 0.8);
  obs.instrument = Eigen::Vector2d(0.1, 0.2);
  obs.confounder = obs.reward_noise = 0.0;
  for (std::size_t a = 0; a < 3; ++a) CHECK(realized_reward(env, obs, a) == 1.0);
  obs.confounder = obs.reward_noise = 0.5;
  for (std::size_t a = 0; a < 3; ++a) CHECK(realized_reward(env, obs, a) == 1.5);
  CHECK_THROWS_AS(realized_reward(env, obs, 3), InputError);

  const EnvSpec r = sample_env(4, 0.4, 8);
  ConfoundedEnv ce(r, 8);
  for (int t = 0; t < 100; ++t) {
    const auto o = ce.next_round();
    CHECK(realized_reward(r, o, 2) == doctest::Approx(cubic_reward(r, o.context, 2, o.confounder)).epsilon(1e-13));
  }
}

TEST_CASE("best_arm") {
  EnvSpec single = sample_env(1, 0.5, 4);
  const Eigen::Vector2d c(0.2, 0.4);
  const auto [idx, val] = best_arm(single, c);
  CHECK(idx == 0);
  CHECK(val == structural_value(single, c, 0));

  EnvSpec twin = sample_env(3, 0.5, 4);
  twin.action_set.row(2) = twin.action_set.row(1);
  twin.action_set.row(0) << -2, -2;  // worst under non-negative alpha
  CHECK(best_arm(twin, c).first == 1);

  const EnvSpec r = sample_env(4, 0.5, 9);
  ConfoundedEnv ce(r, 9);
  for (int t = 0; t < 100; ++t) {
    const auto o = ce.next_round();
    std::size_t brute = 0;
    double bv = -1e300;
    for (std::size_t a = 0; a < 4; ++a) {
      const double v = cubic_reward(r, o.context, a, 0.0);
      if (v > bv) bv = v, brute = a;
    }
    CHECK(best_arm(r, o.context).first == brute);
    CHECK(best_arm(r, o.context).second == doctest::Approx(bv).epsilon(1e-13));
  }
  CHECK_THROWS_AS(structural_value(r, Eigen::Vector3d(1, 2, 3), 0), InputError);
}

TEST_CASE("confounding identity corr(c1, y - f) = (1 - rho) sigma / sd(c1)") {
  for (double rho : {0.01, 0.5, 0.95}) {
    const EnvSpec spec = sample_env(4, rho, 12);
    ConfoundedEnv env(spec, 34);
    std::vector<double> c1, noise;
    for (int t = 0; t < 100000; ++t) {
      const auto o = env.next_round();
      c1.push_back(o.context(0));
      noise.push_back(realized_reward(spec, o, 1) - structural_value(spec, o.context, 1));
    }
    const double sigma = std::sqrt(0.1);
    // sd(c1) = sqrt(rho^2 / 12 + (1 - rho)^2 sigma^2)
    const double sd = std::sqrt(rho * rho / 12.0 + (1 - rho) * (1 - rho) * 0.1);
    CHECK(std::abs(corr(c1, noise) - (1 - rho) * sigma / sd) <= 0.02);
  }
}

TEST_CASE("instrument is independent of the confounder") {
  ConfoundedEnv env(sample_env(4, 0.5, 13), 14);
  std::vector<double> z0, z1, e;
  for (int t = 0; t < 100000; ++t) {
    const auto o = env.next_round();
    z0.push_back(o.instrument(0));
    z1.push_back(o.instrument(1));
    e.push_back(o.confounder);
  }
  CHECK(std::abs(corr(z0, e)) <= 0.01);
  CHECK(std::abs(corr(z1, e)) <= 0.01);
}

TEST_CASE("unconfounded variant") {
  const EnvSpec conf = sample_env(4, 0.2, 15);
  const EnvSpec unc = unconfounded_variant(conf);
  CHECK_FALSE(unc.confounded);
  CHECK(unc.alpha == conf.alpha);
  CHECK(unc.action_set == conf.action_set);

  ConfoundedEnv a(conf, 16), b(unc, 16);
  std::vector<double> c1, noise;
  for (int t = 0; t < 100000; ++t) {
    const auto oa = a.next_round(), ob = b.next_round();
    REQUIRE(oa.context == ob.context);
    REQUIRE(oa.instrument == ob.instrument);
    c1.push_back(ob.context(0));
    noise.push_back(realized_reward(unc, ob, 0) - structural_value(unc, ob.context, 0));
  }
  CHECK(std::abs(corr(c1, noise)) <= 0.01);
}

TEST_CASE("round streams are deterministic") {
  const EnvSpec spec = sample_env(4, 0.6, 20);
  ConfoundedEnv a(spec, 21), b(spec, 21), c(spec, 22);
  bool differs = false;
  for (int t = 0; t < 1000; ++t) {
    const auto oa = a.next_round(), ob = b.next_round(), oc = c.next_round();
    REQUIRE(std::memcmp(oa.context.data(), ob.context.data(), 2 * sizeof(double)) == 0);
    REQUIRE(oa.confounder == ob.confounder);
    differs |= oa.confounder != oc.confounder;
  }
  CHECK(differs);
}

TEST_CASE("dataset helpers") {
  const EnvSpec spec = sample_env(4, 0.6, 23);
  ConfoundedEnv env(spec, 24);
  Rng arms(25);
  const auto d = sample_uniform_dataset(env, 50, arms);
  CHECK(d.size() == 50);
  CHECK(d.xs.cols() == 4);
  CHECK(d.zs.cols() == 2);
  CHECK_NOTHROW(d.validate());
  const auto yz = d.yz();
  CHECK(yz.cols() == 3);
  CHECK(yz.col(0) == d.ys);
  CHECK(yz.rightCols(2) == d.zs);
  // every regressor carries one of the action rows
  for (int i = 0; i < 50; ++i) {
    bool found = false;
    for (int a = 0; a < 4; ++a) found |= d.xs.row(i).tail(2) == spec.action_set.row(a);
    CHECK(found);
  }

  auto copy = d;
  CHECK(copy.checksum() == d.checksum());
  copy.ys(7) += 1e-12;
  CHECK(copy.checksum() != d.checksum());

  TripleBuffer buf(4, 2);
  CHECK(buf.empty());
  for (int i = 0; i < 50; ++i) buf.append(d.xs.row(i).transpose(), d.ys(i), d.zs.row(i).transpose());
  const auto back = buf.to_dataset();
  CHECK(back.xs == d.xs);
  CHECK(back.ys == d.ys);
  CHECK(back.zs == d.zs);
  CHECK(back.checksum() == d.checksum());
  buf.clear();
  CHECK(buf.size() == 0);
  CHECK_THROWS_AS(buf.append(Eigen::Vector3d(1, 2, 3), 0.0, Eigen::Vector2d(0, 0)), InputError);
}
