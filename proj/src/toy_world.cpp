#include "divels/toy_world.hpp"

#include "divels/errors.hpp"
#include "divels/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace divels {

namespace {

constexpr double kProbTolerance = 1e-12;

void check_distribution(const double* p, std::size_t count, const std::string& what) {
  double total = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    if (!(p[i] >= 0.0) || !std::isfinite(p[i])) throw InputError(what + " has a negative entry");
    total += p[i];
  }
  if (std::abs(total - 1.0) > kProbTolerance) {
    throw InputError(what + " sums to " + std::to_string(total) + ", not 1");
  }
}

std::vector<double> normalized(std::vector<double> w) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= total;
  return w;
}

std::vector<double> random_weights(std::size_t count, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  std::vector<double> w(count);
  for (double& v : w) v = unif(rng);
  return normalized(std::move(w));
}

DiscreteToyWorld random_skeleton(std::size_t num_z, std::size_t num_x, std::size_t num_e,
                                 Rng& rng) {
  if (num_z == 0 || num_x == 0 || num_e == 0) throw InputError("toy world needs non-empty supports");
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  DiscreteToyWorld w;
  for (std::size_t j = 0; j < num_z; ++j) w.z_support.push_back(static_cast<double>(j));
  w.z_probs = random_weights(num_z, rng);
  for (std::size_t j = 0; j < num_x; ++j) w.x_support.push_back(static_cast<double>(j));
  w.x_given_z = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(num_z),
                                      static_cast<Eigen::Index>(num_x));
  w.e_probs = random_weights(num_e, rng);
  w.e_support.resize(num_e);
  for (double& e : w.e_support) e = unif(rng);
  double mean = 0.0;
  for (std::size_t k = 0; k < num_e; ++k) mean += w.e_probs[k] * w.e_support[k];
  for (double& e : w.e_support) e -= mean;
  w.f_star.resize(num_x);
  for (double& f : w.f_star) f = 3.0 * unif(rng);
  return w;
}

}  // namespace

void DiscreteToyWorld::validate() const {
  if (z_support.size() != z_probs.size()) throw InputError("z_support/z_probs size mismatch");
  if (e_support.size() != e_probs.size()) throw InputError("e_support/e_probs size mismatch");
  if (f_star.size() != x_support.size()) throw InputError("f_star must cover x_support");
  if (x_given_z.rows() != static_cast<Eigen::Index>(num_z()) ||
      x_given_z.cols() != static_cast<Eigen::Index>(num_x())) {
    throw InputError("x_given_z must be |Z| x |X|");
  }
  if (num_z() == 0 || num_x() == 0 || num_e() == 0) throw InputError("empty support");
  check_distribution(z_probs.data(), z_probs.size(), "P(Z)");
  check_distribution(e_probs.data(), e_probs.size(), "P(E)");
  for (std::size_t j = 0; j < num_z(); ++j) {
    const Eigen::VectorXd row = x_given_z.row(static_cast<Eigen::Index>(j)).transpose();
    check_distribution(row.data(), num_x(), "P(X | Z = z_" + std::to_string(j) + ")");
  }
  double mean = 0.0;
  for (std::size_t k = 0; k < num_e(); ++k) mean += e_probs[k] * e_support[k];
  if (std::abs(mean) > kProbTolerance) throw InputError("E must have mean zero");
}

std::vector<double> DiscreteToyWorld::x_marginal() const {
  std::vector<double> px(num_x(), 0.0);
  for (std::size_t j = 0; j < num_z(); ++j) {
    for (std::size_t i = 0; i < num_x(); ++i) {
      px[i] += z_probs[j] * x_given_z(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
    }
  }
  return px;
}

std::vector<YZCell> yz_cells(const DiscreteToyWorld& world) {
  world.validate();
  std::vector<YZCell> cells;
  for (std::size_t j = 0; j < world.num_z(); ++j) {
    const std::size_t first = cells.size();
    for (std::size_t i = 0; i < world.num_x(); ++i) {
      const double pxz = world.x_given_z(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
      for (std::size_t k = 0; k < world.num_e(); ++k) {
        const double p = world.z_probs[j] * pxz * world.e_probs[k];
        if (p == 0.0) continue;
        const double y = world.f_star[i] + world.e_support[k];
        auto it = std::find_if(cells.begin() + static_cast<std::ptrdiff_t>(first), cells.end(),
                               [y](const YZCell& c) { return c.y == y; });
        if (it == cells.end()) {
          cells.push_back({j, y, p});
        } else {
          it->prob += p;
        }
      }
    }
  }
  return cells;
}

DiscreteToyWorld random_toy_world(std::size_t num_z, std::size_t num_x, std::size_t num_e,
                                  std::uint64_t seed) {
  Rng rng(seed);
  DiscreteToyWorld w = random_skeleton(num_z, num_x, num_e, rng);
  for (std::size_t j = 0; j < num_z; ++j) {
    const auto row = random_weights(num_x, rng);
    for (std::size_t i = 0; i < num_x; ++i) {
      w.x_given_z(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = row[i];
    }
  }
  return w;
}

DiscreteToyWorld instrument_determined_world(std::size_t num_z, std::size_t num_x,
                                             std::size_t num_e, std::uint64_t seed) {
  Rng rng(seed);
  DiscreteToyWorld w = random_skeleton(num_z, num_x, num_e, rng);
  for (std::size_t j = 0; j < num_z; ++j) {
    w.x_given_z(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j % num_x)) = 1.0;
  }
  return w;
}

double IdentityReport::max_violation() const {
  return std::max({maximizer_violation, risk_violation, excess_risk_violation, dual_gap_violation});
}

namespace {

std::vector<double> conditional_means(const DiscreteToyWorld& w, const std::vector<double>& f) {
  std::vector<double> g(w.num_z(), 0.0);
  for (std::size_t j = 0; j < w.num_z(); ++j) {
    for (std::size_t i = 0; i < w.num_x(); ++i) {
      g[j] += w.x_given_z(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) * f[i];
    }
  }
  return g;
}

double psi(const std::vector<YZCell>& cells, const std::vector<double>& g,
           const std::vector<double>& u) {
  double total = 0.0;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    total += cells[c].prob * ((g[cells[c].z] - cells[c].y) * u[c] - 0.5 * u[c] * u[c]);
  }
  return total;
}

double risk(const std::vector<YZCell>& cells, const std::vector<double>& g) {
  double total = 0.0;
  for (const auto& cell : cells) {
    const double d = cell.y - g[cell.z];
    total += cell.prob * 0.5 * d * d;
  }
  return total;
}

// E_XYZ[(f(X) - Y) u(Y, Z) - u^2 / 2], summing over every (z, x, e) outcome.
double psi_joint(const DiscreteToyWorld& w, const std::vector<YZCell>& cells,
                 const std::vector<double>& f, const std::vector<double>& u) {
  double total = 0.0;
  for (std::size_t j = 0; j < w.num_z(); ++j) {
    for (std::size_t i = 0; i < w.num_x(); ++i) {
      const double pxz = w.x_given_z(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
      for (std::size_t k = 0; k < w.num_e(); ++k) {
        const double p = w.z_probs[j] * pxz * w.e_probs[k];
        if (p == 0.0) continue;
        const double y = w.f_star[i] + w.e_support[k];
        std::size_t c = 0;
        while (!(cells[c].z == j && cells[c].y == y)) ++c;
        total += p * ((f[i] - y) * u[c] - 0.5 * u[c] * u[c]);
      }
    }
  }
  return total;
}

}  // namespace

IdentityReport discrete_world_checks(const DiscreteToyWorld& world,
                                        const std::vector<double>& f_table,
                                        const std::vector<double>& u_table) {
  const auto cells = yz_cells(world);
  if (f_table.size() != world.num_x()) throw InputError("f_table must cover x_support");
  if (u_table.size() != cells.size()) {
    throw InputError("u_table must have one entry per (y, z) cell (" +
                     std::to_string(cells.size()) + ")");
  }

  const auto g_f = conditional_means(world, f_table);
  const auto g_star = conditional_means(world, world.f_star);

  std::vector<double> u_star(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) u_star[c] = g_f[cells[c].z] - cells[c].y;

  IdentityReport rep;
  const double psi_at_star = psi(cells, g_f, u_star);

  // (1) u*_f is a stationary point of the concave quadratic Psi(f, .).
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto plus = u_star;
    auto minus = u_star;
    plus[c] += 1.0;
    minus[c] -= 1.0;
    const double slope = (psi(cells, g_f, plus) - psi(cells, g_f, minus)) / 2.0;
    rep.maximizer_violation = std::max(rep.maximizer_violation, std::abs(slope) / cells[c].prob);
  }

  // (2) max_u Psi(f, u) = R(f).
  const double r_f = risk(cells, g_f);
  rep.risk_violation = std::abs(psi_at_star - r_f);

  // (3) R(f) - R(f*) = |f - f*|^2_{P_X} / 2.
  const auto px = world.x_marginal();
  for (std::size_t i = 0; i < world.num_x(); ++i) {
    const double d = f_table[i] - world.f_star[i];
    rep.half_sq_error_px += 0.5 * px[i] * d * d;
  }
  for (std::size_t j = 0; j < world.num_z(); ++j) {
    const double d = g_f[j] - g_star[j];
    rep.half_sq_error_projected += 0.5 * world.z_probs[j] * d * d;
  }
  rep.excess_risk = r_f - risk(cells, g_star);
  rep.excess_risk_violation = std::abs(rep.excess_risk - rep.half_sq_error_px);

  // (4) Psi(f, u*) - Psi(f, u) = |u - u*|^2_{P_YZ} / 2.
  double half_dist = 0.0;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const double d = u_table[c] - u_star[c];
    half_dist += 0.5 * cells[c].prob * d * d;
  }
  rep.dual_gap_violation = std::abs(psi_at_star - psi(cells, g_f, u_table) - half_dist);

  rep.joint_form_gap =
      std::max(std::abs(psi(cells, g_f, u_table) - psi_joint(world, cells, f_table, u_table)),
               std::abs(psi_at_star - psi_joint(world, cells, f_table, u_star)));
  return rep;
}

}  // namespace divels
