#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace divels {

/// Finite world where every population expectation is an exact sum:
///
///   Z ~ z_probs,  X | Z ~ x_given_z,  E ~ e_probs independent of (X, Z),
///   Y = f*(X) + E.
///
/// E must have mean zero, so E[Y | Z] = E[f*(X) | Z] and f* is the unique
/// minimizer of R on the support of X.
struct DiscreteToyWorld {
  std::vector<double> z_support;
  std::vector<double> z_probs;
  std::vector<double> x_support;
  Eigen::MatrixXd x_given_z;  // |Z| x |X|, rows sum to 1
  std::vector<double> e_support;
  std::vector<double> e_probs;
  std::vector<double> f_star;  // structural values on x_support

  /// Throws InputError if a probability row is negative or does not sum to 1
  /// within 1e-12, if E is not centred (|E[E]| > 1e-12) or sizes disagree.
  void validate() const;

  std::size_t num_z() const { return z_probs.size(); }
  std::size_t num_x() const { return x_support.size(); }
  std::size_t num_e() const { return e_probs.size(); }

  /// Marginal P(X = x_j).
  std::vector<double> x_marginal() const;
};

/// One atom of the (Y, Z) distribution. Outcomes (x, e) that produce the same
/// y under the same z share a cell.
struct YZCell {
  std::size_t z = 0;
  double y = 0.0;
  double prob = 0.0;
};

std::vector<YZCell> yz_cells(const DiscreteToyWorld& world);

/// Random world with full-support P(X | Z) rows.
DiscreteToyWorld random_toy_world(std::size_t num_z, std::size_t num_x, std::size_t num_e,
                                  std::uint64_t seed);

/// Random world in which each instrument value selects one regressor value
/// (every row of P(X | Z) is a point mass, z_j -> x_{j mod |X|}).
DiscreteToyWorld instrument_determined_world(std::size_t num_z, std::size_t num_x,
                                             std::size_t num_e, std::uint64_t seed);

/// Population objects, all computed by exact summation:
///   g_f(z)     = E[f(X) | Z = z]
///   Psi(f, u)  = E_YZ[(g_f(Z) - Y) u(Y, Z) - u(Y, Z)^2 / 2]
///   R(f)       = E_YZ[(Y - g_f(Z))^2 / 2]
///   u*_f(y, z) = g_f(z) - y
///
/// Each *_violation field is the absolute error of one identity:
///   maximizer:   largest |dPsi/du| at u*_f, per unit cell mass, by central
///                differences (exact for a quadratic)
///   risk:        |Psi(f, u*_f) - R(f)|
///   excess_risk: |R(f) - R(f*) - |f - f*|^2_{P_X} / 2|
///   dual_gap:    |Psi(f, u*_f) - Psi(f, u) - |u - u*_f|^2_{P_YZ} / 2|
struct IdentityReport {
  double maximizer_violation = 0.0;
  double risk_violation = 0.0;
  double excess_risk_violation = 0.0;
  double dual_gap_violation = 0.0;

  double excess_risk = 0.0;           // R(f) - R(f*)
  double half_sq_error_px = 0.0;      // |f - f*|^2_{P_X} / 2
  double half_sq_error_projected = 0.0;  // E_Z[(g_f - g_f*)^2] / 2
  /// max over u in {u, u*_f} of |Psi(f, u) - E_XYZ[(f(X) - Y) u - u^2 / 2]|:
  /// how far the joint-expectation form of Psi is from the one above.
  double joint_form_gap = 0.0;

  double max_violation() const;
};

/// f_table holds f on x_support; u_table holds u on yz_cells(world), in that
/// order. Throws InputError on size mismatch or an invalid world.
IdentityReport discrete_world_checks(const DiscreteToyWorld& world,
                                        const std::vector<double>& f_table,
                                        const std::vector<double>& u_table);

}  // namespace divels
