#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "skel/grid.hpp"
#include "skel/hypothesis.hpp"

namespace skel {

using ScalarField = std::function<double(std::span<const double>)>;
using GradientField = std::function<void(std::span<const double>, std::span<double>)>;

/// Smooth inequality g(x) < 0; the gradient feeds first-order distance estimates.
struct Constraint {
  ScalarField value;
  GradientField gradient;
};

/// One piece O_j of the partition of [-L,L]^k together with the extension
/// phi_j of the recurrence map to a neighbourhood of its closure.
/// O_j = open box intersected with {g < 0 for every constraint g}.
struct Branch {
  std::vector<Constraint> constraints;
  ScalarField phi;
  GradientField grad_phi;
};

/// Optional fast lookup returning a candidate piece; the candidate is always verified.
using PieceHint = std::function<std::optional<std::size_t>(std::span<const double>)>;

struct PieceLocation {
  std::size_t index = 0;
  bool boundary = false;  ///< x lies in no open piece (measure-zero set)
};

/// The recurrence map phi on [-L,L]^k and its conjugated first-order system
///   T(z) = (z_2/g, ..., z_k/g, g^(k-1) phi_j(z_1, z_2/g, ..., z_k/g^(k-1)))
/// on Omega = [-L,L] x [-gL,gL] x ... x [-g^(k-1)L, g^(k-1)L], g = A^(-1/k).
/// Immutable after construction.
class PiecewiseSystem {
 public:
  PiecewiseSystem(ModelParams params, std::vector<Branch> branches, PieceHint hint = {});

  const ModelParams& params() const noexcept { return params_; }
  int dim() const noexcept { return params_.k; }
  double gamma() const noexcept { return gamma_; }
  double gamma_power(int e) const { return gamma_pow_[static_cast<std::size_t>(e)]; }
  const Box& state_box() const noexcept { return state_box_; }
  const Box& omega() const noexcept { return omega_; }
  std::size_t branch_count() const noexcept { return branches_.size(); }
  const Branch& branch(std::size_t j) const { return branches_.at(j); }

  bool in_piece(std::size_t j, std::span<const double> x) const;
  /// First-order test for x in B_margin(closure O_j): box widened by margin and
  /// g(x) <= margin * |grad g(x)| for every constraint.
  bool in_enlarged_piece(std::size_t j, std::span<const double> x, double margin) const;

  /// Unique piece containing x; boundary points go to the lowest-index piece
  /// whose closure holds x, flagged. Throws ErrorKind::domain outside the box.
  PieceLocation locate_piece(std::span<const double> x) const;

  double phi(std::size_t j, std::span<const double> x) const { return branches_[j].phi(x); }
  void grad_phi(std::size_t j, std::span<const double> x, std::span<double> out) const {
    branches_[j].grad_phi(x, out);
  }

  /// T_j on the conjugated domain without range checks (audits use it off Omega).
  void apply_branch(std::size_t j, std::span<const double> z, std::span<double> out) const;

  /// T(z). Throws ErrorKind::domain for z outside Omega and ModelConsistencyError
  /// when phi leaves [-L, L].
  PieceLocation apply_T(std::span<const double> z, std::span<double> out) const;
  Point apply_T(std::span<const double> z) const;

  void lift(std::span<const double> x, std::span<double> z) const;
  void unlift(std::span<const double> z, std::span<double> x) const;

  /// Type-erased view sharing this system (copied into the closure).
  BoxMap as_box_map(std::string name = "piecewise") const;

 private:
  ModelParams params_;
  std::vector<Branch> branches_;
  PieceHint hint_;
  double gamma_;
  std::vector<double> gamma_pow_;
  Box state_box_;
  Box omega_;
};

/// (x_1, g x_2, ..., g^(k-1) x_k); throws ErrorKind::domain when some |x_j| > L.
Point lift_X_to_Z(std::span<const double> x, double gamma, double L);

struct Trajectory {
  std::vector<double> values;  ///< X_0..X_{n+k-1}, or only the final k values
  bool boundary_hit = false;
  std::size_t first_boundary_step = 0;
};

/// Iterates X_{m+k} = phi(X_m, ..., X_{m+k-1}) n times from k initial values.
Trajectory simulate_X(const PiecewiseSystem& system, std::span<const double> init, std::size_t n,
                      bool record = true);

/// Expansion matrix of the squared stretch ||T_j(u)-T_j(v)||^2 = d^T B d at the
/// gradient g of phi_j:
///   b_11 = gamma^(2k-2) g_1^2,  b_ii = 1/gamma^2 + gamma^(2(k-i)) g_i^2 (i > 1),
///   b_il = gamma^(2k-i-l) g_i g_l (i != l).
Eigen::MatrixXd b_matrix_from_gradient(std::span<const double> gradient, double gamma);
Eigen::MatrixXd b_matrix(const PiecewiseSystem& system, std::size_t j, std::span<const double> x);

/// min_i (b_ii - sum_{l != i} |b_il|), a lower bound on the spectrum of symmetric B.
double gershgorin_lower_bound(const Eigen::MatrixXd& B);

struct BranchExpansion {
  std::size_t branch = 0;
  std::size_t points = 0;
  std::size_t pairs = 0;
  double min_gershgorin = 0.0;
  double min_stretch = 0.0;
};

struct ExpansionAudit {
  double sigma = 0.0;
  double analytic_floor = 0.0;  ///< gershgorin_floor(A, M, k)
  std::size_t sample_count = 0;
  std::size_t pair_count = 0;
  double min_gershgorin = 0.0;
  Point argmin_gershgorin;
  double min_stretch = 0.0;  ///< min ||T(u)-T(v)||^2 / ||u-v||^2
  bool gershgorin_pass = false;
  bool stretch_pass = false;
  bool pass = false;
  std::vector<BranchExpansion> branches;
  std::vector<std::string> warnings;
};

/// Samples n_points per piece (rejection from the box, closure of O_j within the
/// box) for the Gershgorin bound of B, and n_pairs close same-piece pairs per
/// piece in Omega (radius min(eps0, eps1/2)) for the squared stretch ratio.
ExpansionAudit expansion_audit(const PiecewiseSystem& system, double sigma, std::size_t n_points,
                               std::size_t n_pairs, std::uint64_t seed);

struct PairWitness {
  Point u;
  Point v;
  double observed = 0.0;
  double required = 0.0;
};

struct InjectivityReport {
  std::size_t branch = 0;
  std::size_t pairs = 0;
  std::size_t violations = 0;
  double min_ratio = 0.0;  ///< min ||T_j(u)-T_j(v)|| / |u_1 - v_1|
  std::vector<PairWitness> witnesses;
  bool pass() const { return pairs > 0 && violations == 0; }
};

/// Pairs in O_j differing only in the first coordinate must separate by at
/// least |u_1 - v_1| / s under T_j.
InjectivityReport injectivity_probe(const PiecewiseSystem& system, std::size_t j,
                                    std::size_t n_pairs, std::uint64_t seed);

struct GeometryReport {
  std::size_t branch = 0;
  std::size_t pairs = 0;
  std::size_t passing = 0;
  std::vector<PairWitness> witnesses;
  double fraction() const { return pairs ? static_cast<double>(passing) / pairs : 0.0; }
};

/// Segment form of the path condition: for pairs in O_j differing only in x_1,
/// the straight segment must stay inside B_eps1(closure O_j).
GeometryReport geometry_probe(const PiecewiseSystem& system, std::size_t j, std::size_t n_pairs,
                              std::uint64_t seed);

nlohmann::json to_json(const ExpansionAudit& audit);
nlohmann::json to_json(const InjectivityReport& report);
nlohmann::json to_json(const GeometryReport& report);

}  // namespace skel
