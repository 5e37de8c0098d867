#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skel/grid.hpp"
#include "skel/hypothesis.hpp"
#include "skel/piecewise.hpp"

namespace skel {

/// Coefficients of psi(x) = alpha0 + sum_i a_i x_i^2 + b1 x1 and the offset ell
/// of phi = ell + sqrt(psi) wrapped into [-L, L).
struct ExampleParams {
  double L = 1.0;
  int k = 2;
  double ell = 0.0;
  double alpha0 = 0.0;
  std::vector<double> a;  ///< a_1..a_k
  double b1 = 0.0;
};

struct RelationEntry {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;  ///< lhs - rhs
  bool pass = false;
};

struct RelationReport {
  std::vector<RelationEntry> entries;
  bool pass() const;
  std::string describe_failures() const;
};

/// Parameter generator: a1 = 2A^2, b1 = 4LM sqrt(k-1) + 2 a1 L, alpha0 = b1^2/(4 a1),
/// a_i = 4M^2/a1 unless a_tail (a_2..a_k) is supplied.
/// Throws ErrorKind::construction when the result fails check_relations.
ExampleParams build_example(double A, double M, double L, int k, double ell = 0.0,
                            std::optional<std::vector<double>> a_tail = std::nullopt);

/// rel0: 4 alpha0 a1 = b1^2; rel1: b1 - 2 a1 L >= 2A sqrt(psi_min) and > 0;
/// rel2: sqrt(a1 a_i) <= 2M for i >= 2.
RelationReport check_relations(const ExampleParams& p, double A, double M);

double eval_psi(const ExampleParams& p, std::span<const double> x);
/// sqrt(psi); throws ErrorKind::invariant_violation when psi <= 0.
double eval_phi0(const ExampleParams& p, std::span<const double> x);
void grad_phi0(const ExampleParams& p, std::span<const double> x, std::span<double> out);
Point grad_phi0(const ExampleParams& p, std::span<const double> x);

struct Wrapped {
  double value = 0.0;
  long piece = 0;
};

/// p = floor((ell + phi0 + L) / 2L), value = ell + phi0 - 2pL in [-L, L).
Wrapped wrap_value(double ell, double phi0, double L);
Wrapped wrap_phi(const ExampleParams& p, std::span<const double> x);

struct PsiRange {
  double min = 0.0;
  double max = 0.0;
};

/// Extremes of psi on [-L,L]^k from the separable completed-square form.
PsiRange psi_range(const ExampleParams& p);

struct PieceDescriptor {
  long q = 0;
  double lower = 0.0;  ///< psi threshold ((2q-1)L - ell)^2, or -inf for q = 0
  double upper = 0.0;  ///< ((2q+1)L - ell)^2
  bool empty = false;
};

/// O_0 = {psi < (L-ell)^2}, O_q = {((2q-1)L-ell)^2 < psi < ((2q+1)L-ell)^2}, q = 0..q_max.
std::vector<PieceDescriptor> piece_decomposition(const ExampleParams& p);
bool in_example_piece(const ExampleParams& p, const PieceDescriptor& d, std::span<const double> x);

/// Bound on the crossing number of the partition boundary for this family.
inline int crossing_number(const ExampleParams& p) { return p.k + 1; }

struct DerivativeAudit {
  std::size_t samples = 0;
  double min_d1 = 0.0;  ///< min |d phi0 / d x1|
  Point argmin_d1;
  double max_product = 0.0;  ///< max_i>=2 |d1 phi0 * di phi0|
  Point argmax_product;
  double closed_form_product = 0.0;  ///< max_i sqrt(a_i a1) / 2
  double max_gradient_error = 0.0;   ///< finite differences vs analytic, relative to |grad|_inf
  bool d1_pass = false;
  bool product_pass = false;
  bool closed_form_pass = false;
  bool gradient_pass = false;
  bool pass = false;
};

/// Samples the box (plus its corners) and checks the derivative bounds of phi0.
DerivativeAudit derivative_bounds_audit(const ExampleParams& p, double A, double M,
                                        std::size_t n_samples, std::uint64_t seed);

/// The wrapped map as a PiecewiseSystem with one branch per nonempty piece.
PiecewiseSystem make_example_system(const ExampleParams& p, const ModelParams& model);

struct Preset {
  std::string name;
  ModelParams model;
  double ell = 0.0;
};

std::optional<Preset> find_preset(const std::string& name);
std::vector<std::string> preset_names();

nlohmann::json to_json(const ExampleParams& p);
nlohmann::json to_json(const RelationReport& r);
nlohmann::json to_json(const DerivativeAudit& a);
nlohmann::json to_json(const std::vector<PieceDescriptor>& pieces);

}  // namespace skel
