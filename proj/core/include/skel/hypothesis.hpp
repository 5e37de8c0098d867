#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace skel {

/// Scalar data of the admissibility hypotheses for the order-k recurrence
/// X_{n+k} = phi(X_n, ..., X_{n+k-1}) on [-L, L].
struct ModelParams {
  double L = 1.0;      ///< half-width of the state interval
  int k = 2;           ///< recurrence order
  double A = 2.0;      ///< lower bound on |d phi / d x_1|
  double sigma = 1.2;  ///< expansion target of the conjugated map
  double M = 1.0;      ///< bound on |d_1 phi * d_i phi|, i >= 2
  double alpha = 1.0;  ///< Hoelder exponent of the branch derivatives
  int Y = 3;           ///< crossing number of the partition boundary
  double eps0 = 0.1;   ///< norm radius, must stay below gamma^(k-1) L
  double eps1 = 0.05;  ///< branch-extension margin

  /// gamma = A^(-1/k), the coordinate rescaling of the conjugated system.
  double gamma() const;
  /// s = 1/sqrt(sigma).
  double s() const;
};

/// Volume of the unit ball of R^k, pi^(k/2) / Gamma(k/2 + 1).
double unit_ball_volume(int k);

/// Largest admissible cross-derivative bound M_0(sigma, A). Positive root of
/// (k-2) g^(2k+1) M^2 + (k-1) g^(k-1) M - (1/g^2 - sigma) = 0, g = A^(-1/k);
/// at k = 2 this is the linear root (A^(2/k) - sigma) / g.
/// Throws ErrorKind::admissibility unless A^(2/k) > sigma.
double compute_M0(double A, double sigma, int k);

/// Lower bound 1/g^2 - M(k-1)g^(k-1) - M^2(k-2)g^(2k+1) on every Gershgorin
/// disk of the expansion matrix. Equals sigma when M = M_0(sigma, A).
double gershgorin_floor(double A, double M, int k);

/// eta = s^alpha + 4s/(1-s) * Y * V_{k-1} / V_k with V the unit-ball volume.
double compute_eta(double sigma, double alpha, int Y, int k);

struct HypothesisEntry {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct HypothesisReport {
  std::vector<HypothesisEntry> entries;

  bool pass() const;
  const HypothesisEntry* find(const std::string& name) const;
  std::vector<std::string> failures() const;
  std::string table() const;
};

/// Evaluates every closed-form condition; failures become report entries.
HypothesisReport audit(const ModelParams& params);

nlohmann::json to_json(const ModelParams& params);
nlohmann::json to_json(const HypothesisReport& report);

}  // namespace skel
