#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "skel/ulam.hpp"

namespace skel {

struct SpectrumOptions {
  double tol = 1e-10;           ///< change of the leading Ritz moduli between checks
  std::size_t max_iter = 20000;
  std::size_t extra_vectors = 8;  ///< initial block size = count + extra_vectors
  double unit_threshold = 0.999;  ///< modulus counted as "on the unit circle"
  /// Iterations allowed per block size; an unsettled block (an eigenvalue cluster
  /// wider than the block) is doubled, and a block spanning everything is exact.
  std::size_t stall_iterations = 500;
  std::size_t max_block = 1024;
};

struct Spectrum {
  std::vector<std::complex<double>> eigenvalues;  ///< descending modulus
  std::vector<double> moduli;
  std::size_t iterations = 0;
  double residual = 0.0;  ///< last change of the leading moduli
  std::size_t unit_count = 0;  ///< reported moduli >= unit_threshold

  /// Second largest modulus, the discrete spectral gap estimate q.
  double q_hat() const { return moduli.size() > 1 ? moduli[1] : 0.0; }
};

/// Leading eigenvalues of P by block subspace iteration with Rayleigh-Ritz
/// projection; the constant vector seeds the block so the Perron root is exact.
/// Throws ErrorKind::spectral when the iteration stagnates at max_block.
Spectrum leading_spectrum(const UlamOperator& op, std::size_t count,
                          const SpectrumOptions& opt = {});

/// Full dense eigen-decomposition (small operators, cross-checks).
Spectrum dense_spectrum(const UlamOperator& op, std::size_t count, double unit_threshold = 0.999);

void write_spectrum_csv(const Spectrum& s, const std::filesystem::path& path);
nlohmann::json to_json(const Spectrum& s);

}  // namespace skel
