#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "skel/grid.hpp"
#include "skel/osc_norms.hpp"
#include "skel/piecewise.hpp"
#include "skel/sparse.hpp"

namespace skel {

/// Ulam discretization of the transfer operator: P(i, j) is the fraction of
/// cell i mapped into cell j.
struct UlamOperator {
  UniformGrid grid;
  SparseRowMatrix P;
  std::size_t samples_per_cell = 0;
  std::uint64_t seed = 0;
};

/// Pushes samples_per_cell stratified points of every cell through the map.
/// Throws ModelConsistencyError when an image leaves the box.
UlamOperator build_ulam(const BoxMap& map, std::vector<std::size_t> resolution,
                        std::size_t samples_per_cell, std::uint64_t seed);
UlamOperator build_ulam(const PiecewiseSystem& system, std::vector<std::size_t> resolution,
                        std::size_t samples_per_cell, std::uint64_t seed);

/// Operator from an explicit row-stochastic matrix (hand-made fixtures).
UlamOperator ulam_from_matrix(UniformGrid grid, SparseRowMatrix P);

/// Cell values are densities: mass / cell volume.
using DensityField = GridFunction;

double integral(const DensityField& h);
/// Cell masses (density times cell volume).
std::vector<double> masses(const DensityField& h);

struct InvariantDensityOptions {
  double tol = 1e-10;
  std::size_t max_iter = 100000;
};

/// Left fixed vector of P by power iteration from the uniform density.
/// Throws ConvergenceError carrying the last L1 step.
DensityField invariant_density(const UlamOperator& op, const InvariantDensityOptions& opt = {});

/// L1 distance between the pushed-forward masses and the masses.
double fixed_point_residual(const UlamOperator& op, const DensityField& h);

/// Integrates out every axis but j and maps axis j onto axis 0's interval:
/// h_inv(u) = c * int h(..., z_j = c u, ...) with c = width_j / width_0.
GridFunction marginal_density(const DensityField& h, std::size_t j);

/// L1 distance of two densities on the same grid.
double l1_distance(const GridFunction& a, const GridFunction& b);

void save_ulam(const UlamOperator& op, const std::filesystem::path& path);
UlamOperator load_ulam(const std::filesystem::path& path);

void write_marginal_csv(const GridFunction& marginal, const std::filesystem::path& path);

}  // namespace skel
