#pragma once

#include <cstddef>

#include "skel/grid.hpp"
#include "skel/piecewise.hpp"
#include "skel/ulam.hpp"

namespace skel {

/// x -> 2x mod 1 on [0, 1].
BoxMap doubling_map();
/// Every coordinate doubled modulo [-1, 1] on [-1, 1]^dim; Lebesgue measure is invariant.
BoxMap product_doubling(std::size_t dim = 2);
BoxMap identity_map(const Box& box);
/// x -> x + 1 mod 2 on [0, 2]: every cell pairs with its translate.
BoxMap half_rotation();
/// Two invariant doubling copies on [0, 1) and [1, 2).
BoxMap block_doubling();
/// Doubling that swaps [0, 1) and [1, 2): one class of period 2.
BoxMap swap_doubling();

/// Two cells exchanging their mass.
UlamOperator two_cycle_operator();

/// phi = A x_1 on the whole box, no wrapping (expansion audits only).
PiecewiseSystem linear_system(double A, int k, double sigma);
/// phi = 0.1 x_1 while the parameters claim expansion A.
PiecewiseSystem contraction_system(double A, int k, double sigma);
/// phi = x_1^2, not injective across x_1 = 0 (k = 2).
PiecewiseSystem square_system();
/// phi == 0.
PiecewiseSystem zero_system(int k);
/// k = 2, a single piece shaped as the upper half of the annulus 0.5 < |x| < 0.9.
PiecewiseSystem crescent_system();

}  // namespace skel
