#pragma once

#include <cstdint>

#include "alap/field.hpp"

namespace alap {

/// Random smooth fields supported in the central half [L/4, 3L/4]^n of a
/// periodic box. Widths are fractions of L, not of h, so one seed gives the
/// same continuum field at every resolution.
struct ForcingSpec {
  int bumps = 4;
  double min_width = 1.0 / 16.0;  // fraction of L
  double max_width = 1.0 / 8.0;   // fraction of L
  std::uint64_t seed = 1;

  void validate() const;
};

/// C-infinity cutoff: 1 on [3L/8, 5L/8]^n, 0 outside [L/4, 3L/4]^n.
double smooth_cutoff(const Grid& grid, const Vec& x);

/// Each component is a sum of `bumps` Gaussians with centers in the central
/// half and amplitudes in [-1, 1], multiplied by smooth_cutoff.
VectorField bump_forcing(const Grid& grid, const ForcingSpec& spec);

/// Scalar potential built the same way, with each amplitude scaled by its
/// width so that the gradient is of unit order.
ScalarField bump_potential(const Grid& grid, const ForcingSpec& spec);

}  // namespace alap
