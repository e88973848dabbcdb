#pragma once

#include <span>

#include "deflect/grid.hpp"

namespace deflect {

// Free-flight strength after the cavity.  fresnel_scale is
// beta = hbar * t_free / M in units of lambda1^2: the quadratic spectral
// phase is exp(-i beta k^2 / 2).
struct PropagationParams {
    double fresnel_scale = 0.0;

    void validate() const;
};

// beta for a flight of `distance` at speed `speed` for an atom of mass
// `mass`, with lengths measured in units of `lambda1` (all SI inputs).
double fresnel_scale_from_physical(double distance_m, double speed_mps,
                                   double mass_kg, double lambda1_m);

// Output lattice for far-field propagation: extent doubled at the same
// spacing (2n-1 points per axis), aligned so every input point stays on the
// lattice.
SpatialGrid far_field_grid(const SpatialGrid& in);

// Propagates one transverse plane by the Fresnel kernel using the angular
// spectrum method: FFT on a zero-padded lattice (>= 2x the output support),
// multiplication by exp(-i beta k^2/2), inverse FFT.  `out` must have
// far_field_grid(in).npoints() entries.  Requires beta > 0 and the sampling
// condition dx^2/(2 beta) < pi/4 on both axes.
void propagate_plane(const SpatialGrid& in, std::span<const cdouble> in_data,
                     double beta, std::span<cdouble> out_data);

// Same map evaluated by direct quadrature of the convolution integral,
// O(N^3).  Test oracle; keep to coarse grids.
void propagate_plane_direct(const SpatialGrid& in,
                            std::span<const cdouble> in_data, double beta,
                            std::span<cdouble> out_data);

// Applies propagate_plane to every (channel, n, m) plane of a field.
// beta = 0 returns the input unchanged (identity shortcut).
AmplitudeField propagate_far_field(const AmplitudeField& field,
                                   const PropagationParams& params);

}  // namespace deflect
