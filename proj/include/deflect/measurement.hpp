#pragma once

#include <array>
#include <span>
#include <vector>

#include "deflect/fock_basis.hpp"
#include "deflect/grid.hpp"

namespace deflect {

enum class Normalization { Raw, UnitMass };
enum class AxisKind { Position, Momentum };

// Real nonnegative density on a 2D grid.  For AxisKind::Momentum the axes
// are in units of hbar*k1; for Position in lambda1.
struct DistributionGrid {
    AxisKind kind = AxisKind::Position;
    SpatialGrid grid;
    std::vector<double> values;  // ix-major, matching AmplitudeField planes
    Normalization normalization = Normalization::Raw;

    // Diagnostics recorded at build time (computed serially, so they are
    // independent of the worker-thread count):
    //  - share of measurement-weighted Fock mass sitting on the truncation
    //    shell n = n_max or m = n_max, relative to the retained box;
    //  - density mass on the outermost grid ring, relative to the total.
    double truncation_tail_ratio = 0.0;
    double boundary_mass_fraction = 0.0;

    double value(int ix, int iy) const {
        return values[static_cast<std::size_t>(ix) * grid.ny + iy];
    }
};

// Weighted sums A_i(x,y) = sum_{n,m} w1[n] w2[m] Phi^(i)_{n,m}(x,y), the
// post-measurement transverse amplitudes of the two internal channels.
// Summation runs over ascending n, then m, independent of threading.
std::array<std::vector<cdouble>, 2> conditioned_channel_sums(
    const AmplitudeField& field, std::span<const cdouble> w1,
    std::span<const cdouble> w2);

// Per-mode measurement weight vectors.
std::vector<cdouble> quadrature_weights(const QuadratureOutcome& q, int count);
std::vector<cdouble> phase_weights(const PhaseOutcome& p, int count);

// Measurement-weighted Fock mass on the cutoff shell (n = n_max or
// m = n_max) relative to the whole retained box.  Values near or above 1e-8
// mean the cutoff visibly biases the conditioned distribution.
double measurement_tail_ratio(const AmplitudeField& field,
                              std::span<const cdouble> w1,
                              std::span<const cdouble> w2);

// |A1|^2 + |A2|^2 over a grid, with the boundary-ring guard applied.  Used
// for distributions assembled from already-conditioned channel amplitudes
// (e.g. after free-flight propagation).
DistributionGrid density_from_channels(const SpatialGrid& grid,
                                       std::span<const cdouble> a1,
                                       std::span<const cdouble> a2,
                                       AxisKind kind);

// W(x,y) after projecting the two modes onto quadrature eigenstates.
DistributionGrid position_distribution_quadrature(const AmplitudeField& field,
                                                  const QuadratureOutcome& q1,
                                                  const QuadratureOutcome& q2);

// W(x,y) after projecting the two modes onto phase states.
DistributionGrid position_distribution_phase(const AmplitudeField& field,
                                             const PhaseOutcome& p1,
                                             const PhaseOutcome& p2);

// P(px,py): momentum distribution conditioned on quadrature outcomes,
// computed from the Fourier transforms of the channel sums.  Axes are in
// hbar*k1 and satisfy dp = 1/(N dx); values are scaled so that the plain
// Riemann sum over the momentum grid equals the one over the position grid.
DistributionGrid momentum_distribution(const AmplitudeField& field,
                                       const QuadratureOutcome& q1,
                                       const QuadratureOutcome& q2);

// Trapezoid integral over the grid.
double grid_integral(const DistributionGrid& dist);

// Rescales values so the trapezoid integral equals 1.
void normalize_unit_mass(DistributionGrid& dist);

struct Orientation {
    double angle = 0.0;  // principal axis of the second-moment tensor,
                         // measured from +x, in (-pi/2, pi/2]
    bool isotropic = false;
};

// Principal orientation of the density's covariance about its centroid.
Orientation orientation_angle(const DistributionGrid& dist);

// Smallest angle between two orientation axes (directions mod pi),
// in [0, pi/2].
double angle_separation(double a1, double a2);

}  // namespace deflect
