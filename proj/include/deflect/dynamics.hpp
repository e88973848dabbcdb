#pragma once

#include <complex>
#include <vector>

#include "deflect/fock_basis.hpp"
#include "deflect/grid.hpp"

namespace deflect {

// Initial internal state a|1> + b|2> of the three-level atom after the lower
// doublet has been prepared; the excited level is eliminated adiabatically.
struct AtomSuperposition {
    std::complex<double> a{1.0, 0.0};
    std::complex<double> b{0.0, 0.0};

    // |a|^2 + |b|^2 must equal 1 within 1e-12.
    void validate() const;
};

// The two crossed standing-wave modes: peak vacuum Rabi couplings and wave
// numbers.  Positions are measured in lambda1, so k1 = 2 pi nominally.
struct CouplingField {
    double g01 = 1.0;
    double g02 = 1.0;
    double k1 = 0.0;
    double k2 = 0.0;

    void validate() const;

    double g1(double x) const;  // g01 sin(k1 x)
    double g2(double y) const;  // g02 sin(k2 y)
};

enum class InteractionRegime {
    Raman,        // two-photon resonance, common detuning delta
    OffResonant,  // both modes far detuned, independently: delta1, delta2
};

// Interaction window and detunings, in units where hbar = 1 and time is
// expressed through the transit time tau.
struct InteractionParams {
    InteractionRegime regime = InteractionRegime::Raman;
    double delta = 0.0;   // Raman regime
    double delta1 = 0.0;  // off-resonant regime, mode 1
    double delta2 = 0.0;  // off-resonant regime, mode 2
    double tau = 0.0;

    void validate() const;
};

// Gaussian transverse beam profile (amplitude, not intensity):
// f(x,y) = (2 pi sx sy)^{-1/2} exp(-(x-cx)^2/(4 sx^2)) exp(-(y-cy)^2/(4 sy^2)).
struct GaussianBeam {
    double sigma_x = 0.0;
    double sigma_y = 0.0;
    double center_x = 0.0;
    double center_y = 0.0;

    void validate() const;
    double amplitude(double x, double y) const;

    // |f|^2 integrated over the grid (trapezoid).  Scenario validation
    // requires this within [0.999, 1.001] and the grid to reach +-4 sigma.
    double discretized_mass(const SpatialGrid& grid) const;
    bool grid_covers(const SpatialGrid& grid, double n_sigma = 4.0) const;
};

// Two-photon Rabi parameter Omega_{n,m} = g1^2 n + g2^2 m at fixed local
// couplings.
double rabi(int n, int m, double g1, double g2);

// Entangled atom-field amplitudes after the Raman-resonant interaction.
// Channel 0 holds Phi^(1)_{n,m}, channel 1 holds Phi^(2)_{n,m}.
AmplitudeField amplitudes_raman(const AtomSuperposition& atom,
                                const TwoModeCoherent& field,
                                const CouplingField& coupling,
                                const InteractionParams& params,
                                const GaussianBeam& beam,
                                const SpatialGrid& grid,
                                const FockTruncation& trunc);

// Same for the dispersive (far off-resonant) regime, where each channel only
// picks up a photon-number dependent phase.
AmplitudeField amplitudes_offresonant(const AtomSuperposition& atom,
                                      const TwoModeCoherent& field,
                                      const CouplingField& coupling,
                                      const InteractionParams& params,
                                      const GaussianBeam& beam,
                                      const SpatialGrid& grid,
                                      const FockTruncation& trunc);

// Reference integrator: evolves the truncated Fock-space amplitudes at one
// grid point with classic RK4 on the effective Hamiltonian, starting from
// the bare product state (beam profile factored out, i.e. f = 1).  Layout of
// the returned vector matches index ((channel*(n_max+1)) + n)*(n_max+1) + m.
// Slow by design; used to cross-check the closed forms.
std::vector<std::complex<double>> integrate_schrodinger(
    const AtomSuperposition& atom, const TwoModeCoherent& field,
    const CouplingField& coupling, const InteractionParams& params,
    double x, double y, const FockTruncation& trunc, int steps);

// Runs integrate_schrodinger with doubling step counts until two successive
// results agree to tol in max norm; throws std::runtime_error if max_steps
// is exceeded without stabilizing.
std::vector<std::complex<double>> integrate_schrodinger_converged(
    const AtomSuperposition& atom, const TwoModeCoherent& field,
    const CouplingField& coupling, const InteractionParams& params,
    double x, double y, const FockTruncation& trunc, int initial_steps,
    double tol, int max_steps = 1 << 22);

}  // namespace deflect
