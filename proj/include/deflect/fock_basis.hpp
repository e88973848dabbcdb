#pragma once

#include <complex>

namespace deflect {

// Photon-number cutoff for a two-mode Fock expansion.  Both modes use the
// same n_max; tail_tolerance is the Poisson weight allowed above the cutoff
// in each mode.
struct FockTruncation {
    int n_max = 0;
    double tail_tolerance = 1e-10;
};

// Coherent amplitudes of the two cavity modes.
struct TwoModeCoherent {
    std::complex<double> alpha1{0.0, 0.0};
    std::complex<double> alpha2{0.0, 0.0};
};

// Outcome of a homodyne-style quadrature measurement on one mode:
// the quadrature x_theta = (a e^{-i theta} + a^dag e^{i theta})/sqrt(2)
// was found at value chi.
struct QuadratureOutcome {
    double theta = 0.0;
    double chi = 0.0;
};

// Outcome of an idealized phase measurement on one mode.
struct PhaseOutcome {
    double phi = 0.0;
};

// <n,m|alpha1,alpha2> = exp(-(|a1|^2+|a2|^2)/2) a1^n a2^m / sqrt(n! m!),
// evaluated in log space so large n, m stay finite.
std::complex<double> coherent_coeff(std::complex<double> alpha1,
                                    std::complex<double> alpha2, int n, int m);

// <chi_theta|n> for the quadrature eigenstate normalized so that
// integral dchi |chi><chi| = 1.  Equals
//   e^{-i n theta} 2^{-1/4} psi_n(chi/sqrt(2))
// with psi_n the standard harmonic-oscillator function; evaluated with the
// normalized three-term recurrence, stable far past n = 500.
std::complex<double> quadrature_overlap(const QuadratureOutcome& outcome, int n);

// <phi|n> = e^{i n phi} / sqrt(2 pi) for the idealized phase eigenstate
// |phi> = (2 pi)^{-1/2} sum_n e^{-i n phi} |n>.
std::complex<double> phase_overlap(const PhaseOutcome& outcome, int n);

// Smallest cutoff whose Poisson(|alpha|^2) tail mass above it stays below
// tail_tolerance.
FockTruncation truncation_for(std::complex<double> alpha, double tail_tolerance);

// Poisson tail sum_{n > n_max} e^{-lambda} lambda^n / n!, computed without
// cancellation.  Exposed because truncation diagnostics reuse it.
double poisson_tail(double lambda, int n_max);

}  // namespace deflect
