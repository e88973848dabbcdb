#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "deflect/dynamics.hpp"
#include "deflect/errors.hpp"
#include "deflect/fock_basis.hpp"

using namespace deflect;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

SpatialGrid small_grid() { return {41, 41, -1.25, 1.25, -1.25, 1.25}; }
GaussianBeam centered_beam() { return {0.2, 0.2, 0.0, 0.0}; }

// Max |closed_form / f - reference| over every channel and photon pair at one
// grid point, where `reference` comes from integrate_schrodinger on a larger
// box (layout ((ch*(n+1))+n)*(n+1)+m with its own n_size).
double max_deviation_from_reference(const AmplitudeField& field,
                                    const std::vector<cdouble>& ref,
                                    int ref_n_size, const GaussianBeam& beam,
                                    int ix, int iy) {
    const double f =
        beam.amplitude(field.grid().x(ix), field.grid().y(iy));
    const std::size_t pt = static_cast<std::size_t>(ix) * field.grid().ny + iy;
    double worst = 0.0;
    for (int ch = 0; ch < 2; ++ch)
        for (int n = 0; n < field.n_size(); ++n)
            for (int m = 0; m < field.m_size(); ++m) {
                const cdouble closed = field.plane(ch, n, m)[pt] / f;
                const cdouble expected =
                    ref[(static_cast<std::size_t>(ch) * ref_n_size + n) *
                            ref_n_size +
                        m];
                worst = std::max(worst, std::abs(closed - expected));
            }
    return worst;
}

}  // namespace

TEST_CASE("zero interaction time returns the bare product state") {
    const AtomSuperposition atom{0.6, cdouble{0.0, 0.8}};
    const TwoModeCoherent field{cdouble{1.2, 0.0}, cdouble{0.0, 0.8}};
    const CouplingField coupling{1.0, 1.0, kTwoPi, kTwoPi};
    const GaussianBeam beam = centered_beam();
    const SpatialGrid grid = small_grid();
    const FockTruncation trunc{8, 1e-10};

    InteractionParams params;
    params.regime = InteractionRegime::Raman;
    params.delta = 1.0;
    params.tau = 0.0;

    for (int variant = 0; variant < 2; ++variant) {
        if (variant == 1) {
            params.regime = InteractionRegime::OffResonant;
            params.delta1 = 1.0;
            params.delta2 = 2.0;
        }
        const AmplitudeField out =
            (variant == 0)
                ? amplitudes_raman(atom, field, coupling, params, beam, grid,
                                   trunc)
                : amplitudes_offresonant(atom, field, coupling, params, beam,
                                         grid, trunc);
        for (int n = 0; n <= 8; ++n)
            for (int m = 0; m <= 8; ++m) {
                const cdouble c =
                    coherent_coeff(field.alpha1, field.alpha2, n, m);
                for (int ix = 0; ix < grid.nx; ix += 8)
                    for (int iy = 0; iy < grid.ny; iy += 8) {
                        const double f =
                            beam.amplitude(grid.x(ix), grid.y(iy));
                        const cdouble want1 = f * atom.a * c;
                        const cdouble want2 = f * atom.b * c;
                        CHECK(std::abs(out.at(0, n, m, ix, iy) - want1) <=
                              5e-14 * std::abs(want1) + 1e-300);
                        CHECK(std::abs(out.at(1, n, m, ix, iy) - want2) <=
                              5e-14 * std::abs(want2) + 1e-300);
                    }
            }
    }
}

TEST_CASE("channel 1 freezes exactly on the nodal line of wave 1") {
    const AtomSuperposition atom{std::sqrt(0.5), std::sqrt(0.5)};
    const TwoModeCoherent field{1.5, 1.5};
    const CouplingField coupling{1.0, 1.0, kTwoPi, kTwoPi};
    const GaussianBeam beam = centered_beam();
    const SpatialGrid grid = small_grid();
    const FockTruncation trunc{10, 1e-10};

    InteractionParams params;
    params.regime = InteractionRegime::Raman;
    params.delta = 2.0;
    params.tau = 1.0;

    InteractionParams frozen = params;
    frozen.tau = 0.0;

    const AmplitudeField evolved =
        amplitudes_raman(atom, field, coupling, params, beam, grid, trunc);
    const AmplitudeField initial =
        amplitudes_raman(atom, field, coupling, frozen, beam, grid, trunc);

    const int ix_node = 20;  // x = 0, where sin(k1 x) vanishes identically
    REQUIRE(grid.x(ix_node) == 0.0);
    for (int n = 0; n <= 10; ++n)
        for (int m = 0; m <= 10; ++m)
            for (int iy = 0; iy < grid.ny; iy += 5) {
                CHECK(evolved.at(0, n, m, ix_node, iy) ==
                      initial.at(0, n, m, ix_node, iy));
                // Channel 2 still evolves there, but only by a phase of the
                // remaining single-mode coupling.
                const double g2 = coupling.g2(grid.y(iy));
                const cdouble want =
                    initial.at(1, n, m, ix_node, iy) *
                    std::polar(1.0, -params.tau * g2 * g2 * m / params.delta);
                const cdouble got = evolved.at(1, n, m, ix_node, iy);
                CHECK(std::abs(got - want) <=
                      1e-12 * std::abs(want) + 1e-300);
            }
}

TEST_CASE("switching off mode 2 reduces the Raman evolution to pure phases") {
    const AtomSuperposition atom{0.6, 0.8};
    const TwoModeCoherent field{1.1, 0.9};
    const CouplingField coupling{1.3, 0.0, kTwoPi, kTwoPi};
    const GaussianBeam beam = centered_beam();
    const SpatialGrid grid = small_grid();
    const FockTruncation trunc{9, 1e-10};

    InteractionParams raman;
    raman.regime = InteractionRegime::Raman;
    raman.delta = 1.7;
    raman.tau = 0.9;

    InteractionParams dispersive;
    dispersive.regime = InteractionRegime::OffResonant;
    dispersive.delta1 = 1.7;
    dispersive.delta2 = 3.0;  // irrelevant: g02 = 0
    dispersive.tau = 0.9;

    const AmplitudeField a =
        amplitudes_raman(atom, field, coupling, raman, beam, grid, trunc);
    const AmplitudeField b = amplitudes_offresonant(atom, field, coupling,
                                                    dispersive, beam, grid,
                                                    trunc);
    double worst = 0.0;
    for (int ch = 0; ch < 2; ++ch)
        for (int n = 0; n <= 9; ++n)
            for (int m = 0; m <= 9; ++m) {
                const auto pa = a.plane(ch, n, m);
                const auto pb = b.plane(ch, n, m);
                for (std::size_t i = 0; i < pa.size(); i += 7)
                    worst = std::max(worst, std::abs(pa[i] - pb[i]));
            }
    CHECK(worst <= 1e-12);
}

TEST_CASE("closed forms agree with direct Schrodinger integration") {
    const AtomSuperposition atom{0.6, cdouble{0.0, 0.8}};
    const TwoModeCoherent field{1.0, std::polar(0.8, 0.3)};
    const CouplingField coupling{1.3, 0.9, kTwoPi, kTwoPi};
    const GaussianBeam beam = centered_beam();
    const SpatialGrid grid = small_grid();
    const int n_max = 10;
    const FockTruncation trunc{n_max, 1e-10};
    // Integrate on a box two photons larger: interaction blocks close, so
    // entries up to n_max are exact for the comparison.
    const FockTruncation ref_trunc{n_max + 2, 1e-10};

    InteractionParams raman;
    raman.regime = InteractionRegime::Raman;
    raman.delta = 1.7;
    raman.tau = 0.8;

    InteractionParams dispersive;
    dispersive.regime = InteractionRegime::OffResonant;
    dispersive.delta1 = 1.3;
    dispersive.delta2 = -2.1;
    dispersive.tau = 0.8;

    const AmplitudeField raman_field =
        amplitudes_raman(atom, field, coupling, raman, beam, grid, trunc);
    const AmplitudeField disp_field = amplitudes_offresonant(
        atom, field, coupling, dispersive, beam, grid, trunc);

    const int points[][2] = {{24, 24}, {24, 27}, {13, 31}};
    for (const auto& p : points) {
        const double x = grid.x(p[0]);
        const double y = grid.y(p[1]);
        const auto ref_raman = integrate_schrodinger_converged(
            atom, field, coupling, raman, x, y, ref_trunc, 512, 1e-10);
        CHECK(max_deviation_from_reference(raman_field, ref_raman,
                                           n_max + 3, beam, p[0], p[1]) <=
              1e-8);
        const auto ref_disp = integrate_schrodinger_converged(
            atom, field, coupling, dispersive, x, y, ref_trunc, 512, 1e-10);
        CHECK(max_deviation_from_reference(disp_field, ref_disp, n_max + 3,
                                           beam, p[0], p[1]) <= 1e-8);
    }
}

TEST_CASE("evolution preserves the retained Fock mass pointwise") {
    const AtomSuperposition atom{0.6, 0.8};
    const TwoModeCoherent field{1.0, 0.8};
    const CouplingField coupling{1.0, 1.0, kTwoPi, kTwoPi};
    const GaussianBeam beam = centered_beam();
    const SpatialGrid grid = small_grid();
    const FockTruncation trunc =
        truncation_for(field.alpha1, 1e-10);  // |alpha1| >= |alpha2|

    InteractionParams raman;
    raman.regime = InteractionRegime::Raman;
    raman.delta = 1.0;
    raman.tau = 1.0;

    InteractionParams dispersive;
    dispersive.regime = InteractionRegime::OffResonant;
    dispersive.delta1 = 1.0;
    dispersive.delta2 = 1.4;
    dispersive.tau = 1.0;

    const AmplitudeField rf =
        amplitudes_raman(atom, field, coupling, raman, beam, grid, trunc);
    const AmplitudeField df = amplitudes_offresonant(
        atom, field, coupling, dispersive, beam, grid, trunc);

    const std::vector<double> raman_density = rf.norm_density();
    const std::vector<double> disp_density = df.norm_density();
    const int probes[][2] = {{24, 24}, {20, 20}, {10, 30}, {24, 16}, {5, 5}};
    for (const auto& p : probes) {
        const double f = beam.amplitude(grid.x(p[0]), grid.y(p[1]));
        const std::size_t pt = static_cast<std::size_t>(p[0]) * grid.ny + p[1];
        CHECK(raman_density[pt] / (f * f) ==
              doctest::Approx(rf.retained_mass()).epsilon(1e-8));
        CHECK(disp_density[pt] / (f * f) ==
              doctest::Approx(df.retained_mass()).epsilon(1e-12));
    }
}

TEST_CASE("dispersive evolution only rotates each amplitude") {
    const AtomSuperposition atom{0.6, 0.8};
    const TwoModeCoherent field{1.2, 0.9};
    const CouplingField coupling{1.0, 1.2, kTwoPi, kTwoPi};
    const GaussianBeam beam = centered_beam();
    const SpatialGrid grid = small_grid();
    const FockTruncation trunc{10, 1e-10};

    InteractionParams params;
    params.regime = InteractionRegime::OffResonant;
    params.delta1 = 0.7;
    params.delta2 = -1.9;
    params.tau = 2.0;

    const AmplitudeField out =
        amplitudes_offresonant(atom, field, coupling, params, beam, grid, trunc);
    for (int n = 0; n <= 10; n += 2)
        for (int m = 0; m <= 10; m += 3) {
            const double cmod =
                std::abs(coherent_coeff(field.alpha1, field.alpha2, n, m));
            for (int ix = 4; ix < grid.nx; ix += 9)
                for (int iy = 4; iy < grid.ny; iy += 9) {
                    const double f = beam.amplitude(grid.x(ix), grid.y(iy));
                    CHECK(std::abs(out.at(0, n, m, ix, iy)) ==
                          doctest::Approx(f * std::abs(atom.a) * cmod)
                              .epsilon(1e-12));
                    CHECK(std::abs(out.at(1, n, m, ix, iy)) ==
                          doctest::Approx(f * std::abs(atom.b) * cmod)
                              .epsilon(1e-12));
                }
        }
}

TEST_CASE("step doubling stops once the integrator stabilizes") {
    const AtomSuperposition atom{std::sqrt(0.5), std::sqrt(0.5)};
    const TwoModeCoherent field{0.9, 0.7};
    const CouplingField coupling{1.0, 1.0, kTwoPi, kTwoPi};
    const FockTruncation trunc{6, 1e-10};

    InteractionParams params;
    params.regime = InteractionRegime::Raman;
    params.delta = 1.0;
    params.tau = 1.0;

    const auto converged = integrate_schrodinger_converged(
        atom, field, coupling, params, 0.25, 0.25, trunc, 128, 1e-10);
    const auto dense = integrate_schrodinger(atom, field, coupling, params,
                                             0.25, 0.25, trunc, 1 << 14);
    double worst = 0.0;
    for (std::size_t i = 0; i < dense.size(); ++i)
        worst = std::max(worst, std::abs(converged[i] - dense[i]));
    CHECK(worst <= 1e-9);

    CHECK_THROWS_AS(integrate_schrodinger_converged(atom, field, coupling,
                                                    params, 0.25, 0.25, trunc,
                                                    16, 1e-14, 64),
                    std::runtime_error);
}

TEST_CASE("input validation rejects unusable parameters") {
    const TwoModeCoherent field{1.0, 1.0};
    const CouplingField coupling{1.0, 1.0, kTwoPi, kTwoPi};
    const GaussianBeam beam = centered_beam();
    const SpatialGrid grid = small_grid();
    const FockTruncation trunc{6, 1e-10};

    InteractionParams params;
    params.regime = InteractionRegime::Raman;
    params.delta = 1.0;
    params.tau = 1.0;

    // Atom state far from unit norm.
    CHECK_THROWS_AS(amplitudes_raman({0.9, 0.1}, field, coupling, params, beam,
                                     grid, trunc),
                    std::domain_error);
    // Negative coupling.
    CHECK_THROWS_AS(amplitudes_raman({1.0, 0.0}, field,
                                     CouplingField{-1.0, 1.0, kTwoPi, kTwoPi},
                                     params, beam, grid, trunc),
                    std::domain_error);
    // Raman regime without a detuning.
    InteractionParams undetuned = params;
    undetuned.delta = 0.0;
    CHECK_THROWS_AS(amplitudes_raman({1.0, 0.0}, field, coupling, undetuned,
                                     beam, grid, trunc),
                    std::domain_error);
    // Negative interaction window.
    InteractionParams backwards = params;
    backwards.tau = -1.0;
    CHECK_THROWS_AS(amplitudes_raman({1.0, 0.0}, field, coupling, backwards,
                                     beam, grid, trunc),
                    std::domain_error);
    // Grid too small for the beam: discretized mass leaves [0.999, 1.001].
    const SpatialGrid tight{41, 41, -0.5, 0.5, -0.5, 0.5};
    CHECK_THROWS_AS(amplitudes_raman({1.0, 0.0}, field, coupling, params, beam,
                                     tight, trunc),
                    NumericalGuardError);
}
