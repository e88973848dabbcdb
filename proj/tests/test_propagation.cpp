#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "deflect/errors.hpp"
#include "deflect/propagation.hpp"

using namespace deflect;

namespace {

std::vector<cdouble> gaussian_plane(const SpatialGrid& g, double sigma0) {
    std::vector<cdouble> data(g.npoints());
    for (int ix = 0; ix < g.nx; ++ix)
        for (int iy = 0; iy < g.ny; ++iy) {
            const double x = g.x(ix), y = g.y(iy);
            data[static_cast<std::size_t>(ix) * g.ny + iy] =
                std::exp(-(x * x + y * y) / (4.0 * sigma0 * sigma0));
        }
    return data;
}

double lattice_mass(const SpatialGrid& g, std::span<const cdouble> v) {
    double sum = 0.0;
    for (const cdouble& c : v) sum += std::norm(c);
    return sum * g.dx() * g.dy();
}

}  // namespace

TEST_CASE("far-field lattice doubles the extent and keeps the spacing") {
    const SpatialGrid in{65, 65, -0.5, 0.5, -0.5, 0.5};
    const SpatialGrid out = far_field_grid(in);
    CHECK(out.nx == 129);
    CHECK(out.ny == 129);
    CHECK(out.x_min == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(out.x_max == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(out.dx() == doctest::Approx(in.dx()).epsilon(1e-15));
    // Input points stay on the output lattice.
    CHECK(out.x(32) == doctest::Approx(in.x(0)).epsilon(1e-14));
}

TEST_CASE("zero flight time is the identity") {
    const SpatialGrid grid{33, 33, -0.5, 0.5, -0.5, 0.5};
    AmplitudeField field(grid, 1, 2);
    const auto data = gaussian_plane(grid, 0.12);
    std::copy(data.begin(), data.end(), field.plane(0, 0, 0).begin());
    std::copy(data.begin(), data.end(), field.plane(1, 0, 1).begin());
    field.set_retained_mass(0.875);

    const AmplitudeField out = propagate_far_field(field, {0.0});
    CHECK(out.grid() == grid);
    CHECK(out.retained_mass() == 0.875);
    for (std::size_t i = 0; i < grid.npoints(); ++i) {
        CHECK(out.plane(0, 0, 0)[i] == field.plane(0, 0, 0)[i]);
        CHECK(out.plane(1, 0, 1)[i] == field.plane(1, 0, 1)[i]);
    }
}

TEST_CASE("free flight spreads a Gaussian by the quadratic law") {
    const double sigma0 = 0.1, beta = 0.02;
    const SpatialGrid in{129, 129, -1.0, 1.0, -1.0, 1.0};
    const auto data = gaussian_plane(in, sigma0);
    const SpatialGrid out_grid = far_field_grid(in);
    std::vector<cdouble> out(out_grid.npoints());
    propagate_plane(in, data, beta, out);

    // Norm conservation up to the escaped-mass budget.
    CHECK(lattice_mass(out_grid, out) ==
          doctest::Approx(lattice_mass(in, data)).epsilon(1e-8));

    double mass = 0.0, vxx = 0.0, vyy = 0.0;
    for (int ix = 0; ix < out_grid.nx; ++ix)
        for (int iy = 0; iy < out_grid.ny; ++iy) {
            const double w = std::norm(
                out[static_cast<std::size_t>(ix) * out_grid.ny + iy]);
            mass += w;
            vxx += w * out_grid.x(ix) * out_grid.x(ix);
            vyy += w * out_grid.y(iy) * out_grid.y(iy);
        }
    const double predicted =
        sigma0 * sigma0 + beta * beta / (4.0 * sigma0 * sigma0);
    CHECK(vxx / mass == doctest::Approx(predicted).epsilon(1e-6));
    CHECK(vyy / mass == doctest::Approx(predicted).epsilon(1e-6));
}

TEST_CASE("two short flights equal one long flight") {
    // The input window leaves ~7.5 sigma of room, so both the truncation edge
    // and the spread tails stay inside the escaped-mass budget.
    const double beta1 = 0.01, beta2 = 0.015;
    const SpatialGrid in{97, 97, -0.75, 0.75, -0.75, 0.75};
    const auto data = gaussian_plane(in, 0.1);

    const SpatialGrid mid_grid = far_field_grid(in);
    std::vector<cdouble> mid(mid_grid.npoints());
    propagate_plane(in, data, beta1, mid);
    const SpatialGrid two_grid = far_field_grid(mid_grid);
    std::vector<cdouble> two_hop(two_grid.npoints());
    propagate_plane(mid_grid, mid, beta2, two_hop);

    std::vector<cdouble> one_hop(mid_grid.npoints());
    propagate_plane(in, data, beta1 + beta2, one_hop);

    // Both lattices share spacing and alignment; the one-hop window sits
    // centered inside the two-hop window.
    const int off_x = (two_grid.nx - mid_grid.nx) / 2;
    const int off_y = (two_grid.ny - mid_grid.ny) / 2;
    REQUIRE(two_grid.x(off_x) ==
            doctest::Approx(mid_grid.x(0)).epsilon(1e-13));
    double peak = 0.0;
    for (const cdouble& c : one_hop) peak = std::max(peak, std::abs(c));
    for (int ix = 0; ix < mid_grid.nx; ++ix)
        for (int iy = 0; iy < mid_grid.ny; ++iy) {
            const cdouble a =
                one_hop[static_cast<std::size_t>(ix) * mid_grid.ny + iy];
            const cdouble b =
                two_hop[static_cast<std::size_t>(ix + off_x) * two_grid.ny +
                        iy + off_y];
            CHECK(std::abs(a - b) <= 1e-7 * peak);
        }
}

TEST_CASE("angular spectrum matches direct quadrature of the kernel") {
    const double sigma0 = 0.08, beta = 0.02;
    const SpatialGrid in{33, 33, -0.5, 0.5, -0.5, 0.5};
    const auto data = gaussian_plane(in, sigma0);
    const SpatialGrid out_grid = far_field_grid(in);

    std::vector<cdouble> fast(out_grid.npoints());
    propagate_plane(in, data, beta, fast);
    std::vector<cdouble> slow(out_grid.npoints());
    propagate_plane_direct(in, data, beta, slow);

    double peak = 0.0;
    for (const cdouble& c : slow) peak = std::max(peak, std::abs(c));
    for (std::size_t i = 0; i < fast.size(); ++i)
        CHECK(std::abs(fast[i] - slow[i]) <= 1e-6 * peak);
}

TEST_CASE("guards reject unusable flight parameters") {
    const SpatialGrid in{33, 33, -0.5, 0.5, -0.5, 0.5};
    const auto data = gaussian_plane(in, 0.14);
    const SpatialGrid out_grid = far_field_grid(in);
    std::vector<cdouble> out(out_grid.npoints());

    // Chirp undersampled: dx^2 / (2 beta) >= pi / 4.
    CHECK_THROWS_AS(propagate_plane(in, data, 1e-4, out), NumericalGuardError);
    // Spread far beyond the doubled window.
    CHECK_THROWS_AS(propagate_plane(in, data, 0.3, out), NumericalGuardError);
    // Negative flight.
    CHECK_THROWS_AS((void)PropagationParams{-1.0}.validate(),
                    std::domain_error);
}

TEST_CASE("physical flight parameters convert to the spectral scale") {
    // hbar * (L / v) / (M * lambda^2) with everything in SI.
    const double hbar = 1.054571817e-34;
    const double L = 0.1, v = 300.0, M = 1.45e-25, lambda = 780e-9;
    const double expected = hbar * (L / v) / (M * lambda * lambda);
    CHECK(fresnel_scale_from_physical(L, v, M, lambda) ==
          doctest::Approx(expected).epsilon(1e-12));
    CHECK(fresnel_scale_from_physical(L, v, M, lambda) ==
          doctest::Approx(0.39847).epsilon(1e-4));
}

TEST_CASE("field-level propagation applies the plane map per plane") {
    const SpatialGrid grid{33, 33, -0.5, 0.5, -0.5, 0.5};
    AmplitudeField field(grid, 2, 1);
    const auto g0 = gaussian_plane(grid, 0.08);
    auto g1 = g0;
    for (auto& c : g1) c *= cdouble{0.0, 0.5};
    std::copy(g0.begin(), g0.end(), field.plane(0, 0, 0).begin());
    std::copy(g1.begin(), g1.end(), field.plane(1, 1, 0).begin());

    const double beta = 0.015;
    const AmplitudeField out = propagate_far_field(field, {beta});
    CHECK(out.grid() == far_field_grid(grid));

    std::vector<cdouble> want(out.grid().npoints());
    propagate_plane(grid, g0, beta, want);
    for (std::size_t i = 0; i < want.size(); ++i)
        CHECK(out.plane(0, 0, 0)[i] == want[i]);
    propagate_plane(grid, g1, beta, want);
    for (std::size_t i = 0; i < want.size(); ++i)
        CHECK(out.plane(1, 1, 0)[i] == want[i]);
}
