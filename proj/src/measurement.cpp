#include "deflect/measurement.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "deflect/errors.hpp"
#include "deflect/parallel.hpp"
#include "fftw_guard.hpp"

namespace deflect {

namespace {

constexpr double kTailRatioWarn = 1e-8;
constexpr double kBoundaryMassLimit = 1e-6;

void check_weights(const AmplitudeField& field, std::span<const cdouble> w1,
                   std::span<const cdouble> w2) {
    if (static_cast<int>(w1.size()) < field.n_size() ||
        static_cast<int>(w2.size()) < field.m_size())
        throw std::domain_error("weight vectors shorter than the Fock box");
}

// Measurement-weighted Fock mass on the cutoff shell versus the whole box,
// using the true plane norms.  Serial on purpose: the value is recorded as a
// diagnostic and must not depend on the thread count.
double weighted_tail_ratio(const AmplitudeField& field,
                           std::span<const cdouble> w1,
                           std::span<const cdouble> w2) {
    double shell = 0.0, total = 0.0;
    for (int ch = 0; ch < 2; ++ch)
        for (int n = 0; n < field.n_size(); ++n)
            for (int m = 0; m < field.m_size(); ++m) {
                auto plane = field.plane(ch, n, m);
                double mass = 0.0;
                for (const cdouble& v : plane) mass += std::norm(v);
                mass *= std::norm(w1[n]) * std::norm(w2[m]);
                total += mass;
                if (n == field.n_size() - 1 || m == field.m_size() - 1)
                    shell += mass;
            }
    return total > 0.0 ? shell / total : 0.0;
}

double boundary_ring_fraction(const SpatialGrid& grid,
                              const std::vector<double>& values) {
    double ring = 0.0, total = 0.0;
    for (int ix = 0; ix < grid.nx; ++ix)
        for (int iy = 0; iy < grid.ny; ++iy) {
            const double v = values[static_cast<std::size_t>(ix) * grid.ny + iy];
            total += v;
            if (ix == 0 || ix == grid.nx - 1 || iy == 0 || iy == grid.ny - 1)
                ring += v;
        }
    return total > 0.0 ? ring / total : 0.0;
}

DistributionGrid build_position_distribution(const AmplitudeField& field,
                                             std::span<const cdouble> w1,
                                             std::span<const cdouble> w2) {
    const auto sums = conditioned_channel_sums(field, w1, w2);
    DistributionGrid dist = density_from_channels(field.grid(), sums[0],
                                                  sums[1], AxisKind::Position);
    dist.truncation_tail_ratio = weighted_tail_ratio(field, w1, w2);
    if (dist.truncation_tail_ratio > kTailRatioWarn)
        std::fprintf(stderr,
                     "warning: measurement weight on the photon-number cutoff "
                     "shell is %.3g of the retained mass; raise n_max\n",
                     dist.truncation_tail_ratio);
    return dist;
}

}  // namespace

DistributionGrid density_from_channels(const SpatialGrid& grid,
                                       std::span<const cdouble> a1,
                                       std::span<const cdouble> a2,
                                       AxisKind kind) {
    grid.validate();
    const std::size_t npts = grid.npoints();
    if (a1.size() != npts || a2.size() != npts)
        throw std::domain_error("channel spans do not match the grid");

    DistributionGrid dist;
    dist.kind = kind;
    dist.grid = grid;
    dist.values.resize(npts);
    for (std::size_t k = 0; k < npts; ++k) {
        const double v = std::norm(a1[k]) + std::norm(a2[k]);
        if (!std::isfinite(v))
            throw NumericalGuardError("non-finite value in distribution");
        dist.values[k] = v;
    }

    dist.boundary_mass_fraction = boundary_ring_fraction(dist.grid, dist.values);
    if (dist.boundary_mass_fraction >= kBoundaryMassLimit)
        throw NumericalGuardError(
            "distribution mass on the grid boundary is " +
            std::to_string(dist.boundary_mass_fraction) +
            " of the total; extend the grid");
    return dist;
}

std::array<std::vector<cdouble>, 2> conditioned_channel_sums(
    const AmplitudeField& field, std::span<const cdouble> w1,
    std::span<const cdouble> w2) {
    check_weights(field, w1, w2);
    const std::size_t npts = field.grid().npoints();
    std::array<std::vector<cdouble>, 2> sums{
        std::vector<cdouble>(npts, cdouble{0.0, 0.0}),
        std::vector<cdouble>(npts, cdouble{0.0, 0.0})};

    for (int ch = 0; ch < 2; ++ch) {
        cdouble* out = sums[ch].data();
        // Each worker owns a contiguous point range; every point accumulates
        // its planes in the same (n, m) order whatever the partition is.
        parallel_for(0, static_cast<std::int64_t>(npts),
                     [&](std::int64_t lo, std::int64_t hi) {
            for (int n = 0; n < field.n_size(); ++n)
                for (int m = 0; m < field.m_size(); ++m) {
                    const cdouble w = w1[n] * w2[m];
                    const cdouble* src = field.plane(ch, n, m).data();
                    for (std::int64_t k = lo; k < hi; ++k) out[k] += w * src[k];
                }
        });
    }
    return sums;
}

double measurement_tail_ratio(const AmplitudeField& field,
                              std::span<const cdouble> w1,
                              std::span<const cdouble> w2) {
    check_weights(field, w1, w2);
    return weighted_tail_ratio(field, w1, w2);
}

std::vector<cdouble> quadrature_weights(const QuadratureOutcome& q, int count) {
    std::vector<cdouble> w(count);
    for (int n = 0; n < count; ++n) w[n] = quadrature_overlap(q, n);
    return w;
}

std::vector<cdouble> phase_weights(const PhaseOutcome& p, int count) {
    std::vector<cdouble> w(count);
    for (int n = 0; n < count; ++n) w[n] = phase_overlap(p, n);
    return w;
}

DistributionGrid position_distribution_quadrature(const AmplitudeField& field,
                                                  const QuadratureOutcome& q1,
                                                  const QuadratureOutcome& q2) {
    const auto w1 = quadrature_weights(q1, field.n_size());
    const auto w2 = quadrature_weights(q2, field.m_size());
    return build_position_distribution(field, w1, w2);
}

DistributionGrid position_distribution_phase(const AmplitudeField& field,
                                             const PhaseOutcome& p1,
                                             const PhaseOutcome& p2) {
    const auto w1 = phase_weights(p1, field.n_size());
    const auto w2 = phase_weights(p2, field.m_size());
    return build_position_distribution(field, w1, w2);
}

DistributionGrid momentum_distribution(const AmplitudeField& field,
                                       const QuadratureOutcome& q1,
                                       const QuadratureOutcome& q2) {
    const auto w1 = quadrature_weights(q1, field.n_size());
    const auto w2 = quadrature_weights(q2, field.m_size());
    const auto sums = conditioned_channel_sums(field, w1, w2);

    const SpatialGrid& g = field.grid();
    const int nx = g.nx, ny = g.ny;
    const std::size_t npts = g.npoints();

    std::vector<cdouble> buf(npts);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        plan = fftw_plan_dft_2d(nx, ny,
                                reinterpret_cast<fftw_complex*>(buf.data()),
                                reinterpret_cast<fftw_complex*>(buf.data()),
                                FFTW_FORWARD, FFTW_ESTIMATE);
    }

    std::vector<double> power(npts, 0.0);
    for (int ch = 0; ch < 2; ++ch) {
        buf = sums[ch];
        fftw_execute(plan);
        for (std::size_t k = 0; k < npts; ++k) power[k] += std::norm(buf[k]);
    }
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fftw_destroy_plan(plan);
    }

    // Frequency axis in units of hbar*k1 (k1 = 2 pi / lambda1): the DFT bin
    // spacing 2 pi / (N dx) becomes 1 / (N dx).
    const int sx = nx / 2, sy = ny / 2;
    const double dpx = 1.0 / (nx * g.dx());
    const double dpy = 1.0 / (ny * g.dy());

    DistributionGrid dist;
    dist.kind = AxisKind::Momentum;
    dist.grid = SpatialGrid{nx, ny, -sx * dpx, (nx - 1 - sx) * dpx,
                            -sy * dpy, (ny - 1 - sy) * dpy};
    dist.values.resize(npts);
    // Scaled so that sum P dpx dpy = sum W dx dy (discrete Parseval).
    const double scale = g.dx() * g.dy() * g.dx() * g.dy();
    for (int lx = 0; lx < nx; ++lx) {
        const int jx = (lx - sx + nx) % nx;
        for (int ly = 0; ly < ny; ++ly) {
            const int jy = (ly - sy + ny) % ny;
            dist.values[static_cast<std::size_t>(lx) * ny + ly] =
                scale * power[static_cast<std::size_t>(jx) * ny + jy];
        }
    }

    dist.truncation_tail_ratio = weighted_tail_ratio(field, w1, w2);
    dist.boundary_mass_fraction = boundary_ring_fraction(dist.grid, dist.values);
    if (dist.boundary_mass_fraction >= kBoundaryMassLimit)
        throw NumericalGuardError(
            "momentum spectrum carries " +
            std::to_string(dist.boundary_mass_fraction) +
            " of its mass at the band edge (aliasing); refine the position "
            "grid");
    return dist;
}

double grid_integral(const DistributionGrid& dist) {
    const SpatialGrid& g = dist.grid;
    double total = 0.0;
    for (int ix = 0; ix < g.nx; ++ix) {
        const double wx = (ix == 0 || ix == g.nx - 1) ? 0.5 : 1.0;
        double row = 0.0;
        for (int iy = 0; iy < g.ny; ++iy) {
            const double wy = (iy == 0 || iy == g.ny - 1) ? 0.5 : 1.0;
            row += wy * dist.values[static_cast<std::size_t>(ix) * g.ny + iy];
        }
        total += wx * row;
    }
    return total * g.dx() * g.dy();
}

void normalize_unit_mass(DistributionGrid& dist) {
    const double total = grid_integral(dist);
    if (!(total > 0.0))
        throw std::domain_error("cannot normalize a zero-mass distribution");
    for (double& v : dist.values) v /= total;
    dist.normalization = Normalization::UnitMass;
}

Orientation orientation_angle(const DistributionGrid& dist) {
    const SpatialGrid& g = dist.grid;
    double mass = 0.0, mx = 0.0, my = 0.0;
    for (int ix = 0; ix < g.nx; ++ix) {
        const double wx = (ix == 0 || ix == g.nx - 1) ? 0.5 : 1.0;
        const double x = g.x(ix);
        for (int iy = 0; iy < g.ny; ++iy) {
            const double wy = (iy == 0 || iy == g.ny - 1) ? 0.5 : 1.0;
            const double w = wx * wy *
                dist.values[static_cast<std::size_t>(ix) * g.ny + iy];
            mass += w;
            mx += w * x;
            my += w * g.y(iy);
        }
    }
    if (!(mass > 0.0))
        throw std::domain_error("orientation needs a distribution with mass");
    const double cx = mx / mass, cy = my / mass;

    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (int ix = 0; ix < g.nx; ++ix) {
        const double wx = (ix == 0 || ix == g.nx - 1) ? 0.5 : 1.0;
        const double dx = g.x(ix) - cx;
        for (int iy = 0; iy < g.ny; ++iy) {
            const double wy = (iy == 0 || iy == g.ny - 1) ? 0.5 : 1.0;
            const double w = wx * wy *
                dist.values[static_cast<std::size_t>(ix) * g.ny + iy];
            const double dy = g.y(iy) - cy;
            sxx += w * dx * dx;
            syy += w * dy * dy;
            sxy += w * dx * dy;
        }
    }

    Orientation result;
    const double gap = std::hypot(sxx - syy, 2.0 * sxy);
    if (gap <= 1e-12 * (sxx + syy)) {
        result.isotropic = true;
        result.angle = 0.0;
        return result;
    }
    // Principal axis of the covariance; atan2 half-angle lands in
    // (-pi/2, pi/2].
    result.angle = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    return result;
}

double angle_separation(double a1, double a2) {
    return std::abs(std::remainder(a1 - a2, std::numbers::pi));
}

}  // namespace deflect
