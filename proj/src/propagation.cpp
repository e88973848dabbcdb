#include "deflect/propagation.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "deflect/errors.hpp"
#include "fftw_guard.hpp"

namespace deflect {

namespace {

constexpr double kHbar = 1.054571817e-34;  // J s

int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

void check_sampling(double step, double beta) {
    // The kernel's local spatial frequency across one sample must stay well
    // inside the Nyquist band, otherwise the quadratic phase aliases.
    const double phase_per_cell = step * step / (2.0 * beta);
    if (!(phase_per_cell < std::numbers::pi / 4.0))
        throw NumericalGuardError(
            "free-flight kernel undersampled: need grid spacing < " +
            std::to_string(std::sqrt(std::numbers::pi * beta / 2.0)) +
            " (have " + std::to_string(step) + ")");
}

}  // namespace

void PropagationParams::validate() const {
    if (!std::isfinite(fresnel_scale) || fresnel_scale < 0.0)
        throw std::domain_error("fresnel scale must be finite and >= 0");
}

double fresnel_scale_from_physical(double distance_m, double speed_mps,
                                   double mass_kg, double lambda1_m) {
    if (!(distance_m >= 0.0) || !(speed_mps > 0.0) || !(mass_kg > 0.0) ||
        !(lambda1_m > 0.0))
        throw std::domain_error("physical propagation inputs must be positive");
    const double t = distance_m / speed_mps;
    return kHbar * t / (mass_kg * lambda1_m * lambda1_m);
}

SpatialGrid far_field_grid(const SpatialGrid& in) {
    in.validate();
    SpatialGrid out;
    out.nx = 2 * in.nx - 1;
    out.ny = 2 * in.ny - 1;
    const int ox = (in.nx - 1) / 2;
    const int oy = (in.ny - 1) / 2;
    out.x_min = in.x_min - ox * in.dx();
    out.x_max = out.x_min + (out.nx - 1) * in.dx();
    out.y_min = in.y_min - oy * in.dy();
    out.y_max = out.y_min + (out.ny - 1) * in.dy();
    return out;
}

void propagate_plane(const SpatialGrid& in, std::span<const cdouble> in_data,
                     double beta, std::span<cdouble> out_data) {
    in.validate();
    if (!(beta > 0.0)) throw std::domain_error("propagate_plane needs beta > 0");
    if (in_data.size() != in.npoints())
        throw std::domain_error("input span does not match the grid");
    const SpatialGrid out = far_field_grid(in);
    if (out_data.size() != out.npoints())
        throw std::domain_error("output span does not match the doubled grid");
    const double dx = in.dx(), dy = in.dy();
    check_sampling(dx, beta);
    check_sampling(dy, beta);

    // Pad to at least twice the output support so the cyclic convolution
    // cannot wrap into the reported window.
    const int px = next_pow2(2 * out.nx);
    const int py = next_pow2(2 * out.ny);
    const int jx0 = (px - out.nx + 1) / 2;  // output window start in the pad
    const int jy0 = (py - out.ny + 1) / 2;
    const int ox = (in.nx - 1) / 2;         // input offset inside the window
    const int oy = (in.ny - 1) / 2;

    std::vector<cdouble> buf(static_cast<std::size_t>(px) * py,
                             cdouble{0.0, 0.0});
    for (int i = 0; i < in.nx; ++i)
        for (int j = 0; j < in.ny; ++j)
            buf[static_cast<std::size_t>(jx0 + ox + i) * py + (jy0 + oy + j)] =
                in_data[static_cast<std::size_t>(i) * in.ny + j];

    fftw_plan fwd, bwd;
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        auto* raw = reinterpret_cast<fftw_complex*>(buf.data());
        fwd = fftw_plan_dft_2d(px, py, raw, raw, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_2d(px, py, raw, raw, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(fwd);

    // exp(-i beta k^2 / 2) per axis; the kernel has unit modulus, so the
    // padded-array norm is conserved exactly.
    const double dkx = 2.0 * std::numbers::pi / (px * dx);
    const double dky = 2.0 * std::numbers::pi / (py * dy);
    std::vector<cdouble> mulx(px), muly(py);
    for (int j = 0; j < px; ++j) {
        const double k = dkx * (j <= px / 2 ? j : j - px);
        mulx[j] = std::polar(1.0, -0.5 * beta * k * k);
    }
    for (int j = 0; j < py; ++j) {
        const double k = dky * (j <= py / 2 ? j : j - py);
        muly[j] = std::polar(1.0, -0.5 * beta * k * k);
    }
    for (int jx = 0; jx < px; ++jx) {
        const cdouble mx = mulx[jx];
        cdouble* row = buf.data() + static_cast<std::size_t>(jx) * py;
        for (int jy = 0; jy < py; ++jy) row[jy] *= mx * muly[jy];
    }

    fftw_execute(bwd);
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
    }

    const double inv = 1.0 / (static_cast<double>(px) * py);
    double kept = 0.0, everything = 0.0;
    for (auto& v : buf) {
        v *= inv;
        everything += std::norm(v);
    }
    for (int i = 0; i < out.nx; ++i)
        for (int j = 0; j < out.ny; ++j) {
            const cdouble v =
                buf[static_cast<std::size_t>(jx0 + i) * py + (jy0 + j)];
            out_data[static_cast<std::size_t>(i) * out.ny + j] = v;
            kept += std::norm(v);
        }
    if (everything > 0.0 && (everything - kept) > 1e-8 * everything)
        throw NumericalGuardError(
            "propagated field leaks past the doubled window; enlarge the "
            "input grid extent");
}

void propagate_plane_direct(const SpatialGrid& in,
                            std::span<const cdouble> in_data, double beta,
                            std::span<cdouble> out_data) {
    in.validate();
    if (!(beta > 0.0)) throw std::domain_error("propagation needs beta > 0");
    const SpatialGrid out = far_field_grid(in);
    if (in_data.size() != in.npoints() || out_data.size() != out.npoints())
        throw std::domain_error("span sizes do not match the grids");

    // Kernel (-i gamma / pi) exp(i gamma r^2), gamma = 1/(2 beta), sampled on
    // the lattice.  Separable, so evaluate as two one-axis contractions.
    const double gamma = 0.5 / beta;
    std::vector<cdouble> ux(static_cast<std::size_t>(out.nx) * in.nx);
    std::vector<cdouble> uy(static_cast<std::size_t>(out.ny) * in.ny);
    for (int l = 0; l < out.nx; ++l)
        for (int i = 0; i < in.nx; ++i) {
            const double d = out.x(l) - in.x(i);
            ux[static_cast<std::size_t>(l) * in.nx + i] =
                std::polar(1.0, gamma * d * d);
        }
    for (int l = 0; l < out.ny; ++l)
        for (int j = 0; j < in.ny; ++j) {
            const double d = out.y(l) - in.y(j);
            uy[static_cast<std::size_t>(l) * in.ny + j] =
                std::polar(1.0, gamma * d * d);
        }

    // tmp[i][ly] = sum_j in[i][j] uy[ly][j]
    std::vector<cdouble> tmp(static_cast<std::size_t>(in.nx) * out.ny);
    for (int i = 0; i < in.nx; ++i)
        for (int ly = 0; ly < out.ny; ++ly) {
            cdouble acc{0.0, 0.0};
            for (int j = 0; j < in.ny; ++j)
                acc += in_data[static_cast<std::size_t>(i) * in.ny + j] *
                       uy[static_cast<std::size_t>(ly) * in.ny + j];
            tmp[static_cast<std::size_t>(i) * out.ny + ly] = acc;
        }
    const cdouble pref =
        cdouble{0.0, -gamma / std::numbers::pi} * in.dx() * in.dy();
    for (int lx = 0; lx < out.nx; ++lx)
        for (int ly = 0; ly < out.ny; ++ly) {
            cdouble acc{0.0, 0.0};
            for (int i = 0; i < in.nx; ++i)
                acc += ux[static_cast<std::size_t>(lx) * in.nx + i] *
                       tmp[static_cast<std::size_t>(i) * out.ny + ly];
            out_data[static_cast<std::size_t>(lx) * out.ny + ly] = pref * acc;
        }
}

AmplitudeField propagate_far_field(const AmplitudeField& field,
                                   const PropagationParams& params) {
    params.validate();
    if (params.fresnel_scale == 0.0) return field;

    const SpatialGrid out_grid = far_field_grid(field.grid());
    AmplitudeField out(out_grid, field.n_size(), field.m_size());
    out.set_retained_mass(field.retained_mass());
    for (int ch = 0; ch < 2; ++ch)
        for (int n = 0; n < field.n_size(); ++n)
            for (int m = 0; m < field.m_size(); ++m)
                propagate_plane(field.grid(), field.plane(ch, n, m),
                                params.fresnel_scale, out.plane(ch, n, m));
    return out;
}

}  // namespace deflect
