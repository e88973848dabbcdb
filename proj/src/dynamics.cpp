#include "deflect/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "deflect/errors.hpp"
#include "deflect/parallel.hpp"

namespace deflect {

void AtomSuperposition::validate() const {
    const double total = std::norm(a) + std::norm(b);
    if (!std::isfinite(total) || std::abs(total - 1.0) > 1e-12)
        throw std::domain_error(
            "atom superposition must satisfy |a|^2 + |b|^2 = 1 within 1e-12");
}

void CouplingField::validate() const {
    if (!std::isfinite(g01) || !std::isfinite(g02) || g01 < 0.0 || g02 < 0.0)
        throw std::domain_error("peak couplings must be finite and >= 0");
    if (!std::isfinite(k1) || !std::isfinite(k2) || k1 <= 0.0 || k2 <= 0.0)
        throw std::domain_error("wave numbers must be finite and > 0");
}

double CouplingField::g1(double x) const { return g01 * std::sin(k1 * x); }
double CouplingField::g2(double y) const { return g02 * std::sin(k2 * y); }

void InteractionParams::validate() const {
    if (!std::isfinite(tau) || tau < 0.0)
        throw std::domain_error("interaction time must be finite and >= 0");
    switch (regime) {
        case InteractionRegime::Raman:
            if (!std::isfinite(delta) || delta == 0.0)
                throw std::domain_error("Raman regime needs a nonzero detuning");
            break;
        case InteractionRegime::OffResonant:
            if (!std::isfinite(delta1) || delta1 == 0.0 ||
                !std::isfinite(delta2) || delta2 == 0.0)
                throw std::domain_error(
                    "off-resonant regime needs nonzero detunings for both modes");
            break;
    }
}

void GaussianBeam::validate() const {
    if (!std::isfinite(sigma_x) || !std::isfinite(sigma_y) ||
        sigma_x <= 0.0 || sigma_y <= 0.0)
        throw std::domain_error("beam widths must be finite and > 0");
    if (!std::isfinite(center_x) || !std::isfinite(center_y))
        throw std::domain_error("beam center must be finite");
}

double GaussianBeam::amplitude(double x, double y) const {
    const double pref =
        1.0 / std::sqrt(2.0 * std::numbers::pi * sigma_x * sigma_y);
    const double ux = (x - center_x) / sigma_x;
    const double uy = (y - center_y) / sigma_y;
    return pref * std::exp(-0.25 * (ux * ux + uy * uy));
}

double GaussianBeam::discretized_mass(const SpatialGrid& grid) const {
    // |f|^2 is separable, so the trapezoid sum factorizes per axis.
    double ix_sum = 0.0, iy_sum = 0.0;
    for (int i = 0; i < grid.nx; ++i) {
        const double u = (grid.x(i) - center_x) / sigma_x;
        const double w = (i == 0 || i == grid.nx - 1) ? 0.5 : 1.0;
        ix_sum += w * std::exp(-0.5 * u * u);
    }
    for (int j = 0; j < grid.ny; ++j) {
        const double u = (grid.y(j) - center_y) / sigma_y;
        const double w = (j == 0 || j == grid.ny - 1) ? 0.5 : 1.0;
        iy_sum += w * std::exp(-0.5 * u * u);
    }
    return ix_sum * grid.dx() * iy_sum * grid.dy() /
           (2.0 * std::numbers::pi * sigma_x * sigma_y);
}

bool GaussianBeam::grid_covers(const SpatialGrid& grid, double n_sigma) const {
    return grid.x_min <= center_x - n_sigma * sigma_x &&
           grid.x_max >= center_x + n_sigma * sigma_x &&
           grid.y_min <= center_y - n_sigma * sigma_y &&
           grid.y_max >= center_y + n_sigma * sigma_y;
}

double rabi(int n, int m, double g1, double g2) {
    if (n < 0 || m < 0)
        throw std::domain_error("photon numbers must be >= 0");
    return g1 * g1 * n + g2 * g2 * m;
}

namespace {

// <n,m|alpha1,alpha2> with a zero guard ring at n = -1 and m = -1, so the
// boundary blocks of the interaction need no special casing.
class CoherentTable {
public:
    CoherentTable(const TwoModeCoherent& field, int n_hi)
        : stride_(n_hi + 2), c_((n_hi + 2) * (n_hi + 2), cdouble{0.0, 0.0}) {
        for (int n = 0; n <= n_hi; ++n)
            for (int m = 0; m <= n_hi; ++m)
                c_[(n + 1) * stride_ + (m + 1)] =
                    coherent_coeff(field.alpha1, field.alpha2, n, m);
    }
    cdouble operator()(int n, int m) const {
        return c_[(n + 1) * stride_ + (m + 1)];
    }

private:
    int stride_;
    std::vector<cdouble> c_;
};

// Unit-modulus powers e^{-i u n} for n = 0..max_pow, per sample of u.  The
// iterated product drifts by at most ~max_pow * eps, far below the 1e-8
// budgets used downstream.
std::vector<cdouble> phase_powers(const std::vector<double>& u, int max_pow) {
    std::vector<cdouble> table(u.size() * (max_pow + 1));
    for (std::size_t i = 0; i < u.size(); ++i) {
        const cdouble step = std::polar(1.0, -u[i]);
        cdouble acc{1.0, 0.0};
        cdouble* row = table.data() + i * (max_pow + 1);
        for (int p = 0; p <= max_pow; ++p) {
            row[p] = acc;
            acc *= step;
        }
    }
    return table;
}

// (e^{-i t omega / delta} - 1) / omega, smooth through omega = 0.  The caller
// passes p = e^{-i t omega / delta} from the power tables; it is only used
// when the phase is large enough that the subtraction is well conditioned.
inline cdouble phase_increment(double omega, double t_over_delta, cdouble p) {
    const double u = t_over_delta * omega;
    if (std::abs(u) > 0.5) return (p - cdouble{1.0, 0.0}) / omega;
    // e^{-iu} - 1 = -i u sinc(u/2) e^{-iu/2}
    const double h = 0.5 * u;
    const double sinc = std::abs(h) < 1e-8 ? 1.0 - h * h / 6.0 : std::sin(h) / h;
    return cdouble{0.0, -t_over_delta} * sinc * std::polar(1.0, -h);
}

struct AxisTables {
    std::vector<double> g;       // local coupling per sample
    std::vector<double> gsq;     // its square
    std::vector<double> f;       // beam amplitude factor per sample
    std::vector<cdouble> pow;    // e^{-i u n} rows, stride max_pow + 1
};

AxisTables make_axis_tables(int count, auto coord, double coupling_scale,
                            double wave_number, double beam_center,
                            double beam_sigma, double beam_pref,
                            double t_over_delta, int max_pow) {
    AxisTables t;
    t.g.resize(count);
    t.gsq.resize(count);
    t.f.resize(count);
    std::vector<double> u(count);
    for (int i = 0; i < count; ++i) {
        const double c = coord(i);
        t.g[i] = coupling_scale * std::sin(wave_number * c);
        t.gsq[i] = t.g[i] * t.g[i];
        const double dev = (c - beam_center) / beam_sigma;
        t.f[i] = beam_pref * std::exp(-0.25 * dev * dev);
        u[i] = t_over_delta * t.gsq[i];
    }
    t.pow = phase_powers(u, max_pow);
    return t;
}

void validate_common(const AtomSuperposition& atom, const CouplingField& coupling,
                     const InteractionParams& params, const GaussianBeam& beam,
                     const SpatialGrid& grid, const FockTruncation& trunc) {
    atom.validate();
    coupling.validate();
    params.validate();
    beam.validate();
    grid.validate();
    if (trunc.n_max < 0)
        throw std::domain_error("photon-number cutoff must be >= 0");
    const double mass = beam.discretized_mass(grid);
    if (mass < 0.999 || mass > 1.001)
        throw NumericalGuardError(
            "discretized beam mass " + std::to_string(mass) +
            " outside [0.999, 1.001]; extend or refine the grid");
}

double retained_coherent_mass(const CoherentTable& c, int n_max) {
    double mass = 0.0;
    for (int n = 0; n <= n_max; ++n)
        for (int m = 0; m <= n_max; ++m) mass += std::norm(c(n, m));
    return mass;
}

}  // namespace

AmplitudeField amplitudes_raman(const AtomSuperposition& atom,
                                const TwoModeCoherent& field,
                                const CouplingField& coupling,
                                const InteractionParams& params,
                                const GaussianBeam& beam,
                                const SpatialGrid& grid,
                                const FockTruncation& trunc) {
    validate_common(atom, coupling, params, beam, grid, trunc);
    if (params.regime != InteractionRegime::Raman)
        throw std::domain_error("amplitudes_raman needs the Raman regime");

    const int n_max = trunc.n_max;
    const int n_size = n_max + 1;
    AmplitudeField out(grid, n_size, n_size);

    const CoherentTable ctab(field, n_max + 1);
    out.set_retained_mass(retained_coherent_mass(ctab, n_max));

    const double t_over_delta = params.tau / params.delta;
    const double beam_pref =
        1.0 / std::sqrt(2.0 * std::numbers::pi * beam.sigma_x * beam.sigma_y);
    // Phase powers are needed up to exponent n_max + 1 (the partner states
    // one photon outside the cutoff).
    const int max_pow = n_max + 1;
    const AxisTables ax = make_axis_tables(
        grid.nx, [&](int i) { return grid.x(i); }, coupling.g01, coupling.k1,
        beam.center_x, beam.sigma_x, beam_pref, t_over_delta, max_pow);
    const AxisTables ay = make_axis_tables(
        grid.ny, [&](int i) { return grid.y(i); }, coupling.g02, coupling.k2,
        beam.center_y, beam.sigma_y, 1.0, t_over_delta, max_pow);

    const cdouble a = atom.a, b = atom.b;
    const int ny = grid.ny;
    const int stride = max_pow + 1;

    // One task per (n,m) plane pair: all writes are plane-local, so thread
    // count cannot affect results.
    parallel_for(0, static_cast<std::int64_t>(n_size) * n_size,
                 [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t p = lo; p < hi; ++p) {
            const int n = static_cast<int>(p / n_size);
            const int m = static_cast<int>(p % n_size);
            cdouble* out1 = out.plane(0, n, m).data();
            cdouble* out2 = out.plane(1, n, m).data();

            const cdouble ca = a * ctab(n, m);
            const cdouble cb = b * ctab(n, m);
            const cdouble c1 = b * ctab(n - 1, m + 1);  // zero for n = 0
            const cdouble c2 = a * ctab(n + 1, m - 1);  // zero for m = 0
            const double root1 = std::sqrt(double(n) * (m + 1));
            const double root2 = std::sqrt(double(n + 1) * m);

            for (int ix = 0; ix < grid.nx; ++ix) {
                const double g1 = ax.g[ix];
                const double g1sq = ax.gsq[ix];
                const double fx = ax.f[ix];
                const cdouble* axp = ax.pow.data() + ix * stride;
                for (int iy = 0; iy < ny; ++iy) {
                    const double g2 = ay.g[iy];
                    const double g2sq = ay.gsq[iy];
                    const double f = fx * ay.f[iy];
                    const cdouble* ayp = ay.pow.data() + iy * stride;
                    const double cross = g1 * g2;

                    const double omega1 = g1sq * n + g2sq * (m + 1);
                    const cdouble e1 = phase_increment(
                        omega1, t_over_delta, axp[n] * ayp[m + 1]);
                    const cdouble num1 = cross * root1 * c1 + g1sq * n * ca;

                    const double omega2 = g1sq * (n + 1) + g2sq * m;
                    const cdouble e2 = phase_increment(
                        omega2, t_over_delta, axp[n + 1] * ayp[m]);
                    const cdouble num2 = cross * root2 * c2 + g2sq * m * cb;

                    const std::size_t k =
                        static_cast<std::size_t>(ix) * ny + iy;
                    out1[k] = f * (ca + num1 * e1);
                    out2[k] = f * (cb + num2 * e2);
                }
            }
        }
    });
    return out;
}

AmplitudeField amplitudes_offresonant(const AtomSuperposition& atom,
                                      const TwoModeCoherent& field,
                                      const CouplingField& coupling,
                                      const InteractionParams& params,
                                      const GaussianBeam& beam,
                                      const SpatialGrid& grid,
                                      const FockTruncation& trunc) {
    validate_common(atom, coupling, params, beam, grid, trunc);
    if (params.regime != InteractionRegime::OffResonant)
        throw std::domain_error(
            "amplitudes_offresonant needs the off-resonant regime");

    const int n_max = trunc.n_max;
    const int n_size = n_max + 1;
    AmplitudeField out(grid, n_size, n_size);

    const CoherentTable ctab(field, n_max + 1);
    out.set_retained_mass(retained_coherent_mass(ctab, n_max));

    const double beam_pref =
        1.0 / std::sqrt(2.0 * std::numbers::pi * beam.sigma_x * beam.sigma_y);
    const AxisTables ax = make_axis_tables(
        grid.nx, [&](int i) { return grid.x(i); }, coupling.g01, coupling.k1,
        beam.center_x, beam.sigma_x, beam_pref, params.tau / params.delta1,
        n_max);
    const AxisTables ay = make_axis_tables(
        grid.ny, [&](int i) { return grid.y(i); }, coupling.g02, coupling.k2,
        beam.center_y, beam.sigma_y, 1.0, params.tau / params.delta2, n_max);

    const cdouble a = atom.a, b = atom.b;
    const int ny = grid.ny;
    const int stride = n_max + 1;

    parallel_for(0, static_cast<std::int64_t>(n_size) * n_size,
                 [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t p = lo; p < hi; ++p) {
            const int n = static_cast<int>(p / n_size);
            const int m = static_cast<int>(p % n_size);
            cdouble* out1 = out.plane(0, n, m).data();
            cdouble* out2 = out.plane(1, n, m).data();
            const cdouble ca = a * ctab(n, m);
            const cdouble cb = b * ctab(n, m);

            for (int ix = 0; ix < grid.nx; ++ix) {
                const double fx = ax.f[ix];
                const cdouble phase1 = ax.pow[ix * stride + n];
                for (int iy = 0; iy < ny; ++iy) {
                    const double f = fx * ay.f[iy];
                    const cdouble phase2 = ay.pow[iy * stride + m];
                    const std::size_t k =
                        static_cast<std::size_t>(ix) * ny + iy;
                    // Each channel only collects a photon-number phase from
                    // its own mode.
                    out1[k] = f * ca * phase1;
                    out2[k] = f * cb * phase2;
                }
            }
        }
    });
    return out;
}

namespace {

// Action of the effective Hamiltonian at fixed local couplings.  The photon
// exchange couples (1,n,m) only to (2,n-1,m+1), which in the flattened
// (n*n_size + m) layout is a constant index offset; boundary entries get a
// zero coefficient instead of a branch, so the hot loops stay unit stride.
struct HamiltonianAction {
    int n_size = 0;
    std::size_t per = 0;  // entries per channel
    std::vector<double> diag0, diag1;  // number-dependent light shifts
    std::vector<double> coup0, coup1;  // exchange couplings

    void apply_minus_i_h(const std::vector<cdouble>& in,
                         std::vector<cdouble>& out) const {
        const cdouble* i0 = in.data();
        const cdouble* i1 = in.data() + per;
        // Partner of (1,n,m) lives at per + k - (n_size-1); of (2,n,m) at
        // k + (n_size-1).  Out-of-block reads are multiplied by zero.
        const cdouble* p0 = in.data() + per - (n_size - 1);
        const cdouble* p1 = in.data() + (n_size - 1);
        cdouble* o0 = out.data();
        cdouble* o1 = out.data() + per;
        for (std::size_t k = 0; k < per; ++k) {
            const cdouble v = diag0[k] * i0[k] + coup0[k] * p0[k];
            o0[k] = cdouble{v.imag(), -v.real()};  // multiply by -i
        }
        for (std::size_t k = 0; k < per; ++k) {
            const cdouble v = diag1[k] * i1[k] + coup1[k] * p1[k];
            o1[k] = cdouble{v.imag(), -v.real()};
        }
    }
};

HamiltonianAction build_action(const CouplingField& coupling,
                               const InteractionParams& params, double x,
                               double y, int n_size) {
    const double g1 = coupling.g1(x);
    const double g2 = coupling.g2(y);
    HamiltonianAction h;
    h.n_size = n_size;
    h.per = static_cast<std::size_t>(n_size) * n_size;
    h.diag0.assign(h.per, 0.0);
    h.diag1.assign(h.per, 0.0);
    h.coup0.assign(h.per, 0.0);
    h.coup1.assign(h.per, 0.0);

    for (int n = 0; n < n_size; ++n) {
        for (int m = 0; m < n_size; ++m) {
            const std::size_t k = static_cast<std::size_t>(n) * n_size + m;
            if (params.regime == InteractionRegime::Raman) {
                h.diag0[k] = g1 * g1 * n / params.delta;
                h.diag1[k] = g2 * g2 * m / params.delta;
                if (n >= 1 && m + 1 < n_size)
                    h.coup0[k] =
                        g1 * g2 * std::sqrt(double(n) * (m + 1)) / params.delta;
                if (m >= 1 && n + 1 < n_size)
                    h.coup1[k] =
                        g1 * g2 * std::sqrt(double(n + 1) * m) / params.delta;
            } else {
                h.diag0[k] = g1 * g1 * n / params.delta1;
                h.diag1[k] = g2 * g2 * m / params.delta2;
            }
        }
    }
    return h;
}

}  // namespace

std::vector<cdouble> integrate_schrodinger(
    const AtomSuperposition& atom, const TwoModeCoherent& field,
    const CouplingField& coupling, const InteractionParams& params, double x,
    double y, const FockTruncation& trunc, int steps) {
    atom.validate();
    coupling.validate();
    params.validate();
    if (trunc.n_max < 0)
        throw std::domain_error("photon-number cutoff must be >= 0");
    if (steps < 1) throw std::domain_error("step count must be >= 1");

    const int n_size = trunc.n_max + 1;
    const std::size_t per_channel = static_cast<std::size_t>(n_size) * n_size;
    std::vector<cdouble> y0(2 * per_channel);
    for (int n = 0; n < n_size; ++n)
        for (int m = 0; m < n_size; ++m) {
            const cdouble c = coherent_coeff(field.alpha1, field.alpha2, n, m);
            y0[static_cast<std::size_t>(n) * n_size + m] = atom.a * c;
            y0[per_channel + static_cast<std::size_t>(n) * n_size + m] =
                atom.b * c;
        }

    const HamiltonianAction h = build_action(coupling, params, x, y, n_size);
    const double dt = params.tau / steps;
    const std::size_t size = y0.size();
    std::vector<cdouble> k1(size), k2(size), k3(size), k4(size), tmp(size);

    for (int s = 0; s < steps; ++s) {
        h.apply_minus_i_h(y0, k1);
        for (std::size_t i = 0; i < size; ++i) tmp[i] = y0[i] + 0.5 * dt * k1[i];
        h.apply_minus_i_h(tmp, k2);
        for (std::size_t i = 0; i < size; ++i) tmp[i] = y0[i] + 0.5 * dt * k2[i];
        h.apply_minus_i_h(tmp, k3);
        for (std::size_t i = 0; i < size; ++i) tmp[i] = y0[i] + dt * k3[i];
        h.apply_minus_i_h(tmp, k4);
        const double w = dt / 6.0;
        for (std::size_t i = 0; i < size; ++i)
            y0[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return y0;
}

std::vector<cdouble> integrate_schrodinger_converged(
    const AtomSuperposition& atom, const TwoModeCoherent& field,
    const CouplingField& coupling, const InteractionParams& params, double x,
    double y, const FockTruncation& trunc, int initial_steps, double tol,
    int max_steps) {
    std::vector<cdouble> prev = integrate_schrodinger(
        atom, field, coupling, params, x, y, trunc, initial_steps);
    for (int steps = 2 * initial_steps; steps <= max_steps; steps *= 2) {
        std::vector<cdouble> cur = integrate_schrodinger(
            atom, field, coupling, params, x, y, trunc, steps);
        double diff = 0.0;
        for (std::size_t i = 0; i < cur.size(); ++i)
            diff = std::max(diff, std::abs(cur[i] - prev[i]));
        if (diff < tol) return cur;
        prev = std::move(cur);
    }
    throw std::runtime_error(
        "step refinement did not stabilize; interaction too stiff for the "
        "requested tolerance");
}

}  // namespace deflect
