#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace deflect {

using cdouble = std::complex<double>;

// Uniform rectangular grid.  Axis units are lambda1 for position planes and
// hbar*k1 for momentum planes; the struct itself is unit-agnostic.
struct SpatialGrid {
    int nx = 0;
    int ny = 0;
    double x_min = 0.0, x_max = 0.0;
    double y_min = 0.0, y_max = 0.0;

    double dx() const { return (x_max - x_min) / (nx - 1); }
    double dy() const { return (y_max - y_min) / (ny - 1); }
    double x(int ix) const { return x_min + ix * dx(); }
    double y(int iy) const { return y_min + iy * dy(); }
    std::size_t npoints() const { return static_cast<std::size_t>(nx) * ny; }

    // Throws std::domain_error unless nx, ny >= 2 and max > min on both axes.
    void validate() const;

    bool operator==(const SpatialGrid&) const = default;
};

// Transverse amplitudes Phi^(i)_{n,m}(x,y) on a grid, for internal channels
// i in {1, 2} and photon numbers n, m below a truncation cutoff.  Planes are
// stored contiguously so per-(n,m) operations stream well.
class AmplitudeField {
public:
    AmplitudeField(const SpatialGrid& grid, int n_size, int m_size);

    const SpatialGrid& grid() const { return grid_; }
    int n_size() const { return n_size_; }
    int m_size() const { return m_size_; }

    std::span<cdouble> plane(int channel, int n, int m);
    std::span<const cdouble> plane(int channel, int n, int m) const;

    cdouble at(int channel, int n, int m, int ix, int iy) const {
        return plane(channel, n, m)[static_cast<std::size_t>(ix) * grid_.ny + iy];
    }

    // Fock-space mass of the two-mode coherent state kept inside the
    // truncation box; recorded by the builder for diagnostics.
    double retained_mass() const { return retained_mass_; }
    void set_retained_mass(double mass) { retained_mass_ = mass; }

    // sum over channels and (n,m) of |Phi|^2, per grid point.
    std::vector<double> norm_density() const;

private:
    SpatialGrid grid_;
    int n_size_ = 0;
    int m_size_ = 0;
    double retained_mass_ = 1.0;
    std::vector<cdouble> data_;
};

}  // namespace deflect
