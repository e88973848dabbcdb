#include "deflect/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace deflect {

void SpatialGrid::validate() const {
    if (nx < 2 || ny < 2)
        throw std::domain_error("grid needs at least 2 points per axis");
    if (!(x_max > x_min) || !(y_max > y_min))
        throw std::domain_error("grid extent must satisfy max > min");
    if (!std::isfinite(x_min) || !std::isfinite(x_max) ||
        !std::isfinite(y_min) || !std::isfinite(y_max))
        throw std::domain_error("grid extent must be finite");
}

namespace {
// Refuse allocations that cannot fit in this machine class.  A 201x201 grid
// with n_max = 22 is ~0.7 GB; anything past a few GB is a configuration
// mistake, not a workload.
constexpr std::size_t kMaxFieldBytes = std::size_t{3} * 1024 * 1024 * 1024;
}

AmplitudeField::AmplitudeField(const SpatialGrid& grid, int n_size, int m_size)
    : grid_(grid), n_size_(n_size), m_size_(m_size) {
    grid_.validate();
    if (n_size < 1 || m_size < 1)
        throw std::domain_error("amplitude field needs n_size, m_size >= 1");
    const std::size_t planes = 2ull * n_size * m_size;
    const std::size_t bytes = planes * grid_.npoints() * sizeof(cdouble);
    if (bytes > kMaxFieldBytes)
        throw std::domain_error(
            "amplitude field would need " + std::to_string(bytes >> 20) +
            " MiB; reduce the grid or the photon-number cutoff");
    data_.assign(planes * grid_.npoints(), cdouble{0.0, 0.0});
}

std::span<cdouble> AmplitudeField::plane(int channel, int n, int m) {
    const std::size_t idx =
        (static_cast<std::size_t>(channel) * n_size_ + n) * m_size_ + m;
    return {data_.data() + idx * grid_.npoints(), grid_.npoints()};
}

std::span<const cdouble> AmplitudeField::plane(int channel, int n, int m) const {
    const std::size_t idx =
        (static_cast<std::size_t>(channel) * n_size_ + n) * m_size_ + m;
    return {data_.data() + idx * grid_.npoints(), grid_.npoints()};
}

std::vector<double> AmplitudeField::norm_density() const {
    std::vector<double> density(grid_.npoints(), 0.0);
    const std::size_t planes = 2ull * n_size_ * m_size_;
    const std::size_t npts = grid_.npoints();
    for (std::size_t p = 0; p < planes; ++p) {
        const cdouble* src = data_.data() + p * npts;
        for (std::size_t k = 0; k < npts; ++k) density[k] += std::norm(src[k]);
    }
    return density;
}

}  // namespace deflect
