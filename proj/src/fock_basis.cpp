#include "deflect/fock_basis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace deflect {

namespace {

void check_index(int n) {
    if (n < 0) throw std::domain_error("photon number index must be >= 0");
}

// log|alpha|^n / sqrt(n!) without intermediate overflow; alpha = 0 handled
// separately because log(0) is not usable.
double log_mode_weight(double abs_alpha, int n) {
    return n * std::log(abs_alpha) - 0.5 * std::lgamma(n + 1.0);
}

}  // namespace

std::complex<double> coherent_coeff(std::complex<double> alpha1,
                                    std::complex<double> alpha2, int n, int m) {
    check_index(n);
    check_index(m);
    const double a1 = std::abs(alpha1);
    const double a2 = std::abs(alpha2);
    if (!std::isfinite(a1) || !std::isfinite(a2))
        throw std::domain_error("coherent amplitudes must be finite");

    const double front = -0.5 * (a1 * a1 + a2 * a2);
    if ((a1 == 0.0 && n > 0) || (a2 == 0.0 && m > 0)) return {0.0, 0.0};

    double lg = front;
    if (n > 0) lg += log_mode_weight(a1, n);
    if (m > 0) lg += log_mode_weight(a2, m);
    const double phase = n * std::arg(alpha1) + m * std::arg(alpha2);
    return std::polar(std::exp(lg), phase);
}

std::complex<double> quadrature_overlap(const QuadratureOutcome& outcome, int n) {
    check_index(n);
    if (!std::isfinite(outcome.chi) || !std::isfinite(outcome.theta))
        throw std::domain_error("quadrature outcome must be finite");

    // Oscillator wavefunctions at x = chi/sqrt(2), normalized recurrence:
    // all iterates stay O(1) so no overflow for any practical n.
    const double x = outcome.chi / std::numbers::sqrt2;
    double prev = 0.0;
    double cur = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
    for (int k = 0; k < n; ++k) {
        const double next =
            x * std::sqrt(2.0 / (k + 1)) * cur - std::sqrt(k / (k + 1.0)) * prev;
        prev = cur;
        cur = next;
    }
    const double value = std::pow(2.0, -0.25) * cur;
    return value * std::polar(1.0, -outcome.theta * n);
}

std::complex<double> phase_overlap(const PhaseOutcome& outcome, int n) {
    check_index(n);
    if (!std::isfinite(outcome.phi))
        throw std::domain_error("phase outcome must be finite");
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    return std::polar(norm, outcome.phi * n);
}

double poisson_tail(double lambda, int n_max) {
    if (lambda < 0.0 || !std::isfinite(lambda))
        throw std::domain_error("poisson parameter must be finite and >= 0");
    if (n_max < 0) return 1.0;
    if (lambda == 0.0) return 0.0;
    if (lambda > 700.0)
        throw std::domain_error("poisson parameter too large for double range");

    // March the pmf upward until it is negligible, then sum the tail
    // backwards so no 1 - cumulative cancellation occurs.
    std::vector<double> pmf;
    pmf.push_back(std::exp(-lambda));
    const int hard_cap = 200000;
    int k = 0;
    while (k < hard_cap) {
        const double next = pmf.back() * lambda / (k + 1);
        pmf.push_back(next);
        ++k;
        if (k > n_max && k > lambda && next < 1e-300) break;
    }
    double tail = 0.0;
    std::vector<double> tails(pmf.size() + 1, 0.0);
    for (int i = static_cast<int>(pmf.size()) - 1; i >= 0; --i) {
        tail += pmf[i];
        tails[i] = tail;
    }
    const std::size_t idx = static_cast<std::size_t>(n_max) + 1;
    return idx < tails.size() ? tails[idx] : 0.0;
}

FockTruncation truncation_for(std::complex<double> alpha, double tail_tolerance) {
    if (!(tail_tolerance > 0.0) || !(tail_tolerance < 1.0))
        throw std::domain_error("tail tolerance must lie in (0, 1)");
    const double lambda = std::norm(alpha);
    if (!std::isfinite(lambda))
        throw std::domain_error("coherent amplitude must be finite");
    if (lambda > 700.0)
        throw std::domain_error("coherent amplitude too large for double range");

    int n_max = 0;
    while (poisson_tail(lambda, n_max) >= tail_tolerance) {
        ++n_max;
        if (n_max > 100000)
            throw std::domain_error("truncation search failed to terminate");
    }
    return {n_max, tail_tolerance};
}

}  // namespace deflect
