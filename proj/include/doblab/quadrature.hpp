#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace doblab {

struct QuadratureResult {
    double value = 0.0;
    double errorEstimate = 0.0;
    std::size_t evaluations = 0;
};

struct QuadratureOptions {
    double absTol = 1e-10;
    double relTol = 1e-10;
    std::size_t maxIntervals = 20000;
};

/// Globally adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    const QuadratureOptions& opts = {});

/// Near location x0 the integrand behaves like coefficient*ln|x - x0| + constant.
struct LogSingularity {
    double location = 0.0;
    double coefficient = 0.0;
    double constant = 0.0;
};

/**
 * Integrates f over [a, b] where f has integrable logarithmic singularities.
 * A small interval of half-width h around each singular point is integrated
 * analytically from its asymptotic form, with h halved until that piece
 * contributes less than localTol; the remainder goes to integrate_adaptive.
 */
QuadratureResult integrate_log_singular(const std::function<double(double)>& f, double a, double b,
                                        std::span<const LogSingularity> singularities,
                                        const QuadratureOptions& opts = {}, double localTol = 1e-6);

} // namespace doblab
