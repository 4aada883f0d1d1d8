#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "doblab/dob_blocks.hpp"

namespace doblab::testing {

// Seeded generator for property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : engine_(seed) {}

    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(engine_); }
    double log_uniform(double a, double b) { return std::exp(uniform(std::log(a), std::log(b))); }
    int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(engine_); }
    bool coin() { return integer(0, 1) == 1; }

    // Roots of a real polynomial: conjugate pairs and reals with magnitudes in [rmin, rmax].
    std::vector<std::complex<double>> real_root_set(int degree, double rmin, double rmax) {
        std::vector<std::complex<double>> r;
        while (static_cast<int>(r.size()) < degree) {
            const double mag = uniform(rmin, rmax);
            if (static_cast<int>(r.size()) + 2 <= degree && coin()) {
                const double ang = uniform(0.05, std::numbers::pi - 0.05);
                r.push_back(std::polar(mag, ang));
                r.push_back(std::polar(mag, -ang));
            } else {
                r.emplace_back(coin() ? mag : -mag, 0.0);
            }
        }
        return r;
    }

private:
    std::mt19937_64 engine_;
};

// 1000 frequencies covering the loop's band: up to Nyquist, or log-spaced 1e-3..1e7 rad/s.
inline std::vector<double> test_grid(const Domain& d, std::size_t n = 1000) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n - 1);
        w[i] = d.is_discrete() ? t * d.nyquist() : std::pow(10.0, -3.0 + 10.0 * t);
    }
    return w;
}

// max |S + T - 1| over the grid, as produced by loop_response.
inline double max_s_plus_t_error(const LoopSet& loops) {
    const auto grid = test_grid(loops.L.domain());
    const LoopResponse r = loop_response(loops, grid);
    return (r.S + r.T - Eigen::VectorXcd::Ones(r.S.size())).cwiseAbs().maxCoeff();
}

// Same identity from the stored S and T polynomials, each evaluated on its own.
inline double max_s_plus_t_error_stored(const LoopSet& loops) {
    double worst = 0.0;
    for (double w : test_grid(loops.L.domain())) {
        const auto p = frequency_point(loops.L.domain(), w);
        worst = std::max(worst, std::abs(evaluate(loops.S, p) + evaluate(loops.T, p) - 1.0));
    }
    return worst;
}

// Relative accuracy available from the closed-loop polynomial's coefficients on the grid:
// eps * sum|c_i||p|^i / |chi(p)|, maximised over the grid.
inline double closed_loop_condition(const LoopSet& loops) {
    double worst = 0.0;
    const Polynomiald& chi = loops.S.den();
    for (double w : test_grid(loops.L.domain())) {
        const auto p = frequency_point(loops.L.domain(), w);
        worst = std::max(worst, chi.abs_bound(std::abs(p)) / std::abs(chi(p)));
    }
    return worst * std::numeric_limits<double>::epsilon();
}

// S.num + T.num reproduces the shared denominator bit for bit.
inline bool s_plus_t_coefficients_exact(const LoopSet& loops) {
    return loops.S.den() == loops.T.den() && loops.S.num() + loops.T.num() == loops.S.den();
}

} // namespace doblab::testing
