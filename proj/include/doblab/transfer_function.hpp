#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include "doblab/error.hpp"
#include "doblab/polynomial.hpp"

namespace doblab {

/// Continuous (Laplace s) or discrete (z, with sampling period in seconds).
struct Domain {
    enum class Kind { Continuous, Discrete };

    Kind kind = Kind::Continuous;
    double samplingPeriod = 0.0;

    static Domain continuous() { return {}; }
    static Domain discrete(double Ts) {
        if (!(Ts > 0.0) || !std::isfinite(Ts)) throw Error("sampling period must be finite and > 0");
        return {Kind::Discrete, Ts};
    }

    bool is_discrete() const { return kind == Kind::Discrete; }
    double nyquist() const { return std::numbers::pi / samplingPeriod; }

    friend bool operator==(const Domain&, const Domain&) = default;
};

/**
 * SISO rational transfer function num/den tagged with its domain.
 *
 * No cancellation ever happens implicitly; use reduce() when a reduced form
 * is wanted.
 */
template <typename Scalar>
class TransferFunction {
public:
    using Poly    = Polynomial<Scalar>;
    using Complex = std::complex<Scalar>;

    TransferFunction(Poly num, Poly den, Domain domain = Domain::continuous())
        : num_(std::move(num)), den_(std::move(den)), domain_(domain) {
        if (den_.is_zero()) throw Error("transfer function denominator is identically zero");
        if (domain_.is_discrete() && !(domain_.samplingPeriod > 0.0))
            throw Error("sampling period must be > 0");
    }

    static TransferFunction gain(Scalar k, Domain domain = Domain::continuous()) {
        return TransferFunction(Poly::constant(k), Poly::constant(Scalar(1)), domain);
    }

    const Poly& num() const { return num_; }
    const Poly& den() const { return den_; }
    const Domain& domain() const { return domain_; }

    Eigen::Index relative_degree() const { return num_.is_zero() ? den_.degree() : den_.degree() - num_.degree(); }
    bool is_proper() const { return num_.is_zero() || num_.degree() <= den_.degree(); }
    bool is_strictly_proper() const { return num_.is_zero() || num_.degree() < den_.degree(); }

    /// Limit at s or z -> infinity; requires a proper function.
    Scalar value_at_infinity() const {
        if (!is_proper()) throw Error("value at infinity undefined for improper transfer function");
        if (num_.is_zero() || num_.degree() < den_.degree()) return Scalar(0);
        return num_.leading() / den_.leading();
    }

private:
    Poly num_;
    Poly den_;
    Domain domain_;
};

using TransferFunctiond = TransferFunction<double>;

/// num(point)/den(point) by Horner evaluation.
template <typename Scalar>
std::complex<Scalar> evaluate(const TransferFunction<Scalar>& tf, const std::complex<Scalar>& point) {
    const std::complex<Scalar> d = tf.den()(point);
    const Scalar scale = tf.den().abs_bound(std::abs(point));
    if (std::abs(d) <= Scalar(64) * std::numeric_limits<Scalar>::epsilon() * scale) {
        std::ostringstream msg;
        msg << "evaluation at pole (point " << point << ")";
        throw Error(msg.str());
    }
    return tf.num()(point) / d;
}

enum class Connection { Series, Parallel, NegativeFeedback };

template <typename Scalar>
TransferFunction<Scalar> connect(const TransferFunction<Scalar>& a, const TransferFunction<Scalar>& b,
                                 Connection mode) {
    if (!(a.domain() == b.domain())) throw Error("cannot connect transfer functions from different domains");
    switch (mode) {
    case Connection::Series:
        return {a.num() * b.num(), a.den() * b.den(), a.domain()};
    case Connection::Parallel:
        return {a.num() * b.den() + b.num() * a.den(), a.den() * b.den(), a.domain()};
    case Connection::NegativeFeedback:
        return {a.num() * b.den(), a.den() * b.den() + a.num() * b.num(), a.domain()};
    }
    throw Error("unknown connection mode");
}

template <typename Scalar>
TransferFunction<Scalar> series(const TransferFunction<Scalar>& a, const TransferFunction<Scalar>& b) {
    return connect(a, b, Connection::Series);
}

template <typename Scalar>
TransferFunction<Scalar> parallel(const TransferFunction<Scalar>& a, const TransferFunction<Scalar>& b) {
    return connect(a, b, Connection::Parallel);
}

template <typename Scalar>
TransferFunction<Scalar> feedback(const TransferFunction<Scalar>& a, const TransferFunction<Scalar>& b) {
    return connect(a, b, Connection::NegativeFeedback);
}

/// Closed-loop characteristic polynomial den + num of a loop gain.
template <typename Scalar>
Polynomial<Scalar> characteristic_polynomial(const TransferFunction<Scalar>& loop) {
    return loop.den() + loop.num();
}

/**
 * Cancel common factors of num and den. Euclid's algorithm on the
 * coefficient vectors, where a remainder whose coefficients are all below
 * tolerance * (largest coefficient of the divisor) counts as zero.
 */
template <typename Scalar>
TransferFunction<Scalar> reduce(const TransferFunction<Scalar>& tf, Scalar tolerance = Scalar(1e-9)) {
    using Poly = Polynomial<Scalar>;
    if (tf.num().is_zero()) return {Poly(), Poly::constant(Scalar(1)), tf.domain()};
    auto chop = [tolerance](const Poly& r, Scalar ref) {
        typename Poly::Coeffs c = r.coeffs();
        for (Eigen::Index i = 0; i < c.size(); ++i)
            if (std::abs(c[i]) <= tolerance * ref) c[i] = Scalar(0);
        return Poly(c);
    };
    Poly a = (Scalar(1) / tf.num().leading()) * tf.num();
    Poly b = (Scalar(1) / tf.den().leading()) * tf.den();
    if (a.degree() < b.degree()) std::swap(a, b);
    while (!b.is_zero() && b.degree() > 0) {
        Poly r = chop(divmod(a, b).second, b.max_abs_coeff());
        a = b;
        b = r.is_zero() ? r : (Scalar(1) / r.leading()) * r;
    }
    // b nonzero constant: coprime. b zero: a is the common factor.
    if (!b.is_zero()) return tf;
    const Poly& g = a;
    if (g.degree() == 0) return tf;
    auto [nq, nr] = divmod(tf.num(), g);
    auto [dq, dr] = divmod(tf.den(), g);
    return {nq, dq, tf.domain()};
}

enum class Stability { Stable, Marginal, Unstable };

template <typename Scalar>
struct StabilityVerdict {
    Stability stability = Stability::Stable;
    /// Pole with the largest real part (continuous) or magnitude (discrete).
    std::optional<std::complex<Scalar>> worstPole;
    std::vector<std::complex<Scalar>> poles;

    bool stable() const { return stability == Stability::Stable; }
};

/// Classifies a set of poles; boundary poles within tolerance are Marginal.
template <typename Scalar>
StabilityVerdict<Scalar> classify_poles(std::vector<std::complex<Scalar>> poles, const Domain& domain,
                                        Scalar tolerance = Scalar(1e-9)) {
    StabilityVerdict<Scalar> v;
    auto measure = [&](const std::complex<Scalar>& p) {
        return domain.is_discrete() ? std::abs(p) - Scalar(1) : p.real();
    };
    for (const auto& p : poles) {
        if (!v.worstPole || measure(p) > measure(*v.worstPole)) v.worstPole = p;
        const Scalar m = measure(p);
        if (m > tolerance) {
            v.stability = Stability::Unstable;
        } else if (m >= -tolerance && v.stability == Stability::Stable) {
            v.stability = Stability::Marginal;
        }
    }
    v.poles = std::move(poles);
    return v;
}

template <typename Scalar>
StabilityVerdict<Scalar> is_stable(const TransferFunction<Scalar>& tf, Scalar tolerance = Scalar(1e-9)) {
    if (!tf.is_proper()) throw Error("stability check requires a proper transfer function");
    return classify_poles(roots(tf.den()), tf.domain(), tolerance);
}

/// Sampled frequency response on s = j*omega or z = exp(j*omega*Ts).
template <typename Scalar>
struct FrequencyResponse {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> omega;
    Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> value;

    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> magnitude() const { return value.cwiseAbs(); }
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> phase() const {
        return value.unaryExpr([](const std::complex<Scalar>& v) { return std::arg(v); });
    }
};

/// The point on the stability boundary that corresponds to frequency omega.
template <typename Scalar>
std::complex<Scalar> frequency_point(const Domain& domain, Scalar omega) {
    if (!domain.is_discrete()) return {Scalar(0), omega};
    return std::polar(Scalar(1), omega * static_cast<Scalar>(domain.samplingPeriod));
}

template <typename Scalar>
FrequencyResponse<Scalar> freq_response(const TransferFunction<Scalar>& tf, std::span<const Scalar> grid) {
    FrequencyResponse<Scalar> out;
    out.omega.resize(static_cast<Eigen::Index>(grid.size()));
    out.value.resize(static_cast<Eigen::Index>(grid.size()));
    const Domain& d = tf.domain();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Scalar w = grid[i];
        if (i > 0 && !(w > grid[i - 1])) throw Error("frequency grid must be strictly increasing");
        if (d.is_discrete() && w > static_cast<Scalar>(d.nyquist()) * (Scalar(1) + Scalar(1e-12)))
            throw Error("frequency " + std::to_string(static_cast<double>(w)) + " rad/s is above Nyquist");
        try {
            out.value[static_cast<Eigen::Index>(i)] = evaluate(tf, frequency_point(d, w));
        } catch (const Error&) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "frequency grid point omega = " << w << " rad/s hits a pole";
            throw Error(msg.str());
        }
        out.omega[static_cast<Eigen::Index>(i)] = w;
    }
    return out;
}

/**
 * Runs a sample series through a proper discrete transfer function realised
 * as a direct-form difference equation with zero initial conditions.
 */
template <typename Scalar>
std::vector<Scalar> filter(const TransferFunction<Scalar>& tf, std::span<const Scalar> input) {
    if (!tf.domain().is_discrete()) throw Error("filter requires a discrete transfer function");
    if (!tf.is_proper()) throw Error("filter requires a proper transfer function");
    const Eigen::Index n = tf.den().degree();
    // b_i, a_i as coefficients of z^{-i} after dividing by z^n.
    std::vector<Scalar> b(static_cast<std::size_t>(n) + 1, Scalar(0));
    std::vector<Scalar> a(static_cast<std::size_t>(n) + 1, Scalar(0));
    for (Eigen::Index i = 0; i <= n; ++i) {
        a[static_cast<std::size_t>(i)] = tf.den().coeff(n - i);
        b[static_cast<std::size_t>(i)] = tf.num().coeff(n - i);
    }
    // Marginally stable recursions (integrators) accumulate rounding, so the
    // state is kept in extended precision and rounded on output.
    using Acc = decltype(Scalar() * 1.0L);
    std::vector<Acc> state(input.size(), Acc(0));
    std::vector<Scalar> y(input.size(), Scalar(0));
    for (std::size_t k = 0; k < input.size(); ++k) {
        Acc acc(0);
        for (std::size_t i = 0; i < b.size() && i <= k; ++i) acc += Acc(b[i]) * Acc(input[k - i]);
        for (std::size_t i = 1; i < a.size() && i <= k; ++i) acc -= Acc(a[i]) * state[k - i];
        state[k] = acc / Acc(a[0]);
        y[k] = static_cast<Scalar>(state[k]);
    }
    return y;
}

} // namespace doblab
