#pragma once

#include <cmath>
#include <limits>

#include "doblab/error.hpp"

namespace doblab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/**
 * Design tuple of the disturbance observer.
 *
 * alpha is the aggregate nominal-to-actual plant ratio (Jn*Kt)/(Jm*Ktn);
 * alpha = 1 means the nominal model is exact. gV = infinity models ideal
 * velocity measurement, Ts = infinity restricts the set to continuous-time
 * analysis.
 */
struct DObParams {
    double alpha = 1.0;
    double gDob = 1.0;  ///< observer bandwidth [rad/s]
    double gV = kInfinity;  ///< velocity low-pass bandwidth [rad/s]
    double Ts = kInfinity;  ///< sampling period [s]

    bool ideal_velocity() const { return std::isinf(gV); }
    bool sampled() const { return std::isfinite(Ts); }

    /// alpha * gDob * Ts, always evaluated in this order.
    double loop_gain_product() const { return alpha * gDob * Ts; }

    void validate() const {
        if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error("alpha must be finite and > 0");
        if (!(gDob > 0.0) || !std::isfinite(gDob)) throw Error("gDob must be finite and > 0");
        if (!(gV > 0.0)) throw Error("gV must be > 0 or infinite");
        if (!(Ts > 0.0)) throw Error("Ts must be > 0 or infinite");
    }

    void require_sampled() const {
        validate();
        if (!sampled()) throw Error("Ts must be finite for discrete-time blocks");
    }
};

/// PD performance-controller gains.
struct OuterGains {
    double kP = 1.0;  ///< position gain [1/s^2]
    double kD = 0.0;  ///< velocity gain [1/s]

    void validate() const {
        if (!(kP > 0.0) || !std::isfinite(kP)) throw Error("kP must be finite and > 0");
        if (!(kD >= 0.0) || !std::isfinite(kD)) throw Error("kD must be finite and >= 0");
    }
};

} // namespace doblab
