#pragma once

#include "doblab/params.hpp"
#include "doblab/transfer_function.hpp"

namespace doblab {

/// gain * (Ts^2/2) (z+1)/(z-1)^2, the zero-order-hold equivalent of gain/s^2.
TransferFunctiond zoh_double_integrator(double gain, double Ts);

/// K_P + K_D (z-1)/(Ts z), i.e. ((K_P + K_D/Ts) z - K_D/Ts) / z.
TransferFunctiond backward_euler_pd(const OuterGains& gains, double Ts);

enum class SubstitutionRule { ForwardEuler, BackwardEuler, Tustin };

/**
 * Replaces s by (z-1)/Ts, (z-1)/(Ts z) or (2/Ts)(z-1)/(z+1) and clears the
 * inner fractions by multiplying through with b(z)^n, n = max(deg num, deg den).
 * Coefficients are never rescaled to a monic form.
 */
TransferFunctiond substitute(const TransferFunctiond& tfS, double Ts, SubstitutionRule rule);

} // namespace doblab
