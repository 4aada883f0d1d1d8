#pragma once

#include <span>

#include <Eigen/Core>

#include "doblab/params.hpp"
#include "doblab/transfer_function.hpp"

namespace doblab {

/// Loop gain with its sensitivity S = 1/(1+L) and complementary sensitivity T = L/(1+L).
struct LoopSet {
    TransferFunctiond L;
    TransferFunctiond S;
    TransferFunctiond T;

    /// S and T share the characteristic polynomial den(L) + num(L); nothing is cancelled.
    static LoopSet from_loop(const TransferFunctiond& loop);
};

/// S and T on a frequency grid, both formed from the same values of num(L) and den(L).
struct LoopResponse {
    Eigen::VectorXd omega;
    Eigen::VectorXcd S;
    Eigen::VectorXcd T;
};

/**
 * S = den/(den+num) and T = num/(den+num) with den and num of L evaluated once
 * per point, so S + T = 1 to rounding even where the closed-loop polynomial's
 * coefficients are ill-conditioned (fast sampling near z = 1). Grid rules as
 * for freq_response; a closed-loop pole on the grid is an error.
 */
LoopResponse loop_response(const LoopSet& loops, std::span<const double> grid);

/**
 * Continuous inner loop of the velocity-based observer:
 * L_i(s) = alpha*gDob/s, or alpha*gV*gDob/(s (s+gV)) with a velocity low-pass.
 */
LoopSet inner_loop_ct(const DObParams& p);

/**
 * Discrete inner loop L_i(z) = alpha*gDob*Ts/(z-1), so that
 * S_i(z) = (z-1)/(z-(1-alpha*gDob*Ts)) and T_i(z) = alpha*gDob*Ts/(z-(1-alpha*gDob*Ts)).
 *
 * With a finite gV the measured velocity passes through the Backward-Euler
 * low-pass F(z) = gV*Ts z/((1+gV*Ts) z - 1) and L_i(z) picks up that factor.
 */
LoopSet inner_loop_dt(const DObParams& p);

/// L_o(s) = alpha [gDob s^2 + (s+gDob)(K_D s+K_P)] / s^3, with the gV-filtered variant for finite gV.
LoopSet outer_loop_ct(const DObParams& p, const OuterGains& g);

/// L_o(z) = C(z) C_i(z) G_p(z) with the Backward-Euler PD, observer compensator and ZoH plant.
LoopSet outer_loop_dt(const DObParams& p, const OuterGains& g);

/// Implicit compensator alpha (s+gDob)/s of the continuous loop, so L_o = L_i + C_i C G_p.
TransferFunctiond ci_compensator_ct(const DObParams& p);

enum class CompensatorCharacter { PhaseLead, PhaseLag, Neutral };

struct Compensator {
    TransferFunctiond tf;
    CompensatorCharacter character;
};

/**
 * C_i(z) = alpha ((1+gDob*Ts) z - 1) / (z - (1 - alpha*gDob*Ts)); lead when
 * alpha exceeds 1/(1+gDob*Ts), lag below it, neutral within 1e-12.
 */
Compensator ci_compensator_dt(const DObParams& p);

} // namespace doblab
