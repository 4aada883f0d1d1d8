#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include "doblab/dob_blocks.hpp"
#include "doblab/params.hpp"
#include "doblab/transfer_function.hpp"

namespace doblab {

/// Peak budgets: |S| <= 1/gammaS and |T| <= 1/gammaT, both strictly inside (0, 1).
struct PeakSpec {
    double gammaS = 0.5;
    double gammaT = 0.5;

    void validate() const {
        if (!(gammaS > 0.0 && gammaS < 1.0)) throw Error("gammaS must lie strictly inside (0, 1)");
        if (!(gammaT > 0.0 && gammaT < 1.0)) throw Error("gammaT must lie strictly inside (0, 1)");
    }
};

struct Peak {
    double omega = 0.0;  ///< argmax [rad/s]; +inf when the supremum is the high-frequency limit
    double value = 0.0;
};

/**
 * Maximum magnitude of a stable transfer function over the frequency axis.
 *
 * Dense 4096-point grid (uniform up to Nyquist for discrete systems,
 * logarithmic around the pole/zero magnitudes for continuous ones, plus
 * exact endpoint evaluations), then golden-section refinement around the
 * best grid point.
 */
Peak sensitivity_peak(const TransferFunctiond& tf);

struct BodeIntegralReport {
    double value = 0.0;
    /// Continuous: sum of Re(p) over unstable open-loop poles. Discrete: sum of ln|p|.
    double unstablePoleTerm = 0.0;
    /// Continuous: lim s L(s). Discrete: ln|1 + L(inf)|.
    double limitTerm = 0.0;
    /// Right-hand side of Bode's sensitivity integral for this loop.
    double predicted = 0.0;
    double errorEstimate = 0.0;
};

/**
 * Sensitivity integral of S = 1/(1+L).
 *
 * Continuous: int_0^inf ln|S(jw)| dw via w = w_c tan(theta). Discrete:
 * int_{-pi}^{pi} ln|S(e^{j theta})| d theta, folded onto [0, pi]. Zeros of S
 * on the contour (open-loop poles such as integrators) are handled as
 * logarithmic singularities. Requires a stable closed loop and, for the
 * continuous case, a strictly proper loop gain.
 */
BodeIntegralReport bode_integral(const TransferFunctiond& loop);

struct ConstraintCheck {
    bool ok = false;
    double margin = 0.0;  ///< signed slack; >= 0 when satisfied (strictly > 0 for strict bounds)
};

struct ConstraintReport {
    ConstraintCheck innerStable;        ///< alpha*gDob*Ts < 2
    ConstraintCheck noRinging;          ///< alpha*gDob*Ts <= 1
    ConstraintCheck sensitivityPeak;    ///< alpha*gDob*Ts <= 2 (1 - gammaS)
    ConstraintCheck complementaryPeak;  ///< alpha*gDob*Ts <= 2 / (1 + gammaT)
    /// Continuous gain condition 1/alpha < 1 + gDob (K_D/K_P + K_D/gDob + K_D^2/K_P), as printed.
    std::optional<ConstraintCheck> gainCondition;
    /// Root-based stability of the continuous outer loop, the oracle for gainCondition;
    /// margin is minus the largest closed-loop pole real part.
    std::optional<ConstraintCheck> continuousOuterRoots;

    bool gain_condition_disagrees() const {
        return gainCondition && continuousOuterRoots && gainCondition->ok != continuousOuterRoots->ok;
    }
};

ConstraintReport check_constraints(const DObParams& p, const PeakSpec& spec);
ConstraintReport check_constraints(const DObParams& p, const OuterGains& g, const PeakSpec& spec);

/// Largest gDob meeting both peak budgets: min(2(1-gammaS), 2/(1+gammaT)) / (alpha Ts).
double max_bandwidth(double alpha, double Ts, const PeakSpec& spec);

enum class LoopKind { InnerContinuous, InnerDiscrete, OuterContinuous, OuterDiscrete };
enum class SweptParameter { Alpha, GDob };
enum class Spacing { Linear, Logarithmic };

/// Builds a loop from base parameters with one parameter replaced.
struct LoopBuilder {
    LoopKind kind = LoopKind::OuterDiscrete;
    DObParams params;
    OuterGains gains;

    DObParams with(SweptParameter which, double value) const;
    LoopSet build(SweptParameter which, double value) const;
    /// Closed-loop poles of 1 + L = 0 at the given parameter value, classified.
    StabilityVerdict<double> closed_loop(SweptParameter which, double value) const;
};

struct SweepRange {
    double from = 0.0;
    double to = 0.0;
    std::size_t count = 2;
    Spacing spacing = Spacing::Logarithmic;

    std::vector<double> values() const;
};

struct RootLocusRow {
    double parameter = 0.0;
    std::vector<std::complex<double>> roots;
    Stability stability = Stability::Stable;

    bool stable() const { return stability == Stability::Stable; }
};

struct RootLocusTable {
    SweptParameter parameter = SweptParameter::Alpha;
    std::vector<RootLocusRow> rows;
};

/**
 * Closed-loop roots along a parameter sweep. Points are independent and may
 * be evaluated on up to maxThreads threads (0 = hardware concurrency); rows
 * come back in sweep order and identical to a sequential run.
 */
RootLocusTable root_locus(const LoopBuilder& builder, SweptParameter which, const SweepRange& range,
                          unsigned maxThreads = 0);

/**
 * Bisection on the stability boundary between two parameter values with
 * opposite verdicts (Marginal counts as not stable), to relative width 1e-6.
 */
double critical_parameter(const LoopBuilder& builder, SweptParameter which, double from, double to);

} // namespace doblab
