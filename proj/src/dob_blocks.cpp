#include "doblab/dob_blocks.hpp"

#include <algorithm>
#include <complex>
#include <limits>
#include <sstream>

#include "doblab/discretize.hpp"

namespace doblab {
namespace {

const Polynomiald s_poly{1.0, 0.0};

// Backward-Euler velocity low-pass, numerator and denominator.
Polynomiald lowpass_num(const DObParams& p) { return Polynomiald{p.gV * p.Ts, 0.0}; }
Polynomiald lowpass_den(const DObParams& p) { return Polynomiald{1.0 + p.gV * p.Ts, -1.0}; }

} // namespace

LoopSet LoopSet::from_loop(const TransferFunctiond& loop) {
    const Polynomiald chi = characteristic_polynomial(loop);
    return {loop, {loop.den(), chi, loop.domain()}, {loop.num(), chi, loop.domain()}};
}

LoopResponse loop_response(const LoopSet& loops, std::span<const double> grid) {
    const Domain& d = loops.L.domain();
    const Polynomiald& num = loops.L.num();
    const Polynomiald& den = loops.L.den();
    LoopResponse out;
    out.omega.resize(static_cast<Eigen::Index>(grid.size()));
    out.S.resize(out.omega.size());
    out.T.resize(out.omega.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double w = grid[i];
        if (i > 0 && !(w > grid[i - 1])) throw Error("frequency grid must be strictly increasing");
        if (d.is_discrete() && w > d.nyquist() * (1.0 + 1e-12))
            throw Error("frequency " + std::to_string(w) + " rad/s is above Nyquist");
        const std::complex<double> p = frequency_point(d, w);
        const std::complex<double> dv = den(p);
        const std::complex<double> nv = num(p);
        const std::complex<double> chi = dv + nv;
        const double r = std::abs(p);
        const double scale = den.abs_bound(r) + num.abs_bound(r);
        // Closed-loop value below the rounding level of the coefficients: indistinguishable from a pole.
        if (std::abs(chi) <= 64.0 * std::numeric_limits<double>::epsilon() * scale) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "frequency grid point omega = " << w << " rad/s hits a closed-loop pole";
            throw Error(msg.str());
        }
        out.omega[static_cast<Eigen::Index>(i)] = w;
        out.S[static_cast<Eigen::Index>(i)] = dv / chi;
        out.T[static_cast<Eigen::Index>(i)] = nv / chi;
    }
    return out;
}

LoopSet inner_loop_ct(const DObParams& p) {
    p.validate();
    const double k = p.alpha * p.gDob;
    if (p.ideal_velocity()) return LoopSet::from_loop({Polynomiald{k}, s_poly});
    return LoopSet::from_loop({Polynomiald{k * p.gV}, Polynomiald{1.0, p.gV, 0.0}});
}

LoopSet inner_loop_dt(const DObParams& p) {
    p.require_sampled();
    const Domain domain = Domain::discrete(p.Ts);
    const double k = p.loop_gain_product();
    if (p.ideal_velocity()) return LoopSet::from_loop({Polynomiald{k}, Polynomiald{1.0, -1.0}, domain});
    return LoopSet::from_loop({k * lowpass_num(p), Polynomiald{1.0, -1.0} * lowpass_den(p), domain});
}

LoopSet outer_loop_ct(const DObParams& p, const OuterGains& g) {
    p.validate();
    g.validate();
    const Polynomiald pd{g.kD, g.kP};
    const Polynomiald s_plus_g{1.0, p.gDob};
    const Polynomiald s3{1.0, 0.0, 0.0, 0.0};
    if (p.ideal_velocity()) {
        const Polynomiald num = p.alpha * (Polynomiald{p.gDob, 0.0, 0.0} + s_plus_g * pd);
        return LoopSet::from_loop({num, s3});
    }
    const Polynomiald s_plus_gv{1.0, p.gV};
    const Polynomiald num = p.alpha * (Polynomiald{p.gV * p.gDob, 0.0, 0.0} + s_plus_gv * s_plus_g * pd);
    return LoopSet::from_loop({num, s3 * s_plus_gv});
}

LoopSet outer_loop_dt(const DObParams& p, const OuterGains& g) {
    p.require_sampled();
    g.validate();
    const TransferFunctiond c = backward_euler_pd(g, p.Ts);
    const TransferFunctiond ci = ci_compensator_dt(p).tf;
    const TransferFunctiond gp = zoh_double_integrator(1.0, p.Ts);
    return LoopSet::from_loop(series(series(c, ci), gp));
}

TransferFunctiond ci_compensator_ct(const DObParams& p) {
    p.validate();
    return {p.alpha * Polynomiald{1.0, p.gDob}, s_poly};
}

Compensator ci_compensator_dt(const DObParams& p) {
    p.require_sampled();
    const Domain domain = Domain::discrete(p.Ts);
    const double gts = p.gDob * p.Ts;
    Polynomiald num = p.alpha * Polynomiald{1.0 + gts, -1.0};
    Polynomiald den{1.0, -(1.0 - p.loop_gain_product())};
    if (!p.ideal_velocity()) {
        // (z-1) + alpha*gDob*Ts F(z), cleared by the low-pass denominator
        num = num * lowpass_den(p);
        den = Polynomiald{1.0, -1.0} * lowpass_den(p) + p.loop_gain_product() * lowpass_num(p);
    }

    const double threshold = 1.0 / (1.0 + gts);
    const double band = 1e-12 * std::max(1.0, threshold);
    CompensatorCharacter character = CompensatorCharacter::Neutral;
    if (p.alpha > threshold + band) {
        character = CompensatorCharacter::PhaseLead;
    } else if (p.alpha < threshold - band) {
        character = CompensatorCharacter::PhaseLag;
    }
    return {{num, den, domain}, character};
}

} // namespace doblab
