#include "doblab/discretize.hpp"

#include <algorithm>

namespace doblab {

TransferFunctiond zoh_double_integrator(double gain, double Ts) {
    const Domain domain = Domain::discrete(Ts);
    const double c = gain * (Ts * Ts) / 2.0;
    return {Polynomiald{c, c}, Polynomiald{1.0, -2.0, 1.0}, domain};
}

TransferFunctiond backward_euler_pd(const OuterGains& gains, double Ts) {
    const Domain domain = Domain::discrete(Ts);
    if (!(gains.kP >= 0.0) || !(gains.kD >= 0.0)) throw Error("PD gains must be >= 0");
    if (gains.kD == 0.0) return TransferFunctiond::gain(gains.kP, domain);
    const double d = gains.kD / Ts;
    return {Polynomiald{gains.kP + d, -d}, Polynomiald{1.0, 0.0}, domain};
}

TransferFunctiond substitute(const TransferFunctiond& tfS, double Ts, SubstitutionRule rule) {
    if (tfS.domain().is_discrete()) throw Error("substitute expects a continuous-time transfer function");
    const Domain domain = Domain::discrete(Ts);

    // s = a(z) / b(z)
    Polynomiald a, b;
    switch (rule) {
    case SubstitutionRule::ForwardEuler:
        a = Polynomiald{1.0, -1.0};
        b = Polynomiald{Ts};
        break;
    case SubstitutionRule::BackwardEuler:
        a = Polynomiald{1.0, -1.0};
        b = Polynomiald{Ts, 0.0};
        break;
    case SubstitutionRule::Tustin:
        a = Polynomiald{2.0, -2.0};
        b = Polynomiald{Ts, Ts};
        break;
    }

    const auto n = std::max(tfS.num().degree(), tfS.den().degree());
    auto map = [&](const Polynomiald& p) {
        Polynomiald acc;
        for (Eigen::Index i = 0; i <= p.degree(); ++i) {
            const double c = p.coeff(i);
            if (c == 0.0) continue;
            acc = acc + c * (a.pow(static_cast<int>(i)) * b.pow(static_cast<int>(n - i)));
        }
        return acc;
    };
    return {map(tfS.num()), map(tfS.den()), domain};
}

} // namespace doblab
