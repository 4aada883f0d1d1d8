#include "doblab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <sstream>
#include <thread>

#include "doblab/quadrature.hpp"

namespace doblab {
namespace {

using Complex = std::complex<double>;

constexpr std::size_t kPeakGridPoints = 4096;
constexpr double kContourTol = 1e-6;

// Golden-section maximisation of f on [a, b].
std::pair<double, double> golden_max(const std::function<double(double)>& f, double a, double b) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < 200 && (b - a) > 1e-14 * std::max(std::abs(a), std::abs(b)); ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return fc > fd ? std::pair{c, fc} : std::pair{d, fd};
}

// Magnitude range of the nonzero roots of num and den.
std::pair<double, double> root_magnitude_range(const TransferFunctiond& tf) {
    double lo = kInfinity;
    double hi = 0.0;
    auto scan = [&](const Polynomiald& p) {
        if (p.degree() < 1) return;
        for (const Complex& r : roots(p)) {
            const double m = std::abs(r);
            if (m == 0.0) continue;
            lo = std::min(lo, m);
            hi = std::max(hi, m);
        }
    };
    scan(tf.num());
    scan(tf.den());
    if (hi == 0.0) return {1.0, 1.0};
    return {lo, hi};
}

// A zero of S on the integration contour, from a cluster of open-loop poles.
struct ContourZero {
    double frequency;  // theta (discrete) or omega (continuous)
    int multiplicity;
    Complex point;
};

// Open-loop poles on the unit circle (discrete) or imaginary axis (continuous),
// clustered by frequency on the non-negative half of the contour.
std::vector<ContourZero> contour_zeros(const Polynomiald& den, const Domain& domain) {
    std::vector<ContourZero> out;
    if (den.degree() < 1) return out;
    const double top = domain.is_discrete() ? std::numbers::pi : kInfinity;
    std::vector<std::pair<double, Complex>> hits;
    for (const Complex& r : roots(den)) {
        const bool on = domain.is_discrete() ? std::abs(std::abs(r) - 1.0) <= kContourTol
                                             : std::abs(r.real()) <= kContourTol * std::max(1.0, std::abs(r));
        if (on) hits.emplace_back(std::abs(domain.is_discrete() ? std::arg(r) : r.imag()), r);
    }
    std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < hits.size();) {
        std::size_t j = i;
        double sum = 0.0;
        int upper = 0;
        int all = 0;
        while (j < hits.size() && hits[j].first - hits[i].first <= kContourTol * std::max(1.0, hits[i].first)) {
            if (hits[j].second.imag() > 0.0) {
                sum += hits[j].first;
                ++upper;
            }
            ++all;
            ++j;
        }
        const double center = hits[i].first;
        const double scale = std::max(1.0, center);
        ContourZero z{};
        if (center <= kContourTol * scale) {
            z.frequency = 0.0;
            z.multiplicity = all;
        } else if (domain.is_discrete() && std::abs(center - top) <= kContourTol) {
            z.frequency = top;
            z.multiplicity = all;
        } else {
            z.frequency = upper > 0 ? sum / upper : center;
            z.multiplicity = std::max(upper, 1);
        }
        z.point = frequency_point(domain, z.frequency);
        out.push_back(z);
        i = j;
    }
    return out;
}

// |S| ~ c |f - f0|^m near a contour zero, with c = |D^(m)(r)/m!| / |chi(r)|.
double local_scale(const Polynomiald& den, const Polynomiald& chi, const ContourZero& z) {
    Polynomiald d = den;
    double factorial = 1.0;
    for (int k = 1; k <= z.multiplicity; ++k) {
        d = d.derivative();
        factorial *= k;
    }
    return std::abs(d(z.point)) / factorial / std::abs(chi(z.point));
}

BodeIntegralReport bode_integral_discrete(const TransferFunctiond& loop, const Polynomiald& chi) {
    BodeIntegralReport out;
    for (const Complex& p : roots(loop.den()))
        if (std::abs(p) > 1.0 + 1e-9) out.unstablePoleTerm += std::log(std::abs(p));
    out.limitTerm = std::log(std::abs(1.0 + loop.value_at_infinity()));
    out.predicted = 2.0 * std::numbers::pi * (out.unstablePoleTerm - out.limitTerm);

    const Polynomiald& den = loop.den();
    // Symmetric about theta = 0, so integrate 2 ln|S| over [0, pi].
    auto f = [&](double theta) {
        const Complex z = std::polar(1.0, theta);
        return 2.0 * (std::log(std::abs(den(z))) - std::log(std::abs(chi(z))));
    };
    std::vector<LogSingularity> sing;
    for (const ContourZero& z : contour_zeros(den, loop.domain())) {
        const double c = local_scale(den, chi, z);
        sing.push_back({z.frequency, 2.0 * z.multiplicity, 2.0 * std::log(c)});
    }
    QuadratureOptions opts;
    opts.absTol = 1e-10;
    const QuadratureResult r = integrate_log_singular(f, 0.0, std::numbers::pi, sing, opts);
    out.value = r.value;
    out.errorEstimate = r.errorEstimate;
    return out;
}

BodeIntegralReport bode_integral_continuous(const TransferFunctiond& loop, const Polynomiald& chi) {
    if (!loop.is_strictly_proper()) throw Error("continuous sensitivity integral requires a strictly proper loop gain");
    BodeIntegralReport out;
    for (const Complex& p : roots(loop.den()))
        if (p.real() > 1e-9) out.unstablePoleTerm += p.real();
    out.limitTerm = loop.relative_degree() == 1 ? loop.num().leading() / loop.den().leading() : 0.0;
    out.predicted = std::numbers::pi * out.unstablePoleTerm - 0.5 * std::numbers::pi * out.limitTerm;

    // Frequency scale of the loop: geometric mean of the nonzero root magnitudes.
    double log_sum = 0.0;
    int n = 0;
    for (const Polynomiald* p : {&loop.den(), &chi}) {
        if (p->degree() < 1) continue;
        for (const Complex& r : roots(*p)) {
            if (std::abs(r) == 0.0) continue;
            log_sum += std::log(std::abs(r));
            ++n;
        }
    }
    const double wc = n > 0 ? std::exp(log_sum / n) : 1.0;

    const Polynomiald& num = loop.num();
    const Polynomiald& den = loop.den();
    // ln|S| = -ln|1 + L| = -0.5 log1p(2 Re L + |L|^2), accurate when L is small.
    auto log_s = [&](double w) {
        const Complex s(0.0, w);
        const Complex l = num(s) / den(s);
        return -0.5 * std::log1p(2.0 * l.real() + std::norm(l));
    };
    auto f = [&](double theta) {
        const double t = std::tan(theta);
        const double jac = wc * (1.0 + t * t);
        return jac * log_s(wc * t);
    };
    std::vector<LogSingularity> sing;
    for (const ContourZero& z : contour_zeros(den, loop.domain())) {
        const double c = local_scale(den, chi, z);
        const double ratio = z.frequency / wc;
        const double jac = wc * (1.0 + ratio * ratio);
        const double theta0 = std::atan(ratio);
        sing.push_back({theta0, jac * z.multiplicity, jac * (std::log(c) + z.multiplicity * std::log(jac))});
    }
    QuadratureOptions opts;
    opts.absTol = 1e-10;
    opts.relTol = 1e-11;
    const QuadratureResult r = integrate_log_singular(f, 0.0, 0.5 * std::numbers::pi, sing, opts);
    out.value = r.value;
    out.errorEstimate = r.errorEstimate;
    return out;
}

} // namespace

Peak sensitivity_peak(const TransferFunctiond& tf) {
    if (!is_stable(tf).stable()) throw Error("peak undefined for unstable system");
    const Domain& domain = tf.domain();
    auto mag = [&](double w) { return std::abs(evaluate(tf, frequency_point(domain, w))); };

    std::vector<double> grid(kPeakGridPoints);
    if (domain.is_discrete()) {
        const double nyq = domain.nyquist();
        for (std::size_t i = 0; i < grid.size(); ++i)
            grid[i] = nyq * static_cast<double>(i) / static_cast<double>(grid.size() - 1);
        grid.back() = nyq;
    } else {
        auto [lo, hi] = root_magnitude_range(tf);
        const double a = std::log(lo * 1e-3);
        const double b = std::log(hi * 1e3);
        grid[0] = 0.0;
        for (std::size_t i = 1; i < grid.size(); ++i)
            grid[i] = std::exp(a + (b - a) * static_cast<double>(i - 1) / static_cast<double>(grid.size() - 2));
    }

    std::size_t best = 0;
    std::vector<double> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        values[i] = mag(grid[i]);
        if (values[i] > values[best]) best = i;
    }
    Peak peak{grid[best], values[best]};

    const std::size_t lo = best == 0 ? 0 : best - 1;
    const std::size_t hi = std::min(best + 1, grid.size() - 1);
    if (hi > lo) {
        std::pair<double, double> refined;
        if (!domain.is_discrete() && grid[lo] > 0.0) {
            refined = golden_max([&](double u) { return mag(std::exp(u)); }, std::log(grid[lo]), std::log(grid[hi]));
            refined.first = std::exp(refined.first);
        } else {
            refined = golden_max(mag, grid[lo], grid[hi]);
        }
        // Ignore rounding-level gains so an endpoint maximum keeps its exact frequency.
        if (refined.second > peak.value * (1.0 + 1e-13)) peak = {refined.first, refined.second};
    }
    if (!domain.is_discrete()) {
        const double at_inf = std::abs(tf.value_at_infinity());
        if (at_inf > peak.value) peak = {kInfinity, at_inf};
    }
    return peak;
}

BodeIntegralReport bode_integral(const TransferFunctiond& loop) {
    if (!loop.is_proper()) throw Error("sensitivity integral requires a proper loop gain");
    const Polynomiald chi = characteristic_polynomial(loop);
    if (!classify_poles(roots(chi), loop.domain()).stable())
        throw Error("sensitivity integral requires a stable closed loop");
    return loop.domain().is_discrete() ? bode_integral_discrete(loop, chi) : bode_integral_continuous(loop, chi);
}

ConstraintReport check_constraints(const DObParams& p, const PeakSpec& spec) {
    p.require_sampled();
    spec.validate();
    const double x = p.loop_gain_product();
    const double s_bound = 2.0 * (1.0 - spec.gammaS);
    const double t_bound = 2.0 / (1.0 + spec.gammaT);
    ConstraintReport r;
    r.innerStable = {x < 2.0, 2.0 - x};
    r.noRinging = {x <= 1.0, 1.0 - x};
    r.sensitivityPeak = {x > 0.0 && x <= s_bound, s_bound - x};
    r.complementaryPeak = {x > 0.0 && x <= t_bound, t_bound - x};
    return r;
}

ConstraintReport check_constraints(const DObParams& p, const OuterGains& g, const PeakSpec& spec) {
    ConstraintReport r = check_constraints(p, spec);
    g.validate();
    const double rhs = 1.0 + p.gDob * (g.kD / g.kP + g.kD / p.gDob + g.kD * g.kD / g.kP);
    const double lhs = 1.0 / p.alpha;
    r.gainCondition = ConstraintCheck{lhs < rhs, rhs - lhs};
    DObParams ct = p;
    ct.Ts = kInfinity;
    const auto verdict = is_stable(outer_loop_ct(ct, g).S);
    r.continuousOuterRoots = ConstraintCheck{verdict.stable(), -verdict.worstPole->real()};
    return r;
}

double max_bandwidth(double alpha, double Ts, const PeakSpec& spec) {
    spec.validate();
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error("alpha must be finite and > 0");
    if (!(Ts > 0.0) || !std::isfinite(Ts)) throw Error("Ts must be finite and > 0");
    const double bound = std::min(2.0 * (1.0 - spec.gammaS), 2.0 / (1.0 + spec.gammaT));
    double g = bound / (alpha * Ts);
    // Step down until the product, evaluated as check_constraints does, is within budget.
    DObParams probe{alpha, g, kInfinity, Ts};
    while (probe.loop_gain_product() > bound) {
        g = std::nextafter(g, 0.0);
        probe.gDob = g;
    }
    return g;
}

DObParams LoopBuilder::with(SweptParameter which, double value) const {
    DObParams p = params;
    (which == SweptParameter::Alpha ? p.alpha : p.gDob) = value;
    return p;
}

LoopSet LoopBuilder::build(SweptParameter which, double value) const {
    const DObParams p = with(which, value);
    switch (kind) {
    case LoopKind::InnerContinuous:
        return inner_loop_ct(p);
    case LoopKind::InnerDiscrete:
        return inner_loop_dt(p);
    case LoopKind::OuterContinuous:
        return outer_loop_ct(p, gains);
    case LoopKind::OuterDiscrete:
        return outer_loop_dt(p, gains);
    }
    throw Error("unknown loop kind");
}

StabilityVerdict<double> LoopBuilder::closed_loop(SweptParameter which, double value) const {
    const LoopSet loops = build(which, value);
    return classify_poles(roots(characteristic_polynomial(loops.L)), loops.L.domain());
}

std::vector<double> SweepRange::values() const {
    if (count < 2) throw Error("sweep needs at least 2 points");
    if (!(from > 0.0) || !(to > 0.0)) throw Error("sweep range must be positive");
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(count - 1);
        v[i] = spacing == Spacing::Linear ? from + (to - from) * t
                                          : std::exp(std::log(from) + (std::log(to) - std::log(from)) * t);
    }
    v.front() = from;
    v.back() = to;
    return v;
}

RootLocusTable root_locus(const LoopBuilder& builder, SweptParameter which, const SweepRange& range,
                          unsigned maxThreads) {
    const std::vector<double> values = range.values();
    RootLocusTable table;
    table.parameter = which;
    table.rows.resize(values.size());
    std::vector<std::exception_ptr> failures(values.size());

    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            try {
                const auto verdict = builder.closed_loop(which, values[i]);
                table.rows[i] = {values[i], verdict.poles, verdict.stability};
            } catch (const Error& e) {
                std::ostringstream msg;
                msg.precision(17);
                msg << e.what() << " (at " << (which == SweptParameter::Alpha ? "alpha" : "gDob") << " = "
                    << values[i] << ")";
                failures[i] = std::make_exception_ptr(Error(msg.str()));
            }
        }
    };

    unsigned threads = maxThreads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : maxThreads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, values.size()));
    if (threads <= 1) {
        work(0, values.size());
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (values.size() + threads - 1) / threads;
        for (std::size_t begin = 0; begin < values.size(); begin += chunk)
            pool.emplace_back(work, begin, std::min(values.size(), begin + chunk));
    }
    for (const auto& f : failures)
        if (f) std::rethrow_exception(f);
    return table;
}

double critical_parameter(const LoopBuilder& builder, SweptParameter which, double from, double to) {
    if (!(from > 0.0) || !(to > 0.0)) throw Error("bracket endpoints must be positive");
    const bool stable_from = builder.closed_loop(which, from).stable();
    const bool stable_to = builder.closed_loop(which, to).stable();
    if (stable_from == stable_to) throw Error("no stability change inside the bracket");
    double a = from;
    double b = to;
    while (std::abs(b - a) > 1e-6 * std::max(std::abs(a), std::abs(b))) {
        const double m = 0.5 * (a + b);
        if (builder.closed_loop(which, m).stable() == stable_from) {
            a = m;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

} // namespace doblab
