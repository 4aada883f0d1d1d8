#include "doblab/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

#include "doblab/error.hpp"

namespace doblab {
namespace {

// Kronrod nodes (positive half, descending) and weights; Gauss weights on the odd nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gauss_kronrod(const std::function<double(double)>& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[static_cast<std::size_t>(j)];
        const double sum = f(center - dx) + f(center + dx);
        kronrod += kWgk[static_cast<std::size_t>(j)] * sum;
        if (j % 2 == 1) gauss += kWg[static_cast<std::size_t>(j / 2)] * sum;
    }
    return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

// Integral of coefficient*ln(t) + constant over t in [0, h].
double local_piece(const LogSingularity& s, double h) {
    return s.coefficient * (h * std::log(h) - h) + s.constant * h;
}

} // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    const QuadratureOptions& opts) {
    QuadratureResult out;
    if (a == b) return out;
    std::priority_queue<Panel> panels;
    panels.push(gauss_kronrod(f, a, b));
    double value = panels.top().value;
    double error = panels.top().error;
    out.evaluations = 15;
    std::size_t count = 1;
    while (error > std::max(opts.absTol, opts.relTol * std::abs(value))) {
        if (count >= opts.maxIntervals) {
            std::ostringstream msg;
            msg << "quadrature did not converge on [" << a << ", " << b << "]: achieved error " << error;
            throw Error(msg.str());
        }
        const Panel worst = panels.top();
        panels.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            std::ostringstream msg;
            msg << "quadrature interval collapsed near " << mid << ": achieved error " << error;
            throw Error(msg.str());
        }
        const Panel left = gauss_kronrod(f, worst.a, mid);
        const Panel right = gauss_kronrod(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);
        out.evaluations += 30;
        ++count;
    }
    // Re-sum to shed the drift of the running totals.
    value = 0.0;
    error = 0.0;
    std::vector<Panel> all;
    all.reserve(panels.size());
    while (!panels.empty()) {
        all.push_back(panels.top());
        panels.pop();
    }
    std::sort(all.begin(), all.end(), [](const Panel& l, const Panel& r) { return l.a < r.a; });
    for (const Panel& p : all) {
        value += p.value;
        error += p.error;
    }
    out.value = value;
    out.errorEstimate = error;
    return out;
}

QuadratureResult integrate_log_singular(const std::function<double(double)>& f, double a, double b,
                                        std::span<const LogSingularity> singularities,
                                        const QuadratureOptions& opts, double localTol) {
    std::vector<LogSingularity> sing(singularities.begin(), singularities.end());
    std::sort(sing.begin(), sing.end(), [](const auto& l, const auto& r) { return l.location < r.location; });
    for (const auto& s : sing)
        if (s.location < a || s.location > b) throw Error("singularity outside the integration interval");

    QuadratureResult out;
    // Breakpoints: a, each singular location, b. Each subinterval has
    // singular ends trimmed by an analytically integrated width h.
    std::vector<double> points{a};
    for (const auto& s : sing) points.push_back(s.location);
    points.push_back(b);

    auto singular_at = [&](double x) -> const LogSingularity* {
        for (const auto& s : sing)
            if (s.location == x) return &s;
        return nullptr;
    };

    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        double lo = points[i];
        double hi = points[i + 1];
        if (!(hi > lo)) continue;
        const LogSingularity* left = singular_at(lo);
        const LogSingularity* right = singular_at(hi);
        const double span = hi - lo;
        auto trim = [&](const LogSingularity& s) {
            double h = 0.25 * span;
            while (std::abs(local_piece(s, h)) >= localTol && h > 1e-300) h *= 0.5;
            return h;
        };
        if (left) {
            const double h = trim(*left);
            out.value += local_piece(*left, h);
            lo += h;
        }
        if (right) {
            const double h = trim(*right);
            out.value += local_piece(*right, h);
            hi -= h;
        }
        const QuadratureResult part = integrate_adaptive(f, lo, hi, opts);
        out.value += part.value;
        out.errorEstimate += part.errorEstimate;
        out.evaluations += part.evaluations;
    }
    return out;
}

} // namespace doblab
