// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doblab/analysis.hpp"
#include "doblab/discretize.hpp"
#include "doblab/dob_blocks.hpp"
#include "doblab/io.hpp"
#include "doblab/sim.hpp"

using namespace doblab;
using Complex = std::complex<double>;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

int failures = 0;

void criterion(int id, const std::string& name, double budgetSeconds, const std::function<void(Outcome&)>& body) {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
        body(out);
    } catch (const std::exception& e) {
        out.pass = false;
        out.detail << " [exception: " << e.what() << "]";
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds >= budgetSeconds) {
        out.pass = false;
        out.detail << " [over time budget " << budgetSeconds << " s]";
    }
    if (!out.pass) ++failures;
    std::printf("%s %d %s (%.3f s)%s\n", out.pass ? "PASS" : "FAIL", id, name.c_str(), seconds, out.detail.str().c_str());
    std::fflush(stdout);
}

std::vector<double> uniform_to_nyquist(const Domain& d, std::size_t n) {
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i) grid[i] = d.nyquist() * static_cast<double>(i) / static_cast<double>(n - 1);
    grid.back() = d.nyquist();
    return grid;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i)
        grid[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
    return grid;
}

double magnitude(const TransferFunctiond& tf, double w) { return std::abs(evaluate(tf, frequency_point(tf.domain(), w))); }

std::string fmt(double x) { return format_number(x); }

// Inner-loop parameters with alpha gDob Ts = x.
DObParams inner_params(double x) { return {1.0, x / 1e-3, kInfinity, 1e-3}; }

// Peak-to-peak position error over records with t in [from, to]; infinite if the run diverged there.
double error_peak_to_peak(const SimTrace& tr, double from, double to) {
    double lo = kInfinity;
    double hi = -kInfinity;
    for (const SimRecord& r : tr.records) {
        if (r.t < from || r.t > to) continue;
        const double e = r.qRef - r.q;
        if (!std::isfinite(e)) return kInfinity;
        lo = std::min(lo, e);
        hi = std::max(hi, e);
    }
    return hi - lo;
}

double max_abs_error(const SimTrace& tr, double from) {
    double worst = 0.0;
    for (const SimRecord& r : tr.records)
        if (r.t >= from) worst = std::max(worst, std::abs(r.qRef - r.q));
    return worst;
}

} // namespace

int main() {
    criterion(1, "inner-loop sensitivity and complementary peaks at Nyquist", 1.0, [](Outcome& o) {
        for (const double x : {0.1, 0.5, 1.0, 1.5, 1.9}) {
            const LoopSet loops = inner_loop_dt(inner_params(x));
            const double nyq = loops.S.domain().nyquist();
            const Peak s = sensitivity_peak(loops.S);
            const Peak t = sensitivity_peak(loops.T);
            const double sPred = 2.0 / std::abs(x - 2.0);
            const double tPred = x / std::abs(x - 2.0);
            const double sErr = std::abs(s.value - sPred) / sPred;
            const double tErr = std::abs(t.value - tPred) / tPred;
            // Nyquist must attain the supremum (|T| is flat at x = 1).
            const bool sAtNyq = magnitude(loops.S, nyq) >= s.value * (1.0 - 1e-12);
            const bool tAtNyq = magnitude(loops.T, nyq) >= t.value * (1.0 - 1e-12);
            o.detail << " x=" << x << ": |S|max=" << fmt(s.value) << " |T|max=" << fmt(t.value) << " at w="
                     << fmt(t.omega) << ";";
            o.require(sErr < 1e-9, "S peak at x=" + fmt(x) + " rel err " + fmt(sErr));
            o.require(sAtNyq, "S argmax at x=" + fmt(x));
            o.require(tErr < 1e-9, "T peak at x=" + fmt(x) + " is " + fmt(t.value) + ", formula " + fmt(tPred));
            o.require(tAtNyq, "T argmax at x=" + fmt(x) + " is w=" + fmt(t.omega) + ", not Nyquist");
        }
    });

    criterion(2, "discrete sensitivity integral vanishes", 1.0, [](Outcome& o) {
        for (const double x : {0.5, 1.5}) {
            const BodeIntegralReport r = bode_integral(inner_loop_dt(inner_params(x)).L);
            o.detail << " x=" << x << ": " << fmt(r.value) << ";";
            o.require(std::abs(r.value) < 1e-3, "integral at x=" + fmt(x));
        }
    });

    criterion(3, "continuous waterbed dichotomy", 10.0, [](Outcome& o) {
        double worst = 0.0;
        for (const double alpha : {0.1, 0.5, 1.0, 2.0, 5.0})
            for (const double g : {10.0, 100.0, 500.0, 1000.0, 5000.0})
                worst = std::max(worst, sensitivity_peak(inner_loop_ct({alpha, g, kInfinity, kInfinity}).S).value);
        o.detail << " ideal velocity sup|S|=" << fmt(worst) << ";";
        o.require(worst <= 1.0 + 1e-12, "ideal-velocity peak above 1");

        double prev = 1.0;
        o.detail << " gV=1000 peaks:";
        for (const double g : {250.0, 500.0, 750.0, 1000.0}) {
            const double peak = sensitivity_peak(inner_loop_ct({1.0, g, 1000.0, kInfinity}).S).value;
            o.detail << " " << fmt(peak);
            o.require(peak > prev, "finite-gV peak not above 1 and increasing at g=" + fmt(g));
            prev = peak;
        }
        o.detail << ";";

        const BodeIntegralReport finite = bode_integral(inner_loop_ct({1.0, 500.0, 1000.0, kInfinity}).L);
        o.detail << " finite-gV integral " << fmt(finite.value) << ";";
        o.require(std::abs(finite.value) <= 1e-2, "finite-gV integral");
        for (const double g : {100.0, 500.0}) {
            const double alpha = 0.8;
            const BodeIntegralReport ideal = bode_integral(inner_loop_ct({alpha, g, kInfinity, kInfinity}).L);
            const double expected = -std::numbers::pi / 2.0 * alpha * g;
            o.detail << " ideal integral " << fmt(ideal.value) << " vs " << fmt(expected) << ";";
            o.require(std::abs(ideal.value - expected) <= 1e-3 * std::abs(expected), "ideal-velocity integral");
        }
    });

    criterion(4, "inner-loop stability and ringing boundaries", 1.0, [](Outcome& o) {
        auto verdict = [](double x) { return is_stable(inner_loop_dt(inner_params(x)).T).stability; };
        o.require(verdict(1.999) == Stability::Stable, "stable below 2");
        o.require(verdict(2.0) == Stability::Marginal, "marginal at 2");
        o.require(verdict(2.001) == Stability::Unstable, "unstable above 2");

        LoopBuilder b;
        b.kind = LoopKind::InnerDiscrete;
        b.params = {0.7, 1.0, kInfinity, 1e-3};
        const double gStar = critical_parameter(b, SweptParameter::GDob, 100.0, 1e4);
        const double expected = 2.0 / (0.7 * 1e-3);
        const double rel = std::abs(gStar - expected) / expected;
        o.detail << " bisected gDob*=" << fmt(gStar) << " expected " << fmt(expected) << " rel " << fmt(rel) << ";";
        o.require(rel <= 1e-6, "bisected boundary");

        // Single closed-loop pole at 1 - x: negative real exactly when x > 1.
        for (const double x : {0.5, 0.999, 1.0, 1.001, 1.5, 1.99}) {
            const auto poles = is_stable(inner_loop_dt(inner_params(x)).T).poles;
            const bool ringing = poles.size() == 1 && poles[0].real() < 0.0;
            o.require(ringing == (x > 1.0), "ringing pole at x=" + fmt(x));
            o.require(check_constraints(inner_params(x), PeakSpec{}).noRinging.ok == !ringing,
                      "no-ringing constraint at x=" + fmt(x));
        }
    });

    criterion(5, "servo root loci: continuous robust, discrete bounded", 10.0, [](Outcome& o) {
        const OuterGains gains{1000.0, 250.0};
        LoopBuilder ct;
        ct.kind = LoopKind::OuterContinuous;
        ct.params = {1.0, 750.0, kInfinity, kInfinity};
        ct.gains = gains;
        const RootLocusTable a = root_locus(ct, SweptParameter::Alpha, {0.01, 1000.0, 200, Spacing::Logarithmic});
        const bool allStable = std::all_of(a.rows.begin(), a.rows.end(), [](const RootLocusRow& r) { return r.stable(); });
        o.detail << " continuous alpha in [0.01, 1000] all stable: " << (allStable ? "yes" : "no") << ";";
        o.require(allStable, "continuous sweep has an unstable point");

        LoopBuilder dt = ct;
        dt.kind = LoopKind::OuterDiscrete;
        dt.params.Ts = 1e-3;
        const double alphaStar = critical_parameter(dt, SweptParameter::Alpha, 0.01, 5.0);
        const double envelope = 2.0 / (750.0 * 1e-3);
        o.detail << " discrete alpha*=" << fmt(alphaStar) << " envelope " << fmt(envelope) << ";";
        o.require(alphaStar <= envelope * (1.0 + 1e-6), "critical alpha above the inner-loop envelope");
        o.require(!dt.closed_loop(SweptParameter::Alpha, alphaStar * 1.01).stable(), "unstable above alpha*");
        o.require(dt.closed_loop(SweptParameter::Alpha, alphaStar * 0.99).stable(), "stable below alpha*");

        // Upward from the servo's gDob = 750; small gDob is unstable too at alpha = 0.01 (lower edge reported).
        LoopBuilder dg = dt;
        dg.params.alpha = 0.01;
        const RootLocusTable g = root_locus(dg, SweptParameter::GDob, {750.0, 1e6, 200, Spacing::Logarithmic});
        o.require(g.rows.front().stable(), "stable at gDob = 750");
        o.require(!g.rows.back().stable(), "large gDob unstable");
        const double gHigh = critical_parameter(dg, SweptParameter::GDob, 750.0, 1e6);
        const double gLow = critical_parameter(dg, SweptParameter::GDob, 10.0, 750.0);
        o.detail << " alpha=0.01 stable gDob band [" << fmt(gLow) << ", " << fmt(gHigh) << "];";
    });

    criterion(6, "simulated servo: tuned tracks, over-gained diverges, lag oscillates", 10.0, [](Outcome& o) {
        const std::filesystem::path dir = DOBLAB_SCENARIO_DIR;
        const Scenario reg = load_scenario(dir / "step_regulation.cfg");
        const Scenario trk = load_scenario(dir / "trajectory_tracking.cfg");
        const Scenario div = load_scenario(dir / "diverge.cfg");
        const Scenario lag = load_scenario(dir / "lag.cfg");

        const ConstraintReport c = check_constraints(reg.dob, PeakSpec{});
        o.require(c.innerStable.ok && c.noRinging.ok && c.sensitivityPeak.ok && c.complementaryPeak.ok,
                  "tuned scenario violates a constraint");

        const SimTrace regTrace = simulate(reg);
        const SimTrace trkTrace = simulate(trk);
        const double regSs = max_abs_error(regTrace, reg.duration - 0.1);
        const double trkSs = max_abs_error(trkTrace, trk.duration - 0.1);
        o.detail << " step steady-state |e|=" << fmt(regSs) << " trajectory steady-state |e|=" << fmt(trkSs) << ";";
        o.require(!regTrace.divergedAt && regSs < 1e-3, "step regulation under load");
        o.require(!trkTrace.divergedAt && trkSs < 1e-3, "trajectory tracking under load");

        o.require(std::abs(div.dob.loop_gain_product() - 2.5) < 1e-12, "diverging scenario is not at x=2.5");
        const SimTrace divTrace = simulate(div);
        o.detail << " x=2.5 diverged: " << (divTrace.divergedAt ? "yes" : "no") << ";";
        o.require(divTrace.divergedAt.has_value(), "x=2.5 did not diverge");

        const double lead = 1.0 / (1.0 + lag.dob.gDob * lag.dob.Ts);
        const double alphaLag = lag.dob.alpha;
        o.require(alphaLag < 0.1 * lead, "lag scenario alpha not far below the lead threshold");
        const SimTrace lagTrace = simulate(lag);
        const double tunedPp = error_peak_to_peak(regTrace, 0.5, reg.duration);
        const double lagPp = error_peak_to_peak(lagTrace, 0.5, lag.duration);
        o.detail << " post-load peak-to-peak error tuned " << fmt(tunedPp) << " lag (alpha=" << fmt(alphaLag)
                 << ") " << fmt(lagPp) << ";";
        o.require(lagPp > 10.0 * tunedPp, "lag case does not oscillate");
    });

    criterion(7, "simulator matches the difference-equation oracles", 10.0, [](Outcome& o) {
        std::mt19937_64 eng(7);
        std::uniform_real_distribution<double> dist(-0.2, 0.2);
        double worst = 0.0;
        for (const double x : {0.3, 1.0, 1.7}) {
            Scenario sc;
            sc.plant = {0.003, 0.25, 0.0, {}};
            sc.dob = {0.8, x / (0.8 * 1e-4), kInfinity, 1e-4};
            sc.gains = {1000.0, 25.0};
            sc.duration = 1.0;
            sc.openOuterLoop = true;
            std::vector<double> tau(sc.steps());
            for (std::size_t k = 0; k < tau.size(); ++k) {
                tau[k] = dist(eng);
                sc.plant.externalLoad.push_back({static_cast<double>(k) * sc.dob.Ts, tau[k]});
            }
            const SimTrace tr = simulate(sc);
            const auto oracle = inner_loop_disturbance_oracle(sc.dob, sc.plant.Jm, tau);
            for (std::size_t k = 0; k < tau.size(); ++k)
                worst = std::max(worst, std::abs(tr.records[k].accel - oracle[k]) / std::max(1.0, std::abs(oracle[k])));
        }
        o.detail << " worst per-step deviation over 1e4 steps " << fmt(worst) << ";";
        o.require(worst < 1e-9, "disturbance oracle mismatch");

        const DObParams p{1.0, 5000.0, kInfinity, 1e-4};
        const std::vector<double> dc(3000, 0.37);
        const auto y = noise_channel_oracle(p, dc);
        o.detail << " noise-channel output to constant noise after 3000 steps " << fmt(y.back()) << ";";
        o.require(y.back() == 0.0, "noise channel does not reject DC exactly");
    });

    criterion(8, "structural identities", 10.0, [](Outcome& o) {
        std::vector<LoopSet> loops;
        for (const double gv : {kInfinity, 1000.0}) {
            for (const DObParams& base :
                 {DObParams{0.01, 750.0, gv, 1e-3}, DObParams{1.0, 750.0, gv, 1e-3}, DObParams{2.0, 750.0, gv, 1e-3},
                  DObParams{1.0, 5000.0, gv, 1e-4}, DObParams{0.5, 12000.0, gv, 1e-4}}) {
                DObParams ct = base;
                ct.Ts = kInfinity;
                loops.push_back(inner_loop_ct(ct));
                loops.push_back(inner_loop_dt(base));
                loops.push_back(outer_loop_ct(ct, {1000.0, 250.0}));
                loops.push_back(outer_loop_dt(base, {1000.0, 250.0}));
                loops.push_back(outer_loop_dt(base, {1000.0, 25.0}));
            }
        }
        double worst = 0.0;
        double worstStored = 0.0;
        bool coefficientsExact = true;
        for (const LoopSet& l : loops) {
            const Domain& d = l.L.domain();
            const auto grid = d.is_discrete() ? uniform_to_nyquist(d, 1000) : log_grid(1e-3, 1e7, 1000);
            const LoopResponse r = loop_response(l, grid);
            for (Eigen::Index i = 0; i < r.S.size(); ++i) {
                worst = std::max(worst, std::abs(r.S[i] + r.T[i] - 1.0));
                const Complex p = frequency_point(d, grid[static_cast<std::size_t>(i)]);
                worstStored = std::max(worstStored, std::abs(evaluate(l.S, p) + evaluate(l.T, p) - 1.0));
            }
            coefficientsExact = coefficientsExact && l.S.den() == l.T.den() && l.S.num() + l.T.num() == l.S.den();
        }
        o.detail << " " << loops.size() << " loops, max |S+T-1| " << fmt(worst)
                 << " (separately evaluated stored S and T: " << fmt(worstStored) << ");";
        o.require(worst < 1e-12, "S + T = 1");
        o.require(coefficientsExact, "S and T numerators do not sum to the shared denominator");

        double zohWorst = 0.0;
        for (const double Ts : {1e-3, 1e-4}) {
            const auto g = zoh_double_integrator(1.0, Ts);
            const std::vector<double> step(1000, 1.0);
            const auto y = filter(g, std::span<const double>(step));
            for (std::size_t k = 0; k < y.size(); ++k) {
                const double t = static_cast<double>(k) * Ts;
                zohWorst = std::max(zohWorst, std::abs(y[k] - t * t / 2.0));
            }
        }
        o.detail << " ZoH step deviation " << fmt(zohWorst) << ";";
        o.require(zohWorst <= 1e-12, "ZoH step invariance");

        bool feExact = true;
        for (const double x : {0.1, 0.5, 1.0, 1.5, 1.9}) {
            DObParams p = inner_params(x);
            const TransferFunctiond fe = substitute(inner_loop_ct({p.alpha, p.gDob, kInfinity, kInfinity}).L, p.Ts,
                                                    SubstitutionRule::ForwardEuler);
            const TransferFunctiond direct = inner_loop_dt(p).L;
            feExact = feExact && fe.num() == direct.num() && fe.den() == direct.den() && fe.domain() == direct.domain();
        }
        o.require(feExact, "Forward-Euler inner loop differs from the discrete inner loop");
    });

    criterion(9, "printed gain condition against root-based stability", 10.0, [](Outcome& o) {
        const OuterGains gains{1000.0, 250.0};
        const DObParams servoSet{0.01, 750.0, kInfinity, 1e-3};
        const ConstraintReport r = check_constraints(servoSet, gains, PeakSpec{});
        o.require(r.gainCondition && r.continuousOuterRoots, "gain condition not evaluated");
        o.require(!r.gain_condition_disagrees(), "disagreement at the servo parameter set");
        o.detail << " alpha=0.01: condition " << (r.gainCondition->ok ? "holds" : "fails") << ", roots "
                 << (r.continuousOuterRoots->ok ? "stable" : "unstable") << ";";

        int flagged = 0;
        double lo = kInfinity;
        double hi = 0.0;
        for (const double alpha : log_grid(1e-6, 10.0, 141)) {
            const ConstraintReport s = check_constraints({alpha, 750.0, kInfinity, 1e-3}, gains, PeakSpec{});
            if (s.gain_condition_disagrees()) {
                ++flagged;
                lo = std::min(lo, alpha);
                hi = std::max(hi, alpha);
            }
        }
        o.detail << " flagged (non-blocking) disagreements on alpha in [1e-6, 10]: " << flagged;
        if (flagged > 0) o.detail << " spanning [" << fmt(lo) << ", " << fmt(hi) << "]";
        o.detail << ";";
    });

    return failures == 0 ? 0 : 1;
}
