#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "doblab/analysis.hpp"
#include "doblab/dob_blocks.hpp"
#include "doblab/io.hpp"
#include "doblab/sim.hpp"

namespace doblab::cli {
namespace {

struct LoopOptions {
    std::string domain = "z";
    std::string loop = "inner";
    double alpha = 0.0;
    double gdob = 0.0;
    std::string gv = "inf";
    double ts = 0.0;
    double kp = 0.0;
    double kd = 0.0;
};

// With `sweepable`, --alpha and --gdob are optional here and checked against the swept parameter later.
void add_loop_options(CLI::App* cmd, LoopOptions& o, const std::string& default_loop, bool sweepable = false) {
    o.loop = default_loop;
    cmd->add_option("--domain", o.domain, "s (continuous) or z (discrete)")
        ->check(CLI::IsMember({"s", "z"}))
        ->capture_default_str();
    cmd->add_option("--loop", o.loop, "inner (observer) or outer (position) loop")
        ->check(CLI::IsMember({"inner", "outer"}))
        ->capture_default_str();
    auto* alpha = cmd->add_option("--alpha", o.alpha, "nominal-to-actual plant ratio");
    auto* gdob = cmd->add_option("--gdob", o.gdob, "observer bandwidth [rad/s]");
    if (!sweepable) {
        alpha->required();
        gdob->required();
    }
    cmd->add_option("--gv", o.gv, "velocity low-pass bandwidth [rad/s] or inf")->capture_default_str();
    cmd->add_option("--ts", o.ts, "sampling period [s], required for --domain z");
    cmd->add_option("--kp", o.kp, "outer-loop position gain [1/s^2]");
    cmd->add_option("--kd", o.kd, "outer-loop velocity gain [1/s]");
}

DObParams params_of(const LoopOptions& o) {
    DObParams p{o.alpha, o.gdob, parse_number(o.gv, "--gv"), kInfinity};
    if (o.domain == "z") {
        if (!(o.ts > 0.0)) throw Error("--ts must be > 0 for --domain z");
        p.Ts = o.ts;
    } else if (o.ts > 0.0) {
        p.Ts = o.ts;
    }
    p.validate();
    return p;
}

LoopBuilder builder_of(const LoopOptions& o) {
    LoopBuilder b;
    const bool discrete = o.domain == "z";
    if (o.loop == "inner") {
        b.kind = discrete ? LoopKind::InnerDiscrete : LoopKind::InnerContinuous;
    } else {
        b.kind = discrete ? LoopKind::OuterDiscrete : LoopKind::OuterContinuous;
        b.gains = {o.kp, o.kd};
        b.gains.validate();
    }
    b.params = params_of(o);
    return b;
}

// The swept parameter takes its base value from the sweep; the other one must be given.
LoopBuilder sweep_builder_of(LoopOptions o, const std::string& sweep, double from) {
    if (sweep == "alpha") {
        if (o.gdob == 0.0) throw Error("--gdob is required");
        o.alpha = from;
    } else {
        if (o.alpha == 0.0) throw Error("--alpha is required");
        o.gdob = from;
    }
    return builder_of(o);
}

unsigned thread_cap() {
    const char* env = std::getenv("DOBLAB_THREADS");
    if (!env || !*env) return 0;
    const double v = parse_number(env, "DOBLAB_THREADS");
    if (!(v >= 1.0) || v != static_cast<double>(static_cast<unsigned>(v)))
        throw Error("DOBLAB_THREADS must be a positive integer");
    return static_cast<unsigned>(v);
}

SweptParameter swept_of(const std::string& s) { return s == "alpha" ? SweptParameter::Alpha : SweptParameter::GDob; }

void print_row(std::ostream& out, std::initializer_list<std::string> cols) {
    bool first = true;
    for (const auto& c : cols) {
        if (!first) out << ',';
        out << c;
        first = false;
    }
    out << '\n';
}

std::string pass(bool ok) { return ok ? "pass" : "fail"; }

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Analysis and simulation of disturbance-observer based motion controllers", "doblab"};
    app.require_subcommand(1);

    // freq
    LoopOptions freq_opts;
    std::size_t points = 512;
    double wmin = 1e-1;
    double wmax = 1e5;
    auto* freq = app.add_subcommand("freq", "frequency response of S and T");
    add_loop_options(freq, freq_opts, "inner");
    freq->add_option("--points", points, "number of grid points")->capture_default_str();
    freq->add_option("--wmin", wmin, "lowest frequency for --domain s [rad/s]")->capture_default_str();
    freq->add_option("--wmax", wmax, "highest frequency for --domain s [rad/s]")->capture_default_str();

    // rootlocus / critical
    LoopOptions rl_opts;
    std::string sweep = "alpha";
    double from = 0.0;
    double to = 0.0;
    std::size_t count = 100;
    std::string spacing = "log";
    auto* rl = app.add_subcommand("rootlocus", "closed-loop roots along a parameter sweep");
    add_loop_options(rl, rl_opts, "outer", true);
    rl->add_option("--sweep", sweep, "swept parameter")->check(CLI::IsMember({"alpha", "gdob"}))->capture_default_str();
    rl->add_option("--from", from, "first parameter value")->required();
    rl->add_option("--to", to, "last parameter value")->required();
    rl->add_option("--count", count, "number of sweep points")->capture_default_str();
    rl->add_option("--spacing", spacing, "log or linear")->check(CLI::IsMember({"log", "linear"}))->capture_default_str();

    LoopOptions crit_opts;
    std::string crit_sweep = "alpha";
    double crit_from = 0.0;
    double crit_to = 0.0;
    auto* crit = app.add_subcommand("critical", "bisect the stability boundary inside a bracket");
    add_loop_options(crit, crit_opts, "outer", true);
    crit->add_option("--sweep", crit_sweep, "swept parameter")
        ->check(CLI::IsMember({"alpha", "gdob"}))
        ->capture_default_str();
    crit->add_option("--from", crit_from, "bracket end with one stability verdict")->required();
    crit->add_option("--to", crit_to, "bracket end with the opposite verdict")->required();

    // peak / bode-integral
    LoopOptions peak_opts;
    std::string which = "S";
    auto* peak = app.add_subcommand("peak", "peak magnitude of S or T");
    add_loop_options(peak, peak_opts, "inner");
    peak->add_option("--of", which, "S or T")->check(CLI::IsMember({"S", "T"}))->capture_default_str();

    LoopOptions bode_opts;
    auto* bode = app.add_subcommand("bode-integral", "sensitivity integral of ln|S| with its predicted value");
    add_loop_options(bode, bode_opts, "inner");

    // constraints / tune
    DObParams cons_p;
    PeakSpec spec;
    double cons_kp = 0.0;
    double cons_kd = 0.0;
    auto* cons = app.add_subcommand("constraints", "check the discrete design constraints");
    cons->add_option("--alpha", cons_p.alpha, "nominal-to-actual plant ratio")->required();
    cons->add_option("--gdob", cons_p.gDob, "observer bandwidth [rad/s]")->required();
    cons->add_option("--ts", cons_p.Ts, "sampling period [s]")->required();
    cons->add_option("--gammaS", spec.gammaS, "sensitivity peak budget, |S| <= 1/gammaS")->required();
    cons->add_option("--gammaT", spec.gammaT, "complementary peak budget, |T| <= 1/gammaT")->required();
    cons->add_option("--kp", cons_kp, "position gain; with --kd enables the continuous gain condition");
    cons->add_option("--kd", cons_kd, "velocity gain");

    double tune_alpha = 0.0;
    double tune_ts = 0.0;
    PeakSpec tune_spec;
    auto* tune = app.add_subcommand("tune", "largest observer bandwidth meeting the peak budgets");
    tune->add_option("--alpha", tune_alpha, "nominal-to-actual plant ratio")->required();
    tune->add_option("--ts", tune_ts, "sampling period [s]")->required();
    tune->add_option("--gammaS", tune_spec.gammaS, "sensitivity peak budget")->required();
    tune->add_option("--gammaT", tune_spec.gammaT, "complementary peak budget")->required();

    // simulate
    std::string scenario_path;
    auto* simulate_cmd = app.add_subcommand("simulate", "closed-loop time-domain simulation");
    simulate_cmd->add_option("--scenario", scenario_path, "key = value scenario file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const CLI::App* failing = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << failing->help();
        return e.get_exit_code() == 0 ? 1 : e.get_exit_code();
    }

    try {
        if (freq->parsed()) {
            const LoopBuilder b = builder_of(freq_opts);
            const LoopSet loops = b.build(SweptParameter::Alpha, b.params.alpha);
            if (points < 2) throw Error("--points must be >= 2");
            std::vector<double> grid(points);
            if (loops.L.domain().is_discrete()) {
                const double nyq = loops.L.domain().nyquist();
                for (std::size_t i = 0; i < points; ++i)
                    grid[i] = nyq * static_cast<double>(i) / static_cast<double>(points - 1);
                grid.back() = nyq;
            } else {
                if (!(wmin > 0.0) || !(wmax > wmin)) throw Error("need 0 < --wmin < --wmax");
                for (std::size_t i = 0; i < points; ++i)
                    grid[i] = std::exp(std::log(wmin) + (std::log(wmax) - std::log(wmin)) * static_cast<double>(i) /
                                                            static_cast<double>(points - 1));
                grid.front() = wmin;
                grid.back() = wmax;
            }
            const LoopResponse r = loop_response(loops, grid);
            out << "omega_rad_s,mag_S,phase_S_rad,mag_T,phase_T_rad\n";
            for (Eigen::Index i = 0; i < r.omega.size(); ++i)
                print_row(out, {format_number(r.omega[i]), format_number(std::abs(r.S[i])), format_number(std::arg(r.S[i])),
                                format_number(std::abs(r.T[i])), format_number(std::arg(r.T[i]))});
        } else if (rl->parsed()) {
            const LoopBuilder b = sweep_builder_of(rl_opts, sweep, from);
            const SweepRange range{from, to, count, spacing == "log" ? Spacing::Logarithmic : Spacing::Linear};
            const RootLocusTable table = root_locus(b, swept_of(sweep), range, thread_cap());
            std::size_t n = 0;
            for (const auto& row : table.rows) n = std::max(n, row.roots.size());
            out << "param";
            for (std::size_t i = 1; i <= n; ++i) out << ",re_pole_" << i << ",im_pole_" << i;
            out << ",stable\n";
            for (const auto& row : table.rows) {
                out << format_number(row.parameter);
                for (std::size_t i = 0; i < n; ++i) {
                    if (i < row.roots.size()) {
                        out << ',' << format_number(row.roots[i].real()) << ',' << format_number(row.roots[i].imag());
                    } else {
                        out << ",,";
                    }
                }
                out << ',' << (row.stable() ? 1 : 0) << '\n';
            }
        } else if (crit->parsed()) {
            const LoopBuilder b = sweep_builder_of(crit_opts, crit_sweep, crit_from);
            const double value = critical_parameter(b, swept_of(crit_sweep), crit_from, crit_to);
            out << "parameter,critical_value\n" << crit_sweep << ',' << format_number(value) << '\n';
        } else if (peak->parsed()) {
            const LoopBuilder b = builder_of(peak_opts);
            const LoopSet loops = b.build(SweptParameter::Alpha, b.params.alpha);
            const Peak pk = sensitivity_peak(which == "S" ? loops.S : loops.T);
            out << "omega_rad_s,peak\n" << format_number(pk.omega) << ',' << format_number(pk.value) << '\n';
        } else if (bode->parsed()) {
            const LoopBuilder b = builder_of(bode_opts);
            const LoopSet loops = b.build(SweptParameter::Alpha, b.params.alpha);
            const BodeIntegralReport r = bode_integral(loops.L);
            out << "quantity,value\n";
            print_row(out, {"integral", format_number(r.value)});
            print_row(out, {"unstable_pole_term", format_number(r.unstablePoleTerm)});
            print_row(out, {"limit_term", format_number(r.limitTerm)});
            print_row(out, {"predicted", format_number(r.predicted)});
            print_row(out, {"error_estimate", format_number(r.errorEstimate)});
        } else if (cons->parsed()) {
            const bool with_gains = cons->count("--kp") > 0 || cons->count("--kd") > 0;
            const ConstraintReport r =
                with_gains ? check_constraints(cons_p, OuterGains{cons_kp, cons_kd}, spec) : check_constraints(cons_p, spec);
            out << "constraint,status,margin\n";
            auto line = [&](const char* name, const ConstraintCheck& c) {
                print_row(out, {name, pass(c.ok), format_number(c.margin)});
            };
            line("inner_stable", r.innerStable);
            line("no_ringing", r.noRinging);
            line("sensitivity_peak", r.sensitivityPeak);
            line("complementary_peak", r.complementaryPeak);
            if (r.gainCondition) line("gain_condition", *r.gainCondition);
            if (r.continuousOuterRoots) line("continuous_outer_roots", *r.continuousOuterRoots);
            if (r.gain_condition_disagrees())
                err << "warning: gain_condition disagrees with the continuous root check\n";
        } else if (tune->parsed()) {
            out << "g_max\n" << format_number(max_bandwidth(tune_alpha, tune_ts, tune_spec)) << '\n';
        } else if (simulate_cmd->parsed()) {
            const SimTrace trace = simulate(load_scenario(scenario_path));
            write_trace_csv(out, trace);
            if (trace.divergedAt)
                err << "warning: simulation diverged at record " << *trace.divergedAt << '\n';
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

} // namespace doblab::cli
