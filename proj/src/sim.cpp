#include "doblab/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "doblab/dob_blocks.hpp"
#include "doblab/error.hpp"
#include "doblab/transfer_function.hpp"

namespace doblab {
namespace {

struct PlantState {
    double q = 0.0;
    double v = 0.0;
};

// Constant torque over h: exact double integrator, or exact first-order velocity with viscous friction.
PlantState advance_constant(PlantState s, double torque, double h, const PlantParams& plant) {
    if (plant.viscous == 0.0) {
        const double a = torque / plant.Jm;
        return {s.q + h * s.v + (h * h / 2.0) * a, s.v + h * a};
    }
    const double k = plant.viscous / plant.Jm;
    const double v_inf = torque / plant.viscous;
    const double e = std::expm1(-k * h);
    return {s.q + v_inf * h - (s.v - v_inf) * e / k, s.v + (s.v - v_inf) * e};
}

class Plant {
public:
    Plant(const PlantParams& params, double Ts) : params_(params), snap_(1e-9 * Ts) {}

    double load_at(double t) const { return params_.load_at(t + snap_); }

    // Advance from t0 by h under held input u, splitting at load changes inside the interval.
    PlantState advance(PlantState s, double u, double t0, double h) const {
        const double t1 = t0 + h;
        double t = t0;
        for (const LoadStep& step : params_.externalLoad) {
            if (step.time <= t + snap_ || step.time >= t1 - snap_) continue;
            s = advance_constant(s, params_.Kt * u - load_at(t), step.time - t, params_);
            t = step.time;
        }
        return advance_constant(s, params_.Kt * u - load_at(t), t1 - t, params_);
    }

    double acceleration(const PlantState& s, double u, double t) const {
        return (params_.Kt * u - load_at(t) - params_.viscous * s.v) / params_.Jm;
    }

private:
    const PlantParams& params_;
    double snap_;
};

// Uniform on [-amplitude, amplitude] from the top 53 bits of a 64-bit Mersenne twister.
class UniformNoise {
public:
    UniformNoise(std::uint64_t seed, double amplitude) : engine_(seed), amplitude_(amplitude) {}

    double operator()() {
        if (amplitude_ == 0.0) return 0.0;
        const double x = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        return amplitude_ * (2.0 * x - 1.0);
    }

private:
    std::mt19937_64 engine_;
    double amplitude_;
};

} // namespace

void PlantParams::validate() const {
    if (!(Jm > 0.0) || !std::isfinite(Jm)) throw Error("Jm must be finite and > 0");
    if (!(Kt > 0.0) || !std::isfinite(Kt)) throw Error("Kt must be finite and > 0");
    if (!(viscous >= 0.0) || !std::isfinite(viscous)) throw Error("viscous must be finite and >= 0");
    for (std::size_t i = 0; i < externalLoad.size(); ++i) {
        if (!std::isfinite(externalLoad[i].time) || !std::isfinite(externalLoad[i].torque))
            throw Error("load schedule entries must be finite");
        if (i > 0 && externalLoad[i].time < externalLoad[i - 1].time)
            throw Error("load schedule must be sorted by time");
    }
}

double PlantParams::load_at(double t) const {
    double torque = 0.0;
    for (const LoadStep& step : externalLoad) {
        if (step.time > t) break;
        torque = step.torque;
    }
    return torque;
}

double alpha_from_nominal(const PlantParams& plant, const NominalModel& nominal) {
    if (!(nominal.Jn > 0.0) || !(nominal.Ktn > 0.0)) throw Error("nominal Jn and Ktn must be > 0");
    return (nominal.Jn * plant.Kt) / (plant.Jm * nominal.Ktn);
}

std::size_t Scenario::steps() const {
    const double n = std::round(duration / dob.Ts);
    if (!(n >= 1.0)) throw Error("duration must cover at least one sampling period");
    return static_cast<std::size_t>(n);
}

NominalModel Scenario::nominal_model() const {
    if (nominal) return *nominal;
    return {dob.alpha * plant.Jm, plant.Kt};
}

void Scenario::validate() const {
    plant.validate();
    dob.require_sampled();
    gains.validate();
    if (!(duration > 0.0) || !std::isfinite(duration)) throw Error("duration must be finite and > 0");
    if (logSubdivision < 1) throw Error("log subdivision must be >= 1");
    if (!(noiseAmplitude >= 0.0) || !std::isfinite(noiseAmplitude)) throw Error("noise amplitude must be >= 0");
    if (nominal) {
        const double a = alpha_from_nominal(plant, *nominal);
        if (std::abs(a - dob.alpha) > 1e-12 * a) throw Error("alpha does not match the nominal model");
    }
    if (const auto* traj = std::get_if<TrajectoryReference>(&reference)) {
        if (traj->samples.size() != steps())
            throw Error("trajectory has " + std::to_string(traj->samples.size()) + " samples, expected " +
                        std::to_string(steps()));
    } else if (!std::isfinite(std::get<StepReference>(reference).amplitude)) {
        throw Error("step amplitude must be finite");
    }
}

SimTrace simulate(const Scenario& sc) {
    sc.validate();
    const double Ts = sc.dob.Ts;
    const std::size_t n_steps = sc.steps();
    const auto sub = static_cast<std::size_t>(sc.logSubdivision);
    const NominalModel nominal = sc.nominal_model();
    const double input_scale = nominal.Jn / nominal.Ktn;
    const double gts = sc.dob.gDob * Ts;
    const double gvts = sc.dob.ideal_velocity() ? 0.0 : sc.dob.gV * Ts;

    const Plant plant(sc.plant, Ts);
    UniformNoise noise(sc.noiseSeed, sc.noiseAmplitude);
    auto reference = [&](std::size_t k) {
        if (const auto* traj = std::get_if<TrajectoryReference>(&sc.reference)) return traj->samples[k];
        return std::get<StepReference>(sc.reference).amplitude;
    };

    SimTrace trace;
    trace.Ts = Ts;
    trace.logSubdivision = sc.logSubdivision;
    trace.records.reserve(n_steps * sub);

    PlantState state;
    double v_filt_prev = 0.0;
    double err_prev = 0.0;
    double d_hat = 0.0;  // lumped disturbance estimate, acceleration units
    const double nan = std::numeric_limits<double>::quiet_NaN();

    for (std::size_t k = 0; k < n_steps; ++k) {
        const double t = static_cast<double>(k) * Ts;
        const double q_ref = reference(k);
        if (trace.divergedAt) {
            for (std::size_t j = 0; j < sub; ++j) {
                const double tj = t + static_cast<double>(j) * Ts / static_cast<double>(sub);
                trace.records.push_back({tj, q_ref, nan, nan, nan, plant.load_at(tj), nan, nan});
            }
            continue;
        }

        const double v_meas = state.v + noise();
        const double v_filt = sc.dob.ideal_velocity() ? v_meas : (v_filt_prev + gvts * v_meas) / (1.0 + gvts);
        const double err = q_ref - state.q;
        const double a_des = sc.openOuterLoop ? 0.0 : sc.gains.kP * err + sc.gains.kD * (err - err_prev) / Ts;
        d_hat += gts * (a_des - (v_filt - v_filt_prev) / Ts);
        const double u = input_scale * (a_des + d_hat);
        const double tau_hat = nominal.Jn * d_hat;

        trace.records.push_back({t, q_ref, state.q, state.v, u, plant.load_at(t), tau_hat,
                                 plant.acceleration(state, u, t)});
        for (std::size_t j = 1; j < sub; ++j) {
            const double h = static_cast<double>(j) * Ts / static_cast<double>(sub);
            const PlantState sj = plant.advance(state, u, t, h);
            trace.records.push_back({t + h, q_ref, sj.q, sj.v, u, plant.load_at(t + h), tau_hat,
                                     plant.acceleration(sj, u, t + h)});
        }

        state = plant.advance(state, u, t, Ts);
        v_filt_prev = v_filt;
        err_prev = err;
        if (!std::isfinite(state.q) || !std::isfinite(state.v) || std::abs(state.q) > kDivergenceThreshold)
            trace.divergedAt = (k + 1) * sub;
    }
    return trace;
}

std::vector<double> inner_loop_disturbance_oracle(const DObParams& p, double Jm, std::span<const double> disturbance) {
    if (!(Jm > 0.0)) throw Error("Jm must be > 0");
    const LoopSet inner = inner_loop_dt(p);
    const TransferFunctiond channel((-1.0 / Jm) * inner.S.num(), inner.S.den(), inner.S.domain());
    return filter(channel, disturbance);
}

std::vector<double> noise_channel_oracle(const DObParams& p, std::span<const double> noise) {
    const LoopSet inner = inner_loop_dt(p);
    const TransferFunctiond channel((-1.0 / p.Ts) * (Polynomiald{1.0, -1.0} * inner.T.num()), inner.T.den(),
                                    inner.T.domain());
    return filter(channel, noise);
}

} // namespace doblab
