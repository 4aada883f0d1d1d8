#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "doblab/params.hpp"

namespace doblab {

/// External load torque that takes effect at `time` and holds until the next entry.
struct LoadStep {
    double time = 0.0;    ///< [s]
    double torque = 0.0;  ///< [N m]
};

struct PlantParams {
    double Jm = 1.0;       ///< actual inertia [kg m^2]
    double Kt = 1.0;       ///< actual torque coefficient [N m per unit input]
    double viscous = 0.0;  ///< viscous friction [N m s/rad]
    std::vector<LoadStep> externalLoad;

    void validate() const;
    double load_at(double t) const;
};

/// Nominal plant model embedded in the controller.
struct NominalModel {
    double Jn = 1.0;
    double Ktn = 1.0;
};

/// alpha = (Jn Kt) / (Jm Ktn).
double alpha_from_nominal(const PlantParams& plant, const NominalModel& nominal);

struct StepReference {
    double amplitude = 1.0;  ///< [rad]
};

struct TrajectoryReference {
    std::vector<double> samples;  ///< q_ref at t_k = k Ts [rad]
};

using Reference = std::variant<StepReference, TrajectoryReference>;

struct Scenario {
    PlantParams plant;
    DObParams dob;
    OuterGains gains;
    Reference reference = StepReference{};
    /// If set, the controller uses this model and dob.alpha must equal alpha_from_nominal.
    /// Otherwise the nominal model is Ktn = Kt, Jn = alpha Jm.
    std::optional<NominalModel> nominal;
    std::uint64_t noiseSeed = 0;
    double noiseAmplitude = 0.0;  ///< uniform velocity noise bound [rad/s]
    double duration = 1.0;        ///< [s]
    int logSubdivision = 1;       ///< trace records per controller period
    bool openOuterLoop = false;   ///< zero acceleration reference, observer loop only

    std::size_t steps() const;
    NominalModel nominal_model() const;
    void validate() const;
};

struct SimRecord {
    double t = 0.0;
    double qRef = 0.0;
    double q = 0.0;
    double qdot = 0.0;
    double u = 0.0;        ///< control input held over the period
    double tauD = 0.0;     ///< external load torque
    double tauDHat = 0.0;  ///< observer estimate of the lumped disturbance [N m]
    double accel = 0.0;    ///< net plant acceleration at t
};

struct SimTrace {
    double Ts = 0.0;
    int logSubdivision = 1;
    std::vector<SimRecord> records;
    /// Index of the first record with |q| above the divergence threshold; later records are NaN.
    std::optional<std::size_t> divergedAt;
};

inline constexpr double kDivergenceThreshold = 1e6;

/**
 * Fixed-step closed-loop run of the digital observer-based position controller.
 *
 * Controller at rate 1/Ts: Backward-Euler PD on the position error, velocity
 * observer with accumulator d_k = d_{k-1} + gDob Ts (a_des,k - (v_k - v_{k-1})/Ts),
 * u_k = (Jn/Ktn)(a_des,k + d_k), held by ZoH. The plant Jm q'' = Kt u - tau_d - b q'
 * is advanced in closed form between samples.
 */
SimTrace simulate(const Scenario& sc);

/// Acceleration response -(1/Jm) S_i(z) tau_d as a difference equation.
std::vector<double> inner_loop_disturbance_oracle(const DObParams& p, double Jm, std::span<const double> disturbance);

/// Acceleration response -((z-1)/Ts) T_i(z) eta_v to velocity measurement noise.
std::vector<double> noise_channel_oracle(const DObParams& p, std::span<const double> noise);

} // namespace doblab
