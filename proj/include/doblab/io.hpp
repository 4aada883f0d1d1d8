#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "doblab/sim.hpp"

namespace doblab {

/// Shortest round-trip-safe decimal: 17 significant digits, "inf"/"-inf"/"nan" for non-finite.
std::string format_number(double x);

/// Parses a decimal number or inf/-inf; throws Error naming `what` otherwise.
double parse_number(const std::string& text, const std::string& what);

/**
 * Reads a flat `key = value` scenario file. '#' starts a comment. Paths
 * (trajectory) are resolved relative to baseDir. Keys and units:
 *
 *   jm [kg m^2], kt [N m/unit], viscous [N m s/rad], load = t:torque, ... [s:N m]
 *   alpha [-] or jn [kg m^2] + ktn [N m/unit], gdob [rad/s], gv [rad/s | inf], ts [s]
 *   kp [1/s^2], kd [1/s]
 *   reference = step | trajectory, amplitude [rad], trajectory = CSV file (t, q_ref)
 *   noise_amplitude [rad/s], noise_seed, duration [s], log_subdivision, open_outer_loop
 */
Scenario parse_scenario(std::istream& in, const std::filesystem::path& baseDir = {});
Scenario load_scenario(const std::filesystem::path& path);

/// CSV with header `t,q_ref`; sample k must sit at t = k Ts.
std::vector<double> load_trajectory_csv(const std::filesystem::path& path, double Ts);
std::vector<double> parse_trajectory_csv(std::istream& in, double Ts);

/// Header `t,q_ref,q,qdot,u,tau_d,tau_d_hat` then one row per record.
void write_trace_csv(std::ostream& out, const SimTrace& trace);

} // namespace doblab
