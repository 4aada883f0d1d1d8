#include "doblab/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "doblab/error.hpp"

namespace doblab {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    return out;
}

bool parse_bool(const std::string& text, const std::string& what) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw Error("invalid boolean for " + what + ": '" + text + "'");
}

} // namespace

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

double parse_number(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    if (t == "inf" || t == "+inf" || t == "infinity") return kInfinity;
    if (t == "-inf") return -kInfinity;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || std::isnan(v))
        throw Error("invalid number for " + what + ": '" + text + "'");
    return v;
}

Scenario parse_scenario(std::istream& in, const std::filesystem::path& baseDir) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Error("scenario line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (!kv.emplace(key, trim(line.substr(eq + 1))).second)
            throw Error("scenario line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }

    auto take = [&](const std::string& key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        std::string v = it->second;
        kv.erase(it);
        return v;
    };
    auto number = [&](const std::string& key, std::optional<double> fallback = std::nullopt) {
        if (auto v = take(key)) return parse_number(*v, key);
        if (fallback) return *fallback;
        throw Error("scenario is missing required key '" + key + "'");
    };
    auto integer = [&](const std::string& key, std::uint64_t fallback) -> std::uint64_t {
        const auto v = take(key);
        if (!v) return fallback;
        std::uint64_t out = 0;
        const auto [end, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
        if (ec != std::errc() || end != v->data() + v->size())
            throw Error("invalid non-negative integer for " + key + ": '" + *v + "'");
        return out;
    };

    Scenario sc;
    sc.plant.Jm = number("jm");
    sc.plant.Kt = number("kt");
    sc.plant.viscous = number("viscous", 0.0);
    if (auto load = take("load")) {
        for (const std::string& entry : split(*load, ',')) {
            if (entry.empty()) continue;
            const auto colon = entry.find(':');
            if (colon == std::string::npos) throw Error("load entries must be time:torque, got '" + entry + "'");
            sc.plant.externalLoad.push_back(
                {parse_number(entry.substr(0, colon), "load time"), parse_number(entry.substr(colon + 1), "load torque")});
        }
    }

    const auto alpha = take("alpha");
    const auto jn = take("jn");
    const auto ktn = take("ktn");
    if (alpha && (jn || ktn)) throw Error("give either alpha or the nominal model (jn, ktn), not both");
    if (alpha) {
        sc.dob.alpha = parse_number(*alpha, "alpha");
    } else if (jn && ktn) {
        sc.nominal = NominalModel{parse_number(*jn, "jn"), parse_number(*ktn, "ktn")};
        sc.plant.validate();
        sc.dob.alpha = alpha_from_nominal(sc.plant, *sc.nominal);
    } else {
        throw Error("scenario needs alpha, or both jn and ktn");
    }
    sc.dob.gDob = number("gdob");
    sc.dob.gV = number("gv", kInfinity);
    sc.dob.Ts = number("ts");
    sc.gains.kP = number("kp");
    sc.gains.kD = number("kd", 0.0);

    const std::string ref = take("reference").value_or("step");
    if (ref == "step") {
        sc.reference = StepReference{number("amplitude", 1.0)};
    } else if (ref == "trajectory") {
        const auto file = take("trajectory");
        if (!file) throw Error("reference = trajectory needs a trajectory file");
        std::filesystem::path path(*file);
        if (path.is_relative()) path = baseDir / path;
        sc.reference = TrajectoryReference{load_trajectory_csv(path, sc.dob.Ts)};
    } else {
        throw Error("reference must be step or trajectory, got '" + ref + "'");
    }

    sc.noiseAmplitude = number("noise_amplitude", 0.0);
    sc.noiseSeed = integer("noise_seed", 0);
    sc.duration = number("duration");
    const std::uint64_t sub = integer("log_subdivision", 1);
    if (sub < 1 || sub > 1000000) throw Error("log_subdivision must lie in [1, 1000000]");
    sc.logSubdivision = static_cast<int>(sub);
    if (auto v = take("open_outer_loop")) sc.openOuterLoop = parse_bool(*v, "open_outer_loop");

    if (!kv.empty()) throw Error("unknown scenario key '" + kv.begin()->first + "'");
    sc.validate();
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open scenario file " + path.string());
    return parse_scenario(in, path.parent_path());
}

std::vector<double> parse_trajectory_csv(std::istream& in, double Ts) {
    std::string line;
    if (!std::getline(in, line)) throw Error("trajectory CSV is empty");
    const auto header = split(trim(line), ',');
    if (header.size() != 2 || header[0] != "t" || header[1] != "q_ref")
        throw Error("trajectory CSV header must be t,q_ref");
    std::vector<double> samples;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto cols = split(line, ',');
        if (cols.size() != 2) throw Error("trajectory CSV rows need exactly 2 columns");
        const double t = parse_number(cols[0], "t");
        const double expected = static_cast<double>(samples.size()) * Ts;
        if (std::abs(t - expected) > 1e-9 * std::max(1.0, expected))
            throw Error("trajectory sample " + std::to_string(samples.size()) + " is not at k*Ts");
        samples.push_back(parse_number(cols[1], "q_ref"));
    }
    return samples;
}

std::vector<double> load_trajectory_csv(const std::filesystem::path& path, double Ts) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open trajectory file " + path.string());
    return parse_trajectory_csv(in, Ts);
}

void write_trace_csv(std::ostream& out, const SimTrace& trace) {
    out << "t,q_ref,q,qdot,u,tau_d,tau_d_hat\n";
    for (const SimRecord& r : trace.records) {
        out << format_number(r.t) << ',' << format_number(r.qRef) << ',' << format_number(r.q) << ','
            << format_number(r.qdot) << ',' << format_number(r.u) << ',' << format_number(r.tauD) << ','
            << format_number(r.tauDHat) << '\n';
    }
}

} // namespace doblab
