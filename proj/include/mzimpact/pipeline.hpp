#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "mzimpact/config.hpp"

namespace mzimpact {

inline std::string fmt15(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return buf;
}

// value rounded to 15 significant digits for JSON output
inline double round15(double x) {
    if (!std::isfinite(x)) return x;
    return std::stod(fmt15(x));
}

inline json jnum(double x) {
    if (!std::isfinite(x)) return nullptr;
    return round15(x);
}

inline json jvec(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(jnum(x));
    return a;
}

inline json jvec2(const Vec2& v) { return json::array({jnum(v[0]), jnum(v[1])}); }

class OutputDir {
public:
    explicit OutputDir(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw ValidationError("cannot create output directory " + dir_.string());
    }

    std::ofstream open(const std::string& name) const {
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out) throw ValidationError("cannot write " + (dir_ / name).string());
        return out;
    }

    void write_json(const std::string& name, const json& j) const { open(name) << j.dump(2) << '\n'; }

    const std::filesystem::path& path() const { return dir_; }

private:
    std::filesystem::path dir_;
};

inline void write_trajectory_csv(std::ostream& out, const SimulationResult& r) {
    out << "t,y1,y2,fc,in_contact\n";
    for (std::size_t i = 0; i < r.times.size(); ++i)
        out << fmt15(r.times[i]) << ',' << fmt15(r.y[i][0]) << ',' << fmt15(r.y[i][1]) << ',' << fmt15(r.fc[i]) << ','
            << static_cast<int>(r.in_contact[i]) << '\n';
}

inline json events_json(const SimulationResult& r) {
    json a = json::array();
    for (const auto& e : r.events)
        a.push_back({{"kind", std::string(to_string(e.kind))}, {"t", jnum(e.t)}, {"fc_before", jnum(e.fc_before)},
                     {"fc_after", jnum(e.fc_after)}});
    return a;
}

inline json kernel_summary_json(const MemoryKernel& k) {
    json jumps = json::array();
    for (const auto& j : k.jump_table)
        jumps.push_back({{"tau", jnum(j.tau)}, {"dL1", jnum(j.dL[0])}, {"dL2", jnum(j.dL[1])}});
    return {{"eps", jnum(k.eps)},
            {"L_plus", jvec2(k.L_plus)},
            {"L_infty", jvec2(k.L_infty)},
            {"verdict", k.regular_candidate ? "regular" : "singular-candidate"},
            {"truncation_index", k.truncation_index},
            {"quadrature_route", k.quadrature_route},
            {"jumps", jumps}};
}

inline json regularity_json(const RegularityReport& r) {
    json s = json::array();
    for (const auto& x : r.samples)
        s.push_back({{"size", x.size}, {"omega_max", jnum(x.omega_max)}, {"L_plus2", jnum(x.L_plus)}});
    return {{"model", std::string(to_string(r.tag))},
            {"samples", s},
            {"per_doubling_ratio", jvec(r.per_doubling_ratio)},
            {"alpha", jnum(r.alpha.alpha)},
            {"alpha_fit_range", json::array({r.alpha.k_lo, r.alpha.k_hi})},
            {"resolved_modes", r.alpha.resolved},
            {"verdict", r.verdict}};
}

inline json asymptotics_json(const AsymptoticsReport& r) {
    std::vector<double> ne(r.N_estimated.begin(), r.N_estimated.end());
    std::vector<double> nf(r.N_first_below.begin(), r.N_first_below.end());
    std::vector<double> mc(r.mode_counts.begin(), r.mode_counts.end());
    return {{"model", std::string(to_string(r.tag))},
            {"alpha", jnum(r.alpha)},
            {"omega0", jnum(r.omega0)},
            {"eta", jnum(r.eta)},
            {"delta_t", jvec(r.delta_t_grid)},
            {"mode_count", jvec(mc)},
            {"fc", jvec(r.fc_values)},
            {"fc_shortcut", jvec(r.shortcut_fc_values)},
            {"exponent_fit", jnum(r.fitted_exponent)},
            {"C_constant", jnum(r.C_constant)},
            {"N_measured", jvec(r.N_measured)},
            {"N_first_below", jvec(nf)},
            {"N_estimated", jvec(ne)},
            {"reversal_defect", jvec(r.reversal_defects)},
            {"mode_dv_envelope_ratio", jvec(r.max_mode_dv_ratio)}};
}

struct Scenario {
    ModalStructure modes;
    FirstOrderSystem sys;
    Projection proj;
};

inline Scenario build_scenario(const RunConfig& c) {
    Scenario s;
    s.modes = build_structure(c.family, c.size);
    s.sys = assemble_first_order(s.modes, c.forcing, c.ic);
    s.proj = build_projection(s.sys);
    return s;
}

inline KernelOptions kernel_options(const RunConfig& c) {
    KernelOptions o;
    o.truncation_tol = c.run.truncation_tol;
    o.plateau_begin = c.run.plateau_begin;
    o.plateau_end = c.run.plateau_end;
    o.plateau_method = c.run.plateau_method;
    o.regularity_floor = c.run.regularity_floor;
    return o;
}

inline MemoryKernel scenario_kernel(const RunConfig& c, const Scenario& s) {
    return compute_kernel(s.sys, s.proj, c.run.eps, c.run.kernel_horizon.value_or(c.run.t_end), kernel_options(c));
}

inline std::vector<std::size_t> sweep_sizes(const RunConfig& c) {
    if (!c.sweep_sizes.empty()) return c.sweep_sizes;
    return {c.size, 2 * c.size};
}

// Refuses contact simulation for models whose L+ vanishes under refinement.
inline RegularityReport regularity_guard(const RunConfig& c) {
    RegularityReport rep = regularity_sweep(c.family, {c.size, 2 * c.size});
    if (rep.verdict == "singular")
        throw SingularModelError("singular model: [L+]_2 vanishes under refinement (" +
                                 std::string(to_string(c.family.tag)) +
                                 "), so the contact force is undefined; the regularity criterion requires "
                                 "a nonzero plateau of the memory kernel");
    return rep;
}

inline SimulationResult run_reduced(const RunConfig& c, const Scenario& s, MemoryKernel* kernel_out = nullptr) {
    if (c.contact.contact_enabled) regularity_guard(c);
    MemoryKernel k = scenario_kernel(c, s);
    SimulationResult r = simulate(s.sys, s.proj, k, c.contact);
    if (kernel_out) *kernel_out = std::move(k);
    return r;
}

inline SimulationResult run_cor(const RunConfig& c, const Scenario& s) {
    CorOptions o;
    o.max_events = c.run.max_events;
    return simulate_cor(s.sys, c.contact, o);
}

inline json chatter_json(const ChatterMetrics& m, std::size_t events) {
    return {{"events", events},
            {"valid", m.valid},
            {"event_rate", jnum(m.event_rate)},
            {"dominant_event_frequency", jnum(m.dominant_event_frequency)},
            {"episodes", m.episodes}};
}

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"modes", "kernel", "regularity", "simulate", "compare-cor", "asymptotics"};
    return names;
}

// Writes the subcommand's files into out; throws ValidationError / NumericalError on failure.
inline void run_subcommand(const std::string& name, const RunConfig& c, const OutputDir& out) {
    if (name == "modes") {
        const ModalStructure ms = build_structure(c.family, c.size);
        auto f = out.open("modes.csv");
        f << "k,omega,damping,tip_value\n";
        for (Eigen::Index k = 0; k < ms.omegas.size(); ++k)
            f << k + 1 << ',' << fmt15(ms.omegas[k]) << ',' << fmt15(ms.dampings[k]) << ',' << fmt15(ms.tip_values[k])
              << '\n';
    } else if (name == "kernel") {
        const Scenario s = build_scenario(c);
        const MemoryKernel k = scenario_kernel(c, s);
        auto f = out.open("kernel.csv");
        f << "tau,L1,L2\n";
        for (std::size_t j = 0; j < k.values.size(); ++j)
            f << fmt15(k.eps * static_cast<double>(j)) << ',' << fmt15(k.values[j][0]) << ','
              << fmt15(k.values[j][1]) << '\n';
        out.write_json("kernel_summary.json", kernel_summary_json(k));
    } else if (name == "regularity") {
        out.write_json("regularity.json", regularity_json(regularity_sweep(c.family, sweep_sizes(c))));
    } else if (name == "simulate") {
        const Scenario s = build_scenario(c);
        const SimulationResult r = run_reduced(c, s);
        auto f = out.open("trajectory.csv");
        write_trajectory_csv(f, r);
        out.write_json("events.json", events_json(r));
    } else if (name == "compare-cor") {
        const Scenario s = build_scenario(c);
        const SimulationResult red = run_reduced(c, s);
        const SimulationResult cor = run_cor(c, s);
        {
            auto f = out.open("reduced_trajectory.csv");
            write_trajectory_csv(f, red);
        }
        {
            auto f = out.open("cor_trajectory.csv");
            write_trajectory_csv(f, cor);
        }
        out.write_json("reduced_events.json", events_json(red));
        out.write_json("cor_events.json", events_json(cor));
        double dev = 0.0;
        for (std::size_t i = 0; i < red.y.size() && i < cor.y.size(); ++i)
            dev = std::max(dev, std::abs(red.y[i][0] - cor.y[i][0]));
        out.write_json("chatter.json",
                       {{"reduced", {{"onsets", red.count(EventKind::onset)}, {"releases", red.count(EventKind::release)}}},
                        {"cor", chatter_json(chatter_metrics(cor), cor.events.size())},
                        {"max_tip_difference", jnum(dev)}});
    } else if (name == "asymptotics") {
        const AsymptoticsReport r = asymptotics_report(c.family, c.asymptotics);
        out.write_json("asymptotics.json", asymptotics_json(r));
        auto f = out.open("asymptotics.csv");
        f << "delta_t,mode_count,fc,N_measured,N_estimated,reversal_defect\n";
        for (std::size_t i = 0; i < r.delta_t_grid.size(); ++i)
            f << fmt15(r.delta_t_grid[i]) << ',' << r.mode_counts[i] << ',' << fmt15(r.fc_values[i]) << ','
              << fmt15(r.N_measured[i]) << ',' << r.N_estimated[i] << ',' << fmt15(r.reversal_defects[i]) << '\n';
    } else {
        throw ValidationError("unknown subcommand " + name);
    }
}

} // namespace mzimpact
