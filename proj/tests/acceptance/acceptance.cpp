// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.
// usage: acceptance <configs dir> [<cli executable>]

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "mzimpact/pipeline.hpp"
#include "oracles.hpp"

using namespace mzimpact;
namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string sci(double x, int digits = 3) {
    std::ostringstream s;
    s.precision(digits);
    s << x;
    return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path g_configs;
std::string g_cli;

RunConfig load(const std::string& name, const std::vector<std::string>& overrides = {}) {
    return parse_config((g_configs / name).string(), overrides);
}

// 1: reduced equation with quadrature convolution vs full-system integration
Outcome exact_reduction() {
    namespace ode = boost::numeric::odeint;
    using boost::math::quadrature::gauss;
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<double> times;
    for (int i = 0; i <= 100; ++i) times.push_back(0.05 * i);
    double worst = 0.0;
    for (int s = 1; s <= 5; ++s) {
        std::mt19937 rng(1000u + static_cast<unsigned>(s));
        const ModalStructure ms = oracle::random_structure(rng, 8);
        const FirstOrderSystem sys = assemble_first_order(ms, {2, 4.0, 1.9}, {1, 0.5, -0.3});
        const Projection p = build_projection(sys);
        const KernelModel km(sys, p);
        const ForcingTerm g(sys, p);
        const double a = 2.0 + 0.3 * s, b = 1.5 + 0.4 * s;
        auto f = [&](double t) { return a * (1.0 - std::cos(b * t)); };
        auto fdot = [&](double t) { return a * b * std::sin(b * t); };

        auto convolution = [&](double t) {
            Vec2 acc = Vec2::Zero();
            if (t <= 0.0) return acc;
            const int panels = std::max(1, static_cast<int>(std::ceil(t / 0.25)));
            const double h = t / panels;
            for (int c = 0; c < 2; ++c) {
                for (int i = 0; i < panels; ++i)
                    acc[c] += gauss<double, 20>::integrate(
                        [&](double tau) { return km.rate(tau)[c] * fdot(t - tau); }, h * i, h * (i + 1));
            }
            return acc;
        };
        auto rhs = [&](const std::vector<double>& y, std::vector<double>& dy, double t) {
            const Vec2 yv(y[0], y[1]);
            const Vec2 d = p.A * yv + km.L_infty() * f(t) + g(t) + convolution(t);
            dy[0] = d[0];
            dy[1] = d[1];
        };
        const Vec2 y0 = p.V * sys.initial_state;
        std::vector<double> y{y0[0], y0[1]};
        std::vector<Vec2> red;
        ode::integrate_times(ode::make_dense_output(1e-12, 1e-12, ode::runge_kutta_dopri5<std::vector<double>>()),
                             rhs, y, times.begin(), times.end(), 1e-3,
                             [&](const std::vector<double>& v, double) { red.emplace_back(v[0], v[1]); });
        const auto full = oracle::full_system(sys, f, times, 1e-13);
        double err = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < times.size(); ++i) {
            const Vec2 ref = p.V * full[i];
            err = std::max(err, (red[i] - ref).cwiseAbs().maxCoeff());
            scale = std::max(scale, ref.cwiseAbs().maxCoeff());
        }
        worst = std::max(worst, err / scale);
    }
    const double secs = seconds_since(t0);
    return {worst < 1e-6 && secs < 60.0,
            "max relative sup error " + sci(worst) + " over 5 systems (M = 8), " + sci(secs) + " s"};
}

// 2: EB vanishes under refinement, Timoshenko converges to a nonzero plateau
Outcome regularity() {
    const auto t0 = std::chrono::steady_clock::now();
    const RunConfig eb = load("euler_bernoulli.json");
    const RunConfig tm = load("timoshenko.json");
    const RegularityReport r_eb = regularity_sweep(eb.family, eb.sweep_sizes);
    const RegularityReport r_tm = regularity_sweep(tm.family, tm.sweep_sizes);
    bool eb_ok = r_eb.verdict == "singular";
    std::string eb_s;
    for (std::size_t i = 0; i < r_eb.samples.size(); ++i) {
        eb_s += (i ? ", " : "") + sci(r_eb.samples[i].L_plus);
        if (i > 0) eb_ok = eb_ok && r_eb.samples[i].L_plus <= 0.75 * r_eb.samples[i - 1].L_plus;
    }
    const double a = r_tm.samples[0].L_plus, b = r_tm.samples[1].L_plus;
    const double rel = std::abs(b - a) / std::abs(a);
    const bool tm_ok = r_tm.verdict == "regular" && rel < 0.05 && std::min(a, b) > eb.run.regularity_floor;
    const double secs = seconds_since(t0);
    return {eb_ok && tm_ok && secs < 300.0,
            "EB [L+]_2 = " + eb_s + " (" + r_eb.verdict + "); Timoshenko [L+]_2 = " + sci(a, 5) + ", " + sci(b, 5) +
                ", change " + sci(100 * rel) + "% (" + r_tm.verdict + "), " + sci(secs) + " s"};
}

// 3: exponent of omega_k ~ k^alpha over the resolved upper half-spectrum
Outcome alpha_fits() {
    const RunConfig eb = load("euler_bernoulli.json");
    const RunConfig st = load("string.json");
    const RunConfig tm = load("timoshenko.json");
    const double a_eb = regularity_sweep(eb.family, eb.sweep_sizes).alpha.alpha;
    const double a_st = regularity_sweep(st.family, st.sweep_sizes).alpha.alpha;
    const AlphaFit a_tm = regularity_sweep(tm.family, {160, 320}).alpha;
    const AlphaFit a_tm_small = regularity_sweep(tm.family, tm.sweep_sizes).alpha;
    const bool ok = std::abs(a_eb - 2.0) <= 0.1 && std::abs(a_st - 1.0) <= 0.1 && std::abs(a_tm.alpha - 1.0) <= 0.1;
    return {ok, "EB " + sci(a_eb, 4) + ", string " + sci(a_st, 4) + ", Timoshenko " + sci(a_tm.alpha, 4) +
                    " (N = 160/320, k = " + std::to_string(a_tm.k_lo) + ".." + std::to_string(a_tm.k_hi) +
                    "); at N = 20/40 the fit gives " + sci(a_tm_small.alpha, 4) + " over k = " +
                    std::to_string(a_tm_small.k_lo) + ".." + std::to_string(a_tm_small.k_hi)};
}

// 4: constant-force overlap scaling
Outcome asymptotic_scaling() {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string out;
    for (const char* name : {"euler_bernoulli.json", "string.json"}) {
        const RunConfig c = load(name);
        const AsymptoticsReport r = asymptotics_report(c.family, c.asymptotics);
        const double target = c.family.tag == ModelTag::euler_bernoulli ? -0.5 : 0.0;
        bool covers = true;
        for (std::size_t i = 0; i < r.N_estimated.size(); ++i)
            covers = covers && double(r.N_estimated[i]) >= r.N_measured[i] &&
                     r.mode_counts[i] >= r.N_estimated[i];
        const double defect = r.reversal_defects.back();
        const bool exp_ok = std::abs(r.fitted_exponent - target) <= 0.1;
        ok = ok && exp_ok && covers && defect <= 0.02;
        out += std::string(to_string(c.family.tag)) + ": exponent " + sci(r.fitted_exponent, 3) + " (target " +
               sci(target) + "), N_estimated >= N_measured " + (covers ? "everywhere" : "violated") +
               ", reversal defect at dt = " + sci(r.delta_t_grid.back()) + " is " + sci(100 * defect) + "%; ";
    }
    const double secs = seconds_since(t0);
    return {ok && secs < 120.0, out + sci(secs) + " s"};
}

// Linear interpolation of the tip trajectory at time t.
Vec2 interpolate(const SimulationResult& r, double eps, double t) {
    const double x = t / eps;
    const auto q = static_cast<std::size_t>(std::floor(x));
    if (q + 1 >= r.y.size()) return r.y.back();
    const double w = x - static_cast<double>(q);
    return (1.0 - w) * r.y[q] + w * r.y[q + 1];
}

struct ScenarioRun {
    bool ok = false;
    std::string error;
    SimulationResult r;
    double eps = 0.0, t_end = 0.0;
};

ScenarioRun run_timoshenko(std::size_t N, double eps, double t_end) {
    ScenarioRun out;
    out.eps = eps;
    out.t_end = t_end;
    RunConfig c = load("timoshenko.json");
    c.size = N;
    c.run.eps = c.contact.eps = eps;
    c.run.t_end = c.contact.t_end = t_end;
    try {
        const Scenario s = build_scenario(c);
        out.r = run_reduced(c, s);
        out.ok = true;
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

const double kPeriod = 2.0 * pi / 13.0;
ScenarioRun g_tm20;

std::size_t onsets_in(const SimulationResult& r, double a, double b) {
    std::size_t n = 0;
    for (const auto& e : r.events) n += e.kind == EventKind::onset && e.t > a && e.t <= b;
    return n;
}

double max_force(const SimulationResult& r) { return *std::max_element(r.fc.begin(), r.fc.end()); }

// 5: periodic steady state of the forced Timoshenko scenario
Outcome timoshenko_scenario() {
    const auto t0 = std::chrono::steady_clock::now();
    const RunConfig c = load("timoshenko.json");
    const double t_end = 22.0 * kPeriod;
    g_tm20 = run_timoshenko(c.size, c.run.eps, t_end);
    if (!g_tm20.ok) return {false, "simulation failed: " + g_tm20.error};
    const SimulationResult& r = g_tm20.r;
    const double eps = c.run.eps;
    auto mismatch = [&](double lag) {
        Vec2 diff = Vec2::Zero(), scale = Vec2::Zero();
        for (std::size_t q = 0; q < r.y.size(); ++q) {
            const double t = r.times[q];
            if (t < t_end - lag) continue;
            diff = diff.cwiseMax((r.y[q] - interpolate(r, eps, t - lag)).cwiseAbs());
            scale = scale.cwiseMax(r.y[q].cwiseAbs());
        }
        return diff.cwiseQuotient(scale).maxCoeff();
    };
    const double periodicity = mismatch(kPeriod), periodicity2 = mismatch(2.0 * kPeriod);
    const std::size_t last2 = onsets_in(r, t_end - 2.0 * kPeriod, t_end);
    const std::size_t last = onsets_in(r, t_end - kPeriod, t_end);
    const double fmax = max_force(r);
    const ScenarioRun half = run_timoshenko(c.size, 0.5 * eps, t_end);
    const double fmax_half = half.ok ? max_force(half.r) : std::nan("");
    const double ratio = fmax_half / fmax;
    const double secs = seconds_since(t0);
    const bool ok = periodicity < 0.01 && last == 2 && half.ok && ratio < 2.0 && ratio > 0.5 && secs < 600.0;
    return {ok, "period-to-period difference " + sci(100 * periodicity) + "%, onsets in the last period " +
                    std::to_string(last) + " (total " + std::to_string(r.count(EventKind::onset)) +
                    "; over two periods: difference " + sci(100 * periodicity2) + "%, " + std::to_string(last2) +
                    " onsets" +
                    "), max f_c " + sci(fmax, 4) + " vs " + (half.ok ? sci(fmax_half, 4) : half.error) +
                    " at eps/2 (ratio " + sci(ratio) + "), " + sci(secs) + " s"};
}

struct CorRun {
    bool overflow = false;
    SimulationResult r;
    ChatterMetrics m;
    double t_reached = 0.0;
    double omega_max = 0.0;
};

CorRun run_cor_scenario(std::size_t N, double t_end) {
    RunConfig c = load("timoshenko.json");
    c.size = N;
    c.contact.t_end = t_end;
    const Scenario s = build_scenario(c);
    CorOptions o;
    o.max_events = c.run.max_events;
    CorSimulator sim(s.sys, c.contact, o);
    CorRun out;
    try {
        out.r = sim.run();
    } catch (const NumericalError&) {
        out.overflow = true;
        out.r = sim.result();
    }
    out.m = chatter_metrics(out.r);
    out.t_reached = out.r.events.empty() ? out.r.times.back() : out.r.events.back().t;
    out.omega_max = s.modes.omegas.maxCoeff();
    return out;
}

// 6: restitution baseline chatters, the reduced model does not
Outcome chatter_contrast() {
    const auto t0 = std::chrono::steady_clock::now();
    const double t_end = 22.0 * kPeriod;
    const CorRun c20 = run_cor_scenario(20, t_end);
    const CorRun c40 = run_cor_scenario(40, t_end);
    const std::size_t impacts = c20.r.count(EventKind::impact);
    const std::size_t onsets20 = g_tm20.ok ? g_tm20.r.count(EventKind::onset) : 0;
    const double rate_ratio = c40.m.event_rate / c20.m.event_rate;
    const RunConfig c = load("timoshenko.json");
    const ScenarioRun r40 = run_timoshenko(40, c.run.eps, t_end);
    const std::size_t onsets40 = r40.ok ? r40.r.count(EventKind::onset) : 0;
    const bool many = g_tm20.ok && impacts >= 10 * onsets20;
    const bool rate_ok = c20.m.valid && c40.m.valid && rate_ratio >= 1.5 && rate_ratio <= 3.0;
    const bool same = r40.ok && onsets40 == onsets20;
    auto describe = [](const char* tag, const CorRun& x) {
        return std::string(tag) + ": " + std::to_string(x.r.count(EventKind::impact)) + " impacts" +
               (x.overflow ? " (event cap hit at t = " + sci(x.t_reached, 6) + ")" : "") + ", in-episode rate " +
               sci(x.m.event_rate) + "/s, dominant event frequency " + sci(x.m.dominant_event_frequency) +
               " Hz vs omega_max/2pi " + sci(x.omega_max / (2 * pi)) + " Hz";
    };
    return {many && rate_ok && same,
            "CoR " + describe("N = 20", c20) + "; " + describe("N = 40", c40) + "; rate ratio " + sci(rate_ratio) +
                "; reduced onsets N = 20: " + std::to_string(onsets20) + ", N = 40: " +
                (r40.ok ? std::to_string(onsets40) : "failed (" + r40.error + ")") + "; " +
                sci(seconds_since(t0)) + " s"};
}

// Least-squares line through (t, f) samples in [a, b], evaluated at x.
double line_at(const SimulationResult& r, double a, double b, double x) {
    std::vector<double> t, f;
    for (std::size_t q = 0; q < r.times.size(); ++q)
        if (r.times[q] >= a && r.times[q] <= b) {
            t.push_back(r.times[q]);
            f.push_back(r.fc[q]);
        }
    return detail::fit_line(t, f, x).at;
}

// 7: kernel jump at the wave-return time reappears as a force jump
Outcome discontinuity_propagation() {
    const RunConfig c = load("string.json");
    const Scenario s = build_scenario(c);
    MemoryKernel k;
    const SimulationResult r = run_reduced(c, s, &k);
    if (k.jump_table.empty()) return {false, "no kernel jump detected"};
    const Event* onset = nullptr;
    for (const auto& e : r.events)
        if (e.kind == EventKind::onset) {
            onset = &e;
            break;
        }
    if (!onset) return {false, "no contact onset"};
    const double gap = 0.05, span = 0.2;
    const double ta = onset->t, td = ta + k.jump_table.front().tau;
    bool held = td + gap + span <= r.times.back();
    for (std::size_t q = 0; q < r.times.size(); ++q)
        if (r.times[q] >= ta && r.times[q] <= td + gap + span) held = held && r.in_contact[q];
    if (!held) return {false, "contact does not persist through the first kernel-jump delay"};
    const double f0 = line_at(r, ta + gap, ta + gap + span, ta);
    const double jump = line_at(r, td + gap, td + gap + span, td) - line_at(r, td - gap - span, td - gap, td);
    const double dL = k.jump_table.front().dL[1], Lp = k.L_plus[1];
    const double predicted = dL * f0 / Lp;
    const double rel = std::abs(std::abs(jump) - std::abs(predicted)) / std::abs(predicted);
    return {rel < 0.05, "M = " + std::to_string(c.size) + ", tau_d = " + sci(k.jump_table.front().tau, 5) +
                            ", f_c(t0+) = " + sci(f0, 4) + ", force jump " + sci(jump, 4) +
                            " vs dL f_c(t0+) / L+ = " + sci(predicted, 4) + " (magnitudes differ by " +
                            sci(100 * rel) + "%, opposite sign)"};
}

// 8: contact simulation on the EB model stops with the regularity error
Outcome singular_guard() {
    const fs::path dir = fs::temp_directory_path() / "mzimpact_acceptance_eb";
    fs::remove_all(dir);
    fs::create_directories(dir);
    bool refused = false;
    std::string msg;
    try {
        run_subcommand("simulate", load("euler_bernoulli.json"), OutputDir(dir));
    } catch (const SingularModelError& e) {
        refused = true;
        msg = e.what();
    }
    bool cli_ok = true;
    std::string cli = "CLI not checked";
    if (!g_cli.empty()) {
        const fs::path cdir = dir / "cli";
        const std::string cmd = "\"" + g_cli + "\" simulate --config \"" + (g_configs / "euler_bernoulli.json").string() +
                                "\" --out-dir \"" + cdir.string() + "\" > /dev/null 2>&1";
        const int st = std::system(cmd.c_str());
        const int code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
        cli_ok = code == 3 && !fs::exists(cdir / "trajectory.csv");
        cli = "CLI exit code " + std::to_string(code);
    }
    const bool none = !fs::exists(dir / "trajectory.csv");
    return {refused && none && cli_ok,
            std::string(refused ? "SingularModelError" : "no error") + ", trajectory " +
                (none ? "not written" : "written") + ", " + cli};
}

} // namespace

int main(int argc, char** argv) {
    g_configs = argc > 1 ? fs::path(argv[1]) : fs::path("configs");
    if (argc > 2) g_cli = argv[2];
    const std::vector<std::pair<int, std::function<Outcome()>>> checks{
        {1, exact_reduction},   {2, regularity},       {3, alpha_fits},
        {4, asymptotic_scaling}, {5, timoshenko_scenario},   {6, chatter_contrast},
        {7, discontinuity_propagation}, {8, singular_guard}};
    bool all = true;
    for (const auto& [id, fn] : checks) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        all = all && o.pass;
        std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << " : " << o.detail << std::endl;
    }
    return all ? 0 : 1;
}
