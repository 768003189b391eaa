#pragma once

#include <cmath>
#include <vector>

#include "mzimpact/kernel.hpp"
#include "mzimpact/regularity.hpp"

namespace mzimpact {

namespace detail {

// Response of x'' + 2 D w x' + w^2 x = 1 from rest: (x(t), x'(t)).
inline std::pair<double, double> unit_load_response(double w, double D, double t) {
    const double s = D * w;
    if (w * t < 0.5) {
        // Taylor series, d_{n+2} = -2 s d_{n+1} - w^2 d_n with d_0 = d_1 = 0, d_2 = 1
        double dm1 = 0.0, d = 1.0; // d_{n-1}, d_n at n = 2
        double x = 0.0, v = 0.0, tn = t * t / 2.0, tv = t; // t^n/n!, t^{n-1}/(n-1)!
        for (int n = 2; n < 60; ++n) {
            x += d * tn;
            v += d * tv;
            const double dn1 = -2.0 * s * d - w * w * dm1;
            dm1 = d;
            d = dn1;
            tv = tn;
            tn *= t / (n + 1);
            // two consecutive coefficients, since d vanishes at odd n when undamped
            const double next = std::abs(d) * tn + std::abs(dm1) * tv;
            if (next < 1e-18 * std::abs(x) && next * (n + 1) / t < 1e-18 * std::abs(v)) break;
        }
        return {x, v};
    }
    const double wd = w * std::sqrt(1.0 - D * D);
    const double e = std::exp(-s * t);
    const double x = (1.0 - e * (std::cos(wd * t) + s / wd * std::sin(wd * t))) / (w * w);
    const double v = e * std::sin(wd * t) / wd;
    return {x, v};
}

} // namespace detail

// d x_k(dt) / d f_c for a constant contact force held over dt, psi2 = psi_k(contact)^2.
inline double force_sensitivity(double omega, double D, double delta_t, double psi2 = 1.0) {
    require(omega > 0.0 && D >= 0.0 && D < 1.0 && delta_t > 0.0, "force_sensitivity: invalid arguments");
    return psi2 * detail::unit_load_response(omega, D, delta_t).first;
}

struct OverlapSolution {
    double fc = 0.0;
    double free_gap = 0.0;       // n.x+ without contact force
    double shortcut_gap = 0.0;   // dt * n.v- diagnostic
    Vec x_plus, v_plus;
    Vec dv;                      // per-mode velocity change
    double defect = 0.0;         // |n.v+ + n.v-| / |n.v-|
};

// Constant force over dt that returns the tip to the stop, plus the resulting state.
inline OverlapSolution constant_force_bvp(const ModalStructure& ms, const Vec& v_minus, double delta_t,
                                          const Vec* x_minus = nullptr) {
    require(delta_t > 0.0, "overlap duration must be positive");
    const auto M = static_cast<Eigen::Index>(ms.size());
    require(v_minus.size() == M, "incident velocity has the wrong length");
    const Vec& n = ms.tip_values;
    const Vec x0 = x_minus ? *x_minus : Vec::Zero(M);
    OverlapSolution s;
    s.x_plus = x0;
    s.v_plus = v_minus;
    Vec xu(M), vu(M);
    double den = 0.0;
    for (Eigen::Index k = 0; k < M; ++k) {
        Oscillator o(ms.omegas[k], ms.dampings[k]);
        o.free_step(s.x_plus[k], s.v_plus[k], delta_t);
        const auto [a, b] = detail::unit_load_response(ms.omegas[k], ms.dampings[k], delta_t);
        xu[k] = a;
        vu[k] = b;
        den += n[k] * n[k] * a;
    }
    s.free_gap = n.dot(s.x_plus);
    s.shortcut_gap = delta_t * n.dot(v_minus);
    if (!(den > 0.0))
        throw NumericalError("constant_force_bvp: vanishing force sensitivity; use at least the estimated mode count");
    s.fc = -s.free_gap / den;
    s.dv = Vec(M);
    for (Eigen::Index k = 0; k < M; ++k) {
        s.x_plus[k] += n[k] * s.fc * xu[k];
        const double vp = s.v_plus[k] + n[k] * s.fc * vu[k];
        s.dv[k] = vp - v_minus[k];
        s.v_plus[k] = vp;
    }
    const double nvm = n.dot(v_minus);
    s.defect = nvm != 0.0 ? std::abs(n.dot(s.v_plus) + nvm) / std::abs(nvm) : 0.0;
    return s;
}

inline double reversal_check(const ModalStructure& ms, const Vec& v_minus, double delta_t) {
    return constant_force_bvp(ms, v_minus, delta_t).defect;
}

inline std::size_t mode_count_estimate(double omega0, double alpha, double eta, double delta_t) {
    require(eta > 0.0 && eta < 1.0, "eta must lie in (0, 1)");
    require(omega0 > 0.0 && alpha > 0.0 && delta_t > 0.0, "mode_count_estimate: invalid arguments");
    const double N = std::pow(2.0 * std::sqrt(3.0 - 3.0 * eta) / omega0, 1.0 / alpha) * std::pow(delta_t, -1.0 / alpha);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(N)));
}

// Sensitivity divided by its leading-order value psi^2 dt^2 / 2.
inline double normalized_sensitivity(double omega, double D, double delta_t) {
    return force_sensitivity(omega, D, delta_t) / (0.5 * delta_t * delta_t);
}

// Effective number of active modes: sum of normalized sensitivities.
inline double effective_mode_count(const ModalStructure& ms, double delta_t) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < ms.omegas.size(); ++k)
        s += normalized_sensitivity(ms.omegas[k], ms.dampings[k], delta_t);
    return s;
}

// First k whose normalized sensitivity drops below eta.
inline std::size_t first_below(const ModalStructure& ms, double delta_t, double eta) {
    for (Eigen::Index k = 0; k < ms.omegas.size(); ++k)
        if (normalized_sensitivity(ms.omegas[k], ms.dampings[k], delta_t) < eta) return static_cast<std::size_t>(k + 1);
    return ms.size() + 1;
}

struct AsymptoticsOptions {
    std::vector<double> delta_t_grid; // descending
    double eta = 0.1;
    double mode_factor = 2.0;         // structure size = mode_factor * N_estimated
    double incident_velocity = -1.0;  // tip velocity carried by mode 1
};

struct AsymptoticsReport {
    ModelTag tag = ModelTag::string;
    double alpha = 1.0;
    double omega0 = 1.0;
    double eta = 0.1;
    std::vector<double> delta_t_grid;
    std::vector<std::size_t> mode_counts;
    std::vector<double> fc_values;
    std::vector<double> shortcut_fc_values;
    std::vector<double> N_measured;
    std::vector<std::size_t> N_first_below;
    std::vector<std::size_t> N_estimated;
    std::vector<double> reversal_defects;
    std::vector<double> max_mode_dv_ratio; // max_k |dv_k| / (|n_k| C dt^{1/alpha} |n.v-|)
    double fitted_exponent = 0.0;
    double C_constant = 0.0;
};

inline std::vector<double> default_delta_t_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 12; ++i) g.push_back(std::pow(10.0, -3.0 - 0.25 * i));
    return g;
}

// omega0 in omega_k ~ omega0 k^alpha for the closed-form families
inline double nominal_omega0(const ModelFamily& f) {
    switch (f.tag) {
    case ModelTag::euler_bernoulli: return std::numbers::pi * std::numbers::pi;
    case ModelTag::string: return std::numbers::pi * f.wave_speed;
    case ModelTag::timoshenko: break;
    }
    throw ValidationError("asymptotics requires a closed-form modal family (euler-bernoulli or string)");
}

inline AsymptoticsReport asymptotics_report(const ModelFamily& family, AsymptoticsOptions opt) {
    if (opt.delta_t_grid.empty()) opt.delta_t_grid = default_delta_t_grid();
    for (std::size_t i = 0; i < opt.delta_t_grid.size(); ++i) {
        require(opt.delta_t_grid[i] > 0.0, "delta_t grid must be positive");
        if (i > 0) require(opt.delta_t_grid[i] < opt.delta_t_grid[i - 1], "delta_t grid must be descending");
    }
    require(opt.mode_factor >= 1.0, "mode_factor must be at least 1");
    AsymptoticsReport r;
    r.tag = family.tag;
    r.omega0 = nominal_omega0(family);
    r.alpha = family.tag == ModelTag::euler_bernoulli ? 2.0 : 1.0;
    r.eta = opt.eta;
    r.delta_t_grid = opt.delta_t_grid;
    std::vector<double> lx, ly, nvm, dvn;
    for (double dt : opt.delta_t_grid) {
        const std::size_t Nest = mode_count_estimate(r.omega0, r.alpha, opt.eta, dt);
        const auto M = static_cast<std::size_t>(std::ceil(opt.mode_factor * static_cast<double>(Nest)));
        const ModalStructure ms = build_structure(family, std::max<std::size_t>(M, 2));
        Vec v = Vec::Zero(static_cast<Eigen::Index>(ms.size()));
        v[0] = opt.incident_velocity / ms.tip_values[0];
        const OverlapSolution s = constant_force_bvp(ms, v, dt);
        r.mode_counts.push_back(ms.size());
        r.N_estimated.push_back(Nest);
        r.N_measured.push_back(effective_mode_count(ms, dt));
        r.N_first_below.push_back(first_below(ms, dt, opt.eta));
        r.fc_values.push_back(s.fc);
        r.shortcut_fc_values.push_back(s.fc * s.shortcut_gap / s.free_gap);
        r.reversal_defects.push_back(s.defect);
        lx.push_back(std::log(dt));
        ly.push_back(std::log(std::abs(s.fc)));
        nvm.push_back(std::abs(ms.tip_values.dot(v)));
        dvn.push_back((s.dv.cwiseAbs().array() / ms.tip_values.cwiseAbs().array()).maxCoeff());
    }
    r.fitted_exponent = detail::fit_line(lx, ly, 0.0).slope;
    // |fc| = C dt^{1/alpha - 1} |n.v-|
    double csum = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i)
        csum += std::abs(r.fc_values[i]) / std::pow(r.delta_t_grid[i], 1.0 / r.alpha - 1.0) / nvm[i];
    r.C_constant = csum / static_cast<double>(lx.size());
    for (std::size_t i = 0; i < lx.size(); ++i)
        r.max_mode_dv_ratio.push_back(dvn[i] / (r.C_constant * std::pow(r.delta_t_grid[i], 1.0 / r.alpha) * nvm[i]));
    return r;
}

} // namespace mzimpact
