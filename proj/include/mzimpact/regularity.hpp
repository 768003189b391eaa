#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mzimpact/kernel.hpp"
#include "mzimpact/timoshenko.hpp"

namespace mzimpact {

struct ModelFamily {
    ModelTag tag = ModelTag::timoshenko;
    double beta = 4800.0;
    double gamma = 0.25;
    double wave_speed = 1.0;
    double damping = 0.1;
};

inline ModalStructure build_structure(const ModelFamily& f, std::size_t size) {
    switch (f.tag) {
    case ModelTag::euler_bernoulli: return eb_structure(size, f.damping);
    case ModelTag::string: return string_structure(size, f.wave_speed, f.damping);
    case ModelTag::timoshenko:
        return to_modal(timoshenko_collocation(static_cast<int>(size), f.beta, f.gamma), f.damping);
    }
    throw ValidationError("unknown model type");
}

struct AlphaFit {
    double alpha = 0.0;
    std::size_t k_lo = 0, k_hi = 0; // 1-based inclusive fit range
    std::size_t resolved = 0;
};

// Slope of log omega_k vs log k over the top half of [1, resolved].
inline AlphaFit fit_alpha(const Vec& omegas, std::size_t resolved) {
    AlphaFit a;
    a.resolved = std::min<std::size_t>(resolved, static_cast<std::size_t>(omegas.size()));
    require(a.resolved >= 4, "fit_alpha: fewer than 4 resolved frequencies");
    a.k_hi = a.resolved;
    a.k_lo = std::max<std::size_t>(1, a.resolved / 2);
    std::vector<double> x, y;
    for (std::size_t k = a.k_lo; k <= a.k_hi; ++k) {
        x.push_back(std::log(static_cast<double>(k)));
        y.push_back(std::log(omegas[static_cast<Eigen::Index>(k - 1)]));
    }
    a.alpha = detail::fit_line(x, y, 0.0).slope;
    return a;
}

// Leading frequencies of `fine` that agree with `coarse` within rel_tol, counted from k = 1.
inline std::size_t resolved_count(const Vec& coarse, const Vec& fine, double rel_tol = 0.01) {
    const auto n = std::min(coarse.size(), fine.size());
    Eigen::Index k = 0;
    while (k < n && std::abs(fine[k] - coarse[k]) <= rel_tol * fine[k]) ++k;
    return static_cast<std::size_t>(k);
}

struct RegularitySample {
    std::size_t size = 0;
    double omega_max = 0.0;
    double L_plus = 0.0;
};

struct RegularityReport {
    ModelTag tag = ModelTag::timoshenko;
    std::vector<RegularitySample> samples;
    std::vector<double> per_doubling_ratio;
    AlphaFit alpha;
    std::string verdict; // regular | singular | indeterminate
};

struct SweepOptions {
    double window_begin = 1.0; // in units of 1 / omega_max
    double window_end = 20.0;
    std::size_t samples = 200;
    double regular_tol = 0.05;
    double singular_drop = 0.25;
    double regularity_floor = 1e-6;
};

// Plateau of [L]_2 sampled log-uniformly on [a, b] / omega_max and extrapolated linearly to 0+.
inline double sweep_plateau(const KernelModel& km, double omega_max, const SweepOptions& opt) {
    std::vector<double> t;
    std::vector<Vec2> L;
    const double a = opt.window_begin / omega_max, b = opt.window_end / omega_max;
    for (std::size_t i = 0; i < opt.samples; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(opt.samples - 1);
        const double tau = a * std::pow(b / a, s);
        t.push_back(tau);
        L.push_back(km.integral(tau));
    }
    return plateau_value(t, L, PlateauMethod::intercept)[1];
}

inline RegularityReport regularity_sweep(const ModelFamily& family, const std::vector<std::size_t>& sizes,
                                         const SweepOptions& opt = {}) {
    require(sizes.size() >= 2, "regularity sweep needs at least two sizes");
    for (std::size_t i = 1; i < sizes.size(); ++i)
        require(sizes[i] > sizes[i - 1], "regularity sweep sizes must be strictly increasing");
    RegularityReport rep;
    rep.tag = family.tag;
    std::vector<Vec> spectra;
    for (std::size_t s : sizes) {
        const ModalStructure ms = build_structure(family, s);
        const FirstOrderSystem sys = assemble_first_order(ms);
        const Projection proj = build_projection(sys);
        const KernelModel km(sys, proj);
        RegularitySample smp;
        smp.size = s;
        smp.omega_max = ms.omegas.maxCoeff();
        smp.L_plus = ms.size() == 1 ? 0.0 : sweep_plateau(km, smp.omega_max, opt);
        rep.samples.push_back(smp);
        spectra.push_back(ms.omegas);
    }
    for (std::size_t i = 1; i < rep.samples.size(); ++i) {
        const double r = rep.samples[i].L_plus / rep.samples[i - 1].L_plus;
        const double doublings = std::log2(static_cast<double>(sizes[i]) / static_cast<double>(sizes[i - 1]));
        rep.per_doubling_ratio.push_back(r > 0 ? std::pow(r, 1.0 / doublings) : r);
    }
    const double last = rep.samples.back().L_plus, prev = rep.samples[rep.samples.size() - 2].L_plus;
    bool singular = true;
    for (double r : rep.per_doubling_ratio) singular = singular && r <= 1.0 - opt.singular_drop;
    if (std::abs(last) <= opt.regularity_floor) singular = true;
    if (singular) rep.verdict = "singular";
    else if (std::abs(last - prev) < opt.regular_tol * std::abs(last)) rep.verdict = "regular";
    else rep.verdict = "indeterminate";

    // closed-form families are resolved up to their size; collocation spectra only where two sizes agree
    std::size_t resolved = static_cast<std::size_t>(spectra.back().size());
    if (family.tag == ModelTag::timoshenko) resolved = resolved_count(spectra[spectra.size() - 2], spectra.back());
    if (resolved >= 4) rep.alpha = fit_alpha(spectra.back(), resolved);
    return rep;
}

} // namespace mzimpact
