#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "mzimpact/error.hpp"

namespace mzimpact {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

enum class ModelTag { euler_bernoulli, timoshenko, string };

inline std::string_view to_string(ModelTag t) {
    switch (t) {
    case ModelTag::euler_bernoulli: return "euler-bernoulli";
    case ModelTag::timoshenko: return "timoshenko";
    case ModelTag::string: return "string";
    }
    return "?";
}

inline std::optional<ModelTag> parse_model_tag(std::string_view s) {
    if (s == "euler-bernoulli") return ModelTag::euler_bernoulli;
    if (s == "timoshenko") return ModelTag::timoshenko;
    if (s == "string") return ModelTag::string;
    return std::nullopt;
}

// Modal data of a structure seen from its contact point.
struct ModalStructure {
    Vec omegas;
    Vec dampings;
    Vec tip_values;
    ModelTag model_tag = ModelTag::string;
    double nominal_alpha = 1.0;

    std::size_t size() const { return static_cast<std::size_t>(omegas.size()); }

    void validate() const {
        require(omegas.size() >= 1, "modal structure needs at least one mode");
        require(dampings.size() == omegas.size() && tip_values.size() == omegas.size(),
                "modal structure: omegas, dampings and tip_values must have equal length");
        for (Eigen::Index k = 0; k < omegas.size(); ++k) {
            require(std::isfinite(omegas[k]) && omegas[k] > 0.0, "modal structure: frequencies must be positive");
            if (k > 0) require(omegas[k] >= omegas[k - 1], "modal structure: frequencies must be nondecreasing");
            require(dampings[k] >= 0.0 && dampings[k] < 1.0, "modal structure: damping ratios must lie in [0, 1)");
            require(std::isfinite(tip_values[k]), "modal structure: tip values must be finite");
        }
    }
};

// Roots of 1 + cos(s) cosh(s) = 0 for s in [(k-1)pi, k*pi], returned as omega = s^2.
inline Vec eb_frequencies(std::size_t M) {
    require(M >= 1, "eb_frequencies: M must be >= 1");
    auto f = [](double s) { return std::cos(s) + 1.0 / std::cosh(s); };
    Vec om(static_cast<Eigen::Index>(M));
    for (std::size_t k = 1; k <= M; ++k) {
        double lo = (static_cast<double>(k) - 1.0) * std::numbers::pi;
        double hi = static_cast<double>(k) * std::numbers::pi;
        double flo = f(lo), fhi = f(hi);
        if (!(flo * fhi < 0.0))
            throw NumericalError("eb_frequencies: root bracketing failed for k = " + std::to_string(k));
        for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
            double mid = 0.5 * (lo + hi);
            double fm = f(mid);
            if (fm == 0.0) { lo = hi = mid; break; }
            if ((fm < 0.0) == (flo < 0.0)) { lo = mid; flo = fm; } else { hi = mid; }
        }
        double s = 0.5 * (lo + hi);
        if (std::abs(f(s)) > 1e-10)
            throw NumericalError("eb_frequencies: residual too large for k = " + std::to_string(k));
        om[static_cast<Eigen::Index>(k - 1)] = s * s;
    }
    return om;
}

inline ModalStructure eb_structure(std::size_t M, double D) {
    require(D >= 0.0 && D < 1.0, "eb_structure: damping must lie in [0, 1)");
    ModalStructure ms;
    ms.omegas = eb_frequencies(M);
    ms.dampings = Vec::Constant(ms.omegas.size(), D);
    ms.tip_values.resize(ms.omegas.size());
    for (Eigen::Index k = 0; k < ms.omegas.size(); ++k) ms.tip_values[k] = (k % 2 == 0) ? 2.0 : -2.0;
    ms.model_tag = ModelTag::euler_bernoulli;
    ms.nominal_alpha = 2.0;
    return ms;
}

// Fixed-free string on [0, 1], unit density, contact at the free end.
inline ModalStructure string_structure(std::size_t M, double c, double D) {
    require(M >= 1, "string_structure: M must be >= 1");
    require(c > 0.0, "string_structure: wave speed must be positive");
    require(D >= 0.0 && D < 1.0, "string_structure: damping must lie in [0, 1)");
    ModalStructure ms;
    const auto n = static_cast<Eigen::Index>(M);
    ms.omegas.resize(n);
    ms.tip_values.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        ms.omegas[k] = (static_cast<double>(k) + 0.5) * std::numbers::pi * c;
        ms.tip_values[k] = (k % 2 == 0) ? std::sqrt(2.0) : -std::sqrt(2.0);
    }
    ms.dampings = Vec::Constant(n, D);
    ms.model_tag = ModelTag::string;
    ms.nominal_alpha = 1.0;
    return ms;
}

// Harmonic load amplitude*cos(frequency*t) distributed like the tip-normalized shape of `mode` (1-based, 0 = none).
struct HarmonicForcing {
    std::size_t mode = 0;
    double amplitude = 0.0;
    double frequency = 0.0;
};

// Initial state a*psi_mode with psi_mode normalized to unit tip value (1-based mode).
struct TipInitialCondition {
    std::size_t mode = 1;
    double displacement = 0.0;
    double velocity = 0.0;
};

struct FirstOrderSystem {
    ModalStructure modes;
    Mat R;
    Vec influence;
    Vec forcing_amplitudes; // modal load amplitudes, load = amp_k cos(nu t)
    double forcing_frequency = 0.0;
    Vec initial_state;

    std::size_t modal_size() const { return modes.size(); }
    Vec x0() const { return initial_state.head(static_cast<Eigen::Index>(modes.size())); }
    Vec v0() const { return initial_state.tail(static_cast<Eigen::Index>(modes.size())); }
};

inline FirstOrderSystem assemble_first_order(const ModalStructure& ms, const HarmonicForcing& forcing = {},
                                             const TipInitialCondition& ic = {}) {
    ms.validate();
    const auto M = static_cast<Eigen::Index>(ms.size());
    require(forcing.mode <= ms.size(), "forcing.mode exceeds the model size");
    require(ic.mode >= 1 && ic.mode <= ms.size(), "ic.mode must lie in [1, model size]");
    FirstOrderSystem sys;
    sys.modes = ms;
    sys.R = Mat::Zero(2 * M, 2 * M);
    sys.R.topRightCorner(M, M).setIdentity();
    for (Eigen::Index k = 0; k < M; ++k) {
        sys.R(M + k, k) = -ms.omegas[k] * ms.omegas[k];
        sys.R(M + k, M + k) = -2.0 * ms.dampings[k] * ms.omegas[k];
    }
    sys.influence = Vec::Zero(2 * M);
    sys.influence.tail(M) = ms.tip_values;

    sys.forcing_amplitudes = Vec::Zero(M);
    sys.forcing_frequency = forcing.frequency;
    if (forcing.mode > 0 && forcing.amplitude != 0.0) {
        const double nk = ms.tip_values[static_cast<Eigen::Index>(forcing.mode - 1)];
        require(nk != 0.0, "forcing.mode has a zero tip value; it cannot be tip-normalized");
        sys.forcing_amplitudes[static_cast<Eigen::Index>(forcing.mode - 1)] = forcing.amplitude / nk;
    }

    sys.initial_state = Vec::Zero(2 * M);
    if (ic.displacement != 0.0 || ic.velocity != 0.0) {
        const auto i = static_cast<Eigen::Index>(ic.mode - 1);
        const double nk = ms.tip_values[i];
        require(nk != 0.0, "ic.mode has a zero tip value; it cannot be tip-normalized");
        sys.initial_state[i] = ic.displacement / nk;
        sys.initial_state[M + i] = ic.velocity / nk;
    }
    return sys;
}

} // namespace mzimpact
