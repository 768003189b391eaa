#pragma once

#include <cmath>
#include <vector>

#include "mzimpact/structure.hpp"

namespace mzimpact {

// Damped oscillator x'' + 2 D w x' + w^2 x = a cos(nu t) + c, closed forms.
struct Oscillator {
    double omega = 1.0;
    double damping = 0.0;
    double amplitude = 0.0; // harmonic load amplitude a
    double nu = 0.0;
    double constant = 0.0;  // constant load c
    double X = 0.0, Y = 0.0; // particular harmonic solution X cos + Y sin

    Oscillator() = default;
    Oscillator(double w, double D, double a = 0.0, double frequency = 0.0, double c = 0.0)
        : omega(w), damping(D), amplitude(a), nu(frequency), constant(c) {
        if (a != 0.0) {
            const double p = w * w - nu * nu, q = 2.0 * D * w * nu;
            const double det = p * p + q * q;
            if (!(det > 1e-24 * std::pow(w, 4)))
                throw NumericalError("resonant undamped mode (forcing frequency equals natural frequency "
                                     "with zero damping); add damping or detune the forcing");
            X = a * p / det;
            Y = a * q / det;
        }
    }

    double xp(double t) const { return X * std::cos(nu * t) + Y * std::sin(nu * t) + constant / (omega * omega); }
    double vp(double t) const { return nu * (-X * std::sin(nu * t) + Y * std::cos(nu * t)); }

    // Homogeneous propagation over dt.
    void free_step(double& x, double& v, double dt) const {
        const double s = damping * omega;
        const double wd = omega * std::sqrt(1.0 - damping * damping);
        const double e = std::exp(-s * dt), c = std::cos(wd * dt), sn = std::sin(wd * dt);
        const double xn = e * (x * c + (v + s * x) / wd * sn);
        const double vn = e * (v * c - (s * v + omega * omega * x) / wd * sn);
        x = xn;
        v = vn;
    }

    // Full propagation from time t0 to t0 + dt.
    void propagate(double& x, double& v, double t0, double dt) const {
        double xh = x - xp(t0), vh = v - vp(t0);
        free_step(xh, vh, dt);
        x = xh + xp(t0 + dt);
        v = vh + vp(t0 + dt);
    }
};

// Forced response of all modes in the absence of contact.
class ModalResponse {
public:
    explicit ModalResponse(const FirstOrderSystem& sys) : sys_(sys) {
        const auto M = static_cast<Eigen::Index>(sys.modal_size());
        osc_.reserve(static_cast<std::size_t>(M));
        for (Eigen::Index k = 0; k < M; ++k)
            osc_.emplace_back(sys.modes.omegas[k], sys.modes.dampings[k], sys.forcing_amplitudes[k],
                              sys.forcing_frequency);
    }

    std::size_t size() const { return osc_.size(); }
    const Oscillator& oscillator(std::size_t k) const { return osc_[k]; }

    // z(t) = (x, v) starting from the system's initial state at t = 0.
    Vec state_at(double t) const {
        const auto M = static_cast<Eigen::Index>(osc_.size());
        Vec z(2 * M);
        for (Eigen::Index k = 0; k < M; ++k) {
            double x = sys_.initial_state[k], v = sys_.initial_state[M + k];
            osc_[static_cast<std::size_t>(k)].propagate(x, v, 0.0, t);
            z[k] = x;
            z[M + k] = v;
        }
        return z;
    }

    // In-place propagation of z from t0 to t0 + dt.
    void propagate(Vec& z, double t0, double dt) const {
        const auto M = static_cast<Eigen::Index>(osc_.size());
        for (Eigen::Index k = 0; k < M; ++k) osc_[static_cast<std::size_t>(k)].propagate(z[k], z[M + k], t0, dt);
    }

private:
    FirstOrderSystem sys_;
    std::vector<Oscillator> osc_;
};

} // namespace mzimpact
