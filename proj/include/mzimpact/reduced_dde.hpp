#pragma once

#include <cmath>
#include <deque>
#include <string>
#include <vector>

#include "mzimpact/kernel.hpp"

namespace mzimpact {

struct ContactConfig {
    double stop = -0.05;
    double restitution = 1.0;
    double eps = 3.5e-5;
    double t_end = 10.0;
    bool contact_enabled = true;
    double regularity_floor = 1e-6;
};

enum class EventKind { onset, release, secondary_jump, impact };

inline std::string_view to_string(EventKind k) {
    switch (k) {
    case EventKind::onset: return "onset";
    case EventKind::release: return "release";
    case EventKind::secondary_jump: return "secondary-jump";
    case EventKind::impact: return "impact";
    }
    return "?";
}

struct Event {
    EventKind kind = EventKind::onset;
    double t = 0.0;
    double fc_before = 0.0;
    double fc_after = 0.0;
};

struct SimulationResult {
    std::vector<double> times;
    std::vector<Vec2> y;
    std::vector<double> fc;
    std::vector<unsigned char> in_contact;
    std::vector<Event> events;

    std::size_t count(EventKind k) const {
        std::size_t n = 0;
        for (const auto& e : events) n += e.kind == k;
        return n;
    }
};

// Contact-free modal response on the grid t_q = q eps, advanced by exact per-mode recurrences.
class FreeResponseStream {
public:
    FreeResponseStream(const FirstOrderSystem& sys, double eps) : response_(sys), eps_(eps) {
        const auto M = static_cast<Eigen::Index>(sys.modal_size());
        z_ = sys.initial_state;
        step_.resize(M, 4);
        for (Eigen::Index k = 0; k < M; ++k) {
            const Oscillator& o = response_.oscillator(static_cast<std::size_t>(k));
            double x = 1, v = 0;
            o.free_step(x, v, eps);
            step_(k, 0) = x;
            step_(k, 2) = v;
            x = 0;
            v = 1;
            o.free_step(x, v, eps);
            step_(k, 1) = x;
            step_(k, 3) = v;
        }
    }

    const Vec& state() const { return z_; }
    std::size_t index() const { return q_; }

    void advance() {
        const auto M = static_cast<Eigen::Index>(response_.size());
        const double t0 = eps_ * static_cast<double>(q_);
        ++q_;
        if (q_ % 4096 == 0) {
            z_ = response_.state_at(eps_ * static_cast<double>(q_));
            return;
        }
        const double t1 = eps_ * static_cast<double>(q_);
        for (Eigen::Index k = 0; k < M; ++k) {
            const Oscillator& o = response_.oscillator(static_cast<std::size_t>(k));
            double xh = z_[k], vh = z_[M + k];
            if (o.amplitude != 0.0) { xh -= o.xp(t0); vh -= o.vp(t0); }
            double xn = step_(k, 0) * xh + step_(k, 1) * vh;
            double vn = step_(k, 2) * xh + step_(k, 3) * vh;
            if (o.amplitude != 0.0) { xn += o.xp(t1); vn += o.vp(t1); }
            z_[k] = xn;
            z_[M + k] = vn;
        }
    }

private:
    ModalResponse response_;
    double eps_;
    Vec z_;
    Eigen::MatrixX4d step_;
    std::size_t q_ = 0;
};

// Explicit Euler / rectangle-rule stepper for the reduced equation with the Stieltjes history sum.
class ReducedStepper {
public:
    ReducedStepper(const Projection& proj, const MemoryKernel& kernel, Vec2 y0, double stop)
        : A_(proj.A), kernel_(kernel), eps_(kernel.eps), stop_(stop), y_(y0) {
        dL_.reserve(kernel.truncation_index);
        for (std::size_t j = 0; j < kernel.truncation_index; ++j) dL_.push_back(kernel.increment(j));
    }

    const Vec2& y() const { return y_; }
    double force() const { return f_; }
    bool in_contact() const { return contact_; }
    std::size_t step_index() const { return q_; }
    double L_plus2() const { return kernel_.L_plus[1]; }

    // sum_{j=0}^{q-1} (L_{j+1} - L_j)(f_{q-j} - f_{q-j-1}) over the recorded nonzero increments
    Vec2 history() {
        while (!incr_.empty() && q_ - incr_.front().first >= dL_.size()) incr_.pop_front();
        Vec2 h = Vec2::Zero();
        for (const auto& [i, df] : incr_) h += dL_[q_ - i] * df;
        return h;
    }

    // y_{q+1} given f_{q+1}; equals the free-flight update when f vanishes
    Vec2 step_free(const Vec2& g, double f_next = 0.0) {
        return y_ + eps_ * (A_ * y_ + kernel_.L_infty * f_ + g) + history() + kernel_.values[0] * (f_next - f_);
    }

    static bool detect_contact(const Vec2& y_next, double stop) { return y_next[0] <= stop; }
    static bool releases(double f_pred) { return f_pred < 0.0; }

    double contact_onset(double floor) const {
        check_regular(floor);
        return -y_[1] / kernel_.L_plus[1];
    }

    double step_contact(const Vec2& g, double floor) {
        check_regular(floor);
        const Vec2 ybar(stop_, 0.0);
        const double l = kernel_.L_plus[1];
        return f_ - eps_ / l * (kernel_.L_infty * f_ + A_ * ybar + g)[1] - history()[1] / l;
    }

    // advance to q+1 with the given state and force
    void commit(const Vec2& y_next, double f_next, bool contact) {
        ++q_;
        if (f_next != f_) incr_.emplace_back(q_, f_next - f_);
        y_ = y_next;
        f_ = f_next;
        contact_ = contact;
    }

private:
    void check_regular(double floor) const {
        if (!(std::abs(kernel_.L_plus[1]) >= floor))
            throw SingularModelError("singular model: contact force undefined (|[L+]_2| = " +
                                     std::to_string(std::abs(kernel_.L_plus[1])) +
                                     " is below the regularity floor)");
    }

    Mat2 A_;
    const MemoryKernel& kernel_;
    std::vector<Vec2> dL_;
    double eps_;
    double stop_;
    Vec2 y_;
    double f_ = 0.0;
    bool contact_ = false;
    std::size_t q_ = 0;
    std::deque<std::pair<std::size_t, double>> incr_;
};

inline SimulationResult simulate(const FirstOrderSystem& sys, const Projection& proj, const MemoryKernel& kernel,
                                 const ContactConfig& cfg) {
    require(cfg.eps > 0.0 && cfg.t_end > 0.0, "simulation needs eps > 0 and t_end > 0");
    require(std::abs(kernel.eps - cfg.eps) <= 1e-12 * cfg.eps, "kernel grid spacing must equal the time step");
    const auto Q = static_cast<std::size_t>(std::llround(cfg.t_end / cfg.eps));
    const ForcingTerm gterm(sys, proj);
    FreeResponseStream stream(sys, cfg.eps);
    ReducedStepper st(proj, kernel, proj.V * sys.initial_state, cfg.stop);

    SimulationResult res;
    res.times.reserve(Q + 1);
    res.y.reserve(Q + 1);
    res.fc.reserve(Q + 1);
    res.in_contact.reserve(Q + 1);
    auto record = [&] {
        res.times.push_back(cfg.eps * static_cast<double>(st.step_index()));
        res.y.push_back(st.y());
        res.fc.push_back(st.force());
        res.in_contact.push_back(st.in_contact() ? 1 : 0);
    };
    record();
    const Vec2 ybar(cfg.stop, 0.0);
    std::size_t onset_step = 0;
    std::vector<std::size_t> jump_steps;
    for (const auto& j : kernel.jump_table) jump_steps.push_back(static_cast<std::size_t>(std::llround(j.tau / cfg.eps)));

    for (std::size_t q = 0; q < Q; ++q) {
        const Vec2 g = gterm.at(stream.state(), cfg.eps * static_cast<double>(q));
        const double t1 = cfg.eps * static_cast<double>(q + 1);
        if (!st.in_contact()) {
            const Vec2 yn = st.step_free(g);
            if (cfg.contact_enabled && ReducedStepper::detect_contact(yn, cfg.stop)) {
                const double f0 = std::max(0.0, st.contact_onset(cfg.regularity_floor));
                res.events.push_back({EventKind::onset, t1, 0.0, f0});
                st.commit(ybar, f0, true);
                onset_step = q + 1;
            } else {
                st.commit(yn, 0.0, false);
            }
        } else {
            const double fp = st.step_contact(g, cfg.regularity_floor);
            if (ReducedStepper::releases(fp)) {
                const double fq = st.force();
                const Vec2 yn = st.step_free(g, 0.0);
                res.events.push_back({EventKind::release, t1, fq, 0.0});
                st.commit(yn, 0.0, false);
            } else {
                for (std::size_t js : jump_steps)
                    if (q + 1 - onset_step == js) res.events.push_back({EventKind::secondary_jump, t1, st.force(), fp});
                st.commit(ybar, fp, true);
            }
        }
        if (!std::isfinite(st.force()) || !st.y().allFinite())
            throw NumericalError("reduced simulation diverged at t = " + std::to_string(t1));
        stream.advance();
        record();
    }
    return res;
}

} // namespace mzimpact
