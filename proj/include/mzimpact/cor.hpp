#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "mzimpact/modal_response.hpp"
#include "mzimpact/reduced_dde.hpp"

namespace mzimpact {

inline Vec cor_impact_map(const Vec& v, const Vec& n, double restitution) {
    const double nn = n.squaredNorm();
    if (!(nn > 0.0)) throw ValidationError("cor_impact_map: zero contact vector");
    require(restitution >= 0.0 && restitution <= 1.0, "restitution must lie in [0, 1]");
    return v - ((1.0 + restitution) * n.dot(v) / nn) * n;
}

struct CorOptions {
    std::size_t max_events = 10'000'000;
    double steps_per_period = 10.0; // detection sub-steps per period of the fastest mode
};

class CorSimulator {
public:
    CorSimulator(const FirstOrderSystem& sys, const ContactConfig& cfg, const CorOptions& opt = {})
        : sys_(sys), resp_(sys), cfg_(cfg), opt_(opt), n_(sys.modes.tip_values) {
        const double wmax = sys.modes.omegas.maxCoeff();
        const double hmax = 2.0 * std::numbers::pi / wmax / opt.steps_per_period;
        sub_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(cfg.eps / hmax)));
        h_ = cfg.eps / static_cast<double>(sub_);
    }

    // Runs to t_end; on a chatter overflow the events so far stay available through result().
    SimulationResult run() {
        require(cfg_.eps > 0.0 && cfg_.t_end > 0.0, "simulation needs eps > 0 and t_end > 0");
        const auto Q = static_cast<std::size_t>(std::llround(cfg_.t_end / cfg_.eps));
        const auto M = static_cast<Eigen::Index>(sys_.modal_size());
        Vec z = sys_.initial_state;
        res_ = SimulationResult{};
        auto record = [&](double t) {
            res_.times.push_back(t);
            res_.y.emplace_back(n_.dot(z.head(M)), n_.dot(z.tail(M)));
            res_.fc.push_back(0.0);
            res_.in_contact.push_back(0);
        };
        record(0.0);
        for (std::size_t q = 0; q < Q; ++q) {
            const double tq = cfg_.eps * static_cast<double>(q);
            for (std::size_t s = 0; s < sub_; ++s) {
                const double t0 = tq + h_ * static_cast<double>(s);
                advance(z, t0, h_, res_);
            }
            record(cfg_.eps * static_cast<double>(q + 1));
        }
        return res_;
    }

    const SimulationResult& result() const { return res_; }

    double detection_step() const { return h_; }

private:
    double gap(const Vec& z) const {
        const auto M = static_cast<Eigen::Index>(sys_.modal_size());
        return n_.dot(z.head(M)) - cfg_.stop;
    }

    Vec moved(const Vec& z, double t0, double dt) const {
        Vec w = z;
        resp_.propagate(w, t0, dt);
        return w;
    }

    // advance z over [t0, t0 + len], resolving every crossing of the stop
    void advance(Vec& z, double t0, double len, SimulationResult& res) {
        double t = t0, left = len;
        const double tol = 1e-10 * cfg_.eps;
        while (left > 0.0) {
            const Vec trial = moved(z, t, left);
            const auto bracket = left > tol ? first_crossing(z, t, left) : std::nullopt;
            if (!bracket) {
                z = trial;
                return;
            }
            auto [a, b] = *bracket;
            if (b <= tol) {
                // cannot separate from the stop within the tolerance
                impact(z, t, res);
                continue;
            }
            while (b - a > tol) {
                const double m = 0.5 * (a + b);
                if (gap(moved(z, t, m)) > 0.0) a = m;
                else b = m;
            }
            z = moved(z, t, b);
            t += b;
            left -= b;
            impact(z, t, res);
        }
    }

    // bracket [a, b] of the first sampled sign change from positive to nonpositive gap within (0, len]
    std::optional<std::pair<double, double>> first_crossing(const Vec& z, double t, double len) const {
        if (!cfg_.contact_enabled) return std::nullopt;
        std::vector<double> s;
        for (int k = 40; k >= 1; --k) s.push_back(std::ldexp(len, -k));
        for (int i = 1; i <= 8; ++i) s.push_back(len * i / 8.0);
        std::sort(s.begin(), s.end());
        const auto M = static_cast<Eigen::Index>(sys_.modal_size());
        // a state on the stop moving away skips the nonpositive samples before separation
        const bool departing = gap(z) <= 0.0 && n_.dot(z.tail(M)) >= 0.0;
        const double noise =
            departing ? 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(cfg_.stop) + n_.cwiseAbs().dot(z.head(M).cwiseAbs()))
                      : 0.0;
        double last_pos = 0.0;
        bool pos = gap(z) > 0.0;
        for (double si : s) {
            const double gi = gap(moved(z, t, si));
            if (gi > 0.0 && (pos || gi > noise)) {
                pos = true;
                last_pos = si;
            } else if (pos) {
                return std::make_pair(last_pos, si);
            } else if (!departing) {
                return std::make_pair(0.0, 0.0);
            }
        }
        return std::nullopt;
    }

    void impact(Vec& z, double t, SimulationResult& res) {
        const auto M = static_cast<Eigen::Index>(sys_.modal_size());
        const Vec v = z.tail(M);
        if (n_.dot(v) < 0.0) z.tail(M) = cor_impact_map(v, n_, cfg_.restitution);
        res.events.push_back({EventKind::impact, t, 0.0, 0.0});
        if (res.events.size() > opt_.max_events)
            throw NumericalError("chatter overflow: more than " + std::to_string(opt_.max_events) +
                                 " impact events");
    }

    FirstOrderSystem sys_;
    ModalResponse resp_;
    ContactConfig cfg_;
    CorOptions opt_;
    Vec n_;
    std::size_t sub_ = 1;
    double h_ = 0.0;
    SimulationResult res_;
};

inline SimulationResult simulate_cor(const FirstOrderSystem& sys, const ContactConfig& cfg,
                                     const CorOptions& opt = {}) {
    return CorSimulator(sys, cfg, opt).run();
}

struct ChatterMetrics {
    bool valid = false;
    double event_rate = 0.0;
    double dominant_event_frequency = 0.0;
    std::size_t episodes = 0;
};

inline ChatterMetrics chatter_metrics(const std::vector<double>& event_times) {
    ChatterMetrics m;
    if (event_times.size() < 2) return m;
    std::vector<double> dt;
    for (std::size_t i = 1; i < event_times.size(); ++i) dt.push_back(event_times[i] - event_times[i - 1]);
    const double med = detail::median(dt);
    m.valid = true;
    m.dominant_event_frequency = med > 0.0 ? 1.0 / med : std::numeric_limits<double>::infinity();
    double duration = 0.0;
    std::size_t counted = 0, start = 0;
    auto close = [&](std::size_t end) {
        if (end > start) {
            duration += event_times[end] - event_times[start];
            counted += end - start + 1;
            ++m.episodes;
        }
    };
    for (std::size_t i = 0; i < dt.size(); ++i) {
        if (dt[i] > 10.0 * med) {
            close(i);
            start = i + 1;
        }
    }
    close(event_times.size() - 1);
    m.event_rate = duration > 0.0 ? static_cast<double>(counted) / duration : 0.0;
    return m;
}

inline ChatterMetrics chatter_metrics(const SimulationResult& r) {
    std::vector<double> t;
    for (const auto& e : r.events) t.push_back(e.t);
    return chatter_metrics(t);
}

} // namespace mzimpact
