#pragma once

#include "mzimpact/modal_response.hpp"
#include "mzimpact/structure.hpp"

namespace mzimpact {

struct Projection {
    Vec m;     // m.n = 1
    Mat V;     // 2 x 2M
    Mat W;     // 2M x 2
    Mat2 A;    // V R W
    std::size_t support_mode = 0; // 0-based

    // Q z = z - W V z
    Vec apply_Q(const Vec& z) const { return z - W * (V * z); }
    Mat Q() const { return Mat::Identity(W.rows(), W.rows()) - W * V; }
    Mat S() const { return W * V; }
};

inline void require_modal_form(const FirstOrderSystem& sys) {
    const auto M = static_cast<Eigen::Index>(sys.modal_size());
    require(sys.R.rows() == 2 * M && sys.R.cols() == 2 * M, "system matrix has the wrong size");
    Mat expected = Mat::Zero(2 * M, 2 * M);
    expected.topRightCorner(M, M).setIdentity();
    expected.bottomLeftCorner(M, M).diagonal() = sys.R.bottomLeftCorner(M, M).diagonal();
    expected.bottomRightCorner(M, M).diagonal() = sys.R.bottomRightCorner(M, M).diagonal();
    require((sys.R - expected).cwiseAbs().maxCoeff() == 0.0, "projection requires a system in modal form");
}

inline Projection build_projection(const FirstOrderSystem& sys, std::size_t support_mode = 0) {
    require_modal_form(sys);
    const auto M = static_cast<Eigen::Index>(sys.modal_size());
    require(support_mode < sys.modal_size(), "projection support mode out of range");
    const Vec& n = sys.modes.tip_values;
    const double ns = n[static_cast<Eigen::Index>(support_mode)];
    if (ns == 0.0)
        throw ValidationError("projection: tip value of support mode " + std::to_string(support_mode + 1) +
                              " is zero; choose a different support mode");
    Projection p;
    p.support_mode = support_mode;
    p.m = Vec::Zero(M);
    p.m[static_cast<Eigen::Index>(support_mode)] = 1.0 / ns;
    p.V = Mat::Zero(2, 2 * M);
    p.V.block(0, 0, 1, M) = n.transpose();
    p.V.block(1, M, 1, M) = n.transpose();
    p.W = Mat::Zero(2 * M, 2);
    p.W.block(0, 0, M, 1) = p.m;
    p.W.block(M, 1, M, 1) = p.m;
    p.A = p.V * sys.R * p.W;
    return p;
}

// A V R^-1 (0, n) with the per-mode 2x2 block solve.
inline Vec2 compute_L_infty(const FirstOrderSystem& sys, const Projection& proj) {
    const auto M = static_cast<Eigen::Index>(sys.modal_size());
    const Vec& n = sys.modes.tip_values;
    Vec sol = Vec::Zero(2 * M);
    for (Eigen::Index k = 0; k < M; ++k) {
        const double w2 = -sys.R(M + k, k);
        if (!(w2 > 0.0)) throw NumericalError("compute_L_infty: zero frequency makes R singular");
        // [0 1; -w2 -c] (a, b) = (0, n_k)
        sol[k] = -n[k] / w2;
        sol[M + k] = 0.0;
    }
    return proj.A * (proj.V * sol);
}

// g(t) = (V R - A V) z_free(t) + V p(t), z_free the contact-free response, p the external load.
class ForcingTerm {
public:
    ForcingTerm(const FirstOrderSystem& sys, const Projection& proj)
        : response_(sys), G_(proj.V * sys.R - proj.A * proj.V),
          tip_load_(sys.modes.tip_values.dot(sys.forcing_amplitudes)), nu_(sys.forcing_frequency) {}

    Vec2 operator()(double t) const { return at(response_.state_at(t), t); }
    // same, given the free state z_free(t)
    Vec2 at(const Vec& z_free, double t) const {
        Vec2 g = G_ * z_free;
        g[1] += tip_load_ * std::cos(nu_ * t);
        return g;
    }
    const Mat& matrix() const { return G_; }
    const ModalResponse& response() const { return response_; }

private:
    ModalResponse response_;
    Mat G_;
    double tip_load_;
    double nu_;
};

inline Vec2 forcing_term_g(const FirstOrderSystem& sys, const Projection& proj, double t) {
    require(t >= 0.0, "forcing_term_g: t must be nonnegative");
    return ForcingTerm(sys, proj)(t);
}

} // namespace mzimpact
