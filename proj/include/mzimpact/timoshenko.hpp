#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "mzimpact/structure.hpp"

namespace mzimpact {

// Chebyshev-Gauss-Lobatto points x_j = cos(pi j / N) and the differentiation matrix on [-1, 1].
struct ChebyshevGrid {
    Vec x;
    Mat D;
    Vec weights; // Clenshaw-Curtis quadrature weights
};

inline ChebyshevGrid chebyshev_grid(int N) {
    require(N >= 2, "chebyshev_grid: need N >= 2");
    ChebyshevGrid g;
    g.x.resize(N + 1);
    Vec c(N + 1);
    for (int j = 0; j <= N; ++j) {
        g.x[j] = std::cos(std::numbers::pi * j / N);
        c[j] = ((j == 0 || j == N) ? 2.0 : 1.0) * ((j % 2 == 0) ? 1.0 : -1.0);
    }
    g.D = Mat::Zero(N + 1, N + 1);
    for (int i = 0; i <= N; ++i) {
        for (int j = 0; j <= N; ++j)
            if (i != j) g.D(i, j) = (c[i] / c[j]) / (g.x[i] - g.x[j]);
        // negative sum trick keeps D * ones exactly zero
        g.D(i, i) = -g.D.row(i).sum();
    }

    g.weights = Vec::Zero(N + 1);
    Vec v = Vec::Ones(N - 1);
    auto theta = [&](int j) { return std::numbers::pi * j / N; };
    if (N % 2 == 0) {
        g.weights[0] = g.weights[N] = 1.0 / (N * N - 1.0);
        for (int k = 1; k < N / 2; ++k)
            for (int j = 1; j < N; ++j) v[j - 1] -= 2.0 * std::cos(2.0 * k * theta(j)) / (4.0 * k * k - 1.0);
        for (int j = 1; j < N; ++j) v[j - 1] -= std::cos(N * theta(j)) / (N * N - 1.0);
    } else {
        g.weights[0] = g.weights[N] = 1.0 / (static_cast<double>(N) * N);
        for (int k = 1; k <= (N - 1) / 2; ++k)
            for (int j = 1; j < N; ++j) v[j - 1] -= 2.0 * std::cos(2.0 * k * theta(j)) / (4.0 * k * k - 1.0);
    }
    for (int j = 1; j < N; ++j) g.weights[j] = 2.0 * v[j - 1] / N;
    return g;
}

// Semidiscrete Timoshenko cantilever: x'' = -K x + b F, tip displacement e.x.
// Unknowns: u at every node except the clamp, phi at interior nodes.
struct CollocationOperator {
    int n_points = 0;
    double beta = 0.0;
    double gamma = 0.0;
    Mat stiffness;       // K
    Vec force_influence; // b
    Vec tip_extractor;   // e
    Vec mass;            // diagonal of the discrete mass form
    Mat stiffness_form;  // symmetric S with K = diag(mass)^-1 S
    Vec xi;              // node coordinates on [0, 1], index 0 is the tip
    int n_u = 0;         // u unknowns come first, then phi
};

inline CollocationOperator timoshenko_collocation(int n_points, double beta, double gamma) {
    require(n_points >= 8, "timoshenko_collocation: need at least 8 collocation points");
    require(beta > 0.0 && gamma > 0.0, "timoshenko_collocation: beta and gamma must be positive");
    const int N = n_points - 1;
    ChebyshevGrid g = chebyshev_grid(N);
    const Mat D = 2.0 * g.D;            // d/dxi with xi = (1 + x) / 2
    const Vec w = 0.5 * g.weights;
    const int nu = N, np = N - 1, n = nu + np;

    Mat P = Mat::Zero(N + 1, n), Q = Mat::Zero(N + 1, n);
    for (int j = 0; j < nu; ++j) P(j, j) = 1.0;      // u(xi = 0) = 0 eliminated
    for (int j = 1; j < N; ++j) Q(j, nu + j - 1) = 1.0; // phi(0) = phi(1) = 0 eliminated

    const Mat shear = D * P - Q;
    const Mat bend = D * Q;
    CollocationOperator op;
    op.n_points = n_points;
    op.beta = beta;
    op.gamma = gamma;
    op.n_u = nu;
    op.stiffness_form = beta * gamma * shear.transpose() * w.asDiagonal() * shear +
                        bend.transpose() * w.asDiagonal() * bend;
    op.stiffness_form = 0.5 * (op.stiffness_form + op.stiffness_form.transpose()).eval();
    op.mass = (P.transpose() * w).eval() + (Q.transpose() * w / beta).eval();
    op.stiffness = op.mass.cwiseInverse().asDiagonal() * op.stiffness_form;
    op.tip_extractor = Vec::Zero(n);
    op.tip_extractor[0] = 1.0;
    op.force_influence = op.tip_extractor.cwiseQuotient(op.mass);
    op.xi = (0.5 * (g.x.array() + 1.0)).matrix();
    return op;
}

struct ModalDecomposition {
    Vec lambdas; // ascending
    Mat shapes;  // columns, unit modal mass in the discrete mass form
};

inline ModalDecomposition modal_decomposition(const CollocationOperator& op) {
    const Vec s = op.mass.cwiseSqrt();
    const Vec si = s.cwiseInverse();
    const Mat Ssym = si.asDiagonal() * op.stiffness_form * si.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (Ssym + Ssym.transpose()));
    if (es.info() != Eigen::Success) throw NumericalError("to_modal: eigensolver failed");
    ModalDecomposition md;
    md.lambdas = es.eigenvalues();
    md.shapes = si.asDiagonal() * es.eigenvectors();
    const double lmax = md.lambdas.cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < md.lambdas.size(); ++k) {
        if (md.lambdas[k] < -1e-8 * lmax)
            throw NumericalError("to_modal: negative eigenvalue " + std::to_string(md.lambdas[k]) +
                                 " indicates a poor discretization");
        if (!(md.lambdas[k] > 0.0)) throw NumericalError("to_modal: zero eigenvalue in stiffness operator");
        if (md.shapes.col(k).dot(op.tip_extractor) < 0.0) md.shapes.col(k) *= -1.0;
    }
    return md;
}

inline ModalStructure to_modal(const CollocationOperator& op, double D) {
    require(D >= 0.0 && D < 1.0, "to_modal: damping must lie in [0, 1)");
    const ModalDecomposition md = modal_decomposition(op);
    ModalStructure ms;
    ms.omegas = md.lambdas.cwiseSqrt();
    ms.dampings = Vec::Constant(ms.omegas.size(), D);
    ms.tip_values = md.shapes.transpose() * op.tip_extractor;
    ms.model_tag = ModelTag::timoshenko;
    ms.nominal_alpha = 1.0;
    return ms;
}

} // namespace mzimpact
