#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "mzimpact/projection.hpp"

namespace mzimpact {

using cdouble = std::complex<double>;

struct KernelJump {
    double tau = 0.0;
    Vec2 dL = Vec2::Zero();
};

enum class PlateauMethod { mean, intercept };

struct KernelOptions {
    double truncation_tol = 1e-10;
    double plateau_begin = 5.0; // window start in grid steps
    double plateau_end = 50.0;  // window end in grid steps
    PlateauMethod plateau_method = PlateauMethod::mean;
    double regularity_floor = 1e-6;
    double condition_limit = 1e8;
    bool force_quadrature = false;
    double jump_gap = 0.05;  // time skipped on each side of a jump before fitting
    double jump_span = 0.3;  // length of each one-sided fit window
};

struct MemoryKernel {
    double eps = 0.0;
    std::vector<Vec2> values; // values[0] = L_plus, values[j] = L(j eps) for j >= 1
    Vec2 L_infty = Vec2::Zero();
    Vec2 L_plus = Vec2::Zero();
    std::size_t truncation_index = 0;
    std::vector<KernelJump> jump_table;
    bool regular_candidate = false;
    bool quadrature_route = false;
    double eigvec_condition = 1.0;

    // L_{j+1} - L_j, zero past the table or the truncation point
    Vec2 increment(std::size_t j) const {
        if (j >= truncation_index || j + 1 >= values.size()) return Vec2::Zero();
        return values[j + 1] - values[j];
    }
};

namespace detail {

// (e^{z} - 1) / z with a series near zero
inline cdouble phi1(cdouble z) {
    if (std::abs(z) < 1e-4) return 1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0));
    return (std::exp(z) - 1.0) / z;
}

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

// Least-squares line through (t_i, y_i), returns (intercept at t0, slope, rms residual).
struct LineFit {
    double at = 0.0, slope = 0.0, rms = 0.0;
};
inline LineFit fit_line(const std::vector<double>& t, const std::vector<double>& y, double t0) {
    const double n = static_cast<double>(t.size());
    double st = 0, sy = 0;
    for (std::size_t i = 0; i < t.size(); ++i) { st += t[i] - t0; sy += y[i]; }
    const double mt = st / n, my = sy / n;
    double stt = 0, sty = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        stt += (t[i] - t0 - mt) * (t[i] - t0 - mt);
        sty += (t[i] - t0 - mt) * (y[i] - my);
    }
    LineFit f;
    f.slope = stt > 0 ? sty / stt : 0.0;
    f.at = my - f.slope * mt;
    double r = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double e = y[i] - (f.at + f.slope * (t[i] - t0));
        r += e * e;
    }
    f.rms = std::sqrt(r / n);
    return f;
}

// Least-squares quadratic about t0; falls back to a line below four samples.
inline LineFit fit_quadratic(const std::vector<double>& t, const std::vector<double>& y, double t0) {
    if (t.size() < 4) return fit_line(t, y, t0);
    Eigen::MatrixXd X(static_cast<Eigen::Index>(t.size()), 3);
    Eigen::VectorXd b(static_cast<Eigen::Index>(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const double s = t[i] - t0;
        X(r, 0) = 1.0;
        X(r, 1) = s;
        X(r, 2) = s * s;
        b[r] = y[i];
    }
    const Eigen::Vector3d c = X.colPivHouseholderQr().solve(b);
    LineFit f;
    f.at = c[0];
    f.slope = c[1];
    f.rms = std::sqrt((X * c - b).squaredNorm() / static_cast<double>(t.size()));
    return f;
}

} // namespace detail

// L(tau) = int_0^tau (V e^{RQ s} (0, n) - L_infty) ds
class KernelModel {
public:
    KernelModel(const FirstOrderSystem& sys, const Projection& proj, const KernelOptions& opt = {})
        : L_infty_(compute_L_infty(sys, proj)), V_(proj.V), b_(sys.influence) {
        const auto M = static_cast<Eigen::Index>(sys.modal_size());
        RQ_ = sys.R * proj.Q();
        // diagonal balancing: positions scaled by omega
        scale_ = Vec::Ones(2 * M);
        for (Eigen::Index k = 0; k < M; ++k) scale_[k] = sys.modes.omegas[k];
        const Mat B = scale_.asDiagonal() * RQ_ * scale_.cwiseInverse().asDiagonal();
        spectral_radius_ = B.cwiseAbs().rowwise().sum().maxCoeff();
        if (!opt.force_quadrature) eigen_route(B, M);
        quadrature_ = opt.force_quadrature || condition_ > opt.condition_limit;
    }

    Vec2 integral(double tau) const {
        if (quadrature_) return quadrature_integral(tau);
        Vec2 out = Vec2::Zero();
        for (std::size_t i = 0; i < lambda_.size(); ++i) {
            const cdouble f = tau * detail::phi1(lambda_[i] * tau);
            out[0] += (w1_[i] * f).real();
            out[1] += (w2_[i] * f).real();
        }
        return out;
    }

    Vec2 rate(double tau) const {
        Vec2 out = Vec2::Zero();
        if (quadrature_) {
            const Mat E = (RQ_ * tau).exp();
            return V_ * (E * b_) - L_infty_;
        }
        for (std::size_t i = 0; i < lambda_.size(); ++i) {
            const cdouble e = std::exp(lambda_[i] * tau);
            out[0] += (w1_[i] * e).real();
            out[1] += (w2_[i] * e).real();
        }
        return out;
    }

    // L(j eps) for j = 0..J
    std::vector<Vec2> tabulate(double eps, std::size_t J) const {
        std::vector<Vec2> out(J + 1, Vec2::Zero());
        if (quadrature_) return quadrature_table(eps, J);
        for (std::size_t i = 0; i < lambda_.size(); ++i) {
            const cdouble lam = lambda_[i];
            const cdouble c1 = w1_[i] / lam, c2 = w2_[i] / lam;
            const cdouble step = std::exp(lam * eps);
            cdouble e = 1.0;
            for (std::size_t j = 0; j <= J; ++j) {
                if (j % 256 == 0) e = std::exp(lam * (eps * static_cast<double>(j)));
                else e *= step;
                // (e - 1) / lam is fine here since |lam| is bounded away from zero
                out[j][0] += (c1 * (e - 1.0)).real();
                out[j][1] += (c2 * (e - 1.0)).real();
            }
        }
        return out;
    }

    const Vec2& L_infty() const { return L_infty_; }
    double condition() const { return condition_; }
    bool uses_quadrature() const { return quadrature_; }
    double spectral_radius() const { return spectral_radius_; }
    // slowest decay rate among the nonzero exponentials, 0 when undamped
    double min_decay() const {
        double s = std::numeric_limits<double>::infinity();
        for (auto l : lambda_) s = std::min(s, -l.real());
        return lambda_.empty() ? 0.0 : std::max(0.0, s);
    }
    const std::vector<cdouble>& eigenvalues() const { return lambda_; }

private:
    void eigen_route(const Mat& B, Eigen::Index M) {
        Eigen::EigenSolver<Mat> es(B);
        if (es.info() != Eigen::Success) {
            condition_ = std::numeric_limits<double>::infinity();
            return;
        }
        const Eigen::MatrixXcd U = es.eigenvectors();
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(U);
        const Eigen::MatrixXcd Ui = lu.inverse();
        condition_ = U.norm() * Ui.norm() / static_cast<double>(2 * M);
        const Eigen::VectorXcd coef = Ui * (scale_.asDiagonal() * b_).cast<cdouble>();
        const Eigen::MatrixXcd left = V_.cast<cdouble>() * scale_.cwiseInverse().asDiagonal() * U;
        const Eigen::VectorXcd lam = es.eigenvalues();
        const double lmax = lam.cwiseAbs().maxCoeff();
        Vec2 z0 = Vec2::Zero();
        for (Eigen::Index i = 0; i < lam.size(); ++i) {
            const cdouble a = left(0, i) * coef[i], c = left(1, i) * coef[i];
            if (std::abs(lam[i]) <= 1e-9 * lmax) {
                z0[0] += a.real();
                z0[1] += c.real();
                continue;
            }
            lambda_.push_back(lam[i]);
            w1_.push_back(a);
            w2_.push_back(c);
        }
        // the null-space part of the integrand is exactly L_infty for an invariant projection
        const double ref = L_infty_.norm() + 1.0;
        if ((z0 - L_infty_).norm() > 1e-6 * ref) condition_ = std::numeric_limits<double>::infinity();
    }

    // Composite Gauss-Legendre on sub-intervals short against the spectral radius.
    std::vector<Vec2> quadrature_table(double eps, std::size_t J) const {
        const int sub = std::max(1, static_cast<int>(std::ceil(eps * spectral_radius_ / 0.5)));
        const double h = eps / sub;
        using GL = boost::math::quadrature::gauss<double, 10>;
        const auto& xs = GL::abscissa();
        const auto& ws = GL::weights();
        Mat G = Mat::Zero(2, RQ_.rows());
        auto add_node = [&](double x, double w) {
            const double th = 0.5 * h * (1.0 + x);
            G += (0.5 * h * w) * (V_ * (RQ_ * th).exp());
        };
        for (std::size_t g = 0; g < xs.size(); ++g) {
            add_node(xs[g], ws[g]);
            if (xs[g] != 0.0) add_node(-xs[g], ws[g]);
        }
        const Mat E = (RQ_ * h).exp();
        std::vector<Vec2> out(J + 1, Vec2::Zero());
        Vec u = b_;
        Vec2 acc = Vec2::Zero();
        for (std::size_t j = 1; j <= J; ++j) {
            for (int s = 0; s < sub; ++s) {
                acc += G * u;
                u = E * u;
            }
            if (!u.allFinite()) throw NumericalError("kernel quadrature diverged");
            out[j] = acc - L_infty_ * (eps * static_cast<double>(j));
        }
        return out;
    }

    Vec2 quadrature_integral(double tau) const {
        if (tau <= 0.0) return Vec2::Zero();
        const int n = std::max(1, static_cast<int>(std::ceil(tau * spectral_radius_ / 0.5)));
        const auto t = quadrature_table(tau / n, static_cast<std::size_t>(n));
        return t.back();
    }

    Vec2 L_infty_;
    Mat V_;
    Vec b_;
    Mat RQ_;
    Vec scale_;
    double spectral_radius_ = 0.0;
    double condition_ = 1.0;
    bool quadrature_ = false;
    std::vector<cdouble> lambda_;
    std::vector<cdouble> w1_, w2_;
};

// Plateau estimate of lim_{tau -> 0+} L(tau) from samples inside a window.
inline Vec2 plateau_value(const std::vector<double>& tau, const std::vector<Vec2>& L, PlateauMethod method) {
    require(!tau.empty() && tau.size() == L.size(), "plateau window contains no samples");
    Vec2 out = Vec2::Zero();
    for (int c = 0; c < 2; ++c) {
        std::vector<double> y(L.size());
        for (std::size_t i = 0; i < L.size(); ++i) y[i] = L[i][c];
        if (method == PlateauMethod::mean || tau.size() < 3) {
            double s = 0;
            for (double v : y) s += v;
            out[c] = s / static_cast<double>(y.size());
        } else {
            out[c] = detail::fit_quadratic(tau, y, 0.0).at;
        }
    }
    return out;
}

struct PlateauEstimate {
    Vec2 L_plus = Vec2::Zero();
    bool regular_candidate = false;
};

// Estimate L+ from a tabulated kernel (values[j] = L(j eps), j >= 1) over [tau_a, tau_b].
inline PlateauEstimate estimate_L_plus(const MemoryKernel& k, double tau_a, double tau_b,
                                       PlateauMethod method = PlateauMethod::mean,
                                       double regularity_floor = 1e-6) {
    require(tau_a > 0.0 && tau_b > tau_a, "plateau window must satisfy 0 < tau_a < tau_b");
    for (const auto& jmp : k.jump_table)
        if (jmp.tau <= tau_b) throw ValidationError("plateau window overlaps a detected kernel jump");
    const auto ja = static_cast<std::size_t>(std::ceil(tau_a / k.eps - 1e-9));
    const auto jb = static_cast<std::size_t>(std::floor(tau_b / k.eps + 1e-9));
    require(jb < k.values.size(), "plateau window extends past the kernel horizon");
    std::vector<double> t;
    std::vector<Vec2> L;
    for (std::size_t j = std::max<std::size_t>(ja, 1); j <= jb; ++j) {
        t.push_back(k.eps * static_cast<double>(j));
        L.push_back(k.values[j]);
    }
    PlateauEstimate e;
    e.L_plus = plateau_value(t, L, method);
    e.regular_candidate = std::abs(e.L_plus[1]) > regularity_floor;
    return e;
}

// Outlier scan on the increments beyond j0, each candidate sized by one-sided line fits.
inline std::vector<KernelJump> detect_jumps(const std::vector<Vec2>& values, double eps, std::size_t j0,
                                            double gap = 0.05, double span = 0.3, double factor = 50.0) {
    std::vector<KernelJump> out;
    if (values.size() < j0 + 8) return out;
    const std::size_t J = values.size() - 1;
    std::vector<double> d(J, 0.0);
    std::vector<double> tail;
    double scale = 0.0;
    for (std::size_t j = j0; j < J; ++j) {
        d[j] = (values[j + 1] - values[j]).norm();
        tail.push_back(d[j]);
        scale = std::max(scale, values[j].norm());
    }
    const double base = detail::median(tail);
    const double thresh = std::max(factor * base, 1e-14);
    std::size_t j = j0;
    while (j < J) {
        if (d[j] <= thresh) { ++j; continue; }
        std::size_t cs = j, ce = j, last = j;
        while (j < J && j <= last + 10) {
            if (d[j] > thresh) { last = j; ce = j; }
            ++j;
        }
        std::size_t jc = cs;
        for (std::size_t i = cs; i <= ce; ++i)
            if (d[i] > d[jc]) jc = i;
        const double td = eps * (static_cast<double>(jc) + 0.5);
        // one-sided windows in time, at least a few samples clear of the candidate
        const double g = std::max(gap, 3.0 * eps), w = std::max(span, 8.0 * eps);
        const double left_end = std::min(eps * static_cast<double>(cs), td - g);
        const double right_begin = std::max(eps * static_cast<double>(ce + 1), td + g);
        std::vector<double> tl, tr;
        std::vector<Vec2> yl, yr;
        for (std::size_t i = j0; i <= J; ++i) {
            const double t = eps * static_cast<double>(i);
            if (t >= left_end - w && t <= left_end) {
                tl.push_back(t);
                yl.push_back(values[i]);
            } else if (t >= right_begin && t <= right_begin + w) {
                tr.push_back(t);
                yr.push_back(values[i]);
            }
        }
        j = std::max(j, static_cast<std::size_t>(std::ceil(right_begin / eps)));
        if (tl.size() < 5 || tr.size() < 5) continue;
        Vec2 dL;
        double rms = 0.0;
        for (int c = 0; c < 2; ++c) {
            std::vector<double> a(yl.size()), b(yr.size());
            for (std::size_t i = 0; i < yl.size(); ++i) a[i] = yl[i][c];
            for (std::size_t i = 0; i < yr.size(); ++i) b[i] = yr[i][c];
            const auto fl = detail::fit_quadratic(tl, a, td), fr = detail::fit_quadratic(tr, b, td);
            dL[c] = fr.at - fl.at;
            rms = std::max({rms, fl.rms, fr.rms});
        }
        if (dL.norm() > 4.0 * rms && dL.norm() > 1e-3 * scale) out.push_back({td, dL});
    }
    return out;
}

inline MemoryKernel compute_kernel(const FirstOrderSystem& sys, const Projection& proj, double eps, double horizon,
                                   const KernelOptions& opt = {}) {
    require(eps > 0.0, "kernel grid spacing must be positive");
    require(horizon >= eps, "kernel horizon must be at least one grid step");
    require(opt.plateau_begin > 0.0 && opt.plateau_end > opt.plateau_begin,
            "plateau window must satisfy 0 < begin < end");
    KernelModel model(sys, proj, opt);
    MemoryKernel k;
    k.eps = eps;
    k.L_infty = model.L_infty();
    k.quadrature_route = model.uses_quadrature();
    k.eigvec_condition = model.condition();
    const auto J = static_cast<std::size_t>(std::ceil(horizon / eps - 1e-9));
    const auto jb = static_cast<std::size_t>(std::floor(opt.plateau_end + 1e-9));
    k.values = model.tabulate(eps, std::max(J, jb + 1));
    for (const auto& v : k.values)
        if (!v.allFinite())
            throw NumericalError("kernel evaluation produced non-finite values (eigenvector condition " +
                                 std::to_string(model.condition()) + ")");

    const auto ja = static_cast<std::size_t>(std::ceil(opt.plateau_begin - 1e-9));
    k.jump_table = detect_jumps(k.values, eps, std::max<std::size_t>(ja, 1), opt.jump_gap, opt.jump_span);
    auto pe = estimate_L_plus(k, opt.plateau_begin * eps, opt.plateau_end * eps, opt.plateau_method,
                              opt.regularity_floor);
    k.L_plus = pe.L_plus;
    k.regular_candidate = pe.regular_candidate;
    k.values[0] = k.L_plus;

    // truncation: last increment above tolerance, damped kernels only
    k.truncation_index = k.values.size() - 1;
    if (model.min_decay() > 0.0) {
        std::size_t last = 0;
        for (std::size_t j = 1; j + 1 < k.values.size(); ++j)
            if ((k.values[j + 1] - k.values[j]).norm() >= opt.truncation_tol) last = j;
        k.truncation_index = last + 1;
    }
    return k;
}

} // namespace mzimpact
