#pragma once

// Eigenvalue recovery from polarization-tensor samples on a contrast contour.
//
// Both methods rest on (1/2 pi i) \oint f M dlambda = sum_i c_i f(lambda_i), where
// c_i is the 2x2 residue of M at lambda_i. The residues are positive semidefinite
// of rank one for simple eigenvalues; Method 1 works on traces, Method 2 peels
// rank-one components so that neighbours polarized along different axes separate.
// The eigenvalue 1/2 carries no residue (nu has zero mean) and is reported
// structurally by Method 2.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "npspec/error.hpp"
#include "npspec/parallel.hpp"
#include "npspec/polarization.hpp"

namespace npspec {

using Eigen::Matrix2d;

struct RecoveredEigenvalue {
    double lambda = 0.0;
    /// Trace of the residue estimate.
    double weight = 0.0;
    int multiplicity = 1;
};

/// Moments tr (1/2 pi i) \oint lambda^{2n} M dlambda and the deflated tables h_j^{(n)}.
struct MomentSequence {
    std::vector<cplx> base;
    /// h[j][n], one row per deflation stage.
    std::vector<std::vector<cplx>> h;
    std::vector<RecoveredEigenvalue> subtracted;
};

struct Method1Result {
    std::vector<RecoveredEigenvalue> values;
    MomentSequence moments;
    /// Fewer than the requested count were recovered.
    bool truncated = false;
};

inline MomentSequence power_moments(const ContourSamples& s, int n_pow) {
    MomentSequence m;
    m.base.resize(n_pow + 1);
    for (int n = 0; n <= n_pow; ++n)
        m.base[n] = contour_integral(s, [n](cplx z) { return std::pow(z, 2 * n); }).trace();
    return m;
}

/// Method 1. Stage j uses the largest power n <= n_pow at which the deflated
/// moment still dominates the deflation residue of the earlier stages
/// (|h_j^{(n)}| >= 1e-3 |h_1^{(n)}|); the first stage always uses n_pow.
inline Method1Result method1_recover(const ContourSamples& s, int count, int n_pow) {
    if (count < 1) throw InvalidArgument("count must be at least 1");
    if (n_pow < 2) throw InvalidArgument("power must be at least 2");
    Method1Result out;
    out.moments = power_moments(s, n_pow);
    auto& m = out.moments;
    const double floor = 1e-14 * std::max(1.0, std::abs(m.base[0]));

    for (int j = 0; j < count; ++j) {
        std::vector<cplx> h(n_pow + 1);
        for (int n = 0; n <= n_pow; ++n) {
            h[n] = m.base[n];
            for (const auto& r : m.subtracted) h[n] -= r.weight * std::pow(r.lambda, 2 * n);
        }
        m.h.push_back(h);

        int n_use = n_pow;
        if (j > 0)
            while (n_use > 1 && std::abs(h[n_use]) < 1e-3 * std::abs(m.h[0][n_use])) --n_use;
        if (std::abs(h[n_use - 1]) < floor) {
            // everything left sits at lambda = 0
            if (std::abs(h[0]) >= floor) out.values.push_back({0.0, h[0].real(), 1});
            out.truncated = true;
            break;
        }
        const double ratio = (h[n_use] / h[n_use - 1]).real();
        if (!(ratio > 0)) {
            out.truncated = true;
            break;
        }
        RecoveredEigenvalue r;
        r.lambda = std::sqrt(ratio);
        r.weight = (h[n_use] / std::pow(r.lambda, 2 * n_use)).real();
        m.subtracted.push_back(r);
        out.values.push_back(r);
    }
    if (static_cast<int>(out.values.size()) < count) out.truncated = true;
    return out;
}

struct BumpProfile {
    Eigen::VectorXd t;
    /// Real parts of Phi(t).
    std::vector<Matrix2d> values;
    /// Largest imaginary part seen, for diagnostics.
    double max_imag = 0.0;
    double sigma0 = 0.05;

    Eigen::VectorXd trace() const {
        Eigen::VectorXd out(t.size());
        for (int i = 0; i < t.size(); ++i) out(i) = values[i].trace();
        return out;
    }
};

/// Phi(t) = (1/2 pi i) \oint exp(-(lambda - t)^2 / (2 sigma0^2)) M dlambda on a uniform grid of [-1/2, 1/2].
inline BumpProfile method2_profile(const ContourSamples& s, double sigma0 = 0.05, int grid_size = 201) {
    if (!(sigma0 > 0)) throw InvalidArgument("sigma0 must be positive");
    if (grid_size < 3) throw InvalidArgument("profile grid needs at least 3 points");
    BumpProfile p;
    p.sigma0 = sigma0;
    p.t = Eigen::VectorXd::LinSpaced(grid_size, -0.5, 0.5);
    p.values.resize(grid_size);
    std::vector<double> imag(grid_size);
    const double inv = 1.0 / (2.0 * sigma0 * sigma0);
    parallel_for(0, grid_size, [&](int i) {
        const double t = p.t(i);
        const Matrix2cd phi = contour_integral(s, [&](cplx z) { return std::exp(-(z - t) * (z - t) * inv); });
        p.values[i] = phi.real();
        imag[i] = phi.imag().cwiseAbs().maxCoeff();
    });
    p.max_imag = *std::max_element(imag.begin(), imag.end());
    return p;
}

/// Method 2 by greedy peeling. The list starts with the structural eigenvalue 1/2.
/// Each step takes the residual profile R(t), finds the grid extremum of its
/// dominant eigenvalue, refines the location with a three-point parabola along
/// that principal direction u, and removes a Gaussian with the fitted amplitude.
/// Simple peaks are removed as rank one along u; when the orthogonal profile
/// peaks at the same place with comparable height the peak is taken as double,
/// removed in full and counted twice toward `count`. Extrema below 1e-6 of the
/// initial peak height end the search early.
inline std::vector<RecoveredEigenvalue> method2_extract(const BumpProfile& profile, int count) {
    if (count < 1) throw InvalidArgument("count must be at least 1");
    std::vector<RecoveredEigenvalue> out;
    out.push_back({0.5, 0.0, 1});
    int found = 1;

    const int g = static_cast<int>(profile.t.size());
    const double dt = profile.t(1) - profile.t(0);
    const double inv = 1.0 / (2.0 * profile.sigma0 * profile.sigma0);
    std::vector<Matrix2d> res = profile.values;
    for (auto& r : res) r = 0.5 * (r + r.transpose()).eval();

    auto dominant = [](const Matrix2d& m) {
        Eigen::SelfAdjointEigenSolver<Matrix2d> es(m);
        const auto& ev = es.eigenvalues();
        return std::abs(ev(0)) > std::abs(ev(1)) ? ev(0) : ev(1);
    };
    auto is_extremum = [](double a, double b, double c) { return (b >= a && b >= c) || (b <= a && b <= c); };

    double scale = 0.0;
    for (int i = 0; i < g; ++i) scale = std::max(scale, std::abs(dominant(res[i])));
    const double floor = 1e-6 * scale;

    while (found < count) {
        Eigen::VectorXd top(g);
        for (int i = 0; i < g; ++i) top(i) = dominant(res[i]);
        int best = -1;
        for (int i = 1; i + 1 < g; ++i)
            if (is_extremum(top(i - 1), top(i), top(i + 1)) && (best < 0 || std::abs(top(i)) > std::abs(top(best))))
                best = i;
        if (best < 0 || std::abs(top(best)) < floor) break;

        Eigen::SelfAdjointEigenSolver<Matrix2d> es(res[best]);
        const int k = std::abs(es.eigenvalues()(0)) > std::abs(es.eigenvalues()(1)) ? 0 : 1;
        const Eigen::Vector2d u = es.eigenvectors().col(k), v = es.eigenvectors().col(1 - k);
        auto along = [&](const Eigen::Vector2d& d, int i) { return d.dot(res[i] * d); };

        const double fa = along(u, best - 1), fb = along(u, best), fc = along(u, best + 1);
        const double curv = fa - 2.0 * fb + fc;
        const double shift = std::clamp(curv != 0.0 ? 0.5 * (fa - fc) / curv : 0.0, -1.0, 1.0);
        const double t_star = profile.t(best) + shift * dt;
        auto vertex = [&](const Matrix2d& a, const Matrix2d& b, const Matrix2d& c) {
            return Matrix2d(b + 0.5 * shift * (c - a) + 0.5 * shift * shift * (a - 2.0 * b + c));
        };
        const Matrix2d amp_full = vertex(res[best - 1], res[best], res[best + 1]);

        int mult = 1;
        const double ea = along(v, best - 1), eb = along(v, best), ec = along(v, best + 1);
        if (is_extremum(ea, eb, ec) && std::abs(eb) >= 0.5 * std::abs(fb) && eb * fb > 0) mult = 2;
        const Matrix2d amp = mult == 2 ? amp_full : Matrix2d(u.dot(amp_full * u) * u * u.transpose());

        out.push_back({t_star, amp.trace(), mult});
        found += mult;
        for (int i = 0; i < g; ++i) {
            const double d = profile.t(i) - t_star;
            res[i] -= std::exp(-d * d * inv) * amp;
        }
    }
    return out;
}

/// Values repeated by multiplicity, in extraction order.
inline std::vector<double> expand_multiplicity(const std::vector<RecoveredEigenvalue>& v) {
    std::vector<double> out;
    for (const auto& r : v)
        for (int k = 0; k < r.multiplicity; ++k) out.push_back(r.lambda);
    return out;
}

} // namespace npspec
