#pragma once

// Pulses h(t) and the contrast curves they sweep out,
//   lambda(t) = ((s + 1) h + e h') / (2 (s - 1) h + 2 e h'),
// with s the conductivity ratio and e the permittivity ratio. Inverting for the
// logarithmic derivative gives p = h'/h = ((s + 1) - 2 (s - 1) lambda) / (e (2 lambda - 1)).

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <string>

#include "npspec/error.hpp"
#include "npspec/parallel.hpp"

namespace npspec {

using pcplx = std::complex<double>;

struct PulseParams {
    double sigma = 3.0;
    double eps = 2.0;
    double T = 20.0;
};

struct PulseSignal {
    Eigen::VectorXd t;
    Eigen::VectorXcd values;
    double sigma_ratio = 3.0;
    double eps_ratio = 2.0;
    double T = 20.0;

    int size() const noexcept { return static_cast<int>(t.size()); }
    double step() const { return t(1) - t(0); }
};

struct ContrastCurve {
    Eigen::VectorXd t;
    Eigen::VectorXcd lambda;

    int size() const noexcept { return static_cast<int>(t.size()); }
};

/// n equispaced samples of [0, T], endpoints included.
inline Eigen::VectorXd pulse_grid(double T, int n) {
    if (!(T > 0)) throw InvalidArgument("final time must be positive");
    if (n < 5) throw InvalidArgument("pulse grid needs at least 5 samples");
    return Eigen::VectorXd::LinSpaced(n, 0.0, T);
}

/// Smooth cutoff on [0, T]: zero at both ends, one on [0.05 T, 0.95 T], every derivative continuous.
inline double pulse_window(double t, double T) {
    auto psi = [](double x) { return x > 0 ? std::exp(-1.0 / x) : 0.0; };
    auto step = [&](double x) {
        if (x <= 0) return 0.0;
        if (x >= 1) return 1.0;
        return psi(x) / (psi(x) + psi(1.0 - x));
    };
    const double ramp = 0.05 * T;
    return step(t / ramp) * step((T - t) / ramp);
}

inline PulseSignal make_pulse(const Eigen::VectorXd& t, const std::function<pcplx(double)>& h, const PulseParams& prm,
                              bool windowed = false) {
    PulseSignal s{t, Eigen::VectorXcd(t.size()), prm.sigma, prm.eps, prm.T};
    for (int k = 0; k < t.size(); ++k) s.values(k) = h(t(k)) * (windowed ? pulse_window(t(k), prm.T) : 1.0);
    return s;
}

/// Fourth-order finite differences: central in the interior, one-sided five-point at the two ends.
inline Eigen::VectorXcd pulse_derivative(const PulseSignal& s) {
    const int n = s.size();
    if (n < 5) throw InvalidArgument("pulse grid needs at least 5 samples");
    const double dt = s.step();
    const auto& h = s.values;
    Eigen::VectorXcd d(n);
    for (int k = 2; k + 2 < n; ++k) d(k) = (h(k - 2) - 8.0 * h(k - 1) + 8.0 * h(k + 1) - h(k + 2)) / (12.0 * dt);
    auto fwd = [&](int k, int dir) {
        return double(dir) * (-25.0 * h(k) + 48.0 * h(k + dir) - 36.0 * h(k + 2 * dir) + 16.0 * h(k + 3 * dir) -
                              3.0 * h(k + 4 * dir)) /
               (12.0 * dt);
    };
    auto off = [&](int k, int dir) {
        return double(dir) * (-3.0 * h(k - dir) - 10.0 * h(k) + 18.0 * h(k + dir) - 6.0 * h(k + 2 * dir) +
                              h(k + 3 * dir)) /
               (12.0 * dt);
    };
    d(0) = fwd(0, 1);
    d(1) = off(1, 1);
    d(n - 1) = fwd(n - 1, -1);
    d(n - 2) = off(n - 2, -1);
    return d;
}

/// lambda(t) at every sample with h != 0, optionally restricted to [t_begin, t_end].
/// Throws when the denominator falls below 1e-12 |h(t)|: the ratio is then a pole.
inline ContrastCurve pulse_to_contrast(const PulseSignal& s, std::optional<double> t_begin = std::nullopt,
                                       std::optional<double> t_end = std::nullopt) {
    const auto dh = pulse_derivative(s);
    const double a = s.sigma_ratio, e = s.eps_ratio;
    std::vector<int> keep;
    for (int k = 0; k < s.size(); ++k) {
        if (t_begin && s.t(k) < *t_begin) continue;
        if (t_end && s.t(k) > *t_end) continue;
        if (s.values(k) == 0.0) continue;
        keep.push_back(k);
    }
    ContrastCurve out{Eigen::VectorXd(keep.size()), Eigen::VectorXcd(keep.size())};
    for (std::size_t i = 0; i < keep.size(); ++i) {
        const int k = keep[i];
        const pcplx h = s.values(k);
        const pcplx den = 2.0 * (a - 1.0) * h + 2.0 * e * dh(k);
        if (!(std::abs(den) > 1e-12 * std::abs(h)))
            throw PulseError("contrast denominator vanishes at t = " + std::to_string(s.t(k)));
        out.t(i) = s.t(k);
        out.lambda(i) = ((a + 1.0) * h + e * dh(k)) / den;
    }
    return out;
}

/// p = h'/h for a prescribed contrast value.
inline pcplx log_derivative(pcplx lambda, const PulseParams& prm) {
    const pcplx den = prm.eps * (2.0 * lambda - 1.0);
    if (std::abs(den) < 1e-14) throw PulseError("contrast 1/2 has no finite pulse");
    return ((prm.sigma + 1.0) - 2.0 * (prm.sigma - 1.0) * lambda) / den;
}

/// h = C exp(int_0^t p) for an arbitrary contrast path. The running integral is the
/// trapezoid rule with its endpoint correction -dt^2/12 (p'(t) - p'(0)).
inline PulseSignal pulse_from_contrast(const std::function<pcplx(double)>& lambda, const Eigen::VectorXd& t,
                                       const PulseParams& prm, pcplx c = 1.0, bool windowed = true) {
    const int n = static_cast<int>(t.size());
    Eigen::VectorXcd p(n);
    parallel_for(0, n, [&](int k) { p(k) = log_derivative(lambda(t(k)), prm); });
    PulseSignal s{t, p, prm.sigma, prm.eps, prm.T};
    const Eigen::VectorXcd dp = pulse_derivative(s);
    const double dt = s.step();
    pcplx acc = 0.0;
    for (int k = 0; k < n; ++k) {
        if (k > 0) acc += 0.5 * dt * (p(k) + p(k - 1));
        const pcplx integral = acc - dt * dt / 12.0 * (dp(k) - dp(0));
        s.values(k) = c * std::exp(integral) * (windowed ? pulse_window(t(k), prm.T) : 1.0);
    }
    return s;
}

/// Pulse for the circle lambda = A e^{2 pi i t}. At s = 3, e = 2 this is the closed form
/// e^{-2t} (2 A e^{2 pi i t} - 1)^{-i / 2 pi} with the logarithm continued along t;
/// other ratios go through the general integral.
inline PulseSignal contrast_to_pulse(double A, const Eigen::VectorXd& t, const PulseParams& prm = {},
                                     bool windowed = true) {
    if (std::abs(std::abs(2.0 * A) - 1.0) < 1e-9) throw InvalidArgument("|2A| = 1 puts the branch point on the path");
    const double tau = 2.0 * std::numbers::pi;
    if (prm.sigma != 3.0 || prm.eps != 2.0)
        return pulse_from_contrast([&](double s) { return A * std::exp(pcplx(0.0, tau * s)); }, t, prm, 1.0, windowed);

    const int n = static_cast<int>(t.size());
    PulseSignal s{t, Eigen::VectorXcd(n), prm.sigma, prm.eps, prm.T};
    auto inner = [&](double x) { return 2.0 * A * std::exp(pcplx(0.0, tau * x)) - 1.0; };
    double arg = std::arg(inner(t(0)));
    pcplx prev = inner(t(0));
    for (int k = 0; k < n; ++k) {
        const pcplx z = inner(t(k));
        if (k > 0) {
            const double step = std::arg(z / prev);
            if (std::abs(step) > 0.5 * std::numbers::pi)
                throw PulseError("logarithm jumps by " + std::to_string(step) + " near t = " + std::to_string(t(k)) +
                                 "; the grid is too coarse to follow the branch");
            arg += step;
        }
        prev = z;
        const pcplx log_z(std::log(std::abs(z)), arg);
        s.values(k) = std::exp(-2.0 * t(k) - pcplx(0.0, 1.0 / tau) * log_z) *
                      (windowed ? pulse_window(t(k), prm.T) : 1.0);
    }
    return s;
}

/// Gaussian envelope of the pulse examples, (2 pi)^{-1/2} / s0 exp(-(t - a)^2 / (2 s0^2)).
inline double gaussian_envelope(double t, double s0 = 0.3, double a = 3.0) {
    return std::exp(-(t - a) * (t - a) / (2.0 * s0 * s0)) / (std::sqrt(2.0 * std::numbers::pi) * s0);
}

/// Gaussian times exp(i ((t - a) pi / (2 s0) + pi / 2)).
inline pcplx chirp_pulse(double t, double s0 = 0.3, double a = 3.0) {
    return gaussian_envelope(t, s0, a) *
           std::exp(pcplx(0.0, (t - a) * std::numbers::pi / (2.0 * s0) + 0.5 * std::numbers::pi));
}

/// -Gaussian times exp(i pi cos(t - a)).
inline pcplx cosine_phase_pulse(double t, double s0 = 0.3, double a = 3.0) {
    return -gaussian_envelope(t, s0, a) * std::exp(pcplx(0.0, std::numbers::pi * std::cos(t - a)));
}

/// Winding number of the closed polygon through `z` about the point x, by summing turning angles.
inline double winding_number(const Eigen::VectorXcd& z, pcplx x) {
    const int n = static_cast<int>(z.size());
    if (n < 3) throw InvalidArgument("winding number needs at least 3 points");
    double total = 0.0;
    for (int k = 0; k < n; ++k) {
        const pcplx a = z(k) - x, b = z((k + 1) % n) - x;
        if (a == 0.0 || b == 0.0) throw InvalidArgument("point lies on the curve");
        total += std::arg(b / a);
    }
    return total / (2.0 * std::numbers::pi);
}

/// Polygonal length of the curve.
inline double arc_length(const Eigen::VectorXcd& z) {
    double L = 0.0;
    for (int k = 1; k < z.size(); ++k) L += std::abs(z(k) - z(k - 1));
    return L;
}

} // namespace npspec
