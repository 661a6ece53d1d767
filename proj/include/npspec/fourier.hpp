#pragma once

// Periodic spectral tools on equispaced samples of [0, 2*pi).

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>

#include "npspec/error.hpp"

namespace npspec::fourier {

using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Signed wavenumber of FFT bin j for an N-point transform; the Nyquist bin maps to -N/2.
inline int wavenumber(int j, int n) { return j < (n + 1) / 2 ? j : j - n; }

/// (i k)^order without going through complex pow.
inline std::complex<double> ik_power(int k, int order) {
    std::complex<double> r = 1.0;
    const std::complex<double> ik(0.0, static_cast<double>(k));
    for (int p = 0; p < order; ++p) r *= ik;
    return r;
}

inline VectorXcd forward(const VectorXcd& f) {
    Eigen::FFT<double> fft;
    VectorXcd out;
    fft.fwd(out, f);
    return out;
}

inline VectorXcd inverse(const VectorXcd& c) {
    Eigen::FFT<double> fft;
    VectorXcd out;
    fft.inv(out, c);
    return out;
}

/// d^order f / d theta^order for a real periodic signal. The Nyquist mode is
/// dropped for odd orders so the result stays real.
inline VectorXd derivative(const VectorXd& f, int order = 1) {
    const int n = static_cast<int>(f.size());
    VectorXcd c = forward(f.cast<std::complex<double>>());
    for (int j = 0; j < n; ++j) {
        const int k = wavenumber(j, n);
        if (n % 2 == 0 && j == n / 2 && order % 2 == 1) {
            c(j) = 0.0;
            continue;
        }
        c(j) *= ik_power(k, order);
    }
    return inverse(c).real();
}

/// Same as above for a complex periodic signal; no Nyquist special case beyond odd orders.
inline VectorXcd derivative(const VectorXcd& f, int order = 1) {
    const int n = static_cast<int>(f.size());
    VectorXcd c = forward(f);
    for (int j = 0; j < n; ++j) {
        if (n % 2 == 0 && j == n / 2 && order % 2 == 1) {
            c(j) = 0.0;
            continue;
        }
        c(j) *= ik_power(wavenumber(j, n), order);
    }
    return inverse(c);
}

/// Trigonometric interpolation of a real periodic signal onto m equispaced points.
/// Upsampling splits the Nyquist coefficient symmetrically; downsampling truncates.
inline VectorXd resample(const VectorXd& f, int m) {
    const int n = static_cast<int>(f.size());
    if (m == n) return f;
    VectorXcd c = forward(f.cast<std::complex<double>>());
    VectorXcd d = VectorXcd::Zero(m);
    const int kmax = std::min(n, m) / 2;
    for (int j = 0; j < n; ++j) {
        const int k = wavenumber(j, n);
        if (std::abs(k) > kmax) continue;
        std::complex<double> v = c(j);
        const bool nyq_src = (n % 2 == 0 && std::abs(k) == n / 2);
        const bool nyq_dst = (m % 2 == 0 && std::abs(k) == m / 2);
        if (nyq_src && m > n) {
            // split source Nyquist into +n/2 and -n/2
            d(n / 2) += 0.5 * v;
            d(m - n / 2) += 0.5 * v;
            continue;
        }
        if (nyq_dst && m < n) {
            // fold +k and -k into the destination Nyquist bin
            d(m / 2) += v;
            continue;
        }
        d(k >= 0 ? k : m + k) += v;
    }
    d *= static_cast<double>(m) / static_cast<double>(n);
    return inverse(d).real();
}

/// Continuous trigonometric interpolant of equispaced periodic samples.
class TrigInterpolant {
public:
    explicit TrigInterpolant(const VectorXd& samples) : n_(static_cast<int>(samples.size())) {
        coeffs_ = forward(samples.cast<std::complex<double>>()) / static_cast<double>(n_);
    }

    double operator()(double theta) const { return eval(theta, 0); }
    double derivative(double theta, int order = 1) const { return eval(theta, order); }

    /// Coefficient of e^{ik theta}; Nyquist is returned halved (symmetric split).
    std::complex<double> coefficient(int k) const {
        if (std::abs(k) > n_ / 2) return 0.0;
        if (n_ % 2 == 0 && std::abs(k) == n_ / 2) return 0.5 * coeffs_(n_ / 2);
        return coeffs_(k >= 0 ? k : n_ + k);
    }

    int size() const noexcept { return n_; }

private:
    double eval(double theta, int order) const {
        const std::complex<double> i1(0.0, 1.0);
        std::complex<double> acc = 0.0;
        for (int k = -n_ / 2; k <= n_ / 2; ++k) {
            const auto c = coefficient(k);
            if (c == 0.0) continue;
            acc += c * ik_power(k, order) *
                   std::exp(i1 * static_cast<double>(k) * theta);
        }
        return acc.real();
    }

    int n_;
    VectorXcd coeffs_;
};

/// Equispaced parameter nodes theta_j = 2*pi*j/n.
inline VectorXd parameter_grid(int n) {
    VectorXd t(n);
    for (int j = 0; j < n; ++j) t(j) = 2.0 * std::numbers::pi * j / n;
    return t;
}

} // namespace npspec::fourier
