#pragma once

// Polarization tensor M(lambda) = int y (lambda - K*)^{-1}[nu] dsigma at complex
// contrasts, sampled along closed contours, and contour integrals of f(lambda) M.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "npspec/error.hpp"
#include "npspec/fourier.hpp"
#include "npspec/geometry.hpp"
#include "npspec/operator.hpp"
#include "npspec/parallel.hpp"

namespace npspec {

using cplx = std::complex<double>;
using Eigen::Matrix2cd;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

/// Circle center + radius e^{2 pi i k / n}, k = 0..n-1, traversed counterclockwise.
struct ContrastContour {
    cplx center = 0.3;
    double radius = 0.23;
    int n_samples = 100;

    cplx point(int k) const {
        return center + radius * std::exp(cplx(0.0, 2.0 * std::numbers::pi * k / n_samples));
    }

    std::vector<cplx> samples() const {
        std::vector<cplx> out(n_samples);
        for (int k = 0; k < n_samples; ++k) out[k] = point(k);
        return out;
    }
};

/// Tensors along a closed contour. `lambda` holds the sample points, equispaced in
/// some periodic parameter; circles generated here record center and radius too.
struct ContourSamples {
    std::vector<cplx> lambda;
    std::vector<Matrix2cd> tensors;
    std::optional<ContrastContour> circle;

    int size() const noexcept { return static_cast<int>(lambda.size()); }
};

inline void validate_contour(const ContrastContour& contour) {
    if (contour.n_samples < 1) throw InvalidArgument("contour needs at least one sample");
    if (!(contour.radius > 0)) throw InvalidArgument("contour radius must be positive");
}

/// Rejects contours passing within `min_distance` of a computed eigenvalue.
inline void validate_contour(const ContrastContour& contour, const Spectrum& sp, double min_distance = 1e-3) {
    validate_contour(contour);
    for (int k = 0; k < contour.n_samples; ++k) {
        const cplx z = contour.point(k);
        for (int i = 0; i < sp.all_values.size(); ++i) {
            const double d = std::abs(z - sp.all_values(i));
            if (d <= min_distance)
                throw InvalidArgument("contour sample " + std::to_string(k) + " lies within " + std::to_string(d) +
                                      " of eigenvalue " + std::to_string(sp.all_values(i)));
        }
    }
}

/// One LU of (lambda I - K*) serves both right-hand sides nu_1, nu_2.
inline Matrix2cd pt_at(const OperatorMatrix& np, const BoundaryMesh& mesh, cplx lambda) {
    if (np.kind != OperatorKind::neumann_poincare) throw InvalidArgument("pt_at expects a Neumann-Poincare operator");
    if (np.mesh_id != mesh.id()) throw InvalidArgument("operator was assembled on a different mesh");
    const int n = mesh.size();
    MatrixXcd a = -np.entries.cast<cplx>();
    a.diagonal().array() += lambda;
    Eigen::PartialPivLU<MatrixXcd> lu(a);
    const double rc = lu.rcond();
    if (!(rc > 1e-12)) {
        // inverse iteration from a generic start points at the eigenvalue responsible
        std::mt19937_64 rng(n);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        VectorXcd x(n);
        for (int k = 0; k < n; ++k) x(k) = u(rng);
        for (int it = 0; it < 2; ++it) x = lu.solve(x).normalized();
        const cplx nearest = x.dot(np.entries.cast<cplx>() * x) / x.squaredNorm();
        throw SingularResolvent("resolvent is singular at lambda = (" + std::to_string(lambda.real()) + ", " +
                                    std::to_string(lambda.imag()) + "); nearest eigenvalue " +
                                    std::to_string(nearest.real()),
                                nearest.real());
    }
    const MatrixXcd phi = lu.solve(mesh.normals().transpose().cast<cplx>());
    const Eigen::MatrixX2cd y = (mesh.weights().asDiagonal() * mesh.nodes().transpose()).cast<cplx>();
    return y.transpose() * phi;
}

inline ContourSamples sample_points(const OperatorMatrix& np, const BoundaryMesh& mesh,
                                    const std::vector<cplx>& points) {
    ContourSamples out;
    out.lambda = points;
    out.tensors.resize(points.size());
    parallel_for(0, static_cast<int>(points.size()), [&](int k) {
        try {
            out.tensors[k] = pt_at(np, mesh, points[k]);
        } catch (const SingularResolvent& e) {
            throw SingularResolvent("sample " + std::to_string(k) + ": " + e.what(), e.nearest_eigenvalue());
        }
    });
    return out;
}

inline ContourSamples sample_contour(const OperatorMatrix& np, const BoundaryMesh& mesh,
                                     const ContrastContour& contour) {
    validate_contour(contour);
    ContourSamples out = sample_points(np, mesh, contour.samples());
    out.circle = contour;
    return out;
}

/// d lambda / d theta at the samples, theta in [0, 2 pi). Exact for circles, spectral otherwise.
inline std::vector<cplx> contour_velocity(const ContourSamples& s) {
    const int n = s.size();
    std::vector<cplx> out(n);
    if (s.circle) {
        for (int k = 0; k < n; ++k) out[k] = cplx(0.0, 1.0) * (s.lambda[k] - s.circle->center);
        return out;
    }
    VectorXcd z(n);
    for (int k = 0; k < n; ++k) z(k) = s.lambda[k];
    const VectorXcd dz = fourier::derivative(z);
    for (int k = 0; k < n; ++k) out[k] = dz(k);
    return out;
}

/// (1/2 pi i) \oint f(lambda) M(lambda) dlambda by the trapezoid rule in the contour parameter.
inline Matrix2cd contour_integral(const ContourSamples& s, const std::function<cplx(cplx)>& f) {
    const int n = s.size();
    if (n < 3) throw InvalidArgument("contour integral needs at least 3 samples");
    const auto v = contour_velocity(s);
    Matrix2cd acc = Matrix2cd::Zero();
    for (int k = 0; k < n; ++k) acc += f(s.lambda[k]) * v[k] * s.tensors[k];
    return acc / (cplx(0.0, 1.0) * double(n));
}

} // namespace npspec
