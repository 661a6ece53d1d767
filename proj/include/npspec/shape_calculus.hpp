#pragma once

// First-order shape calculus under normal perturbations x -> x + eps h(x) nu(x).
//
// Curvature sign: the mesh stores kappa > 0 on convex arcs, while the kernels below
// are written with tau defined by X'' = tau nu for the outward normal, so tau = -kappa.
// The kernels carry the 1/(2 pi) factor of K* so that K* + eps K1 is the first-order
// expansion of the transported perturbed operator.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "npspec/error.hpp"
#include "npspec/fourier.hpp"
#include "npspec/geometry.hpp"
#include "npspec/operator.hpp"
#include "npspec/parallel.hpp"

namespace npspec {

/// Columns 1, cos(k theta), sin(k theta) for k = 1..m_cut at the n equispaced parameter nodes.
inline MatrixXd fourier_basis(int n, int m_cut) {
    if (m_cut < 0) throw InvalidArgument("fourier cutoff must be non-negative");
    const VectorXd t = fourier::parameter_grid(n);
    MatrixXd b(n, 2 * m_cut + 1);
    b.col(0).setOnes();
    for (int k = 1; k <= m_cut; ++k) {
        b.col(2 * k - 1) = (k * t.array()).cos().matrix();
        b.col(2 * k) = (k * t.array()).sin().matrix();
    }
    return b;
}

/// Normal displacement sampled at the mesh nodes, optionally band-limited.
struct PerturbationField {
    VectorXd values;
    /// Coefficients in `fourier_basis(values.size(), m_cut)` when the field was built from them.
    std::optional<VectorXd> coefficients;
    int m_cut = 0;

    static PerturbationField nodal(VectorXd v) { return {std::move(v), std::nullopt, 0}; }

    static PerturbationField from_fourier(int n, const VectorXd& coeffs) {
        if (coeffs.size() % 2 != 1) throw InvalidArgument("fourier coefficient vector must have odd length");
        const int m = static_cast<int>(coeffs.size() / 2);
        if (2 * m >= n) throw InvalidArgument("fourier cutoff too high for the node count");
        return {fourier_basis(n, m) * coeffs, coeffs, m};
    }

    int size() const noexcept { return static_cast<int>(values.size()); }
};

/// Discretized K^(1)_{D,h}: action matrix with trapezoid weights folded in.
struct FirstVariationKernel {
    MatrixXd entries;
    std::uint64_t mesh_id = 0;
};

/// Builds K1 = K_{h,0} F_{h,1} + K_{h,1} with
///   F_h     = <x - y, h(x) nu(x) - h(y) nu(y)> / |x - y|^2
///   F_{h,1} = -2 F_h + tau(x) h(x) - tau(y) h(y)
///   K_{h,0} = <x - y, nu(x)> / |x - y|^2
///   K_{h,1} = <h(x) nu(x) - h(y) nu(y), nu(x)> / |x - y|^2 - <x - y, tau(x) h(x) nu(x) + h_s(x) T(x)> / |x - y|^2.
/// On the diagonal the kernel tends to -h_ss(x) / 2, the derivative of kappa dsigma / 2.
inline FirstVariationKernel first_variation(const BoundaryMesh& mesh, const PerturbationField& field) {
    const int n = mesh.size();
    const VectorXd& h = field.values;
    if (h.size() != n) throw InvalidArgument("perturbation field size does not match mesh");
    const VectorXd hs = mesh.tangential_derivative(h);
    const VectorXd hss = mesh.tangential_derivative(hs);
    const VectorXd tau = -mesh.curvatures();
    const auto& x = mesh.nodes();
    const auto& nu = mesh.normals();
    const auto& tt = mesh.tangents();
    const auto& w = mesh.weights();
    const double c = 0.5 / std::numbers::pi;

    FirstVariationKernel out{MatrixXd(n, n), mesh.id()};
    parallel_for(0, n, [&](int k) {
        const Vector2d xk = x.col(k), nk = nu.col(k), tk = tt.col(k);
        for (int j = 0; j < n; ++j) {
            if (j == k) {
                out.entries(k, k) = -0.5 * c * hss(k) * w(k);
                continue;
            }
            const Vector2d d = xk - x.col(j);
            const double r2 = d.squaredNorm();
            const Vector2d delta = h(k) * nk - h(j) * nu.col(j);
            const double f_h = d.dot(delta) / r2;
            const double f_h1 = -2.0 * f_h + tau(k) * h(k) - tau(j) * h(j);
            const double k_h0 = d.dot(nk) / r2;
            const double k_h1 = delta.dot(nk) / r2 - d.dot(tau(k) * h(k) * nk + hs(k) * tk) / r2;
            out.entries(k, j) = c * (k_h0 * f_h1 + k_h1) * w(j);
        }
    });
    return out;
}

/// Derivative of the eigenvalue in column `column` of the spectrum along h:
/// <K1 phi, phi>_H / <phi, phi>_H. Throws when the eigenvalue is not simple
/// (gap below 1e-6) unless `require_simple` is false.
inline double eigenvalue_derivative(const Spectrum& sp, const FirstVariationKernel& kernel, const OperatorMatrix& sl,
                                    int column, bool require_simple = true) {
    if (column < 0 || column >= sp.retained()) throw InvalidArgument("eigenvalue index out of range");
    if (kernel.mesh_id != sl.mesh_id) throw InvalidArgument("kernel and single layer come from different meshes");
    if (require_simple) {
        const double gap = sp.gap(column);
        if (!(gap > 1e-6))
            throw DegenerateEigenvalue("eigenvalue " + std::to_string(sp.values(column)) +
                                       " is not simple (gap " + std::to_string(gap) +
                                       "); a multiple eigenvalue may split under perturbation and has no single derivative");
    }
    const VectorXd phi = sp.eigenfunctions.col(column);
    return h_inner(sl, kernel.entries * phi, phi) / h_inner(sl, phi, phi);
}

struct GeometricDerivatives {
    double d_area = 0.0;
    double d_moment = 0.0;
};

inline GeometricDerivatives geometric_derivatives(const BoundaryMesh& mesh, const PerturbationField& field) {
    if (field.size() != mesh.size()) throw InvalidArgument("perturbation field size does not match mesh");
    GeometricDerivatives g;
    for (int k = 0; k < mesh.size(); ++k) {
        const double x = mesh.nodes()(0, k), y = mesh.nodes()(1, k);
        const double wh = mesh.weights()(k) * field.values(k);
        g.d_area += wh;
        g.d_moment += (2.0 * x * x + y * y) * wh;
    }
    return g;
}

} // namespace npspec
