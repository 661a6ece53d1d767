#pragma once

// Nystrom discretizations of the Neumann-Poincare operator K* and the
// single-layer potential S, and the Fredholm spectrum of K* computed in the
// energy space H of mean-zero densities.
//
// S uses the kernel -1/(2 pi) log|x - y|. With this sign the energy form
// <phi, S phi> is positive on mean-zero densities, so it is the H inner product
// (the jump relation dS/dnu = +-1/2 + K* holds for the opposite sign of the kernel,
// which is where the customary minus sign in front of <., S .> comes from).

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "npspec/error.hpp"
#include "npspec/geometry.hpp"
#include "npspec/parallel.hpp"

namespace npspec {

using Eigen::MatrixXd;

enum class OperatorKind { neumann_poincare, single_layer };

/// Dense N x N action matrix on nodal densities: (A phi)_k = sum_j entries(k, j) phi_j.
/// Quadrature weights are already folded into the columns.
struct OperatorMatrix {
    MatrixXd entries;
    OperatorKind kind = OperatorKind::neumann_poincare;
    std::uint64_t mesh_id = 0;
    /// Boundary quadrature weights of the underlying nodes.
    VectorXd weights;

    int size() const noexcept { return static_cast<int>(entries.rows()); }

    /// Bilinear form matrix W * entries. For the single layer this is symmetric
    /// and is the discrete H Gram matrix.
    MatrixXd weighted() const { return weights.asDiagonal() * entries; }
};

namespace detail {

inline constexpr double inv_two_pi = 0.5 / std::numbers::pi;

/// dS/dnu kernel between two distinct components (x on `target`, y on `source`).
inline MatrixXd np_cross_block(const BoundaryMesh& target, const BoundaryMesh& source) {
    MatrixXd out(target.size(), source.size());
    parallel_for(0, target.size(), [&](int k) {
        const Vector2d x = target.nodes().col(k), nu = target.normals().col(k);
        for (int j = 0; j < source.size(); ++j) {
            const Vector2d d = x - source.nodes().col(j);
            out(k, j) = inv_two_pi * d.dot(nu) / d.squaredNorm() * source.weights()(j);
        }
    });
    return out;
}

/// Single-layer kernel between two distinct components.
inline MatrixXd single_layer_cross_block(const BoundaryMesh& target, const BoundaryMesh& source) {
    MatrixXd out(target.size(), source.size());
    parallel_for(0, target.size(), [&](int k) {
        const Vector2d x = target.nodes().col(k);
        for (int j = 0; j < source.size(); ++j)
            out(k, j) = -inv_two_pi * std::log((x - source.nodes().col(j)).norm()) * source.weights()(j);
    });
    return out;
}

} // namespace detail

/// Circulant weights R_d for the periodic product rule
///   int_0^{2pi} log(4 sin^2((t - s)/2)) f(s) ds  ~  sum_j R_{|k-j|} f(t_j)
/// at t = t_k, exact for trigonometric polynomials of degree < N/2.
inline VectorXd log_quadrature_weights(int n) {
    const int half = n / 2;
    VectorXd r(n);
    for (int d = 0; d < n; ++d) {
        double acc = 0.0;
        const double delta = 2.0 * std::numbers::pi * d / n;
        for (int m = 1; m < half; ++m) acc += std::cos(m * delta) / m;
        r(d) = -4.0 * std::numbers::pi / n * acc - 4.0 * std::numbers::pi / (double(n) * n) * ((d % 2) ? -1.0 : 1.0);
    }
    return r;
}

/// K*[phi](x_k) = 1/(2 pi) sum_j <x_k - x_j, nu_k>/|x_k - x_j|^2 w_j phi_j, with the
/// smooth diagonal limit curvature_k / (4 pi) * w_k.
inline OperatorMatrix assemble_np(const BoundaryMesh& mesh) {
    const int n = mesh.size();
    const double floor = 1e-14 * mesh.total_length();
    OperatorMatrix op{MatrixXd(n, n), OperatorKind::neumann_poincare, mesh.id(), mesh.weights()};
    parallel_for(0, n, [&](int k) {
        const Vector2d x = mesh.nodes().col(k), nu = mesh.normals().col(k);
        for (int j = 0; j < n; ++j) {
            if (j == k) {
                op.entries(k, k) = 0.25 / std::numbers::pi * mesh.curvatures()(k) * mesh.weights()(k);
                continue;
            }
            const Vector2d d = x - mesh.nodes().col(j);
            const double r2 = d.squaredNorm();
            if (!(r2 > floor * floor))
                throw AssemblyError("coincident nodes " + std::to_string(k) + " and " + std::to_string(j));
            op.entries(k, j) = detail::inv_two_pi * d.dot(nu) / r2 * mesh.weights()(j);
        }
    });
    return op;
}

/// S[phi](x) = -1/(2 pi) int log|x - y| phi(y) dsigma(y). The logarithm is split as
/// -1/(4 pi) log(4 sin^2((t-s)/2)) + smooth remainder; the first part uses the
/// circulant product weights and the remainder the trapezoid rule.
inline OperatorMatrix assemble_single_layer(const BoundaryMesh& mesh) {
    const int n = mesh.size();
    const double floor = 1e-14 * mesh.total_length();
    const VectorXd r = log_quadrature_weights(n);
    const VectorXd t = fourier::parameter_grid(n);
    const double h = 2.0 * std::numbers::pi / n;
    const double c = 0.25 / std::numbers::pi;
    // symmetric kernel part, without the trial-side speed factor
    MatrixXd g(n, n);
    parallel_for(0, n, [&](int k) {
        g(k, k) = -c * r(0) + h * (-c * std::log(mesh.speed()(k) * mesh.speed()(k)));
        for (int j = k + 1; j < n; ++j) {
            const double d2 = (mesh.nodes().col(k) - mesh.nodes().col(j)).squaredNorm();
            if (!(d2 > floor * floor))
                throw AssemblyError("coincident nodes " + std::to_string(k) + " and " + std::to_string(j));
            const double s = std::sin(0.5 * (t(k) - t(j)));
            const double smooth = -c * std::log(d2 / (4.0 * s * s));
            g(k, j) = -c * r(j - k) + h * smooth;
        }
    });
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < k; ++j) g(k, j) = g(j, k);
    OperatorMatrix op{g * mesh.speed().asDiagonal(), OperatorKind::single_layer, mesh.id(), mesh.weights()};
    return op;
}

/// Fredholm eigenpairs of a discretized K*.
///
/// Column 0 always holds the eigenvalue 1/2 (the equilibrium density, scaled to
/// unit total charge). The remaining columns are H-orthonormal eigenfunctions in
/// L^2_0 ordered by decreasing |lambda|; twins of equal magnitude list the
/// positive member first.
struct Spectrum {
    VectorXd values;
    MatrixXd eigenfunctions;
    /// ||d phi / dT|| / ||phi|| in L^2 of the boundary, per retained column.
    VectorXd oscillation;
    /// Every discrete eigenvalue (including 1/2), sorted descending.
    VectorXd all_values;
    /// ||BK - (BK)^T|| / ||BK|| before symmetrization.
    double symmetry_defect = 0.0;
    int nodes = 0;

    int retained() const noexcept { return static_cast<int>(values.size()); }

    /// Columns holding positive eigenvalues other than the leading 1/2, largest first.
    std::vector<int> positive_columns() const {
        std::vector<int> idx;
        for (int i = 1; i < retained(); ++i)
            if (values(i) > 0) idx.push_back(i);
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return values(a) > values(b); });
        return idx;
    }

    std::vector<int> negative_columns() const {
        std::vector<int> idx;
        for (int i = 1; i < retained(); ++i)
            if (values(i) < 0) idx.push_back(i);
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return values(a) < values(b); });
        return idx;
    }

    VectorXd positive_branch() const {
        auto idx = positive_columns();
        VectorXd out(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) out(i) = values(idx[i]);
        return out;
    }

    VectorXd negative_branch() const {
        auto idx = negative_columns();
        VectorXd out(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) out(i) = values(idx[i]);
        return out;
    }

    /// Distance from values(column) to the closest other discrete eigenvalue.
    double gap(int column) const {
        const double v = values(column);
        double best = std::numeric_limits<double>::infinity();
        bool skipped = false;
        for (int i = 0; i < all_values.size(); ++i) {
            const double d = std::abs(all_values(i) - v);
            if (!skipped && d < 1e-14 + 1e-12 * std::abs(v)) {
                skipped = true;
                continue;
            }
            best = std::min(best, d);
        }
        return best;
    }
};

struct SpectrumOptions {
    /// Number of retained eigenpairs, counting the eigenvalue 1/2.
    int k_max = 19;
    /// Cross-check with a plain nonsymmetric eigensolve of K*.
    bool validate_real = false;
};

namespace detail {

using TangentialDerivative = std::function<VectorXd(const VectorXd&)>;

inline Spectrum solve_spectrum(const MatrixXd& k_action, const MatrixXd& s_action, const VectorXd& w,
                               const TangentialDerivative& d_dt, const SpectrumOptions& opt) {
    const int n = static_cast<int>(k_action.rows());
    if (opt.k_max < 1) throw InvalidArgument("k_max must be positive");

    // H Gram B = W S and the Plemelj-symmetrized form A = sym(B K*)
    MatrixXd b = w.asDiagonal() * s_action;
    b = 0.5 * (b + b.transpose()).eval();
    MatrixXd a = b * k_action;
    const double a_norm = a.norm();
    const double defect = a_norm > 0 ? (a - a.transpose()).norm() / a_norm : 0.0;
    a = 0.5 * (a + a.transpose()).eval();

    // Householder reflector H with H e_1 ∝ w; columns 2..N of H span mean-zero densities.
    VectorXd v = w / w.norm();
    v(0) += (v(0) >= 0 ? 1.0 : -1.0);
    v /= v.norm();
    auto reflect = [&](const MatrixXd& m) {
        const VectorXd mv = m * v;
        const Eigen::RowVectorXd vm = v.transpose() * m;
        const double vmv = v.dot(mv);
        MatrixXd out = m - 2.0 * v * vm - 2.0 * mv * v.transpose() + 4.0 * vmv * v * v.transpose();
        return MatrixXd(out.bottomRightCorner(n - 1, n - 1));
    };
    const MatrixXd a_r = reflect(a);
    const MatrixXd b_r = reflect(b);

    Eigen::LLT<MatrixXd> llt(b_r);
    if (llt.info() != Eigen::Success)
        throw SpectrumError(
            "single-layer energy is not positive definite on mean-zero densities; rescale the domain away from unit capacity");
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ges(a_r, b_r, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (ges.info() != Eigen::Success) throw SpectrumError("generalized eigensolve did not converge");

    // lift back to nodal densities: phi = H [0; c]
    auto lift = [&](const VectorXd& c) {
        VectorXd full(n);
        full(0) = 0.0;
        full.tail(n - 1) = c;
        return VectorXd(full - 2.0 * v * v.dot(full));
    };

    // eigenvalue 1/2 from the full space by shifted inverse iteration
    Eigen::PartialPivLU<MatrixXd> lu(k_action - (0.5 + 1e-6) * MatrixXd::Identity(n, n));
    VectorXd eq = VectorXd::Ones(n);
    for (int it = 0; it < 4; ++it) {
        eq = lu.solve(eq);
        eq /= eq.norm();
    }
    const double half = eq.dot(k_action * eq);
    const double charge = w.dot(eq);
    if (std::abs(charge) > 0) eq /= charge;

    const VectorXd& ev = ges.eigenvalues();
    std::vector<int> order(n - 1);
    for (int i = 0; i < n - 1; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
        const double ax = std::abs(ev(x)), ay = std::abs(ev(y));
        if (ax != ay) return ax > ay;
        return ev(x) > ev(y);
    });

    const int keep = std::min(opt.k_max, n);
    Spectrum sp;
    sp.nodes = n;
    sp.symmetry_defect = defect;
    sp.values.resize(keep);
    sp.eigenfunctions.resize(n, keep);
    sp.oscillation.resize(keep);
    sp.values(0) = half;
    sp.eigenfunctions.col(0) = eq;
    for (int c = 1; c < keep; ++c) {
        sp.values(c) = ev(order[c - 1]);
        sp.eigenfunctions.col(c) = lift(ges.eigenvectors().col(order[c - 1]));
    }
    for (int c = 0; c < keep; ++c) {
        const VectorXd phi = sp.eigenfunctions.col(c);
        const VectorXd dphi = d_dt(phi);
        const double num = std::sqrt(w.dot(dphi.cwiseAbs2()));
        const double den = std::sqrt(w.dot(phi.cwiseAbs2()));
        sp.oscillation(c) = den > 0 ? num / den : 0.0;
    }
    sp.all_values.resize(n);
    sp.all_values(0) = half;
    sp.all_values.tail(n - 1) = ev;
    std::sort(sp.all_values.data(), sp.all_values.data() + n, std::greater<double>());

    if (opt.validate_real) {
        Eigen::EigenSolver<MatrixXd> es(k_action, false);
        const double worst = es.eigenvalues().imag().cwiseAbs().maxCoeff();
        if (worst > 1e-8)
            throw SpectrumError("raw eigensolve has imaginary parts up to " + std::to_string(worst));
    }
    return sp;
}

} // namespace detail

inline Spectrum spectrum(const BoundaryMesh& mesh, const OperatorMatrix& np, const OperatorMatrix& sl,
                         const SpectrumOptions& opt = {}) {
    if (np.kind != OperatorKind::neumann_poincare || sl.kind != OperatorKind::single_layer)
        throw InvalidArgument("spectrum expects a Neumann-Poincare and a single-layer operator");
    if (np.mesh_id != mesh.id() || sl.mesh_id != mesh.id())
        throw InvalidArgument("operators were assembled on a different mesh");
    return detail::solve_spectrum(np.entries, sl.entries, mesh.weights(),
                                  [&](const VectorXd& f) { return mesh.tangential_derivative(f); }, opt);
}

/// Convenience: assemble both operators and solve.
inline Spectrum spectrum(const BoundaryMesh& mesh, const SpectrumOptions& opt = {}) {
    return spectrum(mesh, assemble_np(mesh), assemble_single_layer(mesh), opt);
}

/// H inner product <a, S b>_{L^2} with the discrete single layer.
inline double h_inner(const OperatorMatrix& sl, const VectorXd& a, const VectorXd& b) {
    return a.dot(sl.weights.asDiagonal() * (sl.entries * b));
}

} // namespace npspec
