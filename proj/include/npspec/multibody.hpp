#pragma once

// Two disjoint copies D1 and D2 = D1 + v. The operator on the union is the 2 x 2
// block matrix with K* of each component on the diagonal and the normal derivative
// of the other component's single layer off it. The H form is the single layer of
// the union, cross blocks included.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "npspec/error.hpp"
#include "npspec/geometry.hpp"
#include "npspec/operator.hpp"
#include "npspec/parallel.hpp"

namespace npspec {

struct TwoBodyConfig {
    CurveSpec base;
    Vector2d offset = Vector2d(0.0, 4.0);
    /// Accept gaps below 0.05 diameters.
    bool force = false;
};

struct TwoBodyOperators {
    BoundaryMesh first;
    BoundaryMesh second;
    MatrixXd np;
    MatrixXd sl;
    VectorXd weights;
    double separation = 0.0;
    /// The gap was below the accuracy guard and `force` let it through.
    bool near_touching = false;

    int size() const noexcept { return static_cast<int>(np.rows()); }
};

namespace detail {

inline bool inside_polygon(const Matrix2Xd& poly, const Vector2d& p) {
    bool in = false;
    const int n = static_cast<int>(poly.cols());
    for (int i = 0, j = n - 1; i < n; j = i++) {
        const Vector2d a = poly.col(i), b = poly.col(j);
        if ((a.y() > p.y()) != (b.y() > p.y()) && p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x())
            in = !in;
    }
    return in;
}

} // namespace detail

/// Smallest node-to-node distance; throws when the components overlap.
inline double component_separation(const BoundaryMesh& a, const BoundaryMesh& b) {
    for (int k = 0; k < b.size(); ++k)
        if (detail::inside_polygon(a.nodes(), b.nodes().col(k))) throw InvalidArgument("components overlap");
    for (int k = 0; k < a.size(); ++k)
        if (detail::inside_polygon(b.nodes(), a.nodes().col(k))) throw InvalidArgument("components overlap");
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < a.size(); ++k)
        best = std::min(best, (b.nodes().colwise() - a.nodes().col(k)).colwise().norm().minCoeff());
    if (!(best > 0)) throw InvalidArgument("components touch");
    return best;
}

inline TwoBodyOperators assemble_block(const TwoBodyConfig& cfg) {
    BoundaryMesh d1 = build_mesh(cfg.base);
    BoundaryMesh d2 = transform_mesh(d1, Placement{0.0, cfg.offset, 1.0});
    const double gap = component_separation(d1, d2);
    const bool near = gap < 0.05 * d1.diameter();
    if (near && !cfg.force)
        throw InvalidArgument("separation " + std::to_string(gap) + " is below 0.05 diameters; quadrature across the gap is unreliable");

    const int n1 = d1.size(), n2 = d2.size();
    TwoBodyOperators op{d1, d2, MatrixXd(n1 + n2, n1 + n2), MatrixXd(n1 + n2, n1 + n2), VectorXd(n1 + n2), gap, near};
    op.np.topLeftCorner(n1, n1) = assemble_np(d1).entries;
    op.np.bottomRightCorner(n2, n2) = assemble_np(d2).entries;
    op.np.topRightCorner(n1, n2) = detail::np_cross_block(d1, d2);
    op.np.bottomLeftCorner(n2, n1) = detail::np_cross_block(d2, d1);
    op.sl.topLeftCorner(n1, n1) = assemble_single_layer(d1).entries;
    op.sl.bottomRightCorner(n2, n2) = assemble_single_layer(d2).entries;
    op.sl.topRightCorner(n1, n2) = detail::single_layer_cross_block(d1, d2);
    op.sl.bottomLeftCorner(n2, n1) = detail::single_layer_cross_block(d2, d1);
    op.weights << d1.weights(), d2.weights();
    return op;
}

/// Spectrum of the block operator. Column 0 carries one eigenvalue 1/2; the other
/// member of the pair (opposite charges on the two components) lies in the mean-zero part.
inline Spectrum two_body_spectrum(const TwoBodyOperators& op, SpectrumOptions opt = {}) {
    const int n1 = op.first.size();
    return detail::solve_spectrum(
        op.np, op.sl, op.weights,
        [&](const VectorXd& f) {
            VectorXd out(f.size());
            out.head(n1) = op.first.tangential_derivative(f.head(n1));
            out.tail(f.size() - n1) = op.second.tangential_derivative(f.tail(f.size() - n1));
            return out;
        },
        opt);
}

struct SweepPoint {
    double offset = 0.0;
    double separation = 0.0;
    /// Eigenvalues above the floor, descending.
    std::vector<double> values;
    /// Trajectory id per value, continued from the previous point by nearest value.
    std::vector<int> trajectory;
    int near_half = 0;
};

/// Spectra of D1 and D1 + s u for each offset length s, in the given order.
inline std::vector<SweepPoint> separation_sweep(const CurveSpec& base, Vector2d direction,
                                                const std::vector<double>& offsets, double floor = 5e-4,
                                                bool force = false) {
    if (!(direction.norm() > 0)) throw InvalidArgument("sweep direction must be non-zero");
    direction.normalize();
    for (double s : offsets)
        if (!(s > 0)) throw InvalidArgument("offsets must be positive");
    std::vector<SweepPoint> out(offsets.size());
    parallel_for(0, static_cast<int>(offsets.size()), [&](int i) {
        const auto op = assemble_block({base, offsets[i] * direction, force});
        SpectrumOptions opt;
        opt.k_max = 1;
        const auto sp = two_body_spectrum(op, opt);
        SweepPoint& p = out[i];
        p.offset = offsets[i];
        p.separation = op.separation;
        for (int k = 0; k < sp.all_values.size(); ++k) {
            const double v = sp.all_values(k);
            if (std::abs(v - 0.5) < 1e-6) ++p.near_half;
            if (v > floor) p.values.push_back(v);
        }
    });

    int next_id = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto& cur = out[i];
        cur.trajectory.assign(cur.values.size(), -1);
        if (i > 0) {
            const auto& prev = out[i - 1];
            std::vector<bool> used(prev.values.size(), false);
            for (std::size_t a = 0; a < cur.values.size(); ++a) {
                int best = -1;
                for (std::size_t b = 0; b < prev.values.size(); ++b)
                    if (!used[b] && (best < 0 || std::abs(prev.values[b] - cur.values[a]) <
                                                     std::abs(prev.values[best] - cur.values[a])))
                        best = static_cast<int>(b);
                if (best >= 0) {
                    used[best] = true;
                    cur.trajectory[a] = prev.trajectory[best];
                }
            }
        }
        for (auto& id : cur.trajectory)
            if (id < 0) id = next_id++;
    }
    return out;
}

/// The offsets 2^k + 2 for k = 4 down to -5 along the minor axis of the default ellipse.
inline std::vector<double> reference_sweep_offsets() {
    std::vector<double> out;
    for (int n = 1; n <= 10; ++n) out.push_back(std::ldexp(1.0, 5 - n) + 2.0);
    return out;
}

} // namespace npspec
