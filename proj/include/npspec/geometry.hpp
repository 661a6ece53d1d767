#pragma once

// Smooth closed planar curves sampled at equispaced parameter values.
//
// A mesh stores node positions together with the differential data every
// boundary-integral routine needs. Derivatives are taken spectrally in the
// defining parameter theta, so the quadrature weights carry |x'(theta)| and the
// trapezoid rule stays spectrally accurate for analytic curves. Orientation is
// always counterclockwise and the outward normal is the tangent rotated by -pi/2.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "npspec/error.hpp"
#include "npspec/fourier.hpp"

namespace npspec {

using Eigen::Matrix2Xd;
using Eigen::Vector2d;
using Eigen::VectorXd;

struct Ellipse {
    double a = 1.0;
    double b = 1.0;
};

/// r(theta) = 1 + delta sin(m theta).
struct SinePerturbedCircle {
    double delta = 0.0;
    int m = 1;
};

/// x = cos t + 0.65 cos 2t - 0.65, y = 1.5 sin t.
struct Kite {};

/// z(theta) = sum_k c_k exp(i k theta), with z = x + i y.
struct FourierCurve {
    std::vector<std::pair<int, std::complex<double>>> modes;
};

/// Closed polygon sampled at equispaced parameter values; trigonometrically resampled.
struct Polyline {
    std::vector<Vector2d> points;
};

using CurveFamily = std::variant<Ellipse, SinePerturbedCircle, Kite, FourierCurve, Polyline>;

/// Similarity transform applied after sampling: x -> scale * R(rotation) x + translation.
struct Placement {
    double rotation = 0.0;
    Vector2d translation = Vector2d::Zero();
    double scale = 1.0;
};

struct CurveSpec {
    CurveFamily family = Ellipse{};
    int node_count = 256;
    Placement placement{};
};

class BoundaryMesh {
public:
    int size() const noexcept { return static_cast<int>(nodes_.cols()); }

    const Matrix2Xd& nodes() const noexcept { return nodes_; }
    const Matrix2Xd& tangents() const noexcept { return tangents_; }
    const Matrix2Xd& normals() const noexcept { return normals_; }
    const VectorXd& curvatures() const noexcept { return curvatures_; }
    const VectorXd& weights() const noexcept { return weights_; }
    /// |x'(theta)| at the nodes.
    const VectorXd& speed() const noexcept { return speed_; }
    double total_length() const noexcept { return total_length_; }

    /// Unique identity shared by operators assembled on this mesh.
    std::uint64_t id() const noexcept { return id_; }

    /// Max distance between any two nodes.
    double diameter() const {
        double d = 0.0;
        for (int i = 0; i < size(); ++i)
            for (int j = i + 1; j < size(); ++j) d = std::max(d, (nodes_.col(i) - nodes_.col(j)).norm());
        return d;
    }

    /// Arclength derivative of a nodal field.
    VectorXd tangential_derivative(const VectorXd& f) const {
        return fourier::derivative(f).cwiseQuotient(speed_);
    }

private:
    friend BoundaryMesh mesh_from_nodes(Matrix2Xd nodes, bool check_simple);

    static std::uint64_t next_id() {
        static std::atomic<std::uint64_t> counter{1};
        return counter.fetch_add(1);
    }

    Matrix2Xd nodes_, tangents_, normals_;
    VectorXd curvatures_, weights_, speed_;
    double total_length_ = 0.0;
    std::uint64_t id_ = 0;
};

namespace detail {

inline double cross(const Vector2d& a, const Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

inline bool segments_intersect(const Vector2d& p1, const Vector2d& p2, const Vector2d& q1,
                               const Vector2d& q2) {
    if (std::max(p1.x(), p2.x()) < std::min(q1.x(), q2.x()) ||
        std::max(q1.x(), q2.x()) < std::min(p1.x(), p2.x()) ||
        std::max(p1.y(), p2.y()) < std::min(q1.y(), q2.y()) ||
        std::max(q1.y(), q2.y()) < std::min(p1.y(), p2.y()))
        return false;
    const double d1 = cross(p2 - p1, q1 - p1);
    const double d2 = cross(p2 - p1, q2 - p1);
    const double d3 = cross(q2 - q1, p1 - q1);
    const double d4 = cross(q2 - q1, p2 - q1);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 &&
           d4 != 0;
}

} // namespace detail

/// First pair of non-adjacent polygon edges that cross, or {-1, -1}.
inline std::pair<int, int> find_self_intersection(const Matrix2Xd& nodes) {
    const int n = static_cast<int>(nodes.cols());
    for (int k = 0; k < n; ++k) {
        const Vector2d p1 = nodes.col(k), p2 = nodes.col((k + 1) % n);
        for (int l = k + 2; l < n; ++l) {
            if (k == 0 && l == n - 1) continue;
            if (detail::segments_intersect(p1, p2, nodes.col(l), nodes.col((l + 1) % n))) return {k, l};
        }
    }
    return {-1, -1};
}

/// Builds a mesh from equispaced parameter samples of a closed curve. Clockwise
/// input is reversed so the result is counterclockwise.
inline BoundaryMesh mesh_from_nodes(Matrix2Xd nodes, bool check_simple = true) {
    const int n = static_cast<int>(nodes.cols());
    if (n % 2 != 0) throw InvalidArgument("node count must be even, got " + std::to_string(n));
    if (n < 32) throw InvalidArgument("node count must be at least 32, got " + std::to_string(n));
    if (!nodes.allFinite()) throw InvalidArgument("non-finite node coordinates");

    auto derivatives = [](const Matrix2Xd& p) {
        VectorXd x = p.row(0).transpose(), y = p.row(1).transpose();
        return std::array<VectorXd, 4>{fourier::derivative(x, 1), fourier::derivative(y, 1),
                                       fourier::derivative(x, 2), fourier::derivative(y, 2)};
    };
    auto d = derivatives(nodes);
    const double h = 2.0 * std::numbers::pi / n;
    double signed_area = 0.0;
    for (int k = 0; k < n; ++k) signed_area += 0.5 * (nodes(0, k) * d[1](k) - nodes(1, k) * d[0](k)) * h;
    if (signed_area < 0.0) {
        Matrix2Xd reversed(2, n);
        for (int k = 0; k < n; ++k) reversed.col(k) = nodes.col((n - k) % n);
        nodes = std::move(reversed);
        d = derivatives(nodes);
    }

    BoundaryMesh mesh;
    mesh.nodes_ = std::move(nodes);
    mesh.tangents_.resize(2, n);
    mesh.normals_.resize(2, n);
    mesh.curvatures_.resize(n);
    mesh.speed_.resize(n);
    for (int k = 0; k < n; ++k) {
        const double s = std::hypot(d[0](k), d[1](k));
        if (!(s > 1e-14)) throw InvalidArgument("degenerate parametrization at node " + std::to_string(k));
        mesh.speed_(k) = s;
        mesh.tangents_.col(k) = Vector2d(d[0](k), d[1](k)) / s;
        mesh.normals_.col(k) = Vector2d(mesh.tangents_(1, k), -mesh.tangents_(0, k));
        mesh.curvatures_(k) = (d[0](k) * d[3](k) - d[1](k) * d[2](k)) / (s * s * s);
    }
    mesh.weights_ = mesh.speed_ * h;
    mesh.total_length_ = mesh.weights_.sum();
    mesh.id_ = BoundaryMesh::next_id();

    if (check_simple) {
        auto [a, b] = find_self_intersection(mesh.nodes_);
        if (a >= 0) throw SelfIntersection(a, b);
    }
    return mesh;
}

namespace detail {

inline Matrix2Xd sample_family(const CurveFamily& family, int n) {
    Matrix2Xd p(2, n);
    const VectorXd t = fourier::parameter_grid(n);
    std::visit(
        [&](const auto& f) {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, Ellipse>) {
                if (!(f.a > 0 && f.b > 0)) throw InvalidArgument("ellipse semi-axes must be positive");
                for (int k = 0; k < n; ++k) p.col(k) = Vector2d(f.a * std::cos(t(k)), f.b * std::sin(t(k)));
            } else if constexpr (std::is_same_v<F, SinePerturbedCircle>) {
                if (!(std::abs(f.delta) < 1.0)) throw InvalidArgument("|delta| must be below 1");
                for (int k = 0; k < n; ++k) {
                    const double r = 1.0 + f.delta * std::sin(f.m * t(k));
                    p.col(k) = r * Vector2d(std::cos(t(k)), std::sin(t(k)));
                }
            } else if constexpr (std::is_same_v<F, Kite>) {
                for (int k = 0; k < n; ++k)
                    p.col(k) = Vector2d(std::cos(t(k)) + 0.65 * std::cos(2 * t(k)) - 0.65, 1.5 * std::sin(t(k)));
            } else if constexpr (std::is_same_v<F, FourierCurve>) {
                if (f.modes.empty()) throw InvalidArgument("fourier curve needs at least one mode");
                for (int k = 0; k < n; ++k) {
                    std::complex<double> z = 0.0;
                    for (const auto& [m, c] : f.modes) z += c * std::exp(std::complex<double>(0.0, m * t(k)));
                    p.col(k) = Vector2d(z.real(), z.imag());
                }
            } else {
                const int m = static_cast<int>(f.points.size());
                if (m < 4) throw InvalidArgument("polyline needs at least 4 points");
                VectorXd x(m), y(m);
                for (int k = 0; k < m; ++k) {
                    x(k) = f.points[k].x();
                    y(k) = f.points[k].y();
                }
                p.row(0) = fourier::resample(x, n).transpose();
                p.row(1) = fourier::resample(y, n).transpose();
            }
        },
        family);
    return p;
}

inline Matrix2Xd apply_placement(Matrix2Xd p, const Placement& pl) {
    Eigen::Rotation2Dd rot(pl.rotation);
    for (int k = 0; k < p.cols(); ++k) p.col(k) = pl.scale * (rot * Vector2d(p.col(k))) + pl.translation;
    return p;
}

} // namespace detail

inline BoundaryMesh build_mesh(const CurveSpec& spec) {
    if (!(spec.placement.scale > 0)) throw InvalidArgument("placement scale must be positive");
    return mesh_from_nodes(detail::apply_placement(detail::sample_family(spec.family, spec.node_count),
                                                   spec.placement));
}

/// Similarity image of a mesh; node k maps to node k.
inline BoundaryMesh transform_mesh(const BoundaryMesh& mesh, const Placement& placement) {
    return mesh_from_nodes(detail::apply_placement(mesh.nodes(), placement), false);
}

/// Moves node k to x_k + epsilon h_k nu_k. The parameter is transported with the
/// nodes, so the result is again sampled at equispaced parameter values.
inline BoundaryMesh perturb_mesh(const BoundaryMesh& mesh, const VectorXd& h, double epsilon) {
    if (h.size() != mesh.size()) throw InvalidArgument("displacement field size does not match mesh");
    if (epsilon == 0.0) return mesh;
    const double reach = std::abs(epsilon) * h.cwiseAbs().maxCoeff() * mesh.curvatures().cwiseAbs().maxCoeff();
    if (!(reach < 0.5))
        throw InvalidArgument("perturbation too large for the tubular neighbourhood (eps*|h|*|curvature| = " +
                              std::to_string(reach) + ")");
    Matrix2Xd moved = mesh.nodes();
    for (int k = 0; k < mesh.size(); ++k) moved.col(k) += epsilon * h(k) * mesh.normals().col(k);
    return mesh_from_nodes(std::move(moved));
}

/// Trigonometric resampling of the parametrization to m nodes.
inline BoundaryMesh resample_mesh(const BoundaryMesh& mesh, int m) {
    VectorXd x = mesh.nodes().row(0).transpose(), y = mesh.nodes().row(1).transpose();
    Matrix2Xd p(2, m);
    p.row(0) = fourier::resample(x, m).transpose();
    p.row(1) = fourier::resample(y, m).transpose();
    return mesh_from_nodes(std::move(p));
}

/// Resamples the curve so that consecutive nodes are equally spaced in arclength.
inline BoundaryMesh reparametrize_by_arclength(const BoundaryMesh& mesh) {
    const int n = mesh.size();
    const fourier::TrigInterpolant speed(mesh.speed());
    const fourier::TrigInterpolant xs(VectorXd(mesh.nodes().row(0).transpose()));
    const fourier::TrigInterpolant ys(VectorXd(mesh.nodes().row(1).transpose()));
    const double c0 = speed.coefficient(0).real();
    const std::complex<double> i1(0.0, 1.0);
    // s(theta) = c0 theta + sum_{k != 0} c_k (e^{ik theta} - 1) / (ik)
    auto arclength = [&](double theta) {
        std::complex<double> acc = c0 * theta;
        for (int k = -n / 2; k <= n / 2; ++k) {
            if (k == 0) continue;
            acc += speed.coefficient(k) * (std::exp(i1 * double(k) * theta) - 1.0) / (i1 * double(k));
        }
        return acc.real();
    };
    const double length = 2.0 * std::numbers::pi * c0;
    Matrix2Xd p(2, n);
    double theta = 0.0;
    for (int j = 0; j < n; ++j) {
        const double target = length * j / n;
        if (j > 0) theta += 2.0 * std::numbers::pi / n;
        for (int it = 0; it < 30; ++it) {
            const double step = (arclength(theta) - target) / speed(theta);
            theta -= step;
            if (std::abs(step) < 1e-15) break;
        }
        p.col(j) = Vector2d(xs(theta), ys(theta));
    }
    return mesh_from_nodes(std::move(p));
}

/// Polar radius about `center` at the angles 2 pi j / n, or nullopt when the curve
/// is not star-shaped with respect to `center` (checked on a 4x refined resampling).
inline std::optional<VectorXd> star_radius(const BoundaryMesh& mesh, const Vector2d& center, int n) {
    const int m = mesh.size();
    const VectorXd x = mesh.nodes().row(0).transpose(), y = mesh.nodes().row(1).transpose();
    const VectorXd xf = fourier::resample(x, 4 * m), yf = fourier::resample(y, 4 * m);
    const VectorXd dxf = fourier::derivative(xf), dyf = fourier::derivative(yf);
    for (int k = 0; k < 4 * m; ++k)
        if (!(detail::cross(Vector2d(xf(k), yf(k)) - center, Vector2d(dxf(k), dyf(k))) > 0)) return std::nullopt;

    const fourier::TrigInterpolant xs(x), ys(y);
    const double two_pi = 2.0 * std::numbers::pi;
    VectorXd a(m + 1);
    for (int k = 0; k < m; ++k) a(k) = std::atan2(y(k) - center.y(), x(k) - center.x());
    for (int k = 1; k < m; ++k)
        while (a(k) < a(k - 1)) a(k) += two_pi;
    a(m) = a(0) + two_pi;
    if (a(m - 1) >= a(m)) return std::nullopt;

    auto angle = [&](double t, double ref) {
        double v = std::atan2(ys(t) - center.y(), xs(t) - center.x());
        while (v < ref - std::numbers::pi) v += two_pi;
        while (v > ref + std::numbers::pi) v -= two_pi;
        return v;
    };
    VectorXd r(n);
    for (int j = 0; j < n; ++j) {
        double phi = two_pi * j / n;
        while (phi < a(0)) phi += two_pi;
        while (phi >= a(m)) phi -= two_pi;
        const int k = static_cast<int>(std::upper_bound(a.data(), a.data() + m + 1, phi) - a.data()) - 1;
        // safeguarded Newton on the bracket [t_k, t_{k+1}]
        double lo = two_pi * k / m, hi = two_pi * (k + 1) / m, t = 0.5 * (lo + hi);
        for (int it = 0; it < 60; ++it) {
            const Vector2d d(xs(t) - center.x(), ys(t) - center.y());
            const double f = angle(t, phi) - phi;
            if (std::abs(f) < 1e-15) break;
            if (f > 0) hi = t; else lo = t;
            const double df = detail::cross(d, Vector2d(xs.derivative(t), ys.derivative(t))) / d.squaredNorm();
            double next = t - f / df;
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            t = next;
        }
        r(j) = std::hypot(xs(t) - center.x(), ys(t) - center.y());
    }
    return r;
}

/// Curve center + r_j (cos, sin)(2 pi j / n).
inline BoundaryMesh mesh_from_radius(const VectorXd& r, const Vector2d& center) {
    if (!(r.minCoeff() > 0)) throw InvalidArgument("polar radius must stay positive");
    const int n = static_cast<int>(r.size());
    Matrix2Xd p(2, n);
    for (int j = 0; j < n; ++j) {
        const double phi = 2.0 * std::numbers::pi * j / n;
        p.col(j) = center + r(j) * Vector2d(std::cos(phi), std::sin(phi));
    }
    return mesh_from_nodes(std::move(p));
}

struct AreaMoment {
    double area = 0.0;
    /// Integral over the domain of 2 x1^2 + x2^2.
    double moment = 0.0;
};

/// Both integrals by the divergence theorem: area from (x/2), moment from the
/// field (2/3 x1^3, 1/3 x2^3).
inline AreaMoment area_and_moment(const BoundaryMesh& mesh) {
    AreaMoment out;
    for (int k = 0; k < mesh.size(); ++k) {
        const double x = mesh.nodes()(0, k), y = mesh.nodes()(1, k);
        const double nx = mesh.normals()(0, k), ny = mesh.normals()(1, k);
        const double w = mesh.weights()(k);
        out.area += 0.5 * (x * nx + y * ny) * w;
        out.moment += (2.0 / 3.0 * x * x * x * nx + 1.0 / 3.0 * y * y * y * ny) * w;
    }
    return out;
}

} // namespace npspec
