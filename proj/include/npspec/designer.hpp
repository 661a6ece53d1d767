#pragma once

// Shape design from prescribed Fredholm eigenvalues by successive-refinement
// Gauss-Newton on
//   J = 1/2 sum_{i<=I} w_i^2 (lambda_i(D) - lambda_i(B))^2 + alpha/2 (|D|-1)^2 + beta/2 int_D 2 x1^2 + x2^2,
// with w_i = 1 / lambda_i(B). Updates are band-limited Fourier fields; the eigenvalue
// 1/2 is never a target.
//
// A star-shaped start is carried as a polar radius r(phi) about its centroid and
// updated r - gamma g; the normal velocity is g <e_r, nu>. Otherwise the nodes keep
// their parameter and both coordinates move, X - gamma (g1, g2). Moving nodes along
// the normal folds sharply concave arcs over themselves long before the step is useful.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "npspec/error.hpp"
#include "npspec/geometry.hpp"
#include "npspec/operator.hpp"
#include "npspec/parallel.hpp"
#include "npspec/shape_calculus.hpp"

namespace npspec {

struct DesignConfig {
    int n_targets = 7;
    double c1 = 0.01;
    double c2 = 0.01;
    double tol = 5e-4;
    int m_cut = 24;
    int max_inner_iters = 60;
    /// Step sizes gamma0 * 2^-k for k = 0..line_search_grid-1.
    int line_search_grid = 12;
    /// Largest trial step moves some node by this fraction of the diameter.
    double max_step_fraction = 0.05;
    std::uint64_t rng_seed = 0;
    double noise_sigma = 0.0;
    int node_count = 256;
    int verify_node_count = 512;
    /// Level I uses modes up to min(m_cut, level_mode_base + 2 I); negative uses m_cut throughout.
    int level_mode_base = 2;
    /// Use the polar radius when the start is star-shaped about its centroid.
    bool radial = true;
};

struct ObjectiveParts {
    double misfit = 0.0;
    /// (|D| - 1)^2
    double area_penalty = 0.0;
    /// int_D 2 x1^2 + x2^2
    double moment = 0.0;
    double area = 0.0;
};

struct IterationRecord {
    int level = 0;
    int iteration = 0;
    double objective = 0.0;
    double misfit = 0.0;
    double gamma = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    bool steepest_descent = false;
    std::vector<double> residuals;
};

struct DesignState {
    BoundaryMesh mesh;
    Spectrum spec;
    OperatorMatrix sl;
    int level = 1;
    ObjectiveParts parts;
    double alpha = 0.0;
    double beta = 0.0;
    std::vector<IterationRecord> history;
    std::vector<BoundaryMesh> stabilized;
    /// Polar radius about `center` when updates are radial.
    std::optional<VectorXd> radius;
    Vector2d center = Vector2d::Zero();
};

struct LevelReport {
    int level = 0;
    int iterations = 0;
    bool stagnated = false;
    /// Misfit against all n_targets eigenvalues at the stabilized shape.
    double full_misfit = 0.0;
};

struct DesignReport {
    std::vector<LevelReport> levels;
    int chosen_level = 0;
    std::vector<double> targets;
    /// Eigenvalues of the chosen shape, at verify_node_count nodes.
    std::vector<double> final_eigenvalues;
    std::vector<double> relative_residuals;
    bool all_stagnated = false;
    std::vector<IterationRecord> history;
};

/// lambda_i (1 + sigma xi_i) with xi_i uniform on [-1, 1] from a seeded generator.
inline std::vector<double> add_noise(const std::vector<double>& targets, double sigma, std::uint64_t seed) {
    if (sigma < 0) throw InvalidArgument("noise level must be non-negative");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> xi(-1.0, 1.0);
    std::vector<double> out(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) out[i] = targets[i] * (1.0 + sigma * xi(rng));
    return out;
}

/// Positive branch, largest first, without 1/2.
inline std::vector<double> design_targets(const BoundaryMesh& mesh, int count) {
    SpectrumOptions opt;
    opt.k_max = std::max(opt.k_max, 2 * count + 4);
    const VectorXd pos = spectrum(mesh, opt).positive_branch();
    if (pos.size() < count) throw SpectrumError("shape has fewer than " + std::to_string(count) + " positive eigenvalues");
    return {pos.data(), pos.data() + count};
}

namespace detail {

inline DesignState make_state(BoundaryMesh mesh, int n_targets) {
    SpectrumOptions opt;
    opt.k_max = 2 * n_targets + 4;
    auto np = assemble_np(mesh);
    auto sl = assemble_single_layer(mesh);
    auto sp = spectrum(mesh, np, sl, opt);
    return DesignState{std::move(mesh), std::move(sp), std::move(sl)};
}

inline DesignState make_radial_state(VectorXd r, const Vector2d& center, int n_targets) {
    DesignState s = make_state(mesh_from_radius(r, center), n_targets);
    s.radius = std::move(r);
    s.center = center;
    return s;
}

inline std::vector<double> residuals(const Spectrum& sp, const std::vector<double>& targets, int level) {
    const auto cols = sp.positive_columns();
    if (static_cast<int>(cols.size()) < level)
        throw SpectrumError("only " + std::to_string(cols.size()) + " positive eigenvalues available, need " +
                            std::to_string(level));
    std::vector<double> r(level);
    for (int i = 0; i < level; ++i) r[i] = (sp.values(cols[i]) - targets[i]) / targets[i];
    return r;
}


} // namespace detail

/// Value of J at the state for the first `level` targets and the state's alpha, beta.
inline double objective(const DesignState& state, const std::vector<double>& targets, int level,
                        ObjectiveParts* parts = nullptr) {
    if (level < 1 || level > static_cast<int>(targets.size())) throw InvalidArgument("level out of range");
    for (int i = 0; i < level; ++i)
        if (targets[i] == 0.0) throw InvalidArgument("targets must be non-zero");
    const auto r = detail::residuals(state.spec, targets, level);
    ObjectiveParts p;
    for (double x : r) p.misfit += 0.5 * x * x;
    const auto am = area_and_moment(state.mesh);
    p.area = am.area;
    p.area_penalty = (am.area - 1.0) * (am.area - 1.0);
    p.moment = am.moment;
    if (parts) *parts = p;
    return p.misfit + 0.5 * state.alpha * p.area_penalty + 0.5 * state.beta * p.moment;
}

/// alpha = C1 J0 / A and beta = C2 J0 / B. A vanishing area penalty caps alpha at 1e6 C1.
inline std::pair<double, double> update_penalties(const ObjectiveParts& parts, const DesignConfig& cfg) {
    double alpha = 0.0, beta = 0.0;
    if (parts.misfit > 0) {
        alpha = parts.area_penalty < 1e-12 ? std::min(cfg.c1 * parts.misfit / 1e-12, 1e6 * cfg.c1)
                                           : cfg.c1 * parts.misfit / parts.area_penalty;
        beta = cfg.c2 * parts.misfit / parts.moment;
    }
    return {alpha, beta};
}

struct GaussNewtonDirection {
    PerturbationField field;
    /// Gradient of J in the Fourier coefficients.
    VectorXd gradient;
    bool steepest_descent = false;
};

/// Gauss-Newton direction in the Fourier basis for the eigenvalue misfits and the area
/// row; falls back to the gradient of J when that is not a descent direction.
inline GaussNewtonDirection gauss_newton_step(const DesignState& state, const std::vector<double>& targets,
                                              int level, const DesignConfig& cfg) {
    const int n = state.mesh.size();
    const int mc = cfg.level_mode_base >= 0 ? std::min(cfg.m_cut, cfg.level_mode_base + 2 * level) : cfg.m_cut;
    const MatrixXd coeff_basis = fourier_basis(n, mc);
    const int mb = static_cast<int>(coeff_basis.cols());
    const int m = state.radius ? mb : 2 * mb;
    MatrixXd basis(n, m);
    if (state.radius) {
        VectorXd g(n);
        for (int k = 0; k < n; ++k) {
            const Vector2d d = state.mesh.nodes().col(k) - state.center;
            g(k) = d.dot(state.mesh.normals().col(k)) / d.norm();
        }
        basis = g.asDiagonal() * coeff_basis;
    } else {
        basis.leftCols(mb) = state.mesh.normals().row(0).transpose().asDiagonal() * coeff_basis;
        basis.rightCols(mb) = state.mesh.normals().row(1).transpose().asDiagonal() * coeff_basis;
    }
    const auto cols = state.spec.positive_columns();
    const auto r = detail::residuals(state.spec, targets, level);

    // psi_c = W S phi_c / <phi_c, phi_c>_H turns <K1 phi, phi>_H / <phi, phi>_H into psi_c . K1 phi_c
    MatrixXd phi(n, level), psi(n, level);
    for (int c = 0; c < level; ++c) {
        phi.col(c) = state.spec.eigenfunctions.col(cols[c]);
        const VectorXd s = state.sl.weights.asDiagonal() * (state.sl.entries * phi.col(c));
        psi.col(c) = s / s.dot(phi.col(c));
    }
    MatrixXd jac(level, m);
    parallel_for(0, m, [&](int b) {
        const auto k1 = first_variation(state.mesh, PerturbationField::nodal(basis.col(b)));
        for (int i = 0; i < level; ++i) jac(i, b) = psi.col(i).dot(k1.entries * phi.col(i)) / targets[i];
    });
    // The area penalty joins as one more residual, sqrt(alpha) (|D| - 1). The moment
    // penalty has no zero to aim at once the area is pinned, so it stays out of the
    // linear model and acts through the line search and the descent test.
    const auto am = area_and_moment(state.mesh);
    const int rows = level + 1;
    MatrixXd jx(rows, m);
    VectorXd rx(rows);
    jx.topRows(level) = jac;
    for (int i = 0; i < level; ++i) rx(i) = r[i];
    const double sa = std::sqrt(state.alpha);
    rx(level) = sa * (am.area - 1.0);
    VectorXd g_moment(m);
    for (int c = 0; c < m; ++c) {
        const auto gd = geometric_derivatives(state.mesh, PerturbationField::nodal(basis.col(c)));
        jx(level, c) = sa * gd.d_area;
        g_moment(c) = 0.5 * state.beta * gd.d_moment;
    }

    // minimum-norm solution of J delta = r; there are far fewer rows than coefficients
    const MatrixXd jjt = jx * jx.transpose();
    const double mu = std::max(1e-10 * jjt.trace() / rows, std::numeric_limits<double>::min());
    VectorXd delta = jx.transpose() * (jjt + mu * MatrixXd::Identity(rows, rows)).ldlt().solve(rx);
    const VectorXd grad = jx.transpose() * rx + g_moment;

    GaussNewtonDirection out;
    out.gradient = grad;
    if (!delta.allFinite() || delta.dot(grad) <= 0.0) {
        delta = grad;
        out.steepest_descent = true;
    }
    out.field = PerturbationField{basis * delta, delta, mc};
    return out;
}

/// The state after a step of length gamma along `dir`: r - gamma g for a radial state,
/// otherwise X - gamma (g1, g2) with dir.coefficients stacking both coordinate series.
inline std::optional<DesignState> trial_state(const DesignState& state, const PerturbationField& dir, double gamma,
                                              int n_targets) {
    try {
        const MatrixXd b = fourier_basis(state.mesh.size(), dir.m_cut);
        const auto& c = *dir.coefficients;
        const int mb = static_cast<int>(b.cols());
        if (state.radius) {
            const VectorXd r = *state.radius - gamma * (b * c);
            if (!(r.minCoeff() > 0)) return std::nullopt;
            auto next = detail::make_radial_state(r, state.center, n_targets);
            next.alpha = state.alpha;
            next.beta = state.beta;
            return next;
        }
        Matrix2Xd moved = state.mesh.nodes();
        moved.row(0) -= gamma * (b * c.head(mb)).transpose();
        moved.row(1) -= gamma * (b * c.tail(mb)).transpose();
        auto next = detail::make_state(mesh_from_nodes(std::move(moved)), n_targets);
        next.alpha = state.alpha;
        next.beta = state.beta;
        return next;
    } catch (const SelfIntersection&) {
        return std::nullopt;
    } catch (const InvalidArgument&) {
        return std::nullopt;
    } catch (const SpectrumError&) {
        return std::nullopt;
    }
}

struct LineSearchResult {
    double gamma = 0.0;
    double objective = 0.0;
    std::optional<DesignState> state;
};

/// Grid search over gamma0 2^-k, where gamma0 moves the farthest node by
/// max_step_fraction of the diameter; gamma = 1 (the plain Gauss-Newton step) is
/// tried as well when it is inside that range. Returns gamma = 0 if nothing improves.
inline LineSearchResult line_search(const DesignState& state, const PerturbationField& dir,
                                    const std::vector<double>& targets, int level, const DesignConfig& cfg) {
    LineSearchResult best;
    best.objective = objective(state, targets, level);
    const double hmax = dir.values.cwiseAbs().maxCoeff();
    if (!(hmax > 0)) return best;
    const double gamma0 = cfg.max_step_fraction * state.mesh.diameter() / hmax;
    std::vector<double> gammas;
    for (int k = 0; k < cfg.line_search_grid; ++k) gammas.push_back(gamma0 * std::ldexp(1.0, -k));
    if (gamma0 >= 1.0) gammas.push_back(1.0);

    std::vector<std::optional<DesignState>> trials(gammas.size());
    parallel_for(0, static_cast<int>(gammas.size()),
                 [&](int k) { trials[k] = trial_state(state, dir, gammas[k], cfg.n_targets); });
    for (std::size_t k = 0; k < gammas.size(); ++k) {
        if (!trials[k]) continue;
        double f;
        try {
            f = objective(*trials[k], targets, level);
        } catch (const SpectrumError&) {
            continue;
        }
        if (f < best.objective) {
            best.objective = f;
            best.gamma = gammas[k];
            best.state = std::move(trials[k]);
        }
    }
    return best;
}

namespace detail {

inline double full_misfit(const Spectrum& sp, const std::vector<double>& targets) {
    double m = 0.0;
    for (double x : residuals(sp, targets, static_cast<int>(targets.size()))) m += 0.5 * x * x;
    return m;
}

} // namespace detail

/// Successive refinement over levels I = 1..n_targets. Each level iterates
/// penalty update, direction, line search until the objective changes by less
/// than tol (or the line search stalls), then warm-starts the next level. The
/// returned shape is the stabilized level shape with the smallest misfit over
/// all targets.
inline std::pair<BoundaryMesh, DesignReport> run_design(const std::vector<double>& targets_in, const DesignConfig& cfg,
                                                        const CurveSpec& initial) {
    if (cfg.n_targets < 1) throw InvalidArgument("need at least one target");
    if (!(cfg.c1 > 0 && cfg.c2 > 0 && cfg.tol > 0)) throw InvalidArgument("c1, c2 and tol must be positive");
    if (static_cast<int>(targets_in.size()) < cfg.n_targets)
        throw InvalidArgument("fewer targets than n_targets");
    std::vector<double> targets(targets_in.begin(), targets_in.begin() + cfg.n_targets);
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (!(targets[i] > 0 && targets[i] < 0.5)) throw InvalidArgument("targets must lie in (0, 1/2)");
        if (i > 0 && targets[i] > targets[i - 1]) throw InvalidArgument("targets must be sorted descending");
    }
    if (cfg.noise_sigma > 0) targets = add_noise(targets, cfg.noise_sigma, cfg.rng_seed);

    CurveSpec spec = initial;
    spec.node_count = cfg.node_count;
    const BoundaryMesh start = build_mesh(spec);
    std::optional<VectorXd> r0;
    Vector2d centroid = Vector2d::Zero();
    if (cfg.radial) {
        const auto am0 = area_and_moment(start);
        for (int k = 0; k < start.size(); ++k) {
            const Vector2d x = start.nodes().col(k);
            centroid += 0.5 * start.weights()(k) *
                        Vector2d(x.x() * x.x() * start.normals()(0, k), x.y() * x.y() * start.normals()(1, k));
        }
        centroid /= am0.area;
        r0 = star_radius(start, centroid, cfg.node_count);
    }
    DesignState state = r0 ? detail::make_radial_state(*r0, centroid, cfg.n_targets)
                           : detail::make_state(start, cfg.n_targets);
    DesignReport report;
    report.targets = targets;
    std::vector<std::pair<double, BoundaryMesh>> level_shapes;
    bool any_progress = false;

    for (int level = 1; level <= cfg.n_targets; ++level) {
        state.level = level;
        LevelReport lr;
        lr.level = level;
        for (int it = 1; it <= cfg.max_inner_iters; ++it) {
            ObjectiveParts parts;
            objective(state, targets, level, &parts);
            std::tie(state.alpha, state.beta) = update_penalties(parts, cfg);
            const double before = objective(state, targets, level, &state.parts);

            const auto dir = gauss_newton_step(state, targets, level, cfg);
            auto ls = line_search(state, dir.field, targets, level, cfg);

            IterationRecord rec;
            rec.level = level;
            rec.iteration = it;
            rec.gamma = ls.gamma;
            rec.alpha = state.alpha;
            rec.beta = state.beta;
            rec.steepest_descent = dir.steepest_descent;
            lr.iterations = it;
            if (!ls.state) {
                rec.objective = before;
                rec.misfit = state.parts.misfit;
                rec.residuals = detail::residuals(state.spec, targets, level);
                state.history.push_back(rec);
                lr.stagnated = true;
                break;
            }
            any_progress = true;
            const double alpha = state.alpha, beta = state.beta;
            auto history = std::move(state.history);
            state = std::move(*ls.state);
            state.level = level;
            state.alpha = alpha;
            state.beta = beta;
            state.history = std::move(history);
            rec.objective = objective(state, targets, level, &state.parts);
            rec.misfit = state.parts.misfit;
            rec.residuals = detail::residuals(state.spec, targets, level);
            state.history.push_back(rec);
            if (std::abs(before - ls.objective) < cfg.tol) break;
        }
        state.stabilized.push_back(state.mesh);
        lr.full_misfit = detail::full_misfit(state.spec, targets);
        level_shapes.emplace_back(lr.full_misfit, state.mesh);
        report.levels.push_back(lr);
    }

    std::size_t chosen = 0;
    for (std::size_t i = 1; i < level_shapes.size(); ++i)
        if (level_shapes[i].first < level_shapes[chosen].first) chosen = i;
    report.chosen_level = static_cast<int>(chosen) + 1;
    report.all_stagnated = !any_progress;
    report.history = state.history;

    BoundaryMesh final_mesh = level_shapes[chosen].second;
    const BoundaryMesh fine = resample_mesh(final_mesh, cfg.verify_node_count);
    const auto fine_values = design_targets(fine, cfg.n_targets);
    report.final_eigenvalues = fine_values;
    for (int i = 0; i < cfg.n_targets; ++i)
        report.relative_residuals.push_back(std::abs(fine_values[i] - targets[i]) / targets[i]);
    return {final_mesh, report};
}

} // namespace npspec
