#include <catch2/catch_amalgamated.hpp>

#include "npspec/operator.hpp"

#include <cmath>
#include <numbers>

using namespace npspec;
using Catch::Approx;

TEST_CASE("circle kernel is the constant 1/(4 pi)") {
    const auto m = build_mesh({Ellipse{1, 1}, 128});
    const auto np = assemble_np(m);
    const double w = 2 * std::numbers::pi / 128;
    CHECK((np.entries.array() - w / (4 * std::numbers::pi)).abs().maxCoeff() < 1e-12);
    VectorXd zero_mean = VectorXd::LinSpaced(128, -1, 1);
    zero_mean.array() -= zero_mean.mean();
    CHECK((np.entries * zero_mean).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("K applied to constants gives one half") {
    for (CurveFamily f : {CurveFamily{Ellipse{1, 1}}, CurveFamily{Ellipse{2, 1}}, CurveFamily{Kite{}}}) {
        const auto m = build_mesh({f, 256});
        const auto np = assemble_np(m);
        // dual check: int K*[phi] = 1/2 int phi
        const VectorXd phi = m.nodes().row(0).transpose().array().exp();
        CHECK(m.weights().dot(np.entries * phi) == Approx(0.5 * m.weights().dot(phi)).margin(1e-8));
    }
}

TEST_CASE("single layer of a constant on circles") {
    for (double r : {1.0, 0.5, 2.0}) {
        const auto m = build_mesh({Ellipse{r, r}, 256});
        const auto sl = assemble_single_layer(m);
        const VectorXd s1 = sl.entries * VectorXd::Ones(256);
        CHECK((s1.array() + r * std::log(r)).abs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("single layer Gram is symmetric on the kite") {
    const auto m = build_mesh({Kite{}, 256});
    const auto sl = assemble_single_layer(m);
    const MatrixXd g = sl.weighted();
    CHECK((g - g.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ellipse spectrum is geometric with ratio 1/3") {
    const auto sp = spectrum(build_mesh({Ellipse{2, 1}, 512}));
    const VectorXd pos = sp.positive_branch();
    REQUIRE(pos.size() >= 6);
    for (int i = 0; i < 5; ++i) CHECK(pos(i) == Approx(0.5 * std::pow(1.0 / 3.0, i + 1)).margin(5e-7));
    // log-linear decay
    Eigen::MatrixXd a(6, 2);
    Eigen::VectorXd y(6);
    for (int i = 0; i < 6; ++i) {
        a(i, 0) = 1.0;
        a(i, 1) = i + 1;
        y(i) = std::log(pos(i));
    }
    const Eigen::VectorXd c = a.colPivHouseholderQr().solve(y);
    CHECK((a * c - y).cwiseAbs().maxCoeff() < 1e-3);
    CHECK(sp.values(0) == Approx(0.5).margin(1e-10));
}

TEST_CASE("circle spectrum is one half and zeros") {
    const auto sp = spectrum(build_mesh({Ellipse{1, 1}, 256}));
    CHECK(sp.values(0) == Approx(0.5).margin(1e-10));
    for (int i = 1; i < sp.all_values.size(); ++i) CHECK(std::abs(sp.all_values(i)) < 1e-10);
}

TEST_CASE("kite spectrum: exact column of the kite table") {
    const auto sp = spectrum(build_mesh({Kite{}, 512}));
    const VectorXd pos = sp.positive_branch();
    const double expect[] = {0.2707, 0.1902, 0.0891, 0.0718};
    for (int i = 0; i < 4; ++i) CHECK(pos(i) == Approx(expect[i]).margin(5e-4));
}

TEST_CASE("spectrum invariants: bounds, H-orthonormality, twins, real raw eigenvalues") {
    const auto m = build_mesh({SinePerturbedCircle{0.8, 1}, 256});
    SpectrumOptions opt;
    opt.k_max = 15;
    opt.validate_real = true;
    const auto sp = spectrum(m, assemble_np(m), assemble_single_layer(m), opt);
    CHECK(sp.all_values.maxCoeff() <= 0.5 + 1e-8);
    CHECK(sp.all_values.minCoeff() > -0.5 - 1e-8);
    const auto sl = assemble_single_layer(m);
    for (int i = 1; i < sp.retained(); ++i)
        for (int j = 1; j < sp.retained(); ++j) {
            const double g = h_inner(sl, sp.eigenfunctions.col(i), sp.eigenfunctions.col(j));
            CHECK(g == Approx(i == j ? 1.0 : 0.0).margin(1e-8));
        }
    for (int i = 1; i < sp.all_values.size(); ++i) {
        const double v = sp.all_values(i);
        if (v < 1e-4) continue;
        CHECK((sp.all_values.array() + v).abs().minCoeff() < 1e-6);
    }
}

TEST_CASE("oscillation index is bounded by C / lambda") {
    for (CurveFamily f : {CurveFamily{Ellipse{2, 1}}, CurveFamily{SinePerturbedCircle{0.8, 1}}}) {
        SpectrumOptions opt;
        opt.k_max = 24;
        const auto sp = spectrum(build_mesh({f, 512}), opt);
        const auto cols = sp.positive_columns();
        const double first = sp.oscillation(cols[0]) * sp.values(cols[0]);
        for (int i = 1; i < 10; ++i) CHECK(sp.oscillation(cols[i]) * sp.values(cols[i]) < 10.0 * first);
        CHECK(sp.oscillation(cols[9]) > sp.oscillation(cols[0]));
    }
}

TEST_CASE("spectrum is invariant under similarities") {
    const auto base = spectrum(build_mesh({Kite{}, 256})).all_values;
    for (Placement p : {Placement{std::numbers::pi / 6, Vector2d(3, -2), 1.0}, Placement{0, Vector2d::Zero(), 2.0},
                        Placement{0, Vector2d::Zero(), 0.5}}) {
        const auto moved = spectrum(build_mesh({Kite{}, 256, p})).all_values;
        CHECK((moved - base).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("operators reject foreign meshes") {
    const auto a = build_mesh({Ellipse{2, 1}, 64});
    const auto b = build_mesh({Ellipse{2, 1}, 64});
    CHECK_THROWS_AS(spectrum(a, assemble_np(b), assemble_single_layer(a)), InvalidArgument);
    CHECK_THROWS_AS(spectrum(a, assemble_single_layer(a), assemble_np(a)), InvalidArgument);
}
