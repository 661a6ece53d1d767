#include <catch2/catch_amalgamated.hpp>

#include "npspec/shape_calculus.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace npspec;
using Catch::Approx;

namespace {

const double pi = std::numbers::pi;

struct Fixture {
    BoundaryMesh mesh;
    OperatorMatrix sl;
    Spectrum sp;

    explicit Fixture(const CurveSpec& spec)
        : mesh(build_mesh(spec)), sl(assemble_single_layer(mesh)), sp(spectrum(mesh, assemble_np(mesh), sl)) {}

    double derivative(const VectorXd& h, int i) const {
        const auto k1 = first_variation(mesh, PerturbationField::nodal(h));
        return eigenvalue_derivative(sp, k1, sl, sp.positive_columns()[i]);
    }

    double finite_difference(const VectorXd& h, int i, double eps = 1e-4) const {
        const auto plus = spectrum(perturb_mesh(mesh, h, eps)).positive_branch();
        const auto minus = spectrum(perturb_mesh(mesh, h, -eps)).positive_branch();
        return (plus(i) - minus(i)) / (2 * eps);
    }
};

VectorXd mode(int n, int k, bool sine) {
    return fourier_basis(n, k).col(sine ? 2 * k : 2 * k - 1);
}

} // namespace

TEST_CASE("fourier fields match their coefficients") {
    VectorXd c = VectorXd::Zero(7);
    c(3) = 1.5;
    const auto f = PerturbationField::from_fourier(64, c);
    const VectorXd t = fourier::parameter_grid(64);
    for (int k = 0; k < 64; ++k) CHECK(f.values(k) == Approx(1.5 * std::cos(2 * t(k))).margin(1e-12));
    CHECK_THROWS_AS(PerturbationField::from_fourier(64, VectorXd::Zero(6)), InvalidArgument);
}

TEST_CASE("ellipse eigenvalue derivatives match finite differences") {
    const Fixture f({Ellipse{2, 1}, 512});
    for (const VectorXd& h : {mode(512, 2, false), mode(512, 4, false)})
        for (int i = 0; i < 3; ++i) {
            const double fd = f.finite_difference(h, i);
            CHECK(f.derivative(h, i) == Approx(fd).epsilon(1e-3));
        }
}

TEST_CASE("odd fields leave the ellipse spectrum stationary") {
    const Fixture f({Ellipse{2, 1}, 512});
    const VectorXd h = mode(512, 3, true);
    for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(f.derivative(h, i)) < 1e-6);
        CHECK(std::abs(f.finite_difference(h, i)) < 1e-6);
    }
}

TEST_CASE("rigid motions and dilation have zero derivative") {
    const Fixture f({Ellipse{2, 1}, 512});
    const VectorXd tx = f.mesh.normals().row(0).transpose();
    const VectorXd ty = f.mesh.normals().row(1).transpose();
    VectorXd dil(512), rot(512);
    for (int k = 0; k < 512; ++k) {
        const Vector2d x = f.mesh.nodes().col(k), n = f.mesh.normals().col(k);
        dil(k) = x.dot(n);
        rot(k) = -x.y() * n.x() + x.x() * n.y();
    }
    for (const VectorXd& h : {tx, ty, dil, rot})
        for (int i = 0; i < 3; ++i) CHECK(std::abs(f.derivative(h, i)) < 1e-6);
}

TEST_CASE("circle: constant field does not move the spectrum, multiple eigenvalues refuse a derivative") {
    const Fixture f({Ellipse{1, 1}, 256});
    const auto k1 = first_variation(f.mesh, PerturbationField::nodal(VectorXd::Ones(256)));
    for (int k = 1; k <= 4; ++k) {
        const VectorXd phi = mode(256, k, false);
        CHECK(std::abs(h_inner(f.sl, k1.entries * phi, phi) / h_inner(f.sl, phi, phi)) < 1e-6);
    }
    const auto k2 = first_variation(f.mesh, PerturbationField::nodal(mode(256, 2, false)));
    CHECK_THROWS_AS(eigenvalue_derivative(f.sp, k2, f.sl, 1), DegenerateEigenvalue);
    CHECK_NOTHROW(eigenvalue_derivative(f.sp, k2, f.sl, 1, false));
}

TEST_CASE("first variation is linear in the field") {
    const auto m = build_mesh({Kite{}, 128});
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    VectorXd a(9), b(9);
    for (int i = 0; i < 9; ++i) {
        a(i) = u(rng);
        b(i) = u(rng);
    }
    const auto fa = PerturbationField::from_fourier(128, a), fb = PerturbationField::from_fourier(128, b);
    const auto fab = PerturbationField::from_fourier(128, a + b);
    const MatrixXd sum = first_variation(m, fa).entries + first_variation(m, fb).entries;
    CHECK((first_variation(m, fab).entries - sum).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("diagonal of the first variation continues the off-diagonal kernel") {
    const auto m = build_mesh({Ellipse{2, 1}, 1024});
    const auto k1 = first_variation(m, PerturbationField::nodal(mode(1024, 2, false))).entries;
    for (int k : {0, 100, 300, 511}) {
        const double diag = k1(k, k) / m.weights()(k);
        const int l = (k + 1023) % 1024, r = (k + 1) % 1024;
        const double near = 0.5 * (k1(k, l) / m.weights()(l) + k1(k, r) / m.weights()(r));
        CHECK(diag == Approx(near).margin(1e-3 * std::max(1.0, std::abs(near))));
    }
}

TEST_CASE("operator Taylor remainder is second order") {
    const auto m = build_mesh({Ellipse{2, 1}, 256});
    const VectorXd h = mode(256, 2, false);
    const MatrixXd k0 = assemble_np(m).entries;
    const MatrixXd k1 = first_variation(m, PerturbationField::nodal(h)).entries;
    auto err = [&](double e) { return (assemble_np(perturb_mesh(m, h, e)).entries - k0 - e * k1).norm(); };
    for (double e : {1e-2, 5e-3}) {
        const double ratio = err(e) / err(0.5 * e);
        CHECK(ratio >= 3.5);
        CHECK(ratio <= 4.5);
    }
}

TEST_CASE("area and moment derivatives") {
    const auto c = build_mesh({Ellipse{1, 1}, 256});
    const auto g = geometric_derivatives(c, PerturbationField::nodal(VectorXd::Ones(256)));
    CHECK(g.d_area == Approx(2 * pi).epsilon(1e-12));
    CHECK(g.d_moment == Approx(3 * pi).epsilon(1e-12));
    const auto k = build_mesh({Kite{}, 256});
    VectorXd h = VectorXd::LinSpaced(256, -1, 1).array().sin();
    h.array() -= k.weights().dot(h) / k.weights().sum();
    CHECK(std::abs(geometric_derivatives(k, PerturbationField::nodal(h)).d_area) < 1e-12);
    const double eps = 1e-5;
    const double fd = (area_and_moment(perturb_mesh(k, h, eps)).moment - area_and_moment(perturb_mesh(k, h, -eps)).moment) / (2 * eps);
    CHECK(geometric_derivatives(k, PerturbationField::nodal(h)).d_moment == Approx(fd).epsilon(1e-6));
}
