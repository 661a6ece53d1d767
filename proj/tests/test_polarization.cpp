#include <catch2/catch_amalgamated.hpp>

#include "npspec/polarization.hpp"

#include <cmath>
#include <numbers>

using namespace npspec;
using Catch::Approx;

namespace {
const double pi = std::numbers::pi;
}

TEST_CASE("disk tensor is |D| / lambda") {
    const auto m = build_mesh({Ellipse{1, 1}, 256});
    const auto np = assemble_np(m);
    for (cplx z : {cplx(2.0, 0.0), cplx(0.0, 1.0), cplx(0.3, 0.23)}) {
        const Matrix2cd t = pt_at(np, m, z);
        CHECK(std::abs(t(0, 0) - pi / z) < 1e-10);
        CHECK(std::abs(t(1, 1) - pi / z) < 1e-10);
        CHECK(std::abs(t(0, 1)) < 1e-10);
    }
}

TEST_CASE("ellipse tensor is real, symmetric and diagonal for real contrast") {
    const auto m = build_mesh({Ellipse{2, 1}, 256});
    const Matrix2cd t = pt_at(assemble_np(m), m, 0.8);
    CHECK(t.imag().cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(t(0, 1)) < 1e-10 * t.cwiseAbs().maxCoeff());
    CHECK(std::abs(t(0, 1) - t(1, 0)) < 1e-10);
    CHECK(t(0, 0).real() > t(1, 1).real());
}

TEST_CASE("tensor symmetry and conjugate symmetry on the kite") {
    const auto m = build_mesh({Kite{}, 256});
    const auto np = assemble_np(m);
    const cplx z(0.25, 0.2);
    const Matrix2cd a = pt_at(np, m, z), b = pt_at(np, m, std::conj(z));
    CHECK(std::abs(a(0, 1) - a(1, 0)) < 1e-8 * a.norm());
    CHECK((b - a.conjugate()).norm() < 1e-8 * a.norm());
}

TEST_CASE("sampled disk contour matches pi / lambda") {
    const auto m = build_mesh({Ellipse{1, 1}, 128});
    const auto s = sample_contour(assemble_np(m), m, ContrastContour{});
    REQUIRE(s.size() == 100);
    for (int k = 0; k < s.size(); ++k) CHECK(std::abs(s.tensors[k](0, 0) - pi / s.lambda[k]) < 1e-10);
    const auto one = sample_contour(assemble_np(m), m, ContrastContour{0.3, 0.23, 1});
    CHECK(one.size() == 1);
}

TEST_CASE("residue identities on the disk") {
    const auto m = build_mesh({Ellipse{1, 1}, 128});
    const auto s = sample_contour(assemble_np(m), m, ContrastContour{0.0, 0.3, 100});
    const Matrix2cd r0 = contour_integral(s, [](cplx) { return cplx(1.0); });
    CHECK((r0 - pi * Matrix2cd::Identity()).norm() < 1e-6);
    const Matrix2cd r1 = contour_integral(s, [](cplx z) { return z; });
    CHECK(r1.norm() < 1e-8);
}

TEST_CASE("non-circular contours use the spectral velocity") {
    const auto m = build_mesh({Ellipse{1, 1}, 128});
    std::vector<cplx> pts;
    for (int k = 0; k < 128; ++k) {
        const double t = 2 * pi * k / 128;
        pts.emplace_back(0.4 * std::cos(t), 0.2 * std::sin(t));
    }
    const auto s = sample_points(assemble_np(m), m, pts);
    CHECK((contour_integral(s, [](cplx) { return cplx(1.0); }) - pi * Matrix2cd::Identity()).norm() < 1e-6);
}

TEST_CASE("contour validation") {
    const auto m = build_mesh({Ellipse{2, 1}, 256});
    const auto sp = spectrum(m);
    CHECK_NOTHROW(validate_contour(ContrastContour{}, sp));
    CHECK_THROWS_AS(validate_contour(ContrastContour{0.0, 1.0 / 6.0, 4}, sp), InvalidArgument);
    CHECK_THROWS_AS(validate_contour(ContrastContour{0.3, -1.0, 10}), InvalidArgument);
}

TEST_CASE("singular resolvent names the eigenvalue") {
    const auto m = build_mesh({Ellipse{2, 1}, 256});
    const auto np = assemble_np(m);
    const auto sp = spectrum(m, np, assemble_single_layer(m));
    const double lam = sp.positive_branch()(0);
    try {
        pt_at(np, m, lam);
        FAIL("expected a singular resolvent");
    } catch (const SingularResolvent& e) {
        CHECK(e.nearest_eigenvalue() == Approx(lam).margin(1e-6));
    }
}
