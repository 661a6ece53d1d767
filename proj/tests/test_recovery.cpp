#include <catch2/catch_amalgamated.hpp>

#include "npspec/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

using namespace npspec;
using Catch::Approx;

namespace {

ContourSamples synthetic(const ContrastContour& c, const std::function<cplx(cplx)>& f) {
    ContourSamples s;
    s.lambda = c.samples();
    for (cplx z : s.lambda) s.tensors.push_back(f(z) * Matrix2cd::Identity());
    s.circle = c;
    return s;
}

} // namespace

TEST_CASE("method 1 on a single pole is exact") {
    const auto s = synthetic({0.3, 0.23, 100}, [](cplx z) { return 0.7 / (z - 0.25); });
    for (int n_pow : {2, 5, 12}) {
        const auto r = method1_recover(s, 1, n_pow);
        REQUIRE(r.values.size() == 1);
        CHECK(r.values[0].lambda == Approx(0.25).margin(1e-12));
        CHECK(r.values[0].weight == Approx(1.4).margin(1e-10));
    }
}

TEST_CASE("method 1 separates two synthetic poles") {
    const auto s = synthetic({0.2, 0.25, 200}, [](cplx z) { return 1.0 / (z - 0.3) + 0.5 / (z - 0.1); });
    const auto r = method1_recover(s, 2, 8);
    REQUIRE(r.values.size() == 2);
    CHECK(r.values[0].lambda == Approx(0.3).margin(1e-4));
    CHECK(r.values[1].lambda == Approx(0.1).margin(1e-3));
}

TEST_CASE("method 1 on the disk finds nothing but the origin") {
    const auto m = build_mesh({Ellipse{1, 1}, 128});
    const auto s = sample_contour(assemble_np(m), m, ContrastContour{0.0, 0.3, 100});
    const auto r = method1_recover(s, 2, 6);
    CHECK(r.truncated);
    for (const auto& v : r.values) CHECK(std::abs(v.lambda) < 1e-6);
}

TEST_CASE("method 1 rejects bad arguments") {
    const auto s = synthetic({0.3, 0.23, 50}, [](cplx z) { return 1.0 / (z - 0.3); });
    CHECK_THROWS_AS(method1_recover(s, 0, 5), InvalidArgument);
    CHECK_THROWS_AS(method1_recover(s, 1, 1), InvalidArgument);
}

TEST_CASE("method 2 profile peaks at a single pole") {
    const auto s = synthetic({0.3, 0.23, 100}, [](cplx z) { return 1.0 / (z - 0.3); });
    const auto p = method2_profile(s, 0.05, 201);
    int at = 0;
    p.trace().maxCoeff(&at);
    CHECK(p.t(at) == Approx(0.3).margin(0.0025));
    CHECK(p.max_imag < 1e-8);
    const auto r = method2_extract(p, 2);
    REQUIRE(r.size() == 2);
    CHECK(r[0].lambda == 0.5);
    CHECK(r[1].lambda == Approx(0.3).margin(1e-3));
}

TEST_CASE("the ellipse tensor has a single pole pair") {
    const auto m = build_mesh({Ellipse{2, 1}, 256});
    const auto s = sample_contour(assemble_np(m), m, ContrastContour{0.25, 0.22, 160});
    const auto r1 = method1_recover(s, 2, 6);
    REQUIRE(r1.values.size() >= 1);
    CHECK(r1.values[0].lambda == Approx(1.0 / 6).margin(1e-8));
    CHECK(r1.values[0].weight == Approx(2 * std::numbers::pi).margin(1e-6));
    // 1/18 lies inside the contour but its eigenfunction carries no dipole moment
    CHECK(std::abs(r1.moments.h[1][1]) < 1e-10);
    const auto r2 = method2_extract(method2_profile(s), 2);
    REQUIRE(r2.size() == 2);
    CHECK(r2[1].lambda == Approx(1.0 / 6).margin(5e-3));
}

TEST_CASE("method 1 leading kite eigenvalue") {
    const auto m = build_mesh({Kite{}, 256});
    const auto s = sample_contour(assemble_np(m), m, ContrastContour{});
    const auto r = method1_recover(s, 1, 8);
    REQUIRE(r.values.size() == 1);
    CHECK(r.values[0].lambda == Approx(0.2707).margin(5e-3));
}

TEST_CASE("kite peeling reproduces the approximate column and is prefix-stable") {
    const auto m = build_mesh({Kite{}, 256});
    const auto p = method2_profile(sample_contour(assemble_np(m), m, ContrastContour{}));
    const auto r5 = expand_multiplicity(method2_extract(p, 5));
    const auto r3 = expand_multiplicity(method2_extract(p, 3));
    for (std::size_t i = 0; i < r3.size(); ++i) CHECK(r3[i] == Approx(r5[i]).margin(1e-12));
    auto sorted = r5;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const double table[] = {0.5, 0.27, 0.18, 0.09, 0.07};
    REQUIRE(sorted.size() == 5);
    for (int i = 0; i < 5; ++i) CHECK(sorted[i] == Approx(table[i]).margin(0.015));
}

TEST_CASE("double eigenvalues peel as one peak of multiplicity two") {
    const auto m = build_mesh({SinePerturbedCircle{0.6, 3}, 256});
    const auto r = method2_extract(method2_profile(sample_contour(assemble_np(m), m, ContrastContour{})), 5);
    REQUIRE(r.size() >= 3);
    CHECK(r[1].multiplicity == 2);
    CHECK(r[1].lambda == Approx(0.33).margin(0.015));
    CHECK(r[2].multiplicity == 2);
    CHECK(r[2].lambda == Approx(0.13).margin(0.015));
}
