#include <catch2/catch_amalgamated.hpp>

#include "npspec/multibody.hpp"

#include <cmath>

using namespace npspec;

namespace {

const CurveSpec base{Ellipse{2.0, 1.0}, 128};

int count_near_half(const VectorXd& v) {
    int c = 0;
    for (int i = 0; i < v.size(); ++i) c += std::abs(v(i) - 0.5) < 1e-6;
    return c;
}

VectorXd pair_spectrum(Vector2d offset, bool force = false) {
    SpectrumOptions opt;
    opt.k_max = 1;
    return two_body_spectrum(assemble_block({base, offset, force}), opt).all_values;
}

} // namespace

TEST_CASE("two components carry 1/2 twice") {
    for (double s : {2.5, 4.0, 18.0}) CHECK(count_near_half(pair_spectrum(Vector2d(0.0, s))) == 2);
    CHECK(count_near_half(pair_spectrum(Vector2d(5.0, 0.0))) == 2);
}

TEST_CASE("swapping the components leaves the spectrum unchanged") {
    const VectorXd a = pair_spectrum(Vector2d(0.3, 3.0));
    const VectorXd b = pair_spectrum(Vector2d(-0.3, -3.0));
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("far apart components reproduce the single spectrum twice") {
    const VectorXd single = spectrum(build_mesh(base)).all_values;
    const VectorXd pair = pair_spectrum(Vector2d(0.0, 1000.0));
    double dev = 0.0;
    for (int i = 0; i < 20; ++i) dev = std::max(dev, std::abs(pair(i) - single(i / 2)));
    CHECK(dev < 1e-5);
    // the sum over the spectrum of a pair is twice the single one
    CHECK(std::abs(pair.sum() - 2.0 * single.sum()) < 1e-4);
}

TEST_CASE("overlap and tight gaps are rejected") {
    CHECK_THROWS_AS(assemble_block({base, Vector2d(0.0, 1.0), false}), InvalidArgument);
    CHECK_THROWS_AS(assemble_block({base, Vector2d(0.0, 1.0), true}), InvalidArgument);
    CHECK_THROWS_AS(assemble_block({base, Vector2d(0.0, 2.1), false}), InvalidArgument);
    const auto forced = assemble_block({base, Vector2d(0.0, 2.1), true});
    CHECK(forced.near_touching);
    CHECK(forced.separation > 0.0);
    CHECK(forced.separation < 0.2);
}

TEST_CASE("sweep continues trajectories and keeps the count stable") {
    const auto pts = separation_sweep(base, Vector2d(0.0, 1.0), {18.0, 6.0, 3.0, 2.5});
    REQUIRE(pts.size() == 4);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(pts[i].near_half == 2);
        CHECK(pts[i].values.size() == pts[i].trajectory.size());
        for (std::size_t k = 1; k < pts[i].values.size(); ++k) CHECK(pts[i].values[k - 1] >= pts[i].values[k]);
        if (i > 0) {
            CHECK(pts[i].separation < pts[i - 1].separation);
            const int diff = static_cast<int>(pts[i].values.size()) - static_cast<int>(pts[i - 1].values.size());
            CHECK(diff >= -1);
        }
    }
    CHECK_THROWS_AS(separation_sweep(base, Vector2d::Zero(), {4.0}), InvalidArgument);
    CHECK_THROWS_AS(separation_sweep(base, Vector2d(0.0, 1.0), {-1.0}), InvalidArgument);
}

TEST_CASE("reference sweep offsets") {
    const auto o = reference_sweep_offsets();
    REQUIRE(o.size() == 10);
    CHECK(o.front() == 18.0);
    CHECK(o.back() == 2.0 + 1.0 / 32.0);
}
