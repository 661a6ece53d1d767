#include <catch2/catch_amalgamated.hpp>

#include "npspec/pulse.hpp"

#include <cmath>
#include <numbers>

using namespace npspec;
using Catch::Approx;

namespace {

const double tau = 2 * std::numbers::pi;

double circle_deviation(const ContrastCurve& c, double A) {
    double worst = 0.0;
    for (int i = 0; i < c.size(); ++i) worst = std::max(worst, std::abs(c.lambda(i) - A * std::exp(pcplx(0, tau * c.t(i)))));
    return worst;
}

} // namespace

TEST_CASE("window is flat inside and vanishes at the ends") {
    CHECK(pulse_window(0.0, 20) == 0.0);
    CHECK(pulse_window(20.0, 20) == 0.0);
    CHECK(pulse_window(1.0, 20) == 1.0);
    CHECK(pulse_window(10.0, 20) == 1.0);
    CHECK(pulse_window(19.0, 20) == 1.0);
    CHECK(pulse_window(0.5, 20) > 0.0);
    CHECK(pulse_window(0.5, 20) < 1.0);
}

TEST_CASE("circle pulse round trip, closed form and general integral") {
    const PulseParams prm;
    const auto t = pulse_grid(prm.T, 20001);
    const auto closed = contrast_to_pulse(0.4, t, prm);
    CHECK(circle_deviation(pulse_to_contrast(closed, 2.0, 18.0), 0.4) < 1e-6);
    const auto general = pulse_from_contrast([](double s) { return 0.4 * std::exp(pcplx(0, tau * s)); }, t, prm);
    CHECK(circle_deviation(pulse_to_contrast(general, 2.0, 18.0), 0.4) < 1e-6);
    // the two differ by a constant factor only
    const pcplx ratio = closed.values(5000) / general.values(5000);
    for (int k : {3000, 9000, 15000}) CHECK(std::abs(closed.values(k) / general.values(k) - ratio) < 1e-6 * std::abs(ratio));
}

TEST_CASE("other material ratios go through the general integral") {
    const PulseParams prm{5.0, 1.5, 10.0};
    const auto t = pulse_grid(prm.T, 20001);
    CHECK(circle_deviation(pulse_to_contrast(contrast_to_pulse(0.3, t, prm), 1.0, 9.0), 0.3) < 1e-6);
}

TEST_CASE("closed form at t = 0 and for A = 0") {
    const PulseParams prm;
    const auto t = pulse_grid(prm.T, 2001);
    const auto s = contrast_to_pulse(0.4, t, prm, false);
    const pcplx expect = std::exp(-pcplx(0, 1 / tau) * std::log(pcplx(-0.2, 0.0)));
    CHECK(std::abs(s.values(0) - expect) < 1e-14);
    const auto zero = contrast_to_pulse(0.0, t, prm, false);
    for (int k : {0, 100, 1000})
        CHECK(std::abs(zero.values(k) - std::exp(-2 * t(k) + 0.5)) < 1e-12 * std::exp(-2 * t(k) + 0.5));
    const auto c = pulse_to_contrast(zero, 2.0, 18.0);
    CHECK(c.lambda.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("constant pulse gives contrast one") {
    const PulseParams prm;
    const auto t = pulse_grid(prm.T, 4001);
    const auto s = make_pulse(t, [](double) { return pcplx(2.5, 0.0); }, prm, true);
    const auto c = pulse_to_contrast(s, 0.05 * prm.T + 0.01, 0.95 * prm.T - 0.01);
    REQUIRE(c.size() > 0);
    CHECK((c.lambda.array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("contrast depends on the pulse only through h'/h") {
    const PulseParams prm;
    const auto t = pulse_grid(prm.T, 8001);
    const auto s = make_pulse(t, [](double x) { return chirp_pulse(x); }, prm);
    auto scaled = s;
    scaled.values *= pcplx(-0.3, 2.0);
    const auto a = pulse_to_contrast(s, 1.5, 4.5), b = pulse_to_contrast(scaled, 1.5, 4.5);
    REQUIRE(a.size() == b.size());
    CHECK((a.lambda - b.lambda).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("circle of radius 0.6 encloses the spectrum interval, radius 0.4 does not") {
    const PulseParams prm;
    const auto t = pulse_grid(prm.T, 20001);
    // one period: [5, 6)
    const auto big = pulse_to_contrast(contrast_to_pulse(0.6, t, prm), 5.0, 6.0 - 1e-9);
    for (double x : {-0.49, 0.0, 0.5}) CHECK(winding_number(big.lambda, x) == Approx(1.0).margin(1e-9));
    const auto small = pulse_to_contrast(contrast_to_pulse(0.4, t, prm), 5.0, 6.0 - 1e-9);
    CHECK(winding_number(small.lambda, 0.5) == Approx(0.0).margin(1e-9));
    CHECK(winding_number(small.lambda, 0.0) == Approx(1.0).margin(1e-9));
}

TEST_CASE("gaussian example pulses give bounded smooth curves") {
    const PulseParams prm;
    const auto t = pulse_grid(prm.T, 20001);
    for (auto f : {&chirp_pulse, &cosine_phase_pulse}) {
        const auto c = pulse_to_contrast(make_pulse(t, [&](double x) { return f(x, 0.3, 3.0); }, prm));
        REQUIRE(c.size() > 100);
        CHECK(c.lambda.allFinite());
        CHECK(std::isfinite(arc_length(c.lambda)));
        CHECK(c.lambda.cwiseAbs().maxCoeff() < 10.0);
    }
}

TEST_CASE("pulse error paths") {
    const PulseParams prm;
    const auto t = pulse_grid(prm.T, 2001);
    CHECK_THROWS_AS(contrast_to_pulse(0.5, t, prm), InvalidArgument);
    CHECK_THROWS_AS(contrast_to_pulse(0.6, pulse_grid(prm.T, 41), prm), PulseError);
    // linear h is differentiated exactly; h + h' vanishes at t = 0
    const auto pole = make_pulse(t, [](double x) { return pcplx(1.0 - x, 0.0); }, prm, false);
    CHECK_THROWS_AS(pulse_to_contrast(pole), PulseError);
    CHECK_THROWS_AS(pulse_grid(-1.0, 10), InvalidArgument);
    CHECK_THROWS_AS(log_derivative(0.5, prm), PulseError);
}
