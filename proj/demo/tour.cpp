// Kite spectrum, contour recovery, a two-body sweep and a pulse, printed to stdout.

#include <cstdio>

#include "npspec/npspec.hpp"

using namespace npspec;

int main() {
    const auto kite = build_mesh({Kite{}, 256});
    const auto np = assemble_np(kite);
    const auto sp = spectrum(kite);
    std::printf("kite eigenvalues:");
    for (int i = 0; i < 6; ++i) std::printf(" %.4f", sp.all_values(i));
    std::printf("\n");

    const auto profile = method2_profile(sample_contour(np, kite, ContrastContour{}));
    std::printf("recovered from 100 tensor samples:");
    for (const auto& r : method2_extract(profile, 5)) std::printf(" %.4f(x%d)", r.lambda, r.multiplicity);
    std::printf("\n");

    for (const auto& p : separation_sweep({Ellipse{2, 1}, 128}, Vector2d(0, 1), {18, 6, 3, 2.5}))
        std::printf("ellipse pair, gap %.2f: %zu eigenvalues above 5e-4, 1/2 seen %d times\n", p.separation,
                    p.values.size(), p.near_half);

    const PulseParams prm;
    const auto c = pulse_to_contrast(contrast_to_pulse(0.6, pulse_grid(prm.T, 20001), prm), 5.0, 6.0 - 1e-9);
    std::printf("contrast circle of radius 0.6 winds %.3f times around 0\n", winding_number(c.lambda, 0.0));
}
