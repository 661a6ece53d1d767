#pragma once

// Subcommand dispatch for the npspec executable. Exit status: 0 success, 1 domain
// error (error JSON on stderr and in the output directory), 2 usage error.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "npspec/designer.hpp"
#include "npspec/io.hpp"
#include "npspec/multibody.hpp"
#include "npspec/operator.hpp"
#include "npspec/polarization.hpp"
#include "npspec/pulse.hpp"
#include "npspec/recovery.hpp"

#ifndef NPSPEC_VERSION
#define NPSPEC_VERSION "0.0.0"
#endif

namespace npspec::cli {

namespace fs = std::filesystem;
using io::json;

struct Options {
    std::string out = ".";
    int threads = 0;
    std::vector<std::string> inputs;
    std::uint64_t seed = 0;

    // shared geometry
    std::string curve;
    int n = 0;

    // spectrum
    int k = 8;
    bool eigenfunctions = false;

    // pt
    double center_re = 0.3, center_im = 0.0, radius = 0.23;
    int samples = 100;

    // recover
    std::string pt;
    int method = 2;
    int count = 5;
    int n_pow = 20;
    double sigma0 = 0.05;
    int grid = 201;

    // design
    std::string targets, target_curve, init;
    double noise = 0.0;
    int n_targets = 7;

    // pulse
    std::string kind = "circle";
    double amplitude = 0.4, sigma = 3.0, eps = 2.0, T = 20.0;
    int pulse_samples = 20001;
    bool window = true;

    // multibody
    std::vector<double> direction{0.0, 1.0};
    std::vector<double> separations;
    double floor = 5e-4;
    bool force = false;
};

inline std::string timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline void write_manifest(const std::string& command, const Options& o, const std::vector<std::string>& argv) {
    json m{{"schema", io::schema_tag("manifest")},
           {"command", command},
           {"argv", argv},
           {"config_paths", o.inputs},
           {"seed", o.seed},
           {"output_directory", o.out},
           {"threads", thread_count()},
           {"tool_version", NPSPEC_VERSION},
           {"timestamp", timestamp()}};
    io::write_text((fs::path(o.out) / "manifest.json").string(), m.dump(2) + "\n");
}

inline CurveSpec load_curve(const std::string& path, int n, Options& o) {
    o.inputs.push_back(path);
    CurveSpec spec = io::curve_from_json(io::read_json(path));
    if (n > 0) spec.node_count = n;
    return spec;
}

inline void out_file(const Options& o, const std::string& name, const std::string& text) {
    io::write_text((fs::path(o.out) / name).string(), text);
}

inline void run_mesh(Options& o) {
    const auto mesh = build_mesh(load_curve(o.curve, o.n, o));
    out_file(o, "mesh.json", io::to_json(mesh).dump() + "\n");
    out_file(o, "nodes.csv", io::mesh_csv(mesh));
}

inline void run_spectrum(Options& o) {
    const auto mesh = build_mesh(load_curve(o.curve, o.n, o));
    SpectrumOptions opt;
    opt.k_max = o.k;
    const auto sp = spectrum(mesh, opt);
    out_file(o, "spectrum.csv", io::spectrum_csv(sp));
    if (o.eigenfunctions) {
        json cols = json::array();
        for (int c = 0; c < sp.retained(); ++c) {
            const VectorXd v = sp.eigenfunctions.col(c);
            cols.push_back({{"lambda", sp.values(c)}, {"values", std::vector<double>(v.data(), v.data() + v.size())}});
        }
        out_file(o, "eigenfunctions.json", json{{"schema", io::schema_tag("eigenfunctions")}, {"columns", cols}}.dump() + "\n");
    }
}

inline void run_pt(Options& o) {
    const auto mesh = build_mesh(load_curve(o.curve, o.n, o));
    const auto np = assemble_np(mesh);
    ContrastContour c{{o.center_re, o.center_im}, o.radius, o.samples};
    out_file(o, "contour.json", io::to_json(sample_contour(np, mesh, c)).dump() + "\n");
}

inline void run_recover(Options& o) {
    o.inputs.push_back(o.pt);
    const auto s = io::contour_from_json(io::read_json(o.pt));
    if (o.method == 1) {
        const auto r = method1_recover(s, o.count, o.n_pow);
        out_file(o, "recovered.csv", io::recovered_csv(r.values));
    } else if (o.method == 2) {
        const auto p = method2_profile(s, o.sigma0, o.grid);
        out_file(o, "recovered.csv", io::recovered_csv(method2_extract(p, o.count)));
        out_file(o, "profile.csv", io::profile_csv(p));
    } else
        throw InvalidArgument("method must be 1 or 2");
}

inline void run_design(Options& o) {
    std::vector<double> targets;
    if (!o.targets.empty()) {
        o.inputs.push_back(o.targets);
        targets = io::read_targets_csv(o.targets);
    } else if (!o.target_curve.empty()) {
        CurveSpec t = load_curve(o.target_curve, o.n, o);
        t.node_count = std::max(t.node_count, 512);
        targets = design_targets(build_mesh(t), o.n_targets);
    } else
        throw InvalidArgument("design needs --targets or --target-curve");
    DesignConfig cfg;
    cfg.n_targets = o.n_targets;
    cfg.noise_sigma = o.noise;
    cfg.rng_seed = o.seed;
    if (o.n > 0) cfg.node_count = o.n;
    const CurveSpec init = load_curve(o.init, 0, o);
    const auto [mesh, report] = run_design(targets, cfg, init);
    out_file(o, "history.csv", io::history_csv(report.history));
    out_file(o, "report.json", io::to_json(report).dump(2) + "\n");
    out_file(o, "final_mesh.json", io::to_json(mesh).dump() + "\n");
}

inline void run_pulse(Options& o) {
    PulseParams prm{o.sigma, o.eps, o.T};
    const auto t = pulse_grid(o.T, o.pulse_samples);
    PulseSignal s;
    if (o.kind == "circle")
        s = contrast_to_pulse(o.amplitude, t, prm, o.window);
    else if (o.kind == "chirp")
        s = make_pulse(t, [](double x) { return chirp_pulse(x); }, prm, o.window);
    else if (o.kind == "cosine")
        s = make_pulse(t, [](double x) { return cosine_phase_pulse(x); }, prm, o.window);
    else
        throw InvalidArgument("pulse kind must be circle, chirp or cosine");
    out_file(o, "pulse.csv", io::pulse_csv(s, pulse_to_contrast(s)));
}

inline void run_multibody(Options& o) {
    CurveSpec base = load_curve(o.curve, o.n, o);
    if (o.direction.size() != 2) throw InvalidArgument("direction takes two components");
    if (!(Vector2d(o.direction[0], o.direction[1]).norm() > 0)) throw InvalidArgument("sweep direction must be non-zero");
    const Vector2d dir = Vector2d(o.direction[0], o.direction[1]).normalized();
    const auto mesh = build_mesh(base);
    std::vector<double> offsets = o.separations;
    if (offsets.empty())
        for (double s : reference_sweep_offsets()) {
            const double gap = component_separation(mesh, transform_mesh(mesh, Placement{0.0, s * dir, 1.0}));
            if (o.force || gap >= 0.05 * mesh.diameter()) offsets.push_back(s);
        }
    const auto sweep = separation_sweep(base, dir, offsets, o.floor, o.force);
    for (const auto& p : sweep)
        if (p.separation < 0.05 * mesh.diameter())
            std::cerr << "warning: separation " << p.separation << " is below the quadrature guard\n";
    out_file(o, "multibody.csv", io::multibody_csv(sweep));
}

inline int dispatch(int argc, char** argv) {
    CLI::App app{"Neumann-Poincare spectra, polarization tensors and spectral shape design"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--threads", o.threads, "worker threads (default: NP_SPECTRA_THREADS, else 1)")->check(CLI::NonNegativeNumber);
    app.set_version_flag("--version", NPSPEC_VERSION);

    auto with_out = [&](CLI::App* c) { c->add_option("--out", o.out, "output directory")->capture_default_str(); };
    auto with_curve = [&](CLI::App* c, bool required = true) {
        auto* opt = c->add_option("--curve", o.curve, "curve spec JSON");
        if (required) opt->required();
        c->add_option("--n", o.n, "node count (overrides the spec)");
    };

    auto* mesh = app.add_subcommand("mesh", "sample a curve");
    with_curve(mesh);
    with_out(mesh);

    auto* spec = app.add_subcommand("spectrum", "Fredholm eigenvalues");
    with_curve(spec);
    spec->add_option("--k", o.k, "eigenvalues to keep, 1/2 included")->capture_default_str();
    spec->add_flag("--eigenfunctions", o.eigenfunctions, "also dump eigenfunction nodal values");
    with_out(spec);

    auto* pt = app.add_subcommand("pt", "polarization tensors on a contrast circle");
    with_curve(pt);
    pt->add_option("--center-re", o.center_re)->capture_default_str();
    pt->add_option("--center-im", o.center_im)->capture_default_str();
    pt->add_option("--radius", o.radius)->capture_default_str();
    pt->add_option("--samples", o.samples)->capture_default_str();
    with_out(pt);

    auto* rec = app.add_subcommand("recover", "eigenvalues from contour samples");
    rec->add_option("--pt", o.pt, "contour samples JSON")->required();
    rec->add_option("--method", o.method)->check(CLI::IsMember({1, 2}))->capture_default_str();
    rec->add_option("--count", o.count)->capture_default_str();
    rec->add_option("--npow", o.n_pow, "power for method 1")->capture_default_str();
    rec->add_option("--sigma0", o.sigma0, "bump width for method 2")->capture_default_str();
    rec->add_option("--grid", o.grid, "profile grid size for method 2")->capture_default_str();
    with_out(rec);

    auto* des = app.add_subcommand("design", "shape from target eigenvalues");
    des->add_option("--targets", o.targets, "CSV of target eigenvalues");
    des->add_option("--target-curve", o.target_curve, "curve spec whose eigenvalues are the targets");
    des->add_option("--init", o.init, "initial curve spec JSON")->required();
    des->add_option("--seed", o.seed)->capture_default_str();
    des->add_option("--sigma", o.noise, "multiplicative noise level")->capture_default_str();
    des->add_option("--count", o.n_targets, "number of targets")->capture_default_str();
    des->add_option("--n", o.n, "node count");
    with_out(des);

    auto* pul = app.add_subcommand("pulse", "pulse and contrast curve");
    pul->add_option("--kind", o.kind, "circle, chirp or cosine")->capture_default_str();
    pul->add_option("--A", o.amplitude, "circle radius")->capture_default_str();
    pul->add_option("--sigma", o.sigma, "conductivity ratio")->capture_default_str();
    pul->add_option("--eps", o.eps, "permittivity ratio")->capture_default_str();
    pul->add_option("--T", o.T, "final time")->capture_default_str();
    pul->add_option("--samples", o.pulse_samples)->capture_default_str();
    pul->add_flag("!--no-window", o.window, "skip the smooth cutoff");
    with_out(pul);

    auto* mb = app.add_subcommand("multibody", "two-body spectra against separation");
    mb->add_option("--base", o.curve, "curve spec JSON")->required();
    mb->add_option("--n", o.n, "node count per body");
    mb->add_option("--direction", o.direction, "offset direction x y")->expected(2);
    mb->add_option("--separations", o.separations, "offset lengths (default: 2^k + 2, k = 4..-5, within the guard unless --force)");
    mb->add_option("--floor", o.floor, "smallest eigenvalue tabulated")->capture_default_str();
    mb->add_flag("--force", o.force, "allow gaps below 0.05 diameters");
    with_out(mb);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    if (o.threads > 0) set_thread_count(o.threads);

    auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    const std::vector<std::string> args(argv, argv + argc);
    try {
        fs::create_directories(o.out);
        if (name == "mesh") run_mesh(o);
        else if (name == "spectrum") run_spectrum(o);
        else if (name == "pt") run_pt(o);
        else if (name == "recover") run_recover(o);
        else if (name == "design") run_design(o);
        else if (name == "pulse") run_pulse(o);
        else run_multibody(o);
        write_manifest(name, o, args);
    } catch (const std::exception& e) {
        const auto* err = dynamic_cast<const Error*>(&e);
        const json j{{"schema", io::schema_tag("error")},
                     {"command", name},
                     {"code", err ? err->code() : std::string("internal")},
                     {"message", e.what()}};
        std::cerr << j.dump() << "\n";
        try {
            io::write_text((fs::path(o.out) / "error.json").string(), j.dump(2) + "\n");
        } catch (const std::exception&) {
        }
        return 1;
    }
    return 0;
}

} // namespace npspec::cli
