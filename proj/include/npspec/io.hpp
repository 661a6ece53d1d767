#pragma once

// JSON and CSV formats. Every JSON document carries "schema": "npspec.<kind>/<major>";
// readers reject other kinds and majors. Floating-point CSV fields use 12 significant digits.

#include <Eigen/Dense>

#include <complex>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "npspec/designer.hpp"
#include "npspec/error.hpp"
#include "npspec/geometry.hpp"
#include "npspec/multibody.hpp"
#include "npspec/operator.hpp"
#include "npspec/polarization.hpp"
#include "npspec/pulse.hpp"
#include "npspec/recovery.hpp"

namespace npspec::io {

using json = nlohmann::json;

inline constexpr int schema_major = 1;

inline std::string schema_tag(const std::string& kind) { return "npspec." + kind + "/" + std::to_string(schema_major); }

inline void check_schema(const json& j, const std::string& kind) {
    if (!j.is_object() || !j.contains("schema") || !j["schema"].is_string())
        throw SchemaError("missing \"schema\" field (expected " + schema_tag(kind) + ")");
    const std::string tag = j["schema"];
    const std::string prefix = "npspec." + kind + "/";
    if (tag.rfind(prefix, 0) != 0) throw SchemaError("expected a " + kind + " document, got " + tag);
    int major = -1;
    try {
        major = std::stoi(tag.substr(prefix.size()));
    } catch (const std::exception&) {
        throw SchemaError("unreadable schema version in " + tag);
    }
    if (major != schema_major) throw SchemaError("unsupported schema version " + tag);
}

inline json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError(path + ": " + e.what());
    }
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write " + path);
    out << text;
}

inline json pair(double a, double b) { return json::array({a, b}); }
inline json pair(std::complex<double> z) { return pair(z.real(), z.imag()); }

inline std::complex<double> complex_from(const json& j) {
    if (!j.is_array() || j.size() != 2) throw SchemaError("complex numbers are [re, im] pairs");
    return {j[0].get<double>(), j[1].get<double>()};
}

// -- curves and meshes

inline json to_json(const CurveSpec& spec) {
    json j{{"schema", schema_tag("curve")}, {"N", spec.node_count}};
    std::visit(
        [&](const auto& f) {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, Ellipse>) {
                j["family"] = "ellipse";
                j["params"] = {{"a", f.a}, {"b", f.b}};
            } else if constexpr (std::is_same_v<F, SinePerturbedCircle>) {
                j["family"] = "sine_perturbed_circle";
                j["params"] = {{"delta", f.delta}, {"m", f.m}};
            } else if constexpr (std::is_same_v<F, Kite>) {
                j["family"] = "kite";
                j["params"] = json::object();
            } else if constexpr (std::is_same_v<F, FourierCurve>) {
                j["family"] = "fourier";
                json c = json::array();
                for (const auto& [k, z] : f.modes) c.push_back({k, z.real(), z.imag()});
                j["params"] = {{"coefficients", c}};
            } else {
                j["family"] = "polyline";
                json pts = json::array();
                for (const auto& p : f.points) pts.push_back(pair(p.x(), p.y()));
                j["params"] = {{"points", pts}};
            }
        },
        spec.family);
    const auto& pl = spec.placement;
    if (pl.rotation != 0.0 || pl.scale != 1.0 || !pl.translation.isZero())
        j["placement"] = {{"rotation", pl.rotation},
                          {"translation", pair(pl.translation.x(), pl.translation.y())},
                          {"scale", pl.scale}};
    return j;
}

inline CurveSpec curve_from_json(const json& j) {
    check_schema(j, "curve");
    CurveSpec spec;
    spec.node_count = j.value("N", 256);
    const std::string family = j.at("family");
    const json params = j.value("params", json::object());
    if (family == "ellipse")
        spec.family = Ellipse{params.value("a", 1.0), params.value("b", 1.0)};
    else if (family == "sine_perturbed_circle")
        spec.family = SinePerturbedCircle{params.value("delta", 0.0), params.value("m", 1)};
    else if (family == "kite")
        spec.family = Kite{};
    else if (family == "fourier") {
        FourierCurve f;
        for (const auto& c : params.at("coefficients")) {
            if (!c.is_array() || c.size() != 3) throw SchemaError("fourier coefficients are [k, re, im]");
            f.modes.emplace_back(c[0].get<int>(), std::complex<double>(c[1].get<double>(), c[2].get<double>()));
        }
        spec.family = f;
    } else if (family == "polyline") {
        Polyline p;
        for (const auto& q : params.at("points")) p.points.emplace_back(q.at(0).get<double>(), q.at(1).get<double>());
        spec.family = p;
    } else
        throw SchemaError("unknown curve family " + family);
    if (j.contains("placement")) {
        const auto& pl = j["placement"];
        spec.placement.rotation = pl.value("rotation", 0.0);
        spec.placement.scale = pl.value("scale", 1.0);
        if (pl.contains("translation"))
            spec.placement.translation = Vector2d(pl["translation"].at(0).get<double>(), pl["translation"].at(1).get<double>());
    }
    if (spec.node_count < 32 || spec.node_count % 2 != 0) throw InvalidArgument("N must be even and at least 32");
    return spec;
}

inline json to_json(const BoundaryMesh& mesh) {
    json nodes = json::array(), normals = json::array(), weights = json::array();
    for (int k = 0; k < mesh.size(); ++k) {
        nodes.push_back(pair(mesh.nodes()(0, k), mesh.nodes()(1, k)));
        normals.push_back(pair(mesh.normals()(0, k), mesh.normals()(1, k)));
        weights.push_back(mesh.weights()(k));
    }
    return {{"schema", schema_tag("mesh")}, {"nodes", nodes}, {"normals", normals}, {"weights", weights}};
}

/// Rebuilds the mesh from its nodes; normals and weights are recomputed.
inline BoundaryMesh mesh_from_json(const json& j) {
    check_schema(j, "mesh");
    const auto& nodes = j.at("nodes");
    Matrix2Xd p(2, nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) p.col(k) = Vector2d(nodes[k].at(0), nodes[k].at(1));
    return mesh_from_nodes(p);
}

// -- contour samples

inline json to_json(const ContourSamples& s) {
    json samples = json::array();
    for (int k = 0; k < s.size(); ++k) {
        const auto& m = s.tensors[k];
        samples.push_back({{"lambda", pair(s.lambda[k])},
                           {"M", {{pair(m(0, 0)), pair(m(0, 1))}, {pair(m(1, 0)), pair(m(1, 1))}}}});
    }
    json j{{"schema", schema_tag("contour")}, {"samples", samples}};
    if (s.circle) j["circle"] = {{"center", pair(s.circle->center)}, {"radius", s.circle->radius}};
    return j;
}

inline ContourSamples contour_from_json(const json& j) {
    check_schema(j, "contour");
    ContourSamples s;
    for (const auto& e : j.at("samples")) {
        s.lambda.push_back(complex_from(e.at("lambda")));
        const auto& m = e.at("M");
        if (!m.is_array() || m.size() != 2) throw SchemaError("M must be a 2 x 2 array");
        Matrix2cd t;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) t(r, c) = complex_from(m[r].at(c));
        s.tensors.push_back(t);
    }
    if (j.contains("circle")) {
        ContrastContour c;
        c.center = complex_from(j["circle"].at("center"));
        c.radius = j["circle"].at("radius");
        c.n_samples = s.size();
        s.circle = c;
    }
    if (s.size() < 3) throw SchemaError("contour needs at least 3 samples");
    return s;
}

// -- CSV

class Csv {
public:
    explicit Csv(const std::string& header) { out_ << header << '\n'; }

    template <class... T>
    Csv& row(const T&... fields) {
        bool first = true;
        ((out_ << (first ? "" : ",") << format(fields), first = false), ...);
        out_ << '\n';
        return *this;
    }

    std::string str() const { return out_.str(); }

private:
    static std::string format(double v) {
        std::ostringstream s;
        s << std::setprecision(12) << v;
        return s.str();
    }
    static std::string format(int v) { return std::to_string(v); }
    static std::string format(std::size_t v) { return std::to_string(v); }
    static std::string format(const std::string& v) { return v; }

    std::ostringstream out_;
};

inline std::string mesh_csv(const BoundaryMesh& mesh) {
    Csv csv("k,x,y,nu_x,nu_y,curvature[1/length],weight[length]");
    for (int k = 0; k < mesh.size(); ++k)
        csv.row(k, mesh.nodes()(0, k), mesh.nodes()(1, k), mesh.normals()(0, k), mesh.normals()(1, k),
                mesh.curvatures()(k), mesh.weights()(k));
    return csv.str();
}

inline std::string spectrum_csv(const Spectrum& sp) {
    Csv csv("i,lambda,oscillation[1/length]");
    for (int c = 0; c < sp.retained(); ++c) csv.row(c, sp.values(c), sp.oscillation(c));
    return csv.str();
}

inline std::string recovered_csv(const std::vector<RecoveredEigenvalue>& v) {
    Csv csv("rank,lambda,residue_trace,multiplicity");
    for (std::size_t i = 0; i < v.size(); ++i) csv.row(i + 1, v[i].lambda, v[i].weight, v[i].multiplicity);
    return csv.str();
}

inline std::string profile_csv(const BumpProfile& p) {
    Csv csv("t,trace_phi");
    const Eigen::VectorXd tr = p.trace();
    for (int i = 0; i < p.t.size(); ++i) csv.row(p.t(i), tr(i));
    return csv.str();
}

inline std::string history_csv(const std::vector<IterationRecord>& h) {
    Csv csv("iter,I,objective,misfit,gamma,alpha,beta");
    for (const auto& r : h) csv.row(r.iteration, r.level, r.objective, r.misfit, r.gamma, r.alpha, r.beta);
    return csv.str();
}

inline std::string pulse_csv(const PulseSignal& s, const ContrastCurve& c) {
    Csv csv("t[time],re_h,im_h,re_lambda,im_lambda");
    int j = 0;
    for (int k = 0; k < s.size(); ++k) {
        while (j < c.size() && c.t(j) < s.t(k)) ++j;
        if (j < c.size() && c.t(j) == s.t(k))
            csv.row(s.t(k), s.values(k).real(), s.values(k).imag(), c.lambda(j).real(), c.lambda(j).imag());
    }
    return csv.str();
}

inline std::string multibody_csv(const std::vector<SweepPoint>& sweep) {
    Csv csv("offset[length],separation[length],rank,eigenvalue,trajectory");
    for (const auto& p : sweep)
        for (std::size_t i = 0; i < p.values.size(); ++i) csv.row(p.offset, p.separation, i + 1, p.values[i], p.trajectory[i]);
    return csv.str();
}

inline json to_json(const DesignReport& r) {
    json levels = json::array();
    for (const auto& l : r.levels)
        levels.push_back({{"level", l.level}, {"iterations", l.iterations}, {"stagnated", l.stagnated},
                          {"full_misfit", l.full_misfit}});
    return {{"schema", schema_tag("design_report")},
            {"targets", r.targets},
            {"chosen_level", r.chosen_level},
            {"final_eigenvalues", r.final_eigenvalues},
            {"relative_residuals", r.relative_residuals},
            {"all_stagnated", r.all_stagnated},
            {"levels", levels}};
}

/// Target eigenvalues from CSV: the last column of every row that parses as a number.
inline std::vector<double> read_targets_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open " + path);
    std::vector<double> out;
    std::string line;
    while (std::getline(in, line)) {
        const auto comma = line.find_last_of(',');
        const std::string field = comma == std::string::npos ? line : line.substr(comma + 1);
        try {
            std::size_t used = 0;
            const double v = std::stod(field, &used);
            if (field.find_first_not_of(" \t\r", used) == std::string::npos) out.push_back(v);
        } catch (const std::exception&) {
        }
    }
    if (out.empty()) throw InvalidArgument(path + " holds no target values");
    return out;
}

} // namespace npspec::io
