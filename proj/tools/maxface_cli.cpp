#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "maxface/json_io.hpp"
#include "maxface/sampler.hpp"

namespace fs = std::filesystem;
using namespace maxface;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitInvalidInput = 2;
constexpr int kExitNumerical = 3;

Json load_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path.string());
    Json j;
    try {
        in >> j;
    } catch (const Json::exception& e) {
        throw InvalidInput("malformed JSON in " + path.string() + ": " + e.what());
    }
    return j;
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw NumericalFailure("cannot write " + path.string());
    out << text;
}

void apply_tol_overrides(Tolerances& tol, const std::vector<std::string>& kvs) {
    for (const std::string& kv : kvs) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw InvalidInput("--tol expects KEY=VAL, got " + kv);
        std::string key = kv.substr(0, eq);
        double val = 0.0;
        try {
            val = std::stod(kv.substr(eq + 1));
        } catch (const std::exception&) {
            throw InvalidInput("--tol " + key + ": value is not a number");
        }
        if (key == "tau_gcd") tol.tau_gcd = val;
        else if (key == "tau_cluster") tol.tau_cluster = val;
        else if (key == "tau_rank") tol.tau_rank = val;
        else if (key == "residual") tol.residual = val;
        else if (key == "period") tol.period = val;
        else if (key == "quadrature") tol.quadrature = val;
        else if (key == "end_unit_margin") tol.end_unit_margin = val;
        else throw InvalidInput("--tol: unknown key " + key);
    }
}

void apply_tol_json(Tolerances& tol, const Json& j) {
    std::vector<std::string> kvs;
    for (auto it = j.begin(); it != j.end(); ++it)
        kvs.push_back(it.key() + "=" + std::to_string(it.value().get<double>()));
    apply_tol_overrides(tol, kvs);
}

Complex pick_base_point(const std::vector<PointExt>& punctures) {
    const Complex candidates[] = {Complex(0.0), Complex(1.0), Complex(0.5), Complex(0.0, 1.0),
                                  Complex(-1.0), Complex(2.0), Complex(0.0, -1.0), Complex(1.5, 0.5)};
    for (Complex c : candidates) {
        bool ok = true;
        for (const auto& p : punctures)
            if (!p.is_inf() && std::abs(c - p.z) < 0.2) ok = false;
        if (ok) return c;
    }
    // fall back to a point right of everything
    double far = 0.0;
    for (const auto& p : punctures)
        if (!p.is_inf()) far = std::max(far, std::abs(p.z));
    return Complex(far + 1.0, 0.0);
}

bool overall_pass(const VerificationReport& r) {
    bool all_complete = true;
    for (const auto& e : r.ends) all_complete = all_complete && e.complete;
    return r.is_maximal_map && r.compactness.pass && all_complete;
}

void print_verification(const VerificationReport& r, bool as_json) {
    if (as_json) {
        std::cout << to_json(r).dump(2) << "\n";
        return;
    }
    std::cout << "periods:     " << (r.periods.pass ? "pass" : "FAIL") << " (worst |Re period| = "
              << r.periods.worst << ")\n";
    std::cout << "divisor:     " << (r.divisor.pass ? "pass" : "FAIL") << "\n";
    for (const auto& m : r.divisor.mismatches) std::cout << "  mismatch: " << m << "\n";
    for (const auto& e : r.ends) {
        std::cout << "end " << e.p.str() << ": |g| = ";
        if (std::isfinite(e.abs_g)) std::cout << e.abs_g;
        else std::cout << "inf";
        std::cout << ", ord(omega) = " << e.order_omega << ", ord(g^2 omega) = " << e.order_g2omega
                  << (e.light_like ? ", LIGHT-LIKE" : e.complete ? ", complete" : ", INCOMPLETE")
                  << (e.simple ? " (simple)" : "") << "\n";
    }
    std::cout << "compactness: " << (r.compactness.pass ? "pass" : "FAIL") << "\n";
    for (const auto& [p, m] : r.compactness.margins)
        std::cout << "  margin near " << p.str() << ": " << m << "\n";
    std::cout << "maximal map: " << (r.is_maximal_map ? "yes" : "no")
              << ", maxface: " << (r.is_maxface ? "yes" : "no") << "\n";
}

struct ConstructOutput {
    WeierstrassData data;
    Json report;
};

ConstructOutput run_construct(const Json& spec, uint64_t seed, const Tolerances& tol) {
    int variants = spec.contains("g") + spec.contains("blaschke") + spec.contains("singular_curve");
    if (variants != 1)
        throw InvalidInput("job spec: exactly one of \"g\", \"blaschke\", \"singular_curve\" required");

    RationalFn g_raw;
    if (spec.contains("g")) {
        g_raw = rational_from_json(spec.at("g"));
    } else if (spec.contains("blaschke")) {
        g_raw = build_blaschke(blaschke_from_json(spec.at("blaschke")));
    } else {
        g_raw = compose_singular_curve(singular_curve_from_json(spec.at("singular_curve")));
    }
    if (g_raw.is_constant()) throw InvalidInput("job spec: Gauss map is constant");

    auto [mu, g] = normalize_pole_at_infinity(g_raw);

    SolverConfig cfg;
    cfg.tol = tol;
    cfg.seed = seed;

    std::vector<Complex> simple_pts;
    if (spec.contains("simple_ends"))
        for (const auto& e : spec.at("simple_ends")) simple_pts.push_back(complex_from_json(e));

    auto [omega, report] = simple_pts.empty() ? solve_complete_ends(g, cfg)
                                              : solve_simple_ends(g, simple_pts, cfg);

    WeierstrassData data;
    data.g = g;
    data.omega = omega;
    Divisor g_poles = pole_divisor(g);
    for (const auto& [p, m] : g_poles.entries()) data.punctures.push_back(p);
    for (Complex q : simple_pts) data.punctures.push_back(PointExt::at(q));

    Json jreport;
    jreport["solver"] = to_json(report);
    jreport["chart"] = to_json(mu);

    if (spec.contains("perturb") && spec.at("perturb").value("enabled", false)) {
        double eps = spec.at("perturb").value("epsilon", 0.0);
        if (!(eps > 0.0)) throw InvalidInput("job spec: perturb.epsilon must be positive");
        PerturbationResult pr = perturb_to_maxface(data.g, data.omega, eps, cfg);
        data.g = pr.g_tilde;
        for (Complex zq : pr.new_ends) data.punctures.push_back(PointExt::at(zq));
        jreport["perturbation"] = to_json(pr.report);
        jreport["g0"] = to_json(pr.g0);
    }
    data.base_point = pick_base_point(data.punctures);
    return {data, jreport};
}

int do_construct(const fs::path& spec_path, const fs::path& outdir, uint64_t seed,
                 const std::vector<std::string>& tol_kvs) {
    Json spec = load_json(spec_path);
    Tolerances tol;
    if (spec.contains("tolerances")) apply_tol_json(tol, spec.at("tolerances"));
    apply_tol_overrides(tol, tol_kvs);
    if (spec.contains("seed")) seed = spec.at("seed").get<uint64_t>();

    ConstructOutput out = run_construct(spec, seed, tol);
    write_file(outdir / "data.json", to_json(out.data).dump(2) + "\n");
    write_file(outdir / "report.json", out.report.dump(2) + "\n");
    std::cout << "wrote " << (outdir / "data.json").string() << "\n";
    std::cout << "solver residual: " << out.report["solver"]["residual"].get<double>() << "\n";
    return kExitPass;
}

int do_verify(const fs::path& data_path, bool as_json, const std::vector<std::string>& tol_kvs) {
    WeierstrassData data = weierstrass_from_json(load_json(data_path));
    Tolerances tol;
    apply_tol_overrides(tol, tol_kvs);
    VerificationReport r = verify_all(data, tol);
    print_verification(r, as_json);
    return overall_pass(r) ? kExitPass : kExitVerifyFail;
}

struct Window {
    double x0 = -2, x1 = 2, y0 = -2, y1 = 2;
};

Window parse_window(const std::string& s) {
    Window w;
    if (std::sscanf(s.c_str(), "%lf,%lf,%lf,%lf", &w.x0, &w.x1, &w.y0, &w.y1) != 4)
        throw InvalidInput("--window expects x0,x1,y0,y1");
    if (!(w.x1 > w.x0) || !(w.y1 > w.y0)) throw InvalidInput("--window: empty window");
    return w;
}

int do_sample(const fs::path& data_path, const std::string& window, int resolution, double exclusion,
              const fs::path& out) {
    if (resolution < 16) throw InvalidInput("sample: resolution must be at least 16");
    WeierstrassData data = weierstrass_from_json(load_json(data_path));
    Window w = parse_window(window);
    MeshDomain dom = mesh_domain(Complex(w.x0, w.y0), Complex(w.x1, w.y1), resolution, resolution,
                                 data.punctures, exclusion);
    SampledSurface surf = integrate_tree(data, dom);
    std::ostringstream os;
    export_obj(surf, os);
    write_file(out, os.str());
    std::cout << "wrote " << out.string() << " (" << surf.positions.size() << " vertices)\n";
    std::cout << "max_loop_defect: " << surf.max_loop_defect << "\n";
    return kExitPass;
}

int do_singular(const fs::path& data_path, const std::string& window, int resolution, const fs::path& out) {
    if (resolution < 16) throw InvalidInput("singular: resolution must be at least 16");
    WeierstrassData data = weierstrass_from_json(load_json(data_path));
    Window w = parse_window(window);
    CurveExtraction curves =
        singular_curve_extract(data.g, Complex(w.x0, w.y0), Complex(w.x1, w.y1), resolution);
    std::ostringstream os;
    export_csv(curves.components, os);
    write_file(out, os.str());
    int closed = 0;
    for (bool c : curves.closed) closed += c;
    std::cout << "wrote " << out.string() << " (" << curves.components.size() << " components, " << closed
              << " closed)\n";
    return kExitPass;
}

int verify_data(const WeierstrassData& data, const Tolerances& tol) {
    VerificationReport r = verify_all(data, tol);
    print_verification(r, false);
    return overall_pass(r) ? kExitPass : kExitVerifyFail;
}

int do_demo(const std::string& name, const fs::path& outdir, uint64_t seed,
            const std::vector<std::string>& tol_kvs) {
    Tolerances tol;
    apply_tol_overrides(tol, tol_kvs);
    fs::create_directories(outdir);

    if (name == "catenoid") {
        WeierstrassData data;
        data.g = RationalFn::identity();
        data.omega = RationalFn(Poly::one(), Poly::monomial(2));
        data.punctures = {PointExt::at(Complex(0.0)), PointExt::inf()};
        data.base_point = Complex(1.0);
        write_file(outdir / "data.json", to_json(data).dump(2) + "\n");
        int rc = verify_data(data, tol);
        MeshDomain dom = mesh_domain(Complex(-2.5, -2.5), Complex(2.5, 2.5), 64, 64, data.punctures, 0.3);
        SampledSurface surf = integrate_tree(data, dom);
        std::ostringstream os;
        export_obj(surf, os);
        write_file(outdir / "mesh.obj", os.str());
        std::cout << "max_loop_defect: " << surf.max_loop_defect << "\n";
        return rc;
    }
    if (name == "jorge-meeks") {
        WeierstrassData data;
        data.g = Complex(0.0, 1.0) * RationalFn(Poly::monomial(2), Poly::one());
        Poly d = Poly::monomial(3) - Poly::one();
        data.omega = RationalFn(Poly::one(), d * d);
        data.punctures = {PointExt::inf()};
        for (const auto& rc : poly_roots(d)) data.punctures.push_back(PointExt::at(rc.root));
        data.base_point = Complex(0.0);
        write_file(outdir / "data.json", to_json(data).dump(2) + "\n");
        return verify_data(data, tol);
    }
    if (name == "twinpole") {
        Json spec;
        spec["g"] = Json{{"num", Json::array({Json::array({1.0, 0.0}), Json::array({0.0, 0.0}),
                                              Json::array({1.0, 0.0})})},
                         {"den", Json::array({Json::array({0.0, 0.0}), Json::array({1.0, 0.0})})}};
        ConstructOutput plain = run_construct(spec, seed, tol);
        write_file(outdir / "data_maximal_map.json", to_json(plain.data).dump(2) + "\n");
        std::cout << "--- unperturbed (maximal map, branch points expected) ---\n";
        int rc1 = verify_data(plain.data, tol);
        std::cout << "unperturbed verify exit: " << rc1 << "\n";
        spec["perturb"] = Json{{"enabled", true}, {"epsilon", 1e-2}};
        ConstructOutput pert = run_construct(spec, seed, tol);
        write_file(outdir / "data_maxface.json", to_json(pert.data).dump(2) + "\n");
        write_file(outdir / "report.json", pert.report.dump(2) + "\n");
        std::cout << "--- perturbed (maxface) ---\n";
        return verify_data(pert.data, tol);
    }
    if (name == "fujimori") {
        // G = (z-1)(z^2+3z+1) / ((z+1)(z^2-3z+1))
        Poly num = Poly::from_roots(Complex(1.0), {Complex(1.0)}) * Poly({Complex(1.0), Complex(3.0), Complex(1.0)});
        Poly den = Poly::from_roots(Complex(1.0), {Complex(-1.0)}) * Poly({Complex(1.0), Complex(-3.0), Complex(1.0)});
        RationalFn G(num, den);
        Json spec;
        spec["g"] = to_json(G);
        ConstructOutput out = run_construct(spec, seed, tol);
        write_file(outdir / "data.json", to_json(out.data).dump(2) + "\n");
        write_file(outdir / "report.json", out.report.dump(2) + "\n");
        CurveExtraction curves = singular_curve_extract(G, Complex(-4.0, -4.0), Complex(4.0, 4.0), 512);
        std::ostringstream os;
        export_csv(curves.components, os);
        write_file(outdir / "curve.csv", os.str());
        int closed = 0;
        for (bool c : curves.closed) closed += c;
        std::cout << "singular curve: " << curves.components.size() << " components, " << closed
                  << " closed\n";
        return verify_data(out.data, tol);
    }
    throw InvalidInput("demo: unknown name " + name + " (catenoid|twinpole|jorge-meeks|fujimori)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weierstrass data for genus-zero maximal maps and maxfaces"};
    app.require_subcommand(1);

    uint64_t seed = 1;
    std::vector<std::string> tol_kvs;
    app.add_option("--seed", seed, "random seed for kernel sampling");
    app.add_option("--tol", tol_kvs, "tolerance override KEY=VAL");

    std::string spec_path, data_path, window = "-2,2,-2,2", out_path, demo_name, outdir = "out";
    int resolution = 64;
    double exclusion = 0.15;
    bool as_json = false;

    auto* c = app.add_subcommand("construct", "build Weierstrass data from a job spec");
    c->add_option("spec", spec_path, "job spec JSON")->required();
    c->add_option("-o,--output", outdir, "output directory");

    auto* v = app.add_subcommand("verify", "verify a Weierstrass data file");
    v->add_option("data", data_path, "data JSON")->required();
    v->add_flag("--json", as_json, "machine-readable report");

    auto* s = app.add_subcommand("sample", "sample the immersion into an OBJ mesh");
    s->add_option("data", data_path, "data JSON")->required();
    s->add_option("--window", window, "x0,x1,y0,y1");
    s->add_option("--resolution", resolution, "grid resolution (>= 16)");
    s->add_option("--exclusion", exclusion, "radius excluded around punctures");
    s->add_option("-o,--output", out_path, "output OBJ path")->required();

    auto* sg = app.add_subcommand("singular", "extract the singular curve into CSV polylines");
    sg->add_option("data", data_path, "data JSON")->required();
    sg->add_option("--window", window, "x0,x1,y0,y1");
    sg->add_option("--resolution", resolution, "grid resolution (>= 16)");
    sg->add_option("-o,--output", out_path, "output CSV path")->required();

    auto* d = app.add_subcommand("demo", "run a built-in demo");
    d->add_option("name", demo_name, "catenoid|twinpole|jorge-meeks|fujimori")->required();
    d->add_option("-o,--output", outdir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c->parsed()) return do_construct(spec_path, outdir, seed, tol_kvs);
        if (v->parsed()) return do_verify(data_path, as_json, tol_kvs);
        if (s->parsed()) return do_sample(data_path, window, resolution, exclusion, out_path);
        if (sg->parsed()) return do_singular(data_path, window, resolution, out_path);
        if (d->parsed()) return do_demo(demo_name, outdir, seed, tol_kvs);
    } catch (const InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitInvalidInput;
    } catch (const NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitInvalidInput;
}
