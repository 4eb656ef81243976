#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <sstream>

#include "maxface/gauss_map.hpp"
#include "maxface/json_io.hpp"
#include "maxface/period_solver.hpp"
#include "maxface/sampler.hpp"
#include "maxface/weierstrass.hpp"

using namespace maxface;

namespace {

// Contour-quadrature residue of a dz about p: (1/2 pi i) times the loop
// integral by the trapezoid rule, independent of the library's
// Laurent-extraction path.
Complex contour_residue_simple(const RationalFn& a, Complex p, double r) {
    const int N = 16384;
    Complex acc(0.0);
    for (int k = 0; k < N; ++k) {
        Complex e = std::polar(r, 2.0 * kPi * k / N);
        acc += a.eval(p + e) * e;
    }
    return acc / static_cast<double>(N);
}

}  // namespace

TEST_CASE("poly basics") {
    Poly p({Complex(1.0), Complex(0.0), Complex(3.0)});  // 1 + 3z^2
    CHECK(p.degree() == 2);
    CHECK(p.coeff(0) == Complex(1.0));
    CHECK(p.coeff(2) == Complex(3.0));
    CHECK(p.eval(Complex(2.0)) == Complex(13.0));

    Poly z = Poly::monomial(1);
    CHECK((z * z).degree() == 2);
    CHECK((p + (-p)).is_zero());
    CHECK(p.derivative().eval(Complex(1.0)) == Complex(6.0));

    Poly q = Poly::from_roots(Complex(2.0), {Complex(1.0), Complex(-1.0)});
    CHECK(std::abs(q.eval(Complex(1.0))) == doctest::Approx(0.0));
    CHECK(std::abs(q.eval(Complex(0.0)) - Complex(-2.0)) < 1e-14);
}

TEST_CASE("poly taylor shift matches evaluation") {
    Poly p({Complex(1.0, 2.0), Complex(-0.5), Complex(0.0, 1.0), Complex(2.0)});
    Complex c(0.7, -0.3);
    Poly s = p.taylor_shift(c);
    for (double t : {0.0, 0.4, -1.1}) {
        Complex z = c + Complex(t, 0.2 * t);
        CHECK(std::abs(s.eval(z - c) - p.eval(z)) < 1e-12);
    }
}

TEST_CASE("poly reversed, pow, deflate, trimmed") {
    Poly p({Complex(2.0), Complex(0.0), Complex(5.0)});
    Poly r = p.reversed();
    CHECK(r.coeff(0) == Complex(5.0));
    CHECK(r.coeff(2) == Complex(2.0));

    Poly z1 = Poly::from_roots(Complex(1.0), {Complex(3.0)});
    CHECK(z1.pow(3).degree() == 3);
    CHECK(std::abs(z1.pow(3).eval(Complex(4.0)) - Complex(1.0)) < 1e-14);

    Poly d = Poly::from_roots(Complex(1.0), {Complex(1.0), Complex(2.0)}).deflate(Complex(2.0));
    CHECK(d.degree() == 1);
    CHECK(std::abs(d.eval(Complex(1.0))) < 1e-14);

    Poly junk({Complex(1.0), Complex(1.0), Complex(1e-15)});
    CHECK(junk.trimmed().degree() == 1);
}

TEST_CASE("poly roots: simple, clustered, tiny leading coefficient") {
    std::vector<Complex> roots{Complex(0.3, 0.4), Complex(-1.2, 0.0), Complex(2.0, -1.0)};
    auto found = poly_roots(Poly::from_roots(Complex(2.0, 1.0), roots));
    REQUIRE(found.size() == 3);
    for (Complex r : roots) {
        double best = 1e9;
        for (const auto& rc : found) best = std::min(best, std::abs(rc.root - r));
        CHECK(best < 1e-9);
    }

    auto dbl = poly_roots(Poly::from_roots(Complex(1.0), {Complex(1.0, 1.0), Complex(1.0, 1.0), Complex(-2.0)}));
    REQUIRE(dbl.size() == 2);
    int mmax = 0;
    for (const auto& rc : dbl) mmax = std::max(mmax, rc.multiplicity);
    CHECK(mmax == 2);

    // a rounding-level leading coefficient must not produce a far-away root
    Poly withjunk({Complex(-1.0), Complex(1.0), Complex(1e-14)});
    auto rj = poly_roots(withjunk);
    REQUIRE(rj.size() == 1);
    CHECK(std::abs(rj[0].root - Complex(1.0)) < 1e-9);
}

TEST_CASE("rational reduction and order") {
    // (z-1)(z-2) / (z-2)(z-3) reduces to (z-1)/(z-3)
    RationalFn f(Poly::from_roots(Complex(1.0), {Complex(1.0), Complex(2.0)}),
                 Poly::from_roots(Complex(1.0), {Complex(2.0), Complex(3.0)}));
    CHECK(f.num().degree() == 1);
    CHECK(f.den().degree() == 1);
    CHECK(std::abs(f.eval(Complex(0.0)) - Complex(1.0 / 3.0)) < 1e-12);

    CHECK(order_at(f, PointExt::at(Complex(1.0))) == 1);
    CHECK(order_at(f, PointExt::at(Complex(3.0))) == -1);
    CHECK(order_at(f, PointExt::at(Complex(0.0))) == 0);
    CHECK(order_at(f, PointExt::inf()) == 0);

    RationalFn g(Poly::one(), Poly::from_roots(Complex(1.0), {Complex(0.0), Complex(0.0)}));
    CHECK(order_at(g, PointExt::at(Complex(0.0))) == -2);
    CHECK(order_at(g, PointExt::inf()) == 2);
}

TEST_CASE("residues match contour quadrature") {
    // 1/(z - i) + 3/(z + 2)^2 has residue 1 at i and 0 at -2
    RationalFn a = RationalFn(Poly::one(), Poly::from_roots(Complex(1.0), {Complex(0.0, 1.0)})) +
                   RationalFn(Poly({Complex(3.0)}),
                              Poly::from_roots(Complex(1.0), {Complex(-2.0), Complex(-2.0)}));
    Complex r1 = residue_at(a, PointExt::at(Complex(0.0, 1.0)));
    Complex r2 = residue_at(a, PointExt::at(Complex(-2.0)));
    CHECK(std::abs(r1 - Complex(1.0)) < 1e-12);
    CHECK(std::abs(r2) < 1e-12);
    CHECK(std::abs(r1 - contour_residue_simple(a, Complex(0.0, 1.0), 0.5)) < 1e-10);

    // residue at infinity balances the finite ones
    CHECK(std::abs(residue_sum_check(a)) < 1e-10);
}

TEST_CASE("principal part and leading laurent") {
    // 2/(z-1)^2 + 5/(z-1)
    Poly den = Poly::from_roots(Complex(1.0), {Complex(1.0), Complex(1.0)});
    Poly num = Poly({Complex(2.0)}) + Complex(5.0) * Poly::from_roots(Complex(1.0), {Complex(1.0)});
    auto pp = principal_part(num, den, PointExt::at(Complex(1.0)));
    REQUIRE(pp.size() == 2);
    CHECK(std::abs(pp[0] - Complex(5.0)) < 1e-12);  // residue
    CHECK(std::abs(pp[1] - Complex(2.0)) < 1e-12);  // (z-1)^{-2}

    RationalFn f(num, den);
    CHECK(std::abs(leading_laurent(f, PointExt::at(Complex(1.0))) - Complex(2.0)) < 1e-12);
}

TEST_CASE("form order and infinity chart") {
    RationalFn one = RationalFn::constant(Complex(1.0));
    CHECK(form_order_at(one, PointExt::inf()) == -2);  // dz has a double pole at infinity
    RationalFn invsq(Poly::one(), Poly::from_roots(Complex(1.0), {Complex(0.0), Complex(0.0)}));
    CHECK(form_order_at(invsq, PointExt::inf()) == 0);  // dz/z^2 is regular at infinity

    // residue of dz/z at infinity is -1
    RationalFn invz(Poly::one(), Poly::monomial(1));
    CHECK(std::abs(residue_at(invz, PointExt::inf()) + Complex(1.0)) < 1e-12);
}

TEST_CASE("divisors") {
    RationalFn f(Poly::from_roots(Complex(1.0), {Complex(2.0), Complex(2.0)}),
                 Poly::from_roots(Complex(1.0), {Complex(-1.0)}));
    Divisor zd = zero_divisor(f);
    Divisor pd = pole_divisor(f);
    CHECK(zd.multiplicity(PointExt::at(Complex(2.0))) == 2);
    CHECK(pd.multiplicity(PointExt::at(Complex(-1.0))) == 1);
    CHECK(pd.multiplicity(PointExt::inf()) == 1);
}

TEST_CASE("compose and derivative against finite differences") {
    RationalFn a(Poly({Complex(1.0), Complex(2.0)}), Poly({Complex(3.0), Complex(0.0), Complex(1.0)}));
    RationalFn b(Poly({Complex(0.5), Complex(0.0), Complex(1.0)}), Poly({Complex(1.0), Complex(1.0)}));
    RationalFn c = compose(a, b);
    for (Complex z : {Complex(0.3, 0.1), Complex(-1.4, 0.7)})
        CHECK(std::abs(c.eval(z) - a.eval(b.eval(z))) < 1e-12);

    RationalFn da = derivative(a);
    Complex z(0.4, -0.2);
    double h = 1e-6;
    Complex fd = (a.eval(z + Complex(h, 0.0)) - a.eval(z - Complex(h, 0.0))) / Complex(2.0 * h);
    CHECK(std::abs(da.eval(z) - fd) < 1e-7);
}

TEST_CASE("blaschke product keeps the circle") {
    BlaschkeSpec spec;
    spec.radius = 1.0;
    spec.zeros = {Complex(0.3, 0.2)};
    spec.poles = {Complex(-0.4, 0.1)};
    RationalFn G = build_blaschke(spec);
    for (int k = 0; k < 16; ++k) {
        Complex z = std::polar(1.0, 2.0 * kPi * k / 16.0);
        CHECK(std::abs(std::abs(G.eval(z)) - 1.0) < 1e-10);
    }

    BlaschkeSpec spec2;
    spec2.radius = 2.0;
    spec2.zeros = {Complex(0.5, -0.5), Complex(0.0, 0.0)};
    RationalFn G2 = build_blaschke(spec2);
    for (int k = 0; k < 16; ++k) {
        Complex z = std::polar(2.0, 2.0 * kPi * k / 16.0 + 0.1);
        CHECK(std::abs(std::abs(G2.eval(z)) - 1.0) < 1e-10);
    }
}

TEST_CASE("normalize pole at infinity") {
    RationalFn g = RationalFn::identity();  // pole already at infinity
    auto [mu, gn] = normalize_pole_at_infinity(g);
    CHECK(mu.num().degree() == 1);
    CHECK(order_at(gn, PointExt::inf()) < 0);

    RationalFn h(Poly::one(), Poly::from_roots(Complex(1.0), {Complex(2.0)}));  // pole at 2 only
    auto [mu2, hn] = normalize_pole_at_infinity(h);
    CHECK(order_at(hn, PointExt::inf()) < 0);
    for (Complex z : {Complex(0.5, 0.3), Complex(-1.0, 1.0)})
        CHECK(std::abs(hn.eval(z) - h.eval(mu2.eval(z))) < 1e-10);
}

TEST_CASE("basic residue system kernel annihilates the constraints") {
    // g = z + 1/z + 1/(z-1): three poles counting infinity
    RationalFn g = RationalFn::identity() + RationalFn(Poly::one(), Poly::monomial(1)) +
                   RationalFn(Poly::one(), Poly::from_roots(Complex(1.0), {Complex(1.0)}));
    Divisor pd = pole_divisor(g);
    AnsatzFamily fam = build_ansatz_basic(pd);
    ResidueSystem sys = assemble_residue_system(g, fam);
    auto kernel = nullspace(sys);
    CHECK(static_cast<int>(kernel.size()) >= static_cast<int>(pd.size()));
    for (const auto& v : kernel) CHECK((sys.matrix * v).norm() < 1e-8);
}

TEST_CASE("solve_complete_ends produces admissible data") {
    RationalFn g = RationalFn::identity() + RationalFn(Poly::one(), Poly::monomial(1));
    auto [omega, rep] = solve_complete_ends(g);
    CHECK(rep.residual <= 1e-9);

    Divisor pd = pole_divisor(g);
    for (const auto& [p, m] : pd.entries()) CHECK(form_order_at(omega, p) <= -2);

    WeierstrassData data;
    data.g = g;
    data.omega = omega;
    for (const auto& [p, m] : pd.entries()) data.punctures.push_back(p);
    data.base_point = Complex(0.5, 0.5);
    VerificationReport v = verify_all(data);
    CHECK(v.periods.pass);
    CHECK(v.compactness.pass);
}

TEST_CASE("solve_simple_ends adds residue-free double poles") {
    // g = z^2 + 1/z; critical points solve 2z = 1/z^2
    RationalFn g = RationalFn(Poly::monomial(2), Poly::one()) + RationalFn(Poly::one(), Poly::monomial(1));
    RationalFn dg = derivative(g);
    auto crit = poly_roots(dg.num());
    REQUIRE(!crit.empty());
    Complex q = crit[0].root;
    REQUIRE(std::abs(std::abs(g.eval(q)) - 1.0) > 1e-3);

    auto [omega, rep] = solve_simple_ends(g, {q});
    CHECK(rep.residual <= 1e-9);
    CHECK(form_order_at(omega, PointExt::at(q)) == -2);
    CHECK(std::abs(residue_at(omega, PointExt::at(q))) < 1e-9);
}

TEST_CASE("catenoid immersion satisfies the classical relation") {
    WeierstrassData cat;
    cat.g = RationalFn::identity();
    cat.omega = RationalFn(Poly::one(), Poly::monomial(2));
    cat.punctures = {PointExt::at(Complex(0.0)), PointExt::inf()};
    cat.base_point = Complex(1.0);

    for (Complex z : {Complex(0.5, 0.5), Complex(-1.3, 0.2), Complex(0.1, -1.7)}) {
        auto X = evaluate_immersion(cat, z);
        double lhs = X[0] * X[0] + X[1] * X[1];
        double sh = 2.0 * std::sinh(X[2] / 2.0);
        CHECK(std::abs(lhs - sh * sh) < 1e-7);
    }

    // metric factor: |1-|z|^2| / |z|^2
    Complex z(0.5, 0.25);
    double expected = std::abs(1.0 - std::norm(z)) / std::norm(z);
    CHECK(metric_factor(cat, z) == doctest::Approx(expected));
}

TEST_CASE("verification components on the catenoid") {
    WeierstrassData cat;
    cat.g = RationalFn::identity();
    cat.omega = RationalFn(Poly::one(), Poly::monomial(2));
    cat.punctures = {PointExt::at(Complex(0.0)), PointExt::inf()};
    cat.base_point = Complex(1.0);

    PeriodReport pr = verify_periods(cat);
    CHECK(pr.pass);
    CHECK(pr.worst < 1e-12);

    DivisorReport dr = check_divisor_condition(cat);
    CHECK(dr.pass);

    EndReport e0 = classify_end(cat, PointExt::at(Complex(0.0)));
    CHECK(e0.complete);
    CHECK(e0.simple);
    EndReport einf = classify_end(cat, PointExt::inf());
    CHECK(einf.complete);

    CHECK(singular_set_compactness(cat).pass);
    CHECK(verify_all(cat).is_maxface);
}

TEST_CASE("divisor check flags branch points") {
    WeierstrassData bad;
    bad.g = RationalFn::identity();
    // omega = (z - 2) dz / z^2: a stray simple zero off the pole set
    bad.omega = RationalFn(Poly::from_roots(Complex(1.0), {Complex(2.0)}), Poly::monomial(2));
    bad.punctures = {PointExt::at(Complex(0.0)), PointExt::inf()};
    DivisorReport dr = check_divisor_condition(bad);
    CHECK(!dr.pass);
    CHECK(dr.mismatches.size() == 1);
}

TEST_CASE("singular curve extraction finds the unit circle for g = z") {
    CurveExtraction c = singular_curve_extract(RationalFn::identity(), Complex(-2.0, -2.0),
                                               Complex(2.0, 2.0), 128);
    int closed = 0;
    for (bool b : c.closed) closed += b;
    CHECK(closed == 1);
    // every point of the closed component sits on |z| = 1
    for (size_t i = 0; i < c.components.size(); ++i) {
        if (!c.closed[i]) continue;
        for (Complex z : c.components[i]) CHECK(std::abs(std::abs(z) - 1.0) < 0.05);
    }
}

TEST_CASE("mesh domain and tree integration") {
    std::vector<PointExt> punct{PointExt::at(Complex(0.0)), PointExt::inf()};
    MeshDomain dom = mesh_domain(Complex(-2.0, -2.0), Complex(2.0, 2.0), 24, 24, punct, 0.3);
    CHECK(!dom.vertices.empty());
    for (Complex v : dom.vertices) CHECK(std::abs(v) > 0.3 - 1e-12);

    CHECK_THROWS_AS(mesh_domain(Complex(-1.0, -1.0), Complex(1.0, 1.0), 1, 8, punct, 0.1), InvalidInput);
    CHECK_THROWS_AS(mesh_domain(Complex(1.0, 0.0), Complex(-1.0, 1.0), 8, 8, punct, 0.1), InvalidInput);

    WeierstrassData cat;
    cat.g = RationalFn::identity();
    cat.omega = RationalFn(Poly::one(), Poly::monomial(2));
    cat.punctures = punct;
    cat.base_point = Complex(1.0);
    SampledSurface s = integrate_tree(cat, dom);
    CHECK(s.positions.size() == dom.vertices.size());
    CHECK(s.max_loop_defect < 1e-8);

    std::ostringstream os;
    export_obj(s, os);
    CHECK(os.str().find("v ") == 0);
    CHECK(os.str().find("f ") != std::string::npos);
}

TEST_CASE("json round trip") {
    WeierstrassData d;
    d.g = RationalFn(Poly({Complex(1.0, 2.0), Complex(0.0, -1.0)}), Poly({Complex(0.0), Complex(1.0)}));
    d.omega = RationalFn(Poly::one(), Poly::monomial(2));
    d.punctures = {PointExt::at(Complex(0.0)), PointExt::inf()};
    d.base_point = Complex(1.0, -0.5);

    Json j = to_json(d);
    WeierstrassData back = weierstrass_from_json(j);
    CHECK(back.punctures.size() == 2);
    CHECK(back.punctures[1].is_inf());
    CHECK(back.base_point == d.base_point);
    for (Complex z : {Complex(0.7, 0.1), Complex(-1.0, 2.0)}) {
        CHECK(std::abs(back.g.eval(z) - d.g.eval(z)) < 1e-15);
        CHECK(std::abs(back.omega.eval(z) - d.omega.eval(z)) < 1e-15);
    }

    CHECK_THROWS_AS(complex_from_json(Json::parse("[1]")), InvalidInput);
    CHECK_THROWS_AS(rational_from_json(Json::parse("{\"num\": []}")), InvalidInput);
}

TEST_CASE("perturbation turns the twin-pole map into a maxface") {
    RationalFn g = RationalFn::identity() + RationalFn(Poly::one(), Poly::monomial(1));
    auto [omega, rep] = solve_complete_ends(g);
    PerturbationResult pr = perturb_to_maxface(g, omega, 1e-2);
    CHECK(pr.report.residual <= 1e-9);
    CHECK(pr.new_ends.size() == poly_roots(omega.num()).size());
    CHECK(pr.new_ends.size() >= 2);

    // the perturbed map keeps a genuine double pole at each new end
    for (Complex zj : pr.new_ends) CHECK(order_at(pr.g_tilde, PointExt::at(zj)) == -2);

    // small away from the new poles
    double sup = 0.0;
    for (int k = 0; k < 64; ++k) {
        Complex z = Complex(3.0, 0.0) + std::polar(0.5, 2.0 * kPi * k / 64.0);
        sup = std::max(sup, std::abs(pr.g_tilde.eval(z) - g.eval(z)));
    }
    CHECK(sup <= 1e-2);

    WeierstrassData data;
    data.g = pr.g_tilde;
    data.omega = omega;
    Divisor pd = pole_divisor(g);
    for (const auto& [p, m] : pd.entries()) data.punctures.push_back(p);
    for (Complex zj : pr.new_ends) data.punctures.push_back(PointExt::at(zj));
    data.base_point = Complex(0.4, 0.4);
    VerificationReport v = verify_all(data);
    CHECK(v.is_maxface);
}
