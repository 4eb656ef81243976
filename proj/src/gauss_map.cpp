#include "maxface/gauss_map.hpp"

#include <cmath>

namespace maxface {

RationalFn build_blaschke(const BlaschkeSpec& spec) {
    const double R = spec.radius;
    if (!(R > 0.0)) throw InvalidInput("build_blaschke: radius must be positive");
    for (Complex a : spec.zeros)
        if (std::abs(a) >= R) throw InvalidInput("build_blaschke: zero on or outside the circle");
    for (Complex b : spec.poles)
        if (std::abs(b) >= R) throw InvalidInput("build_blaschke: pole on or outside the circle");
    for (Complex a : spec.zeros)
        for (Complex b : spec.poles)
            if (std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)))
                throw InvalidInput("build_blaschke: coincident zero and pole");
    if (spec.zeros.empty() && spec.poles.empty())
        throw InvalidInput("build_blaschke: no zeros or poles given");

    Poly num = Poly::one();
    Poly den = Poly::one();
    const Poly z = Poly({Complex(0.0), Complex(1.0)});
    for (Complex a : spec.zeros) {
        if (a == Complex(0.0)) {
            num = num * (Complex(-1.0 / R) * z);
        } else {
            Complex ar = R * R / std::conj(a);
            num = num * (Complex(R) * (z - Poly({a})));
            den = den * (a * (z - Poly({ar})));
        }
    }
    for (Complex b : spec.poles) {
        if (b == Complex(0.0)) {
            num = num * Poly({Complex(-R)});
            den = den * z;
        } else {
            Complex br = R * R / std::conj(b);
            num = num * (b * (z - Poly({br})));
            den = den * (Complex(R) * (z - Poly({b})));
        }
    }
    return RationalFn(std::move(num), std::move(den));
}

RationalFn compose_singular_curve(const SingularCurveSpec& spec) {
    if (spec.precompose.is_constant())
        throw InvalidInput("compose_singular_curve: precompose map must be nonconstant");
    RationalFn G = build_blaschke(spec.blaschke);
    RationalFn g = compose(G, spec.precompose);
    if (g.is_constant()) throw InvalidInput("compose_singular_curve: composition degenerates to a constant");

    // sample the curve f(z) = R e^{i theta} and verify |g| = 1 there
    const double R = spec.blaschke.radius;
    const RationalFn& f = spec.precompose;
    int checked = 0;
    for (int k = 0; k < 64; ++k) {
        double theta = 2.0 * kPi * k / 64.0;
        Complex target = std::polar(R, theta);
        Poly probe = f.num() - target * f.den();
        if (probe.degree() < 1) continue;
        for (const auto& rc : poly_roots(probe)) {
            double m = std::abs(g.eval(rc.root));
            if (std::abs(m - 1.0) > 1e-8)
                throw NumericalFailure("compose_singular_curve: |g| != 1 on a preimage of the circle");
            ++checked;
        }
    }
    if (checked == 0) throw NumericalFailure("compose_singular_curve: no preimage points found");
    return g;
}

std::pair<RationalFn, RationalFn> normalize_pole_at_infinity(const RationalFn& g) {
    Divisor poles = pole_divisor(g);
    if (poles.size() == 0) throw InvalidInput("normalize_pole_at_infinity: g has no poles");
    if (poles.multiplicity(PointExt::inf()) > 0) return {RationalFn::identity(), g};
    // entries are ordered lexicographically, so the first is the chosen pole
    Complex p = poles.entries().begin()->first.z;
    // mu(z) = p + 1/z
    RationalFn mu(Poly({Complex(1.0), p}), Poly({Complex(0.0), Complex(1.0)}));
    return {mu, compose(g, mu)};
}

}  // namespace maxface
