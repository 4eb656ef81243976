#pragma once

#include "maxface/rational.hpp"

namespace maxface {

// Finite Blaschke-type product mapping |z| = R to the unit circle. Zeros
// and poles listed with repetition for multiplicity, all strictly inside
// the circle.
struct BlaschkeSpec {
    double radius = 1.0;
    std::vector<Complex> zeros;
    std::vector<Complex> poles;
};

// Singular curve data: the curve is f^{-1}(|z| = R) and the Gauss map is
// the Blaschke product precomposed with f.
struct SingularCurveSpec {
    RationalFn precompose;
    BlaschkeSpec blaschke;
};

// Builds G with the prescribed zeros/poles inside |z| < R and reflected
// partners a' = R^2 / conj(a) outside, so |G| = 1 on the circle. Entries
// at the origin contribute the factors -z/R and -R/z.
RationalFn build_blaschke(const BlaschkeSpec& spec);

// g = G o f; validated by solving f(z) = R e^{i theta} on 64 angles and
// checking |g| = 1 at every preimage.
RationalFn compose_singular_curve(const SingularCurveSpec& spec);

// Mobius change of coordinates placing a pole of g at infinity. Returns
// (mu, g o mu); mu is the identity when a pole at infinity already exists,
// otherwise mu(z) = p + 1/z for the lexicographically smallest finite pole p.
std::pair<RationalFn, RationalFn> normalize_pole_at_infinity(const RationalFn& g);

}  // namespace maxface
