#pragma once

#include <map>
#include <string>
#include <vector>

#include "maxface/poly.hpp"

namespace maxface {

// Point of the extended complex plane. Infinity is a tag, never a large
// finite number.
struct PointExt {
    bool infinite = false;
    Complex z{0.0, 0.0};

    static PointExt inf() { return PointExt{true, Complex(0.0)}; }
    static PointExt at(Complex w) { return PointExt{false, w}; }
    bool is_inf() const { return infinite; }
    std::string str() const;
};

bool operator==(const PointExt& a, const PointExt& b);

// Lexicographic on (re, im); infinity sorts last.
struct PointExtLess {
    bool operator()(const PointExt& a, const PointExt& b) const;
};

// Finite formal sum of extended points with nonzero integer multiplicities.
class Divisor {
  public:
    void add(const PointExt& p, int mult);
    int multiplicity(const PointExt& p) const;
    const std::map<PointExt, int, PointExtLess>& entries() const { return entries_; }
    size_t size() const { return entries_.size(); }
    int total_degree() const;

  private:
    std::map<PointExt, int, PointExtLess> entries_;
};

// Reduced quotient of complex polynomials; denominator monic, no common
// roots within tau_gcd. The reduction runs on construction.
class RationalFn {
  public:
    RationalFn() : num_(), den_(Poly::one()) {}
    RationalFn(Poly num, Poly den, const Tolerances& tol = {});

    static RationalFn from_poly(Poly p) { return RationalFn(std::move(p), Poly::one()); }
    // num/den taken as already coprime; skips the root-pairing reduction,
    // which scatters high-multiplicity clusters and misses cancellations.
    static RationalFn unreduced(Poly num, Poly den);
    static RationalFn constant(Complex c) { return from_poly(Poly({c})); }
    static RationalFn identity() { return from_poly(Poly({Complex(0.0), Complex(1.0)})); }

    const Poly& num() const { return num_; }
    const Poly& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }
    bool is_constant() const { return num_.degree() <= 0 && den_.degree() == 0; }

    Complex eval(Complex z) const { return num_.eval(z) / den_.eval(z); }
    // |value| at an extended point, +inf at poles.
    double abs_at(const PointExt& p) const;

  private:
    Poly num_;
    Poly den_;
};

RationalFn operator+(const RationalFn& a, const RationalFn& b);
RationalFn operator-(const RationalFn& a, const RationalFn& b);
RationalFn operator*(const RationalFn& a, const RationalFn& b);
RationalFn operator/(const RationalFn& a, const RationalFn& b);
RationalFn operator*(Complex s, const RationalFn& a);

// a(b(z)); degenerating to a constant is allowed and yields that constant.
RationalFn compose(const RationalFn& a, const RationalFn& b);
RationalFn derivative(const RationalFn& a);

// Zero/pole order of the function at p: positive = zero, negative = pole,
// 0 = finite nonzero. At infinity: deg den - deg num.
int order_at(const RationalFn& a, const PointExt& p);

// Residue of the 1-form a dz at p. At infinity the substitution w = 1/z,
// dz = -dw/w^2 is applied first. Regular points return 0.
Complex residue_at(const RationalFn& a, const PointExt& p);

// Sum of residues of a dz over every pole including infinity; identically 0
// in exact arithmetic.
Complex residue_sum_check(const RationalFn& a);

// Coefficient of (z-p)^{order} in the Laurent expansion at p where order is
// the (negative) pole order of the function; used to test pole presence.
Complex leading_laurent(const RationalFn& a, const PointExt& p);

// Order of the 1-form a dz at p (at infinity: function order minus 2).
int form_order_at(const RationalFn& a, const PointExt& p);

// Coefficient function of the form a dz in the chart w = 1/z:
// -a(1/w)/w^2.
RationalFn form_at_infinity_chart(const RationalFn& a);

// Residue of the form (num/den) dz at p, without reducing the quotient.
Complex residue_quotient_at(const Poly& num, const Poly& den, const PointExt& p);

// Principal part of the form (num/den) dz at p: entry j is the coefficient
// of (z-p)^{-(j+1)} (so entry 0 is the residue). Length equals the
// denominator vanishing order at p; entries beyond the true pole order are
// numerically negligible when num also vanishes there. At infinity the
// chart w = 1/z is applied first.
std::vector<Complex> principal_part(const Poly& num, const Poly& den, const PointExt& p);

// Poles of a with multiplicities, including infinity when deg num > deg den.
Divisor pole_divisor(const RationalFn& a);
// Zeros of a with multiplicities, including infinity when deg den > deg num.
Divisor zero_divisor(const RationalFn& a);

}  // namespace maxface
