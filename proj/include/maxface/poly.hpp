#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "maxface/common.hpp"

namespace maxface {

// Degree of the identically-zero polynomial ("minus infinity").
inline constexpr int kDegNegInf = std::numeric_limits<int>::min();

// Complex polynomial, coefficients ascending in degree, trailing zeros
// stripped on construction. Immutable in practice: all operations return
// new values.
class Poly {
  public:
    Poly() = default;
    explicit Poly(std::vector<Complex> coeffs);
    Poly(std::initializer_list<Complex> coeffs);

    static Poly one() { return Poly({Complex(1.0, 0.0)}); }
    static Poly monomial(int degree, Complex coeff = Complex(1.0, 0.0));
    // lead * prod (z - r_i), multiplicities given by repetition.
    static Poly from_roots(Complex lead, const std::vector<Complex>& roots);

    int degree() const { return c_.empty() ? kDegNegInf : static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    const std::vector<Complex>& coeffs() const { return c_; }
    Complex coeff(int k) const;
    Complex lead() const;
    double max_abs_coeff() const;
    // Drops leading coefficients at rounding level relative to the largest
    // one; they only manufacture spurious far-away roots.
    Poly trimmed(double rel_eps = 1e-12) const;

    Complex eval(Complex z) const;
    Poly derivative() const;
    // Coefficients of p(z) expressed in powers of (z - center).
    Poly taylor_shift(Complex center) const;
    // Coefficients reversed: z^deg * p(1/z).
    Poly reversed() const;
    Poly pow(int exponent) const;

    // Synthetic division by (z - root); remainder discarded.
    Poly deflate(Complex root) const;

    friend Poly operator+(const Poly& a, const Poly& b);
    friend Poly operator-(const Poly& a, const Poly& b);
    friend Poly operator*(const Poly& a, const Poly& b);
    friend Poly operator*(Complex s, const Poly& a);
    Poly operator-() const;

  private:
    void strip();
    std::vector<Complex> c_;
};

struct RootCluster {
    Complex root;
    int multiplicity = 1;
};

// All roots of p with multiplicities. Companion-matrix eigenvalues,
// Newton-polished, then clustered; multiple roots are re-refined on the
// (m-1)-th derivative where they are simple. Contract: reconstruction
// from the returned clusters matches p to 1e-10 relative coefficient error.
std::vector<RootCluster> poly_roots(const Poly& p, const Tolerances& tol = {});

}  // namespace maxface
