#pragma once

// Quad-precision complex evaluation for contour quadrature. Polynomial
// coefficients stay in double (they are the data); evaluating them in
// __float128 removes the rounding noise that otherwise dominates loop
// integrals near high-order poles. Expanded products (e.g. g^2 omega) must
// not be used here: expanding in double already perturbs the residues, so
// integrands are always evaluated factor by factor.

#include <quadmath.h>

#include "maxface/rational.hpp"

namespace maxface {

struct QComplex {
    __float128 re = 0;
    __float128 im = 0;
};

inline QComplex qc(Complex z) { return {z.real(), z.imag()}; }
inline Complex to_complex(QComplex z) {
    return Complex(static_cast<double>(z.re), static_cast<double>(z.im));
}

inline QComplex operator+(QComplex a, QComplex b) { return {a.re + b.re, a.im + b.im}; }
inline QComplex operator-(QComplex a, QComplex b) { return {a.re - b.re, a.im - b.im}; }
inline QComplex operator*(QComplex a, QComplex b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
inline QComplex operator*(__float128 s, QComplex a) { return {s * a.re, s * a.im}; }
inline QComplex operator/(QComplex a, QComplex b) {
    __float128 d = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
}

inline QComplex qeval(const Poly& p, QComplex z) {
    QComplex acc{};
    const auto& c = p.coeffs();
    for (size_t i = c.size(); i-- > 0;) acc = acc * z + qc(c[i]);
    return acc;
}

inline QComplex qeval(const RationalFn& f, QComplex z) {
    return qeval(f.num(), z) / qeval(f.den(), z);
}

// point r e^{i t} with the angle reduced in quad precision
inline QComplex qcircle(double r, int k, int n) {
    __float128 t = 2.0Q * M_PIq * k / n;
    return {r * cosq(t), r * sinq(t)};
}

// quad-precision polynomial coefficients, ascending order; used to assemble
// linear combinations with one rounding at the end instead of one per term
using QPoly = std::vector<QComplex>;

inline QPoly qpoly_from_roots(Complex lead, const std::vector<Complex>& roots) {
    QPoly c{qc(lead)};
    for (Complex root : roots) {
        QComplex r = qc(root);
        c.push_back(QComplex{});
        for (size_t k = c.size() - 1; k > 0; --k) c[k] = c[k - 1] - r * c[k];
        c[0] = QComplex{} - r * c[0];
    }
    return c;
}

inline QPoly qpoly_mul(const QPoly& a, const QPoly& b) {
    QPoly c(a.size() + b.size() - 1);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) c[i + j] = c[i + j] + a[i] * b[j];
    return c;
}

// acc += s * a
inline void qpoly_axpy(QPoly& acc, QComplex s, const QPoly& a) {
    if (acc.size() < a.size()) acc.resize(a.size());
    for (size_t i = 0; i < a.size(); ++i) acc[i] = acc[i] + s * a[i];
}

inline Poly qpoly_round(const QPoly& a) {
    std::vector<Complex> c(a.size());
    for (size_t i = 0; i < a.size(); ++i) c[i] = to_complex(a[i]);
    return Poly(std::move(c));
}

}  // namespace maxface
