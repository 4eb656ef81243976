#include "maxface/rational.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace maxface {

namespace {
// Relative threshold deciding whether a Taylor coefficient is "really" zero.
constexpr double kSigTol = 1e-9;

int significant_index(const Poly& shifted) {
    const auto& c = shifted.coeffs();
    double scale = shifted.max_abs_coeff();
    if (scale == 0.0) return -1;
    for (size_t i = 0; i < c.size(); ++i)
        if (std::abs(c[i]) > kSigTol * scale) return static_cast<int>(i);
    return -1;
}
}  // namespace

std::string PointExt::str() const {
    if (infinite) return "inf";
    std::ostringstream os;
    os << z.real() << (z.imag() < 0 ? "" : "+") << z.imag() << "i";
    return os.str();
}

bool operator==(const PointExt& a, const PointExt& b) {
    if (a.infinite || b.infinite) return a.infinite == b.infinite;
    return a.z == b.z;
}

bool PointExtLess::operator()(const PointExt& a, const PointExt& b) const {
    if (a.infinite != b.infinite) return b.infinite;  // infinity last
    if (a.infinite) return false;
    if (a.z.real() != b.z.real()) return a.z.real() < b.z.real();
    return a.z.imag() < b.z.imag();
}

void Divisor::add(const PointExt& p, int mult) {
    if (mult == 0) return;
    auto it = entries_.find(p);
    if (it == entries_.end()) {
        entries_.emplace(p, mult);
    } else {
        it->second += mult;
        if (it->second == 0) entries_.erase(it);
    }
}

int Divisor::multiplicity(const PointExt& p) const {
    auto it = entries_.find(p);
    return it == entries_.end() ? 0 : it->second;
}

int Divisor::total_degree() const {
    int t = 0;
    for (const auto& [p, m] : entries_) t += m;
    return t;
}

RationalFn::RationalFn(Poly num, Poly den, const Tolerances& tol)
    : num_(num.trimmed()), den_(den.trimmed()) {
    if (den_.is_zero()) throw InvalidInput("RationalFn: zero denominator");
    if (num_.is_zero()) {
        den_ = Poly::one();
        return;
    }
    if (num_.degree() > 0 && den_.degree() > 0) {
        auto rn = poly_roots(num_, tol);
        auto rd = poly_roots(den_, tol);
        for (auto& n : rn) {
            for (auto& d : rd) {
                while (n.multiplicity > 0 && d.multiplicity > 0 &&
                       std::abs(n.root - d.root) <= tol.tau_gcd * std::max(1.0, std::abs(n.root))) {
                    Complex r = 0.5 * (n.root + d.root);
                    num_ = num_.deflate(r);
                    den_ = den_.deflate(r);
                    --n.multiplicity;
                    --d.multiplicity;
                }
            }
        }
    }
    Complex dl = den_.lead();
    den_ = (Complex(1.0) / dl) * den_;
    num_ = (Complex(1.0) / dl) * num_;
}

RationalFn RationalFn::unreduced(Poly num, Poly den) {
    RationalFn f;
    f.num_ = num.trimmed();
    f.den_ = den.trimmed();
    if (f.den_.is_zero()) throw InvalidInput("RationalFn: zero denominator");
    if (f.num_.is_zero()) {
        f.den_ = Poly::one();
        return f;
    }
    Complex dl = f.den_.lead();
    f.den_ = (Complex(1.0) / dl) * f.den_;
    f.num_ = (Complex(1.0) / dl) * f.num_;
    return f;
}

double RationalFn::abs_at(const PointExt& p) const {
    int ord = order_at(*this, p);
    if (ord < 0) return std::numeric_limits<double>::infinity();
    if (ord > 0) return 0.0;
    if (p.is_inf()) return std::abs(num_.lead() / den_.lead());
    return std::abs(eval(p.z));
}

RationalFn operator+(const RationalFn& a, const RationalFn& b) {
    return RationalFn(a.num() * b.den() + b.num() * a.den(), a.den() * b.den());
}

RationalFn operator-(const RationalFn& a, const RationalFn& b) {
    return RationalFn(a.num() * b.den() - b.num() * a.den(), a.den() * b.den());
}

RationalFn operator*(const RationalFn& a, const RationalFn& b) {
    return RationalFn(a.num() * b.num(), a.den() * b.den());
}

RationalFn operator/(const RationalFn& a, const RationalFn& b) {
    if (b.is_zero()) throw InvalidInput("RationalFn: division by the zero function");
    return RationalFn(a.num() * b.den(), a.den() * b.num());
}

RationalFn operator*(Complex s, const RationalFn& a) { return RationalFn(s * a.num(), a.den()); }

RationalFn compose(const RationalFn& a, const RationalFn& b) {
    const int M = std::max(a.num().degree(), a.den().degree());
    if (M <= 0) return a;  // constant a
    Poly pn, pd;
    // sum_i c_i N^i D^{M-i} for both layers
    std::vector<Poly> npow(static_cast<size_t>(M) + 1), dpow(static_cast<size_t>(M) + 1);
    npow[0] = Poly::one();
    dpow[0] = Poly::one();
    for (int i = 1; i <= M; ++i) {
        npow[static_cast<size_t>(i)] = npow[static_cast<size_t>(i - 1)] * b.num();
        dpow[static_cast<size_t>(i)] = dpow[static_cast<size_t>(i - 1)] * b.den();
    }
    for (int i = 0; i <= M; ++i) {
        Poly term = npow[static_cast<size_t>(i)] * dpow[static_cast<size_t>(M - i)];
        pn = pn + a.num().coeff(i) * term;
        pd = pd + a.den().coeff(i) * term;
    }
    if (pd.is_zero()) throw NumericalFailure("compose: denominator vanished identically");
    return RationalFn(std::move(pn), std::move(pd));
}

RationalFn derivative(const RationalFn& a) {
    return RationalFn(a.num().derivative() * a.den() - a.num() * a.den().derivative(), a.den() * a.den());
}

int order_at(const RationalFn& a, const PointExt& p) {
    if (a.is_zero()) throw InvalidInput("order_at: zero function");
    if (p.is_inf()) return a.den().degree() - a.num().degree();
    int on = significant_index(a.num().taylor_shift(p.z));
    int od = significant_index(a.den().taylor_shift(p.z));
    return on - od;
}

namespace {

// series coefficients T_0..T_{kd-1} of num_shift / (den_shift >> kd)
std::vector<Complex> cofactor_series(const Poly& ns, const Poly& ds, int kd) {
    std::vector<Complex> t(static_cast<size_t>(kd), Complex(0.0));
    Complex q0 = ds.coeff(kd);
    for (int i = 0; i < kd; ++i) {
        Complex acc = ns.coeff(i);
        for (int j = 1; j <= i; ++j) acc -= ds.coeff(kd + j) * t[static_cast<size_t>(i - j)];
        t[static_cast<size_t>(i)] = acc / q0;
    }
    return t;
}

void chart_at_infinity(const Poly& num, const Poly& den, Poly* cnum, Poly* cden) {
    int e = den.degree() - num.degree() - 2;
    Poly rn = num.reversed();
    Poly rd = den.reversed();
    if (e >= 0) {
        *cnum = Complex(-1.0) * (rn * Poly::monomial(e));
        *cden = rd;
    } else {
        *cnum = Complex(-1.0) * rn;
        *cden = rd * Poly::monomial(-e);
    }
}

// Residue via the Taylor development of the regular cofactor num/(den/(z-p)^k).
Complex residue_finite(const Poly& num, const Poly& den, Complex p) {
    Poly ds = den.taylor_shift(p);
    int k = significant_index(ds);
    if (k <= 0) return Complex(0.0);
    Poly ns = num.taylor_shift(p);
    return cofactor_series(ns, ds, k)[static_cast<size_t>(k - 1)];
}

}  // namespace

Complex residue_quotient_at(const Poly& num, const Poly& den, const PointExt& p) {
    if (num.is_zero()) return Complex(0.0);
    if (p.is_inf()) {
        Poly cn, cd;
        chart_at_infinity(num, den, &cn, &cd);
        return residue_finite(cn, cd, Complex(0.0));
    }
    return residue_finite(num, den, p.z);
}

std::vector<Complex> principal_part(const Poly& num, const Poly& den, const PointExt& p) {
    if (num.is_zero()) return {};
    if (p.is_inf()) {
        Poly cn, cd;
        chart_at_infinity(num, den, &cn, &cd);
        return principal_part(cn, cd, PointExt::at(Complex(0.0)));
    }
    Poly ds = den.taylor_shift(p.z);
    int kd = significant_index(ds);
    if (kd <= 0) return {};
    Poly ns = num.taylor_shift(p.z);
    std::vector<Complex> t = cofactor_series(ns, ds, kd);
    // t_i multiplies (z-p)^{i-kd}; reorder so entry j is the (z-p)^{-(j+1)} coefficient
    std::vector<Complex> pp(static_cast<size_t>(kd));
    for (int j = 1; j <= kd; ++j) pp[static_cast<size_t>(j - 1)] = t[static_cast<size_t>(kd - j)];
    return pp;
}

RationalFn form_at_infinity_chart(const RationalFn& a) {
    const int N = a.num().degree();
    const int D = a.den().degree();
    Poly rn = a.num().reversed();
    Poly rd = a.den().reversed();
    int e = D - N - 2;
    if (e >= 0) {
        return RationalFn(Complex(-1.0) * (rn * Poly::monomial(e)), rd);
    }
    return RationalFn(Complex(-1.0) * rn, rd * Poly::monomial(-e));
}

Complex residue_at(const RationalFn& a, const PointExt& p) {
    if (a.is_zero()) return Complex(0.0);
    if (p.is_inf()) {
        RationalFn w = form_at_infinity_chart(a);
        return residue_finite(w.num(), w.den(), Complex(0.0));
    }
    return residue_finite(a.num(), a.den(), p.z);
}

Complex residue_sum_check(const RationalFn& a) {
    Complex sum = residue_at(a, PointExt::inf());
    if (a.den().degree() > 0) {
        for (const auto& rc : poly_roots(a.den())) sum += residue_at(a, PointExt::at(rc.root));
    }
    return sum;
}

Complex leading_laurent(const RationalFn& a, const PointExt& p) {
    if (a.is_zero()) return Complex(0.0);
    if (p.is_inf()) {
        // leading coefficient of the expansion in w = 1/z at 0
        Poly rn = a.num().reversed();
        Poly rd = a.den().reversed();
        int sn = significant_index(rn.taylor_shift(Complex(0.0)));
        int sd = significant_index(rd.taylor_shift(Complex(0.0)));
        return rn.coeff(sn) / rd.coeff(sd);
    }
    Poly ns = a.num().taylor_shift(p.z);
    Poly ds = a.den().taylor_shift(p.z);
    int sn = significant_index(ns);
    int sd = significant_index(ds);
    return ns.coeff(sn) / ds.coeff(sd);
}

int form_order_at(const RationalFn& a, const PointExt& p) {
    if (p.is_inf()) return order_at(a, p) - 2;
    return order_at(a, p);
}

Divisor pole_divisor(const RationalFn& a) {
    Divisor d;
    if (a.den().degree() > 0) {
        for (const auto& rc : poly_roots(a.den())) d.add(PointExt::at(rc.root), rc.multiplicity);
    }
    int e = a.num().degree() - a.den().degree();
    if (e > 0) d.add(PointExt::inf(), e);
    return d;
}

Divisor zero_divisor(const RationalFn& a) {
    Divisor d;
    if (a.is_zero()) throw InvalidInput("zero_divisor: zero function");
    if (a.num().degree() > 0) {
        for (const auto& rc : poly_roots(a.num())) d.add(PointExt::at(rc.root), rc.multiplicity);
    }
    int e = a.den().degree() - a.num().degree();
    if (e > 0) d.add(PointExt::inf(), e);
    return d;
}

}  // namespace maxface
