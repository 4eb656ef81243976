#include "maxface/poly.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace maxface {

namespace {
constexpr double kStripEps = 0.0;  // exact zeros only; arithmetic keeps what it produces
}

Poly::Poly(std::vector<Complex> coeffs) : c_(std::move(coeffs)) { strip(); }

Poly::Poly(std::initializer_list<Complex> coeffs) : c_(coeffs) { strip(); }

void Poly::strip() {
    while (!c_.empty() && std::abs(c_.back()) <= kStripEps) c_.pop_back();
}

Poly Poly::monomial(int degree, Complex coeff) {
    std::vector<Complex> c(static_cast<size_t>(degree) + 1, Complex(0.0));
    c.back() = coeff;
    return Poly(std::move(c));
}

Poly Poly::from_roots(Complex lead, const std::vector<Complex>& roots) {
    std::vector<Complex> c{lead};
    for (Complex r : roots) {
        c.push_back(Complex(0.0));
        for (size_t k = c.size() - 1; k > 0; --k) c[k] = c[k - 1] - r * c[k];
        c[0] = -r * c[0];
    }
    return Poly(std::move(c));
}

Complex Poly::coeff(int k) const {
    if (k < 0 || k >= static_cast<int>(c_.size())) return Complex(0.0);
    return c_[static_cast<size_t>(k)];
}

Complex Poly::lead() const { return c_.empty() ? Complex(0.0) : c_.back(); }

double Poly::max_abs_coeff() const {
    double m = 0.0;
    for (const Complex& v : c_) m = std::max(m, std::abs(v));
    return m;
}

Poly Poly::trimmed(double rel_eps) const {
    double scale = max_abs_coeff();
    if (scale == 0.0) return *this;
    std::vector<Complex> c = c_;
    while (c.size() > 1 && std::abs(c.back()) <= rel_eps * scale) c.pop_back();
    return Poly(std::move(c));
}

Complex Poly::eval(Complex z) const {
    Complex acc(0.0);
    for (size_t i = c_.size(); i-- > 0;) acc = acc * z + c_[i];
    return acc;
}

Poly Poly::derivative() const {
    if (c_.size() <= 1) return Poly();
    std::vector<Complex> d(c_.size() - 1);
    for (size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
    return Poly(std::move(d));
}

Poly Poly::taylor_shift(Complex center) const {
    // repeated synthetic division by (z - center); each remainder is the
    // next Taylor coefficient
    std::vector<Complex> a(c_);
    std::vector<Complex> res;
    res.reserve(c_.size());
    for (size_t j = 0; j < c_.size(); ++j) {
        Complex carry(0.0);
        for (size_t i = a.size(); i-- > 0;) {
            Complex v = a[i] + carry * center;
            a[i] = carry;
            carry = v;
        }
        res.push_back(carry);
        a.pop_back();
    }
    return Poly(std::move(res));
}

Poly Poly::reversed() const {
    std::vector<Complex> r(c_.rbegin(), c_.rend());
    return Poly(std::move(r));
}

Poly Poly::pow(int exponent) const {
    Poly acc = Poly::one();
    for (int i = 0; i < exponent; ++i) acc = acc * (*this);
    return acc;
}

Poly Poly::deflate(Complex root) const {
    if (c_.size() <= 1) return Poly();
    std::vector<Complex> q(c_.size() - 1);
    Complex carry = c_.back();
    for (size_t i = c_.size() - 1; i-- > 0;) {
        q[i] = carry;
        carry = c_[i] + carry * root;
    }
    return Poly(std::move(q));
}

Poly operator+(const Poly& a, const Poly& b) {
    std::vector<Complex> c(std::max(a.c_.size(), b.c_.size()), Complex(0.0));
    for (size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
    for (size_t i = 0; i < b.c_.size(); ++i) c[i] += b.c_[i];
    return Poly(std::move(c));
}

Poly operator-(const Poly& a, const Poly& b) {
    std::vector<Complex> c(std::max(a.c_.size(), b.c_.size()), Complex(0.0));
    for (size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
    for (size_t i = 0; i < b.c_.size(); ++i) c[i] -= b.c_[i];
    return Poly(std::move(c));
}

Poly operator*(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return Poly();
    std::vector<Complex> c(a.c_.size() + b.c_.size() - 1, Complex(0.0));
    for (size_t i = 0; i < a.c_.size(); ++i)
        for (size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
    return Poly(std::move(c));
}

Poly operator*(Complex s, const Poly& a) {
    std::vector<Complex> c(a.c_);
    for (Complex& v : c) v *= s;
    return Poly(std::move(c));
}

Poly Poly::operator-() const { return Complex(-1.0) * (*this); }

namespace {

std::vector<Complex> companion_eigenvalues(const Poly& p) {
    const int n = p.degree();
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    Complex lead = p.lead();
    for (int i = 1; i < n; ++i) m(i, i - 1) = Complex(1.0);
    for (int i = 0; i < n; ++i) m(i, n - 1) = -p.coeff(i) / lead;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, /*computeEigenvectors=*/false);
    std::vector<Complex> out(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = es.eigenvalues()(i);
    return out;
}

Complex newton_polish(const Poly& p, const Poly& dp, Complex z, int iters) {
    Complex best = z;
    double best_val = std::abs(p.eval(z));
    for (int i = 0; i < iters; ++i) {
        Complex d = dp.eval(z);
        if (std::abs(d) == 0.0) break;
        z -= p.eval(z) / d;
        double v = std::abs(p.eval(z));
        if (v < best_val) {
            best_val = v;
            best = z;
        }
    }
    return best;
}

}  // namespace

std::vector<RootCluster> poly_roots(const Poly& p_in, const Tolerances& tol) {
    if (p_in.is_zero()) throw InvalidInput("poly_roots: zero polynomial has no well-defined roots");
    Poly p = p_in.trimmed();
    if (p.degree() == 0) return {};

    Poly dp = p.derivative();
    std::vector<Complex> raw = companion_eigenvalues(p);
    for (Complex& r : raw) r = newton_polish(p, dp, r, 12);

    // Companion eigenvalues of an m-fold root scatter at radius ~ eps^(1/m)
    // (about 1e-4 for m = 4, growing with degree and coefficient spread;
    // quadruple roots of degree-18 denominators have been seen to scatter at
    // 1.3e-3), so the merge radius is generous and scales with the root
    // magnitude; genuinely distinct roots this close are outside the
    // supported range. Single-linkage grouping: an m-fold cluster is a ring
    // whose diameter exceeds the per-pair radius, but adjacent ring members
    // stay within it.
    auto merge_radius = [&](Complex a, Complex b) {
        double s = std::max({1.0, std::abs(a), std::abs(b)});
        return std::max(tol.tau_cluster, 3e-3 * s);
    };

    std::sort(raw.begin(), raw.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });

    std::vector<std::vector<Complex>> groups;
    for (Complex r : raw) {
        std::vector<Complex>* home = nullptr;
        for (size_t gi = 0; gi < groups.size();) {
            auto& grp = groups[gi];
            bool close = false;
            for (Complex g : grp)
                if (std::abs(r - g) <= merge_radius(r, g)) {
                    close = true;
                    break;
                }
            if (close) {
                if (!home) {
                    grp.push_back(r);
                    home = &grp;
                    ++gi;
                } else {
                    // r bridges two groups: fuse them
                    home->insert(home->end(), grp.begin(), grp.end());
                    groups.erase(groups.begin() + static_cast<long>(gi));
                }
            } else {
                ++gi;
            }
        }
        if (!home) groups.push_back({r});
    }

    std::vector<RootCluster> out;
    out.reserve(groups.size());
    for (const auto& grp : groups) {
        Complex center(0.0);
        for (Complex g : grp) center += g;
        center /= static_cast<double>(grp.size());
        int m = static_cast<int>(grp.size());
        if (m > 1) {
            // center is a simple root of p^{(m-1)}; Newton there is quadratic
            Poly dk = p;
            for (int i = 0; i < m - 1; ++i) dk = dk.derivative();
            center = newton_polish(dk, dk.derivative(), center, 30);
        }
        out.push_back({center, m});
    }
    std::sort(out.begin(), out.end(), [](const RootCluster& a, const RootCluster& b) {
        if (a.root.real() != b.root.real()) return a.root.real() < b.root.real();
        return a.root.imag() < b.root.imag();
    });
    return out;
}

}  // namespace maxface
