#include "maxface/weierstrass.hpp"

#include "qcomplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace maxface {

namespace {

Complex eval_on_segment(const RationalFn& a, Complex z0, Complex dz, double t) {
    return a.eval(z0 + t * dz) * dz;
}

Complex simpson_rec(const RationalFn& a, Complex z0, Complex dz, double t0, double t2, Complex f0,
                    Complex f1, Complex f2, Complex whole, double tol, int depth) {
    double tm = 0.5 * (t0 + t2);
    double tl = 0.5 * (t0 + tm), tr = 0.5 * (tm + t2);
    Complex fl = eval_on_segment(a, z0, dz, tl);
    Complex fr = eval_on_segment(a, z0, dz, tr);
    double h = t2 - t0;
    Complex left = (h / 12.0) * (f0 + 4.0 * fl + f1);
    Complex right = (h / 12.0) * (f1 + 4.0 * fr + f2);
    Complex sum = left + right;
    if (depth <= 0) throw NumericalFailure("integrate_segment: adaptive quadrature did not converge");
    if (std::abs(sum - whole) <= 15.0 * tol) return sum + (sum - whole) / 15.0;
    return simpson_rec(a, z0, dz, t0, tm, f0, fl, f1, left, 0.5 * tol, depth - 1) +
           simpson_rec(a, z0, dz, tm, t2, f1, fr, f2, right, 0.5 * tol, depth - 1);
}

std::vector<Complex> finite_form_poles(const WeierstrassData& data) {
    std::vector<Complex> pts;
    auto add = [&](Complex p) {
        for (Complex q : pts)
            if (std::abs(p - q) <= 1e-9 * std::max(1.0, std::abs(p))) return;
        pts.push_back(p);
    };
    // every pole of the forms is a pole of g or of omega; locating those is
    // far better conditioned than root-finding the product denominators
    for (const RationalFn* f : {&data.g, &data.omega}) {
        Divisor dv = pole_divisor(*f);
        for (const auto& [p, m] : dv.entries())
            if (!p.is_inf()) add(p.z);
    }
    for (const auto& p : data.punctures)
        if (!p.is_inf()) add(p.z);
    return pts;
}

double dist_to_segment(Complex p, Complex a, Complex b) {
    Complex ab = b - a;
    double len2 = std::norm(ab);
    if (len2 == 0.0) return std::abs(p - a);
    double t = std::clamp(((p - a) * std::conj(ab)).real() / len2, 0.0, 1.0);
    return std::abs(p - (a + t * ab));
}

}  // namespace

std::array<RationalFn, 3> weierstrass_forms(const WeierstrassData& data) {
    const RationalFn& g = data.g;
    const RationalFn& f = data.omega;
    RationalFn g2 = g * g;
    RationalFn one = RationalFn::constant(Complex(1.0));
    return {(one + g2) * f, Complex(0.0, 1.0) * ((one - g2) * f), Complex(-2.0) * (g * f)};
}

Complex integrate_segment(const RationalFn& a, Complex z0, Complex z1, double tol) {
    Complex dz = z1 - z0;
    if (dz == Complex(0.0)) return Complex(0.0);
    Complex f0 = eval_on_segment(a, z0, dz, 0.0);
    Complex f1 = eval_on_segment(a, z0, dz, 0.5);
    Complex f2 = eval_on_segment(a, z0, dz, 1.0);
    Complex whole = (1.0 / 6.0) * (f0 + 4.0 * f1 + f2);
    return simpson_rec(a, z0, dz, 0.0, 1.0, f0, f1, f2, whole, tol, 40);
}

std::array<double, 3> evaluate_immersion(const WeierstrassData& data, Complex z, double tol) {
    std::vector<Complex> poles = finite_form_poles(data);
    for (Complex p : poles)
        if (std::abs(z - p) <= 1e-12 * std::max(1.0, std::abs(p)))
            throw InvalidInput("evaluate_immersion: evaluation point is a pole of the data");
    // clearance radius: an eighth of the smallest gap between special points
    double gap = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < poles.size(); ++i)
        for (size_t j = i + 1; j < poles.size(); ++j) gap = std::min(gap, std::abs(poles[i] - poles[j]));
    for (Complex p : poles) {
        gap = std::min(gap, std::abs(z - p));
        gap = std::min(gap, std::abs(data.base_point - p));
    }
    double delta = std::isfinite(gap) ? gap / 8.0 : 0.0;

    std::vector<Complex> path{data.base_point, z};
    for (int guard = 0; guard < 256 && delta > 0.0; ++guard) {
        bool changed = false;
        for (size_t s = 0; s + 1 < path.size() && !changed; ++s) {
            for (Complex p : poles) {
                if (dist_to_segment(p, path[s], path[s + 1]) >= delta) continue;
                Complex dir = path[s + 1] - path[s];
                double len = std::abs(dir);
                if (len == 0.0) continue;
                Complex n = Complex(0.0, 1.0) * (dir / len);
                // push the detour vertex to whichever side moves it off the line
                Complex side = ((p - path[s]) * std::conj(n)).real() >= 0.0 ? -n : n;
                path.insert(path.begin() + static_cast<std::ptrdiff_t>(s) + 1, p + 2.0 * delta * side);
                changed = true;
                break;
            }
        }
        if (!changed) break;
    }

    std::array<RationalFn, 3> phi = weierstrass_forms(data);
    std::array<double, 3> X{0.0, 0.0, 0.0};
    for (int k = 0; k < 3; ++k) {
        Complex acc(0.0);
        for (size_t s = 0; s + 1 < path.size(); ++s) acc += integrate_segment(phi[k], path[s], path[s + 1], tol);
        X[static_cast<size_t>(k)] = acc.real();
    }
    return X;
}

double metric_factor(const WeierstrassData& data, Complex z) {
    double ag = std::abs(data.g.eval(z));
    return std::abs(1.0 - ag * ag) * std::abs(data.omega.eval(z));
}

namespace {

// Loop integral of the three forms over the circle c + r e^{i t} by the
// trapezoid rule with doubling; geometric convergence for analytic
// integrands. Evaluation is factored (g and omega separately) and in quad
// precision: the integrand reaches ~r^{-ord} near high-order poles, so
// double-precision samples -- and coefficients of the expanded products --
// would bury the period in rounding.
std::array<Complex, 3> loop_integral(const RationalFn& g, const RationalFn& omega, Complex c,
                                     double r, double tol) {
    std::array<Complex, 3> prev{}, cur{};
    const QComplex i1{0, 1};
    for (int N = 64; N <= 65536; N *= 2) {
        std::array<QComplex, 3> acc{};
        for (int k = 0; k < N; ++k) {
            QComplex e = qcircle(r, k, N);
            QComplex z = qc(c) + e;
            QComplex G = qeval(g, z);
            QComplex F = qeval(omega, z);
            QComplex G2 = G * G;
            QComplex one{1, 0};
            QComplex dz = (2.0Q * M_PIq / N) * (i1 * e);
            acc[0] = acc[0] + (one + G2) * F * dz;
            acc[1] = acc[1] + i1 * ((one - G2) * F) * dz;
            acc[2] = acc[2] + (-2.0Q) * (G * F) * dz;
        }
        for (int i = 0; i < 3; ++i) cur[static_cast<size_t>(i)] = to_complex(acc[static_cast<size_t>(i)]);
        if (N > 64) {
            // relative per component: the imaginary part of a period is
            // unconstrained and may be large, which sets the rounding floor
            bool ok = true;
            for (int i = 0; i < 3; ++i) {
                size_t u = static_cast<size_t>(i);
                double scale = std::max({1.0, std::abs(cur[u]), std::abs(prev[u])});
                if (std::abs(cur[u] - prev[u]) > tol / 10.0 * scale) ok = false;
            }
            if (ok) return cur;
        }
        prev = cur;
    }
    throw NumericalFailure("verify_periods: loop integral did not converge");
}

}  // namespace

PeriodReport verify_periods(const WeierstrassData& data, const Tolerances& tol) {
    if (data.punctures.empty()) throw InvalidInput("verify_periods: no punctures given");
    std::vector<Complex> special = finite_form_poles(data);

    PeriodReport report;
    report.pass = true;
    for (const auto& p : data.punctures) {
        LoopPeriod lp;
        lp.about = p;
        if (p.is_inf()) {
            // keep the contour tight: the forms can grow like a high power
            // of z, so a generous radius would drown the period in rounding
            double R = 0.5;
            for (Complex q : special) R = std::max(R, std::abs(q));
            lp.period = loop_integral(data.g, data.omega, Complex(0.0), 1.25 * R, tol.quadrature);
        } else {
            // ignore special points that are numerical shadows of p itself:
            // root clusters of high-multiplicity denominators scatter well
            // beyond rounding, and the loop must enclose the whole cluster
            double shadow = 0.02 * std::max(1.0, std::abs(p.z));
            double r = std::numeric_limits<double>::infinity();
            for (Complex q : special)
                if (std::abs(q - p.z) > shadow) r = std::min(r, std::abs(q - p.z));
            if (!std::isfinite(r)) r = 1.0;
            lp.period = loop_integral(data.g, data.omega, p.z, 0.5 * r, tol.quadrature);
        }
        for (const Complex& w : lp.period) lp.max_re = std::max(lp.max_re, std::abs(w.real()));
        report.worst = std::max(report.worst, lp.max_re);
        report.loops.push_back(lp);
    }
    report.pass = report.worst <= tol.period;
    return report;
}

namespace {

bool is_puncture(const WeierstrassData& data, const PointExt& p) {
    for (const auto& q : data.punctures) {
        if (q.is_inf() || p.is_inf()) {
            if (q.is_inf() && p.is_inf()) return true;
            continue;
        }
        if (std::abs(q.z - p.z) <= 1e-7 * std::max(1.0, std::abs(q.z))) return true;
    }
    return false;
}

}  // namespace

DivisorReport check_divisor_condition(const WeierstrassData& data) {
    DivisorReport report;
    report.pass = true;
    auto flag = [&](const std::string& msg) {
        report.pass = false;
        report.mismatches.push_back(msg);
    };
    if (data.omega.is_zero()) {
        flag("omega is identically zero");
        return report;
    }

    // poles of the form must be punctures; poles of g off the punctures are
    // fine when omega carries the matching double zero (checked below)
    Divisor omega_form_poles = pole_divisor(data.omega);
    if (form_order_at(data.omega, PointExt::inf()) < 0 && omega_form_poles.multiplicity(PointExt::inf()) == 0)
        omega_form_poles.add(PointExt::inf(), -form_order_at(data.omega, PointExt::inf()));
    for (const auto& [p, m] : omega_form_poles.entries())
        if (!is_puncture(data, p)) flag("omega has a pole off the puncture set at " + p.str());

    // (omega)_0 = 2 (g)_inf on the domain, using form orders
    Divisor gpoles = pole_divisor(data.g);
    Divisor omega_zeros;
    if (data.omega.num().degree() > 0)
        for (const auto& rc : poly_roots(data.omega.num())) omega_zeros.add(PointExt::at(rc.root), rc.multiplicity);
    if (form_order_at(data.omega, PointExt::inf()) > 0)
        omega_zeros.add(PointExt::inf(), form_order_at(data.omega, PointExt::inf()));

    std::vector<PointExt> pts;
    for (const auto& [p, m] : gpoles.entries()) pts.push_back(p);
    for (const auto& [p, m] : omega_zeros.entries()) {
        bool seen = false;
        for (const auto& q : pts)
            if (q == p || (!q.is_inf() && !p.is_inf() && std::abs(q.z - p.z) <= 1e-7 * std::max(1.0, std::abs(q.z))))
                seen = true;
        if (!seen) pts.push_back(p);
    }
    for (const auto& p : pts) {
        if (is_puncture(data, p)) continue;
        int zo = 0;
        for (const auto& [q, m] : omega_zeros.entries())
            if (q == p || (!q.is_inf() && !p.is_inf() && std::abs(q.z - p.z) <= 1e-7 * std::max(1.0, std::abs(q.z))))
                zo = m;
        int po = 0;
        for (const auto& [q, m] : gpoles.entries())
            if (q == p || (!q.is_inf() && !p.is_inf() && std::abs(q.z - p.z) <= 1e-7 * std::max(1.0, std::abs(q.z))))
                po = m;
        if (zo != 2 * po) {
            std::ostringstream os;
            os << "at " << p.str() << ": ord(omega) = " << zo << ", expected 2 ord_inf(g) = " << 2 * po;
            flag(os.str());
        }
    }
    return report;
}

EndReport classify_end(const WeierstrassData& data, const PointExt& p, const Tolerances& tol) {
    EndReport r;
    r.p = p;
    r.abs_g = data.g.abs_at(p);
    r.order_omega = form_order_at(data.omega, p);
    // orders are additive, and the factors are far better conditioned than
    // the reduced product
    r.order_g2omega = data.g.is_zero() ? 0 : 2 * order_at(data.g, p) + r.order_omega;
    r.light_like = std::isfinite(r.abs_g) && std::abs(r.abs_g - 1.0) <= tol.end_unit_margin;
    r.dominant_order = (std::isfinite(r.abs_g) && r.abs_g < 1.0) ? r.order_omega : r.order_g2omega;
    r.complete = !r.light_like && r.dominant_order <= -2;
    r.simple = !r.light_like && r.dominant_order == -2;
    return r;
}

CompactnessReport singular_set_compactness(const WeierstrassData& data, const Tolerances& tol) {
    (void)tol;
    CompactnessReport report;
    report.pass = true;
    std::vector<Complex> special = finite_form_poles(data);

    auto circle_margin = [&](Complex c, double r) {
        double m = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 128; ++k) {
            Complex z = c + std::polar(r, 2.0 * kPi * k / 128.0);
            m = std::min(m, std::abs(std::abs(data.g.eval(z)) - 1.0));
        }
        return m;
    };

    for (const auto& p : data.punctures) {
        double margin = 0.0;
        for (int attempt = 0; attempt < 2; ++attempt) {
            double shrink = attempt == 0 ? 1.0 : 0.25;
            if (p.is_inf()) {
                double R = 1.0;
                for (Complex q : special) R = std::max(R, std::abs(q));
                R = (2.0 * R + 1.0) / shrink;
                margin = std::numeric_limits<double>::infinity();
                for (int k = 5; k < 8; ++k) margin = std::min(margin, circle_margin(Complex(0.0), R * (1 << k)));
            } else {
                double r0 = 1.0;
                for (Complex q : special)
                    if (std::abs(q - p.z) > 1e-9) r0 = std::min(r0, 0.5 * std::abs(q - p.z));
                r0 *= shrink;
                margin = std::numeric_limits<double>::infinity();
                for (int k = 5; k < 8; ++k) margin = std::min(margin, circle_margin(p.z, r0 / (1 << k)));
            }
            if (margin >= 1e-4) break;
        }
        report.margins.emplace_back(p, margin);
        if (margin < 1e-4) report.pass = false;
    }
    return report;
}

VerificationReport verify_all(const WeierstrassData& data, const Tolerances& tol) {
    VerificationReport r;
    r.periods = verify_periods(data, tol);
    r.divisor = check_divisor_condition(data);
    for (const auto& p : data.punctures) r.ends.push_back(classify_end(data, p, tol));
    r.compactness = singular_set_compactness(data, tol);
    r.is_maximal_map = r.periods.pass && r.divisor.pass;
    bool light = false;
    for (const auto& e : r.ends) light = light || e.light_like;
    r.is_maxface = r.is_maximal_map && !light;
    return r;
}

namespace {

struct SegKey {
    long long x, y;
    bool operator==(const SegKey&) const = default;
};
struct SegKeyHash {
    size_t operator()(const SegKey& k) const {
        return std::hash<long long>()(k.x * 1000003LL + k.y);
    }
};

}  // namespace

CurveExtraction singular_curve_extract(const RationalFn& g, Complex lo, Complex hi, int resolution) {
    if (resolution < 2) throw InvalidInput("singular_curve_extract: resolution must be at least 2");
    if (!(hi.real() > lo.real()) || !(hi.imag() > lo.imag()))
        throw InvalidInput("singular_curve_extract: empty window");
    const int n = resolution;
    const double dx = (hi.real() - lo.real()) / (n - 1);
    const double dy = (hi.imag() - lo.imag()) / (n - 1);

    auto field = [&](double x, double y) {
        double a = std::abs(g.eval(Complex(x, y)));
        double v = a > 0.0 ? std::log(a) : -30.0;
        v = std::clamp(v, -30.0, 30.0);
        if (v == 0.0) v = 1e-14;  // avoid grid-aligned zeros
        return v;
    };

    std::vector<double> F(static_cast<size_t>(n) * static_cast<size_t>(n));
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            F[static_cast<size_t>(j) * n + i] = field(lo.real() + i * dx, lo.imag() + j * dy);

    struct Seg {
        Complex a, b;
    };
    std::vector<Seg> segs;
    auto interp = [&](double x0, double y0, double f0, double x1, double y1, double f1) {
        double t = f0 / (f0 - f1);
        return Complex(x0 + t * (x1 - x0), y0 + t * (y1 - y0));
    };

    for (int j = 0; j + 1 < n; ++j) {
        for (int i = 0; i + 1 < n; ++i) {
            double x0 = lo.real() + i * dx, x1 = x0 + dx;
            double y0 = lo.imag() + j * dy, y1 = y0 + dy;
            double f00 = F[static_cast<size_t>(j) * n + i];
            double f10 = F[static_cast<size_t>(j) * n + i + 1];
            double f01 = F[static_cast<size_t>(j + 1) * n + i];
            double f11 = F[static_cast<size_t>(j + 1) * n + i + 1];
            std::vector<Complex> pts;
            std::vector<int> edge;
            if ((f00 < 0) != (f10 < 0)) { pts.push_back(interp(x0, y0, f00, x1, y0, f10)); edge.push_back(0); }
            if ((f10 < 0) != (f11 < 0)) { pts.push_back(interp(x1, y0, f10, x1, y1, f11)); edge.push_back(1); }
            if ((f01 < 0) != (f11 < 0)) { pts.push_back(interp(x0, y1, f01, x1, y1, f11)); edge.push_back(2); }
            if ((f00 < 0) != (f01 < 0)) { pts.push_back(interp(x0, y0, f00, x0, y1, f01)); edge.push_back(3); }
            if (pts.size() == 2) {
                segs.push_back({pts[0], pts[1]});
            } else if (pts.size() == 4) {
                // saddle: the centre sample decides the pairing
                double fc = field(0.5 * (x0 + x1), 0.5 * (y0 + y1));
                bool pair_adjacent = (fc < 0) == (f00 < 0);
                if (pair_adjacent) {
                    segs.push_back({pts[0], pts[1]});  // bottom-right corner pair
                    segs.push_back({pts[2], pts[3]});
                } else {
                    segs.push_back({pts[0], pts[3]});
                    segs.push_back({pts[1], pts[2]});
                }
            }
        }
    }

    // join segments into polylines by quantized endpoints
    const double qeps = 0.25 * std::min(dx, dy);
    auto key = [&](Complex p) {
        return SegKey{static_cast<long long>(std::llround(p.real() / qeps)),
                      static_cast<long long>(std::llround(p.imag() / qeps))};
    };
    std::unordered_multimap<SegKey, size_t, SegKeyHash> by_end;
    for (size_t s = 0; s < segs.size(); ++s) {
        by_end.emplace(key(segs[s].a), s);
        by_end.emplace(key(segs[s].b), s);
    }
    std::vector<bool> used(segs.size(), false);
    auto next_seg = [&](Complex p, size_t skip) -> long long {
        auto [lo_it, hi_it] = by_end.equal_range(key(p));
        for (auto it = lo_it; it != hi_it; ++it)
            if (!used[it->second] && it->second != skip) return static_cast<long long>(it->second);
        return -1;
    };

    CurveExtraction out;
    for (size_t s0 = 0; s0 < segs.size(); ++s0) {
        if (used[s0]) continue;
        used[s0] = true;
        std::vector<Complex> chain{segs[s0].a, segs[s0].b};
        // extend forwards then backwards
        for (int dir = 0; dir < 2; ++dir) {
            for (;;) {
                Complex tip = dir == 0 ? chain.back() : chain.front();
                long long nx = next_seg(tip, static_cast<size_t>(-1));
                if (nx < 0) break;
                used[static_cast<size_t>(nx)] = true;
                const Seg& sg = segs[static_cast<size_t>(nx)];
                Complex add = std::abs(sg.a - tip) < std::abs(sg.b - tip) ? sg.b : sg.a;
                if (dir == 0)
                    chain.push_back(add);
                else
                    chain.insert(chain.begin(), add);
            }
        }
        // closed in the window, or leaving the window at both ends (a curve
        // closing up through the rest of the sphere)
        double diag = std::hypot(dx, dy);
        auto on_boundary = [&](Complex p) {
            return p.real() - lo.real() <= diag || hi.real() - p.real() <= diag ||
                   p.imag() - lo.imag() <= diag || hi.imag() - p.imag() <= diag;
        };
        bool closed = chain.size() > 2 && (std::abs(chain.front() - chain.back()) <= diag ||
                                           (on_boundary(chain.front()) && on_boundary(chain.back())));
        out.components.push_back(std::move(chain));
        out.closed.push_back(closed);
    }
    return out;
}

}  // namespace maxface
