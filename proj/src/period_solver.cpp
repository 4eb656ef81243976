#include "maxface/period_solver.hpp"

#include "qcomplex.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace maxface {

namespace {

std::string label(const char* stem, int i) {
    std::ostringstream os;
    os << stem << "_" << i;
    return os.str();
}

std::vector<PointExt> finite_poles(const RationalFn& a) {
    std::vector<PointExt> out;
    Divisor d = pole_divisor(a);
    for (const auto& [p, m] : d.entries())
        if (!p.is_inf()) out.push_back(p);
    return out;
}

// deduplicate finite points within a cluster radius
void add_point(std::vector<Complex>& pts, Complex p) {
    for (Complex q : pts)
        if (std::abs(p - q) <= 1e-7 * std::max(1.0, std::abs(p))) return;
    pts.push_back(p);
}

std::vector<Complex> combined_finite_poles(const RationalFn& g, const AnsatzFamily& family) {
    std::vector<Complex> pts;
    for (const auto& p : finite_poles(g)) add_point(pts, p.z);
    for (const auto& b : family.basis)
        for (const auto& p : finite_poles(b)) add_point(pts, p.z);
    std::sort(pts.begin(), pts.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return pts;
}

double quad_radius(const std::vector<Complex>& pts, Complex p) {
    double d = std::numeric_limits<double>::infinity();
    for (Complex q : pts)
        if (std::abs(q - p) > 1e-12) d = std::min(d, std::abs(q - p));
    return std::isfinite(d) ? 0.35 * d : 0.5;
}

// Residue row of (mul_num/mul_den) * b_u dz at a point, for all u, by
// quad-precision trapezoid quadrature on a circle isolating p from the
// other special points (Laurent extraction on the expanded products loses
// accuracy at deep poles, and the kernel is only as good as these entries).
// The contour and the moment values are shared across the basis columns.
Eigen::RowVectorXcd residue_row(const Poly& mul_num, const Poly& mul_den, const AnsatzFamily& family,
                                Complex p, const std::vector<Complex>& special) {
    constexpr int N = 128;
    double r = quad_radius(special, p);
    std::vector<QComplex> e(N), mom(N);
    for (int k = 0; k < N; ++k) {
        e[static_cast<size_t>(k)] = qcircle(r, k, N);
        QComplex z = qc(p) + e[static_cast<size_t>(k)];
        mom[static_cast<size_t>(k)] = qeval(mul_num, z) / qeval(mul_den, z);
    }
    Eigen::RowVectorXcd row(family.basis.size());
    for (size_t u = 0; u < family.basis.size(); ++u) {
        const RationalFn& b = family.basis[u];
        QComplex acc{};
        for (int k = 0; k < N; ++k) {
            QComplex z = qc(p) + e[static_cast<size_t>(k)];
            QComplex v = mom[static_cast<size_t>(k)] * (qeval(b.num(), z) / qeval(b.den(), z));
            acc = acc + v * e[static_cast<size_t>(k)];  // (dz / (2 pi i)) = e dt / (2 pi)
        }
        row(static_cast<Eigen::Index>(u)) = to_complex((1.0Q / N) * acc);
    }
    return row;
}

struct MomentSpec {
    Poly num;
    Poly den;
    Moment tag;
};

std::vector<MomentSpec> moments_g_g2(const RationalFn& g) {
    return {{g.num(), g.den(), Moment::G}, {g.num() * g.num(), g.den() * g.den(), Moment::G2}};
}

ResidueSystem assemble_rows(const RationalFn& g, const AnsatzFamily& family,
                            const std::vector<Complex>& points, const std::vector<MomentSpec>& moments) {
    std::vector<Complex> special = combined_finite_poles(g, family);
    for (Complex p : points) add_point(special, p);
    std::vector<Eigen::RowVectorXcd> rows;
    std::vector<ResidueRow> labels;
    for (Complex p : points) {
        for (const auto& mom : moments) {
            rows.push_back(residue_row(mom.num, mom.den, family, p, special));
            labels.push_back({PointExt::at(p), mom.tag});
        }
    }
    double global_max = 0.0;
    for (const auto& r : rows) global_max = std::max(global_max, r.cwiseAbs().maxCoeff());
    ResidueSystem sys;
    sys.col_labels = family.labels;
    std::vector<int> keep;
    for (size_t i = 0; i < rows.size(); ++i)
        if (rows[i].cwiseAbs().maxCoeff() > 1e-11 * std::max(1.0, global_max)) keep.push_back(static_cast<int>(i));
    sys.matrix.resize(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(family.basis.size()));
    for (size_t i = 0; i < keep.size(); ++i) {
        sys.matrix.row(static_cast<Eigen::Index>(i)) = rows[static_cast<size_t>(keep[i])];
        sys.row_labels.push_back(labels[static_cast<size_t>(keep[i])]);
    }
    return sys;
}

// Principal parts of the candidate forms at one end, per basis element:
// column u holds (c_{-1}, ..., c_{-K}) of b_u dz.
Eigen::MatrixXcd principal_matrix(const AnsatzFamily& family, const PointExt& p) {
    std::vector<std::vector<Complex>> cols(family.basis.size());
    size_t K = 0;
    for (size_t u = 0; u < family.basis.size(); ++u) {
        cols[u] = principal_part(family.basis[u].num(), family.basis[u].den(), p);
        K = std::max(K, cols[u].size());
    }
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(K),
                                                static_cast<Eigen::Index>(family.basis.size()));
    for (size_t u = 0; u < family.basis.size(); ++u)
        for (size_t j = 0; j < cols[u].size(); ++j)
            m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(u)) = cols[u][j];
    return m;
}

// deepest significantly-nonzero Laurent coefficient; order 0 when none
struct PoleProbe {
    int order = 0;        // negative when a pole is present
    Complex leading{0.0};
    Complex residue{0.0};
    Complex c2{0.0};      // coefficient of (z-p)^{-2}
};

PoleProbe probe_pole(const Eigen::MatrixXcd& pp, const Eigen::VectorXcd& coeffs, double scale) {
    PoleProbe out;
    if (pp.rows() == 0) return out;
    Eigen::VectorXcd v = pp * coeffs;
    double thresh = 1e-8 * std::max(1e-300, scale);
    for (Eigen::Index j = v.size() - 1; j >= 0; --j) {
        if (std::abs(v(j)) > thresh) {
            out.order = -static_cast<int>(j) - 1;
            out.leading = v(j);
            break;
        }
    }
    out.residue = v(0);
    if (v.size() > 1) out.c2 = v(1);
    return out;
}

RationalFn build_combination(const AnsatzFamily& family, const Eigen::VectorXcd& coeffs) {
    if (family.den_roots.size() != family.basis.size()) {
        RationalFn f;
        for (size_t u = 0; u < family.basis.size(); ++u)
            f = f + coeffs(static_cast<Eigen::Index>(u)) * family.basis[u];
        return f;
    }
    // common denominator with the per-point maximal multiplicity; summing
    // RationalFn terms instead would re-reduce at every step, scatter the
    // multiple-root clusters, and let the degrees blow up
    auto count = [](const std::vector<Complex>& roots, Complex p) {
        int c = 0;
        for (Complex r : roots)
            if (r == p) ++c;
        return c;
    };
    std::vector<std::pair<Complex, int>> maxmult;
    for (const auto& roots : family.den_roots)
        for (Complex r : roots) {
            bool seen = false;
            for (const auto& [p, m] : maxmult)
                if (p == r) seen = true;
            if (!seen) maxmult.push_back({r, 0});
        }
    for (auto& [p, m] : maxmult)
        for (const auto& roots : family.den_roots) m = std::max(m, count(roots, p));
    std::vector<Complex> droots;
    for (const auto& [p, m] : maxmult)
        for (int k = 0; k < m; ++k) droots.push_back(p);
    // the terms can cancel by orders of magnitude, so the numerator is
    // accumulated in quad precision and rounded once at the end
    QPoly num;
    for (size_t u = 0; u < family.basis.size(); ++u) {
        std::vector<Complex> cof;
        for (const auto& [p, m] : maxmult)
            for (int k = count(family.den_roots[u], p); k < m; ++k) cof.push_back(p);
        QPoly term = qpoly_from_roots(Complex(1.0), cof);
        const auto& bn = family.basis[u].num().coeffs();
        QPoly bq(bn.size());
        for (size_t j = 0; j < bn.size(); ++j) bq[j] = qc(bn[j]);
        if (!bq.empty()) qpoly_axpy(num, qc(coeffs(static_cast<Eigen::Index>(u))), qpoly_mul(bq, term));
    }
    return RationalFn::unreduced(qpoly_round(num), Poly::from_roots(Complex(1.0), droots));
}

// The period constraints are homogeneous in omega, and the overall scale of
// omega is a free homothety of the surface. Any double representative of the
// exact kernel element carries residues ~ eps * kappa * |f|, where kappa is
// the norm of the residue functional in the numerator coefficients (large
// for deep, close poles); rescaling f puts that representation noise safely
// under the verification tolerance.
RationalFn normalize_residual(RationalFn f, double& residual, double tol_residual) {
    if (residual > 0.03 * tol_residual && residual > 0.0) {
        double lambda = 0.03 * tol_residual / residual;
        f = RationalFn::unreduced(Complex(lambda) * f.num(), f.den());
        residual *= lambda;
    }
    return f;
}

Complex default_c(const Divisor& poles) {
    Complex centroid(0.0);
    int cnt = 0;
    for (const auto& [p, m] : poles.entries()) {
        if (p.is_inf()) continue;
        centroid += p.z;
        ++cnt;
    }
    if (cnt > 0) centroid /= static_cast<double>(cnt);
    Complex c = centroid + Complex(1.0, 0.0);
    auto clashes = [&]() {
        for (const auto& [p, m] : poles.entries())
            if (!p.is_inf() && std::abs(c - p.z) < 1e-6) return true;
        return false;
    };
    while (clashes()) c += Complex(0.5, 0.0);
    return c;
}


// Residue of g^s f dz at p by trapezoid quadrature on a circle clear of the
// other special points. Laurent extraction at the deep poles of the product
// loses the residue in cancellation; the factors evaluated on the circle
// stay well conditioned.
Complex quad_residue(const RationalFn& g, int s, const RationalFn& f, Complex p, double r) {
    constexpr int N = 4096;
    QComplex acc{};
    for (int k = 0; k < N; ++k) {
        QComplex e = qcircle(r, k, N);
        QComplex z = qc(p) + e;
        QComplex v = qeval(f, z);
        for (int j = 0; j < s; ++j) v = v * qeval(g, z);
        acc = acc + v * e;  // (dz / (2 pi i)) = e dt / (2 pi)
    }
    return to_complex((1.0Q / N) * acc);
}

double max_constraint_residual(const RationalFn& g, const RationalFn& f) {
    // poles of the products are poles of g or of f; root-finding the
    // factors avoids scattering the high-multiplicity product clusters
    std::vector<Complex> pts;
    for (const auto& p : finite_poles(g)) add_point(pts, p.z);
    for (const auto& p : finite_poles(f)) add_point(pts, p.z);
    double worst = 0.0;
    for (int s = 1; s <= 2; ++s) {
        Complex sum(0.0);
        for (Complex p : pts) {
            Complex r = quad_residue(g, s, f, p, quad_radius(pts, p));
            worst = std::max(worst, std::abs(r));
            sum += r;
        }
        // the residue at infinity is minus the finite sum
        worst = std::max(worst, std::abs(sum));
    }
    return worst;
}

}  // namespace

AnsatzFamily build_ansatz_basic(const Divisor& poles) {
    if (poles.size() == 0) throw InvalidInput("build_ansatz_basic: empty pole divisor");
    if (poles.multiplicity(PointExt::inf()) <= 0)
        throw InvalidInput("build_ansatz_basic: no pole at infinity; apply normalize_pole_at_infinity first");
    const int n = static_cast<int>(poles.size());
    AnsatzFamily fam;
    fam.kind = AnsatzKind::Basic;
    int i = 1;
    for (const auto& [p, m] : poles.entries()) {
        if (p.is_inf()) continue;
        fam.basis.push_back(RationalFn(Poly::one(), Poly::from_roots(Complex(1.0), {p.z, p.z})));
        fam.den_roots.push_back({p.z, p.z});
        fam.labels.push_back(label("a", i++));
    }
    for (int j = 0; j <= 2 * n - 2; ++j) {
        fam.basis.push_back(RationalFn::from_poly(Poly::monomial(j)));
        fam.den_roots.emplace_back();
        fam.labels.push_back(label("b", j));
    }
    return fam;
}

AnsatzFamily build_ansatz_correction(const PointExt& p, int n) {
    if (p.is_inf()) throw InvalidInput("build_ansatz_correction: point must be finite");
    AnsatzFamily fam;
    fam.kind = AnsatzKind::Correction;
    for (int k = 1; k <= 2 * n; ++k) {
        std::vector<Complex> rep(static_cast<size_t>(2 + k), p.z);
        fam.basis.push_back(RationalFn(Poly::one(), Poly::from_roots(Complex(1.0), rep)));
        fam.den_roots.push_back(rep);
        fam.labels.push_back(label("alpha", k));
    }
    return fam;
}

namespace {

RationalFn alternative_h(const Divisor& poles, Complex c, const Poly& h1) {
    const int n = static_cast<int>(poles.size());
    for (const auto& [p, m] : poles.entries())
        if (!p.is_inf() && std::abs(c - p.z) <= 1e-9 * std::max(1.0, std::abs(c)))
            throw InvalidInput("ansatz: c coincides with a pole");
    if (n == 1) {
        Poly h = h1.is_zero() ? Poly({Complex(0.0), Complex(1.0)}) : h1;
        return RationalFn::from_poly(h);
    }
    std::vector<Complex> num_roots(static_cast<size_t>(2 * n - 2), c);
    std::vector<Complex> den_roots;
    for (const auto& [p, m] : poles.entries()) {
        if (p.is_inf()) continue;
        den_roots.push_back(p.z);
        den_roots.push_back(p.z);
    }
    return RationalFn(Poly::from_roots(Complex(1.0), num_roots), Poly::from_roots(Complex(1.0), den_roots));
}

}  // namespace

AnsatzFamily build_ansatz_alternative(const Divisor& poles, Complex c, const Poly& h1) {
    if (poles.size() == 0) throw InvalidInput("build_ansatz_alternative: empty pole divisor");
    RationalFn h = alternative_h(poles, c, h1);
    const int n = static_cast<int>(poles.size());
    AnsatzFamily fam;
    fam.kind = AnsatzKind::Alternative;
    std::vector<Complex> hroots;
    for (const auto& [p, m] : poles.entries()) {
        if (p.is_inf()) continue;
        hroots.push_back(p.z);
        hroots.push_back(p.z);
    }
    RationalFn hp = h;
    std::vector<Complex> dr;
    for (int i = 1; i <= 2 * n; ++i) {
        dr.insert(dr.end(), hroots.begin(), hroots.end());
        fam.basis.push_back(hp);
        fam.den_roots.push_back(dr);
        fam.labels.push_back(label("a", i));
        if (i < 2 * n) hp = hp * h;
    }
    return fam;
}

AnsatzFamily build_ansatz_simple_ends(const Divisor& poles, const std::vector<Complex>& simple_pts,
                                      Complex c, const Poly& h1) {
    if (poles.size() == 0) throw InvalidInput("build_ansatz_simple_ends: empty pole divisor");
    for (size_t i = 0; i < simple_pts.size(); ++i) {
        for (size_t j = i + 1; j < simple_pts.size(); ++j)
            if (std::abs(simple_pts[i] - simple_pts[j]) <= 1e-9)
                throw InvalidInput("build_ansatz_simple_ends: coincident simple points");
        for (const auto& [p, m] : poles.entries())
            if (!p.is_inf() && std::abs(simple_pts[i] - p.z) <= 1e-9)
                throw InvalidInput("build_ansatz_simple_ends: simple point coincides with a pole");
    }
    if (simple_pts.empty()) return build_ansatz_alternative(poles, c, h1);
    (void)c;
    (void)h1;

    // Partial-fraction family: every element is residue-free by construction,
    // so the exactness constraints on omega hold identically.  Powers
    // (z-p)^{-s}, s >= 2, carry the complete ends; the single (z-q_j)^{-2}
    // term per simple point keeps its pole order at exactly two; the
    // polynomial block provides the pole at infinity when g has one.
    const int m = static_cast<int>(simple_pts.size());
    AnsatzFamily fam;
    fam.kind = AnsatzKind::SimpleEnds;
    int i = 1;
    for (const auto& [p, mult] : poles.entries()) {
        if (p.is_inf()) continue;
        for (int s = 2; s <= 4; ++s) {
            std::vector<Complex> rep(static_cast<size_t>(s), p.z);
            fam.basis.push_back(RationalFn(Poly::one(), Poly::from_roots(Complex(1.0), rep)));
            fam.den_roots.push_back(rep);
            fam.labels.push_back(label("a", i++));
        }
    }
    for (Complex q : simple_pts) {
        fam.basis.push_back(RationalFn(Poly::one(), Poly::from_roots(Complex(1.0), {q, q})));
        fam.den_roots.push_back({q, q});
        fam.labels.push_back(label("a", i++));
    }
    if (poles.multiplicity(PointExt::inf()) > 0) {
        for (int t = 0; t <= m + 1; ++t) {
            fam.basis.push_back(RationalFn::from_poly(Poly::monomial(t)));
            fam.den_roots.emplace_back();
            fam.labels.push_back(label("a", i++));
        }
    }
    return fam;
}

ResidueSystem assemble_residue_system(const RationalFn& g, const AnsatzFamily& family) {
    if (g.is_constant()) throw InvalidInput("assemble_residue_system: g must be nonconstant");
    if (family.basis.empty()) throw InvalidInput("assemble_residue_system: empty ansatz family");
    return assemble_rows(g, family, combined_finite_poles(g, family), moments_g_g2(g));
}

std::vector<Eigen::VectorXcd> nullspace(const ResidueSystem& system, const Tolerances& tol) {
    const Eigen::Index cols = system.matrix.cols();
    std::vector<Eigen::VectorXcd> basis;
    if (system.matrix.rows() == 0) {
        for (Eigen::Index i = 0; i < cols; ++i) {
            Eigen::VectorXcd e = Eigen::VectorXcd::Zero(cols);
            e(i) = Complex(1.0);
            basis.push_back(e);
        }
        return basis;
    }
    // column equilibration: deep pole elements give columns spanning many
    // orders of magnitude, and the kernel of the raw matrix is only accurate
    // to eps * sigma_max in absolute terms
    // columns that are pure quadrature noise must stay zero: scaling them
    // up to O(1) would graft noise directions onto the kernel
    double global_max = std::max(system.matrix.cwiseAbs().maxCoeff(), 1e-300);
    Eigen::VectorXd cs(cols);
    Eigen::MatrixXcd B = system.matrix;
    for (Eigen::Index u = 0; u < cols; ++u) {
        double cmax = system.matrix.col(u).cwiseAbs().maxCoeff();
        if (cmax <= 1e-12 * global_max) {
            cs(u) = 1.0;
            B.col(u).setZero();
        } else {
            cs(u) = cmax;
        }
    }
    B = B * cs.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(B, Eigen::ComputeThinU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double smax = sv.size() > 0 ? sv(0) : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol.tau_rank * smax) ++rank;

    // residual in quad precision: the true residual after unscaling is far
    // below what a double mat-vec can resolve
    auto residual = [&](const Eigen::VectorXcd& v) {
        Eigen::VectorXcd r(system.matrix.rows());
        for (Eigen::Index i = 0; i < system.matrix.rows(); ++i) {
            QComplex acc{};
            for (Eigen::Index u = 0; u < cols; ++u) acc = acc + qc(system.matrix(i, u)) * qc(v(u));
            r(i) = to_complex(acc);
        }
        return r;
    };
    const Eigen::Index k = sv.size();
    for (Eigen::Index i = rank; i < cols; ++i) {
        Eigen::VectorXcd v = cs.cwiseInverse().asDiagonal() * svd.matrixV().col(i);
        v /= v.norm();
        // Newton refinement: unscaling concentrates the vector on the
        // heavily scaled columns, so normalization amplifies the kernel
        // residual by 1/|cs^{-1} w|; a few least-squares corrections
        // restore it to machine level
        for (int it = 0; it < 3; ++it) {
            Eigen::VectorXcd y = svd.matrixU().adjoint() * (-residual(v));
            for (Eigen::Index j = 0; j < k; ++j) y(j) = j < rank ? y(j) / sv(j) : Complex(0.0);
            v += cs.cwiseInverse().asDiagonal() * (svd.matrixV().leftCols(k) * y);
            v /= v.norm();
        }
        basis.push_back(v);
    }
    return basis;
}

namespace {

struct Candidate {
    Eigen::VectorXcd coeffs;
    double score = -1.0;
    int missing = std::numeric_limits<int>::max();
    bool valid = false;
};

// Randomized search in the kernel for a combination maximizing the smallest
// leading Laurent coefficient over required ends, rejecting combinations
// that leave a required pole absent.
template <typename MakeCoeffs, typename Judge>
Candidate search_kernel(int dim, uint64_t seed, MakeCoeffs make, Judge judge) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Candidate best;
    for (int trial = 0; trial < 64; ++trial) {
        Eigen::VectorXcd r(dim);
        for (int i = 0; i < dim; ++i) r(i) = Complex(gauss(rng), gauss(rng));
        Eigen::VectorXcd c = make(r);
        double nrm = c.norm();
        if (nrm <= 0.0) continue;
        c /= nrm;
        auto [missing, score] = judge(c);
        bool better = false;
        if (missing < best.missing) better = true;
        else if (missing == best.missing && score > best.score) better = true;
        if (better) {
            best.coeffs = c;
            best.score = score;
            best.missing = missing;
            best.valid = true;
        }
    }
    return best;
}

}  // namespace

std::pair<RationalFn, SolverReport> solve_complete_ends(const RationalFn& g, const SolverConfig& cfg) {
    if (g.is_constant()) throw InvalidInput("solve_complete_ends: g must be nonconstant");
    if (order_at(g, PointExt::inf()) >= 0)
        throw InvalidInput("solve_complete_ends: g needs a pole at infinity (normalize first)");

    Divisor poles = pole_divisor(g);
    const int n = static_cast<int>(poles.size());
    AnsatzFamily fam = build_ansatz_basic(poles);
    ResidueSystem sys = assemble_residue_system(g, fam);
    std::vector<Eigen::VectorXcd> kernel = nullspace(sys, cfg.tol);
    if (kernel.empty()) throw NumericalFailure("solve_complete_ends: residue system has trivial kernel");

    std::vector<PointExt> ends;
    for (const auto& [p, m] : poles.entries()) ends.push_back(p);
    std::vector<Eigen::MatrixXcd> pp;
    for (const auto& e : ends) pp.push_back(principal_matrix(fam, e));

    Eigen::MatrixXcd K(static_cast<Eigen::Index>(fam.basis.size()), static_cast<Eigen::Index>(kernel.size()));
    for (size_t i = 0; i < kernel.size(); ++i) K.col(static_cast<Eigen::Index>(i)) = kernel[i];

    double pp_scale = 1.0;
    for (const auto& m : pp)
        if (m.size() > 0) pp_scale = std::max(pp_scale, m.cwiseAbs().maxCoeff());

    Candidate best = search_kernel(
        static_cast<int>(kernel.size()), cfg.seed, [&](const Eigen::VectorXcd& r) { return (K * r).eval(); },
        [&](const Eigen::VectorXcd& c) {
            int missing = 0;
            double score = std::numeric_limits<double>::infinity();
            for (size_t e = 0; e < ends.size(); ++e) {
                PoleProbe probe = probe_pole(pp[e], c, pp_scale);
                if (probe.order >= 0) ++missing;
                else score = std::min(score, std::abs(probe.leading));
            }
            return std::make_pair(missing, score);
        });
    if (!best.valid) throw NumericalFailure("solve_complete_ends: no admissible kernel element");

    SolverReport report;
    report.nullspace_dim = static_cast<int>(kernel.size());
    report.stage_nullspace_dims.push_back(static_cast<int>(kernel.size()));
    // accumulated family + coefficients so the final form is assembled over
    // one exact common denominator
    AnsatzFamily all = fam;
    Eigen::VectorXcd allc = best.coeffs;
    RationalFn f = build_combination(all, allc);

    // corrections at finite ends the basic solution left regular
    for (const auto& e : ends) {
        if (form_order_at(f, e) < 0) continue;
        if (e.is_inf())
            throw NumericalFailure("solve_complete_ends: no pole at infinity in any kernel candidate");
        AnsatzFamily corr = build_ansatz_correction(e, n);
        ResidueSystem csys = assemble_residue_system(g, corr);
        std::vector<Eigen::VectorXcd> ck = nullspace(csys, cfg.tol);
        if (ck.empty()) throw NumericalFailure("solve_complete_ends: correction system has trivial kernel");
        report.stage_nullspace_dims.push_back(static_cast<int>(ck.size()));
        Eigen::MatrixXcd CK(static_cast<Eigen::Index>(corr.basis.size()), static_cast<Eigen::Index>(ck.size()));
        for (size_t i = 0; i < ck.size(); ++i) CK.col(static_cast<Eigen::Index>(i)) = ck[i];
        Eigen::MatrixXcd cpp = principal_matrix(corr, e);
        double cscale = cpp.size() > 0 ? std::max(1.0, cpp.cwiseAbs().maxCoeff()) : 1.0;
        Candidate cbest = search_kernel(
            static_cast<int>(ck.size()), cfg.seed + 17, [&](const Eigen::VectorXcd& r) { return (CK * r).eval(); },
            [&](const Eigen::VectorXcd& c) {
                PoleProbe probe = probe_pole(cpp, c, cscale);
                return std::make_pair(probe.order >= 0 ? 1 : 0, std::abs(probe.leading));
            });
        if (!cbest.valid || cbest.missing > 0)
            throw NumericalFailure("solve_complete_ends: correction leaves the end regular");
        all.basis.insert(all.basis.end(), corr.basis.begin(), corr.basis.end());
        all.den_roots.insert(all.den_roots.end(), corr.den_roots.begin(), corr.den_roots.end());
        Eigen::VectorXcd merged(allc.size() + cbest.coeffs.size());
        merged << allc, cbest.coeffs;
        allc = std::move(merged);
        f = build_combination(all, allc);
    }

    report.residual = max_constraint_residual(g, f);
    f = normalize_residual(f, report.residual, cfg.tol.residual);
    if (report.residual > cfg.tol.residual)
        throw NumericalFailure("solve_complete_ends: residue residual above tolerance");

    report.labels = fam.labels;
    report.chosen_coeffs.assign(best.coeffs.data(), best.coeffs.data() + best.coeffs.size());
    RationalFn g2f = g * g * f;
    for (const auto& e : ends) report.end_orders[e] = {form_order_at(f, e), form_order_at(g2f, e)};
    return {f, report};
}

std::pair<RationalFn, SolverReport> solve_simple_ends(const RationalFn& g,
                                                      const std::vector<Complex>& simple_pts,
                                                      const SolverConfig& cfg) {
    if (simple_pts.empty()) return solve_complete_ends(g, cfg);
    if (g.is_constant()) throw InvalidInput("solve_simple_ends: g must be nonconstant");
    if (order_at(g, PointExt::inf()) >= 0)
        throw InvalidInput("solve_simple_ends: g needs a pole at infinity (normalize first)");

    Divisor poles = pole_divisor(g);
    for (Complex q : simple_pts) {
        double ag = std::abs(g.eval(q));
        if (std::abs(ag - 1.0) <= cfg.tol.end_unit_margin)
            throw InvalidInput("solve_simple_ends: prescribed simple end lies on the singular locus");
    }
    Complex c = default_c(poles);
    auto c_clash = [&]() {
        for (Complex q : simple_pts)
            if (std::abs(c - q) < 1e-6) return true;
        return false;
    };
    while (c_clash()) c += Complex(0.5, 0.0);
    Poly h1;
    if (poles.size() == 1) {
        // single pole at infinity: pick a linear h not vanishing at any q
        h1 = Poly({-c, Complex(1.0)});
    }
    AnsatzFamily fam = build_ansatz_simple_ends(poles, simple_pts, c, h1);

    // complex-linear constraints: all three moments at the poles of g,
    // plain and g^2 moments at the q_j
    std::vector<MomentSpec> pole_moms = {{Poly::one(), Poly::one(), Moment::Plain},
                                         {g.num(), g.den(), Moment::G},
                                         {g.num() * g.num(), g.den() * g.den(), Moment::G2}};
    std::vector<MomentSpec> q_moms = {{Poly::one(), Poly::one(), Moment::Plain},
                                      {g.num() * g.num(), g.den() * g.den(), Moment::G2}};
    std::vector<Complex> pole_pts;
    for (const auto& p : finite_poles(g)) add_point(pole_pts, p.z);
    ResidueSystem sys_p = assemble_rows(g, fam, pole_pts, pole_moms);
    ResidueSystem sys_q = assemble_rows(g, fam, simple_pts, q_moms);
    ResidueSystem sys;
    sys.col_labels = fam.labels;
    sys.matrix.resize(sys_p.matrix.rows() + sys_q.matrix.rows(), static_cast<Eigen::Index>(fam.basis.size()));
    sys.matrix << sys_p.matrix, sys_q.matrix;
    sys.row_labels = sys_p.row_labels;
    sys.row_labels.insert(sys.row_labels.end(), sys_q.row_labels.begin(), sys_q.row_labels.end());

    std::vector<Eigen::VectorXcd> kernel = nullspace(sys, cfg.tol);
    if (kernel.empty()) throw NumericalFailure("solve_simple_ends: residue system has trivial kernel");
    const int d = static_cast<int>(kernel.size());
    Eigen::MatrixXcd K(static_cast<Eigen::Index>(fam.basis.size()), d);
    for (int i = 0; i < d; ++i) K.col(i) = kernel[static_cast<size_t>(i)];

    // real-linear stage: Im Res_{q_j}(g omega) = 0 inside the complex kernel
    const int m = static_cast<int>(simple_pts.size());
    Eigen::MatrixXcd L(m, static_cast<Eigen::Index>(fam.basis.size()));
    std::vector<Complex> special = combined_finite_poles(g, fam);
    for (int j = 0; j < m; ++j)
        L.row(j) = residue_row(g.num(), g.den(), fam, simple_pts[static_cast<size_t>(j)], special);
    Eigen::MatrixXcd M = L * K;
    Eigen::MatrixXd A(m, 2 * d);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < d; ++i) {
            A(j, i) = M(j, i).imag();
            A(j, d + i) = M(j, i).real();
        }
    Eigen::MatrixXd X;  // real kernel of A, columns = parameters
    {
        double amax = A.cwiseAbs().maxCoeff();
        if (amax <= 1e-13) {
            X = Eigen::MatrixXd::Identity(2 * d, 2 * d);
        } else {
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
            const auto& sv = svd.singularValues();
            Eigen::Index rank = 0;
            for (Eigen::Index i = 0; i < sv.size(); ++i)
                if (sv(i) > cfg.tol.tau_rank * sv(0)) ++rank;
            X = svd.matrixV().rightCols(2 * d - rank);
        }
    }
    if (X.cols() == 0) throw NumericalFailure("solve_simple_ends: reality constraints admit only zero");

    std::vector<PointExt> ends;
    for (const auto& [p, mm] : poles.entries()) ends.push_back(p);
    for (Complex q : simple_pts) ends.push_back(PointExt::at(q));
    std::vector<Eigen::MatrixXcd> pp;
    for (const auto& e : ends) pp.push_back(principal_matrix(fam, e));
    double pp_scale = 1.0;
    for (const auto& mat : pp)
        if (mat.size() > 0) pp_scale = std::max(pp_scale, mat.cwiseAbs().maxCoeff());

    const size_t n_poles = poles.size();
    Candidate best = search_kernel(
        static_cast<int>(X.cols()), cfg.seed,
        [&](const Eigen::VectorXcd& r) {
            // real combination of real-kernel columns (use the real part of r)
            Eigen::VectorXd x = X * r.real();
            Eigen::VectorXcd beta(d);
            for (int i = 0; i < d; ++i) beta(i) = Complex(x(i), x(d + i));
            return (K * beta).eval();
        },
        [&](const Eigen::VectorXcd& c) {
            int missing = 0;
            double score = std::numeric_limits<double>::infinity();
            for (size_t e = 0; e < ends.size(); ++e) {
                PoleProbe probe = probe_pole(pp[e], c, pp_scale);
                bool ok;
                if (e < n_poles) {
                    ok = probe.order < 0;  // complete end: any pole
                } else {
                    ok = probe.order == -2;  // simple end: double pole exactly
                }
                if (!ok) ++missing;
                else score = std::min(score, std::abs(probe.leading));
            }
            return std::make_pair(missing, score);
        });
    if (!best.valid || best.missing > 0)
        throw NumericalFailure(
            "solve_simple_ends: no kernel element with residue-free double poles at the q_j "
            "(simple ends require zeros or critical points of g)");

    RationalFn f = build_combination(fam, best.coeffs);

    SolverReport report;
    report.nullspace_dim = d;
    report.stage_nullspace_dims = {d, static_cast<int>(X.cols())};
    report.labels = fam.labels;
    report.chosen_coeffs.assign(best.coeffs.data(), best.coeffs.data() + best.coeffs.size());

    // residual: imposed constraints, including reality of Res(g omega) at q_j
    std::vector<Complex> all_pts = pole_pts;
    for (Complex q : simple_pts) add_point(all_pts, q);
    double worst = 0.0;
    for (Complex p : pole_pts) {
        double r = quad_radius(all_pts, p);
        worst = std::max(worst, std::abs(quad_residue(g, 0, f, p, r)));
        worst = std::max(worst, std::abs(quad_residue(g, 1, f, p, r)));
        worst = std::max(worst, std::abs(quad_residue(g, 2, f, p, r)));
    }
    for (Complex q : simple_pts) {
        double r = quad_radius(all_pts, q);
        worst = std::max(worst, std::abs(quad_residue(g, 0, f, q, r)));
        worst = std::max(worst, std::abs(quad_residue(g, 2, f, q, r)));
        worst = std::max(worst, std::abs(quad_residue(g, 1, f, q, r).imag()));
    }
    report.residual = worst;
    f = normalize_residual(f, report.residual, cfg.tol.residual);
    if (report.residual > cfg.tol.residual)
        throw NumericalFailure("solve_simple_ends: residue residual above tolerance");

    RationalFn g2f = g * g * f;
    for (const auto& e : ends) report.end_orders[e] = {form_order_at(f, e), form_order_at(g2f, e)};
    return {f, report};
}

PerturbationResult perturb_to_maxface(const RationalFn& g, const RationalFn& omega, double epsilon,
                                      const SolverConfig& cfg, Complex far_center, double far_radius) {
    if (!(epsilon > 0.0)) throw InvalidInput("perturb_to_maxface: epsilon must be positive");
    if (omega.num().degree() < 1 && form_order_at(omega, PointExt::inf()) <= 0)
        throw InvalidInput("perturb_to_maxface: omega has no zeros; already a maxface");
    if (omega.num().degree() < 1)
        throw InvalidInput("perturb_to_maxface: omega has no finite zeros; already a maxface");

    std::vector<RootCluster> zeros = poly_roots(omega.num(), cfg.tol);
    const int l = static_cast<int>(zeros.size());
    Divisor poles = pole_divisor(g);

    std::vector<Complex> den_roots;
    for (const auto& zc : zeros)
        for (int k = 0; k < 2 * zc.multiplicity; ++k) den_roots.push_back(zc.root);
    Poly D = Poly::from_roots(Complex(1.0), den_roots);

    // Period condition for g~ = g + g0 with the original maximal-map data:
    // at every finite constraint point, Res(g~ omega) must be real and
    // Res(g~^2 omega) must vanish. The original data contributes zero
    // residues, so this reads
    //   Res_p(g0 omega) = 0            at the finite poles of g and omega,
    //   Res_{z_j}(g0 omega) = sigma    (real anchor; keeps a pole at z_j),
    //   2 Res_r(g g0 omega) + Res_r(g0^2 omega) = 0   at every point.
    // The anchored residue is real, so Res(g~ omega) stays real; demanding
    // it to vanish instead would force g0 to be regular at simple zeros.
    std::vector<Complex> pole_pts;
    for (const auto& p : finite_poles(g)) add_point(pole_pts, p.z);
    for (const auto& p : finite_poles(omega)) add_point(pole_pts, p.z);
    std::vector<Complex> zero_pts;
    for (const auto& zc : zeros) zero_pts.push_back(zc.root);
    std::vector<Complex> pts = pole_pts;
    for (Complex z : zero_pts) add_point(pts, z);
    const int npts = static_cast<int>(pts.size());
    const int np = static_cast<int>(pole_pts.size());

    // exactly enough coefficients that the kernel of the linear constraints
    // matches the quadratic constraint count; a larger ansatz would leave
    // free directions that drift into high-degree terms and decouple the
    // measured perturbation size from the anchor scale
    const int N = (np + l) + npts;

    AnsatzFamily fam;
    fam.kind = AnsatzKind::Perturbation;
    for (int u = 1; u <= N; ++u) {
        fam.basis.push_back(RationalFn(Poly::monomial(u), D));
        fam.labels.push_back(label("alpha", u));
    }

    // rows of Res(b_u omega) at the linear-constraint points
    Eigen::MatrixXcd C(np + l, N);
    for (int r = 0; r < np + l; ++r) {
        Complex p = r < np ? pole_pts[static_cast<size_t>(r)] : zero_pts[static_cast<size_t>(r - np)];
        for (int u = 0; u < N; ++u)
            C(r, u) = residue_quotient_at(Poly::monomial(u + 1) * omega.num(), D * omega.den(), PointExt::at(p));
    }
    Eigen::VectorXcd rhs1 = Eigen::VectorXcd::Zero(np + l);
    rhs1.tail(l).setOnes();  // anchors at unit sigma; scaled below

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(C);
    if (cod.rank() < np + l)
        throw NumericalFailure("perturb_to_maxface: anchored linear system is rank-deficient");
    Eigen::VectorXcd alpha1 = cod.solve(rhs1);  // particular solution at sigma = 1

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(C, Eigen::ComputeFullV);
    Eigen::Index rank = 0;
    const auto& sv = svd.singularValues();
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cfg.tol.tau_rank * sv(0)) ++rank;
    Eigen::MatrixXcd K = svd.matrixV().rightCols(N - rank);
    const int d = static_cast<int>(K.cols());
    if (d == 0) throw NumericalFailure("perturb_to_maxface: linear constraints leave no freedom");

    // quadratic data over the monomial basis: Q_r(alpha) = 2 b_r . alpha + alpha^T A_r alpha
    Poly qden = D * D * omega.den();
    std::vector<Eigen::MatrixXcd> Aq(static_cast<size_t>(npts));
    std::vector<Eigen::VectorXcd> Bq(static_cast<size_t>(npts));
    for (int r = 0; r < npts; ++r) {
        PointExt p = PointExt::at(pts[static_cast<size_t>(r)]);
        Eigen::MatrixXcd a(N, N);
        for (int u = 0; u < N; ++u)
            for (int v = u; v < N; ++v) {
                Complex val = residue_quotient_at(Poly::monomial(u + v + 2) * omega.num(), qden, p);
                a(u, v) = val;
                a(v, u) = val;
            }
        Aq[static_cast<size_t>(r)] = a;
        Eigen::VectorXcd b(N);
        for (int u = 0; u < N; ++u)
            b(u) = residue_quotient_at(g.num() * Poly::monomial(u + 1) * omega.num(),
                                       g.den() * D * omega.den(), p);
        Bq[static_cast<size_t>(r)] = b;
    }
    double q_scale = 1.0;
    for (const auto& a : Aq) q_scale = std::max(q_scale, a.cwiseAbs().maxCoeff());
    for (const auto& b : Bq) q_scale = std::max(q_scale, b.cwiseAbs().maxCoeff());

    auto quad_residual = [&](const Eigen::VectorXcd& alpha) {
        Eigen::VectorXcd phi(npts);
        for (int r = 0; r < npts; ++r)
            phi(r) = 2.0 * (Bq[static_cast<size_t>(r)].transpose() * alpha).value() +
                     (alpha.transpose() * Aq[static_cast<size_t>(r)] * alpha).value();
        return phi;
    };

    std::vector<double> Bn(static_cast<size_t>(npts)), An(static_cast<size_t>(npts));
    for (int r = 0; r < npts; ++r) {
        Bn[static_cast<size_t>(r)] = Bq[static_cast<size_t>(r)].cwiseAbs().maxCoeff() * std::sqrt(double(N));
        An[static_cast<size_t>(r)] = Aq[static_cast<size_t>(r)].cwiseAbs().maxCoeff() * N;
    }

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // Relative residual: each equation measured against the natural size of
    // its own terms (rows at different points differ in scale by orders of
    // magnitude once sigma is small).
    auto rel_res = [&](const Eigen::VectorXcd& alpha, double sigma) {
        Eigen::VectorXcd phi = quad_residual(alpha);
        double an = alpha.norm();
        double worst = 0.0;
        for (int r = 0; r < npts; ++r) {
            double scale = 2.0 * Bn[static_cast<size_t>(r)] * an + An[static_cast<size_t>(r)] * an * an + sigma;
            worst = std::max(worst, std::abs(phi(r)) / std::max(scale, 1e-300));
        }
        return worst;
    };

    // Newton in the kernel coordinates at anchor scale sigma, with
    // row-equilibrated least-squares steps; empty on failure.
    auto solve_at = [&](double sigma, const Eigen::VectorXcd& beta_init) -> Eigen::VectorXcd {
        Eigen::VectorXcd beta = beta_init;
        auto alpha_of = [&](const Eigen::VectorXcd& b) { return (sigma * alpha1 + K * b).eval(); };
        double res = rel_res(alpha_of(beta), sigma);
        const double target = 1e-12;
        for (int iter = 0; iter < 100 && res > target; ++iter) {
            Eigen::VectorXcd alpha = alpha_of(beta);
            Eigen::MatrixXcd J(npts, d);
            for (int r = 0; r < npts; ++r)
                J.row(r) = 2.0 * (Bq[static_cast<size_t>(r)] + Aq[static_cast<size_t>(r)] * alpha).transpose() * K;
            Eigen::VectorXcd phi = quad_residual(alpha);
            for (int r = 0; r < npts; ++r) {
                double w = std::max(J.row(r).cwiseAbs().maxCoeff(), 1e-300);
                J.row(r) /= w;
                phi(r) /= w;
            }
            Eigen::VectorXcd delta = J.completeOrthogonalDecomposition().solve(phi);
            double step = 1.0;
            bool improved = false;
            for (int ls = 0; ls < 12; ++ls, step *= 0.5) {
                Eigen::VectorXcd cand = beta - step * delta;
                double cres = rel_res(alpha_of(cand), sigma);
                if (cres < res) {
                    beta = cand;
                    res = cres;
                    improved = true;
                    break;
                }
            }
            if (!improved) break;
        }
        if (res > target) return {};
        return alpha_of(beta);
    };

    auto sup_far = [&](const Eigen::VectorXcd& alpha) {
        Poly pb;
        for (int u = 0; u < N; ++u) pb = pb + alpha(u) * Poly::monomial(u + 1);
        double sup = 0.0;
        for (int k = 0; k < 256; ++k) {
            Complex zk = far_center + std::polar(far_radius, 2.0 * kPi * k / 256.0);
            sup = std::max(sup, std::abs(pb.eval(zk) / D.eval(zk)));
        }
        return sup;
    };

    auto solve_any = [&](double sigma, const Eigen::VectorXcd& beta0) -> Eigen::VectorXcd {
        Eigen::VectorXcd alpha = solve_at(sigma, beta0);
        for (int attempt = 0; attempt < 8 && alpha.size() == 0; ++attempt) {
            Eigen::VectorXcd b(d);
            double amp = 0.5 * std::sqrt(sigma);
            for (int i = 0; i < d; ++i) b(i) = amp * Complex(gauss(rng), gauss(rng));
            alpha = solve_at(sigma, b);
        }
        return alpha;
    };

    // reference solve, then walk sigma (sup|g0| scales like sqrt(sigma))
    // until sup over the far disk lands in [0.4 epsilon, epsilon]
    double sigma = 1.0;
    Eigen::VectorXcd alpha = solve_any(sigma, Eigen::VectorXcd::Zero(d));
    if (alpha.size() == 0)
        throw NumericalFailure("perturb_to_maxface: Newton iteration on the quadratic residue "
                               "constraints failed to converge");
    Eigen::VectorXcd alpha_fin;
    double exponent = 2.0;  // d log sigma / d log sup
    for (int iter = 0; iter < 20; ++iter) {
        double sup = sup_far(alpha);
        if (sup <= 0.0) throw NumericalFailure("perturb_to_maxface: degenerate perturbation");
        if (sup <= epsilon && sup >= 0.4 * epsilon) {
            alpha_fin = alpha;
            break;
        }
        double factor = std::pow(0.7 * epsilon / sup, exponent);
        factor = std::clamp(factor, 1e-4, 1e4);
        double sigma_next = sigma * factor;
        Eigen::VectorXcd beta0 =
            K.adjoint() * (std::sqrt(sigma_next / sigma) * alpha - sigma_next * alpha1);
        Eigen::VectorXcd alpha_next = solve_any(sigma_next, beta0);
        if (alpha_next.size() == 0)
            throw NumericalFailure("perturb_to_maxface: continuation in epsilon failed to converge");
        double sup_next = sup_far(alpha_next);
        if (sup_next > 0.0 && sup > 0.0 && std::abs(std::log(sup_next / sup)) > 1e-6)
            exponent = std::clamp(std::log(sigma_next / sigma) / std::log(sup_next / sup), 0.5, 4.0);
        sigma = sigma_next;
        alpha = alpha_next;
    }
    if (alpha_fin.size() == 0)
        throw NumericalFailure("perturb_to_maxface: could not reach the requested perturbation size");

    Poly Pnum;
    for (int u = 0; u < N; ++u) Pnum = Pnum + alpha_fin(u) * Poly::monomial(u + 1);
    double sigma_fin = sigma;

    RationalFn g0(Pnum, D);
    RationalFn g_tilde = g + g0;

    PerturbationResult result;
    result.g_tilde = g_tilde;
    result.g0 = g0;
    for (const auto& zc : zeros) result.new_ends.push_back(zc.root);

    SolverReport& report = result.report;
    report.nullspace_dim = d;
    report.stage_nullspace_dims = {d};
    report.labels = fam.labels;
    report.chosen_coeffs.assign(alpha_fin.data(), alpha_fin.data() + alpha_fin.size());

    // residuals of the imposed period constraints
    double worst = 0.0;
    for (Complex p : pole_pts)
        worst = std::max(worst, std::abs(residue_quotient_at(Pnum * omega.num(), D * omega.den(), PointExt::at(p))));
    for (Complex z : zero_pts)
        worst = std::max(worst, std::abs(residue_quotient_at(Pnum * omega.num(), D * omega.den(), PointExt::at(z)) -
                                         Complex(sigma_fin)));
    for (Complex p : pts) {
        PointExt pe = PointExt::at(p);
        Complex q = 2.0 * residue_quotient_at(g.num() * Pnum * omega.num(), g.den() * D * omega.den(), pe) +
                    residue_quotient_at(Pnum * Pnum * omega.num(), qden, pe);
        worst = std::max(worst, std::abs(q));
    }
    report.residual = worst;
    if (report.residual > cfg.tol.residual)
        throw NumericalFailure("perturb_to_maxface: residue residual above tolerance");

    RationalFn g2f = g_tilde * g_tilde * omega;
    std::vector<PointExt> ends;
    for (const auto& [p, mm] : poles.entries()) ends.push_back(p);
    for (Complex zq : result.new_ends) ends.push_back(PointExt::at(zq));
    for (const auto& e : ends) {
        double ag = g_tilde.abs_at(e);
        if (std::abs(ag - 1.0) <= cfg.tol.end_unit_margin)
            throw NumericalFailure("perturb_to_maxface: |g_tilde| = 1 at an end");
        report.end_orders[e] = {form_order_at(omega, e), form_order_at(g2f, e)};
    }
    return result;
}

}  // namespace maxface
