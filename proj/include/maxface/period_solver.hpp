#pragma once

#include <Eigen/Dense>

#include "maxface/rational.hpp"

namespace maxface {

enum class AnsatzKind { Basic, Correction, Alternative, SimpleEnds, Perturbation };

// Candidate family: the 1-form is sum c_u basis_u dz (or, for the
// perturbation, the function g0 = sum c_u basis_u).
struct AnsatzFamily {
    std::vector<RationalFn> basis;
    std::vector<std::string> labels;
    // denominator roots per element with repetition (empty for polynomial
    // elements); lets combinations be assembled over an exact common
    // denominator instead of re-reducing at every addition
    std::vector<std::vector<Complex>> den_roots;
    AnsatzKind kind = AnsatzKind::Basic;
};

enum class Moment { G, G2, Plain };

struct ResidueRow {
    PointExt point;
    Moment moment;
};

// Linear residue constraints: one row per (finite point, moment), one
// column per ansatz coefficient. Rows at infinity are implied by the
// total-residue identity and never stored.
struct ResidueSystem {
    Eigen::MatrixXcd matrix;
    std::vector<ResidueRow> row_labels;
    std::vector<std::string> col_labels;
};

struct SolverReport {
    int nullspace_dim = 0;
    std::vector<int> stage_nullspace_dims;
    std::vector<Complex> chosen_coeffs;
    std::vector<std::string> labels;
    // per-end orders of omega and of g^2 omega (form orders)
    std::map<PointExt, std::pair<int, int>, PointExtLess> end_orders;
    double residual = 0.0;
};

struct SolverConfig {
    Tolerances tol;
    uint64_t seed = 1;
};

// f = sum a_i/(z-p_i)^2 + sum b_j z^j, j = 0..2n-2; size 3n-2.
AnsatzFamily build_ansatz_basic(const Divisor& poles);

// Correction at a finite pole: (z-p)^{-(2+k)}, k = 1..2n.
AnsatzFamily build_ansatz_correction(const PointExt& p, int n);

// F = sum a_i h^i, i = 1..2n, with h = (z-c)^{2n-2} / prod (z-p_j)^2.
// For a single pole at infinity, h is the caller-supplied polynomial
// (defaults to z when empty).
AnsatzFamily build_ansatz_alternative(const Divisor& poles, Complex c, const Poly& h1 = Poly());

// Simple-ends ansatz: residue-free partial fractions (z-p)^{-s}, s = 2..4,
// at the finite poles, one (z-q_j)^{-2} per simple point, and a polynomial
// block when the divisor has a pole at infinity.
AnsatzFamily build_ansatz_simple_ends(const Divisor& poles, const std::vector<Complex>& simple_pts,
                                      Complex c, const Poly& h1 = Poly());

// Rows Res_p(g b_u) and Res_p(g^2 b_u) at every finite pole of g or of a
// basis element; identically-zero rows dropped.
ResidueSystem assemble_residue_system(const RationalFn& g, const AnsatzFamily& family);

// Orthonormal kernel basis with relative rank tolerance tau_rank.
std::vector<Eigen::VectorXcd> nullspace(const ResidueSystem& system, const Tolerances& tol = {});

// Proposition-style construction: omega with vanishing residues of g omega
// and g^2 omega, a pole at every pole of g (corrections added where the
// basic solution leaves an end regular).
std::pair<RationalFn, SolverReport> solve_complete_ends(const RationalFn& g, const SolverConfig& cfg = {});

// Adds simple (double-pole, residue-free) ends at the q_j on top of
// complete ends at the poles of g. Each q_j must satisfy |g(q_j)| != 1 and
// must be a zero or a critical point of g; elsewhere a residue-free double
// pole is incompatible with the period condition.
std::pair<RationalFn, SolverReport> solve_simple_ends(const RationalFn& g,
                                                      const std::vector<Complex>& simple_pts,
                                                      const SolverConfig& cfg = {});

struct PerturbationResult {
    RationalFn g_tilde;
    RationalFn g0;
    std::vector<Complex> new_ends;
    SolverReport report;
};

// Perturbs g to g + g0 so that (g_tilde, omega) is maxface data on the
// domain with the zeros of omega punctured. The linear residue rows are
// solved exactly; the quadratic Res(g0^2 omega) constraints by damped
// Newton on the kernel. sup |g0| over the reference disk is scaled to
// epsilon.
PerturbationResult perturb_to_maxface(const RationalFn& g, const RationalFn& omega, double epsilon,
                                      const SolverConfig& cfg = {}, Complex far_center = Complex(3.0, 0.0),
                                      double far_radius = 0.5);

}  // namespace maxface
